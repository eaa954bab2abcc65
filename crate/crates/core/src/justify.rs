//! Justification trees and their text, HTML and natural-language renderings.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::print::{Printer, VarNamer};
use crate::term::{Goal, Literal, PredKey, RelOp, Template, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeLabel {
    Query(Vec<Goal>),
    Literal { naf: bool, lit: Literal },
    Relation(RelOp, Term, Term),
    Forall(Var, Goal),
    GlobalConstraints,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofKind {
    Query,
    Fact,
    /// Resolution with the rule of this id (user or dual).
    Rule(usize),
    /// Succeeded by an even loop over negation.
    Coinductive,
    /// Already in the model.
    ChsReuse,
    Constraint,
    Forall,
    Builtin,
    Nmr,
}

impl ProofKind {
    pub fn describe(self) -> &'static str {
        match self {
            ProofKind::Query => "query",
            ProofKind::Fact => "fact",
            ProofKind::Rule(_) => "rule",
            ProofKind::Coinductive => "assumed",
            ProofKind::ChsReuse => "proved",
            ProofKind::Constraint => "constraint",
            ProofKind::Forall => "for all",
            ProofKind::Builtin => "builtin",
            ProofKind::Nmr => "global constraints hold",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofNode {
    pub label: NodeLabel,
    pub kind: ProofKind,
    pub children: Vec<ProofNode>,
}

impl ProofNode {
    pub fn new(label: NodeLabel, kind: ProofKind) -> Self {
        ProofNode { label, kind, children: Vec::new() }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ProofNode, usize)) {
        fn go<'a>(n: &'a ProofNode, depth: usize, f: &mut impl FnMut(&'a ProofNode, usize)) {
            f(n, depth);
            for c in &n.children {
                go(c, depth + 1, f);
            }
        }
        go(self, 0, f)
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_, _| n += 1);
        n
    }

    pub fn literals(&self) -> Vec<(bool, &Literal)> {
        let mut out = Vec::new();
        self.walk(&mut |n, _| {
            if let NodeLabel::Literal { naf, lit } = &n.label {
                out.push((*naf, lit));
            }
        });
        out
    }
}

pub fn label_text(label: &NodeLabel, namer: &mut VarNamer) -> String {
    let mut p = Printer::new(namer);
    match label {
        NodeLabel::Query(goals) => format!("?- {}", p.goals(goals)),
        NodeLabel::Literal { naf: true, lit } => format!("not {}", p.literal(lit)),
        NodeLabel::Literal { naf: false, lit } => p.literal(lit),
        NodeLabel::Relation(op, a, b) => p.goal(&Goal::Rel(*op, a.clone(), b.clone())),
        NodeLabel::Forall(v, g) => p.goal(&Goal::Forall(v.clone(), Box::new(g.clone()))),
        NodeLabel::GlobalConstraints => "global constraints".to_string(),
    }
}

fn line_text(node: &ProofNode, namer: &mut VarNamer) -> String {
    format!("{} \u{2190} {}", label_text(&node.label, namer), node.kind.describe())
}

/// Indented outline, two spaces per level. Nodes deeper than `max_depth`
/// are summarized by a count.
pub fn render_text(root: &ProofNode, namer: &mut VarNamer, max_depth: Option<usize>) -> String {
    fn go(n: &ProofNode, depth: usize, max: Option<usize>, namer: &mut VarNamer, out: &mut String) {
        writeln!(out, "{}{}", "  ".repeat(depth), line_text(n, namer)).unwrap();
        if max.is_some_and(|m| depth >= m) {
            let hidden: usize = n.children.iter().map(ProofNode::size).sum();
            if hidden > 0 {
                writeln!(out, "{}\u{2026} (+{} hidden)", "  ".repeat(depth + 1), hidden).unwrap();
            }
            return;
        }
        for c in &n.children {
            go(c, depth + 1, max, namer, out);
        }
    }
    let mut out = String::new();
    go(root, 0, max_depth, namer, &mut out);
    out
}

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Self-contained HTML page with collapsible nodes.
pub fn render_html(root: &ProofNode, namer: &mut VarNamer, title: &str) -> String {
    fn go(n: &ProofNode, namer: &mut VarNamer, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let text = escape_html(&line_text(n, namer));
        if n.children.is_empty() {
            writeln!(out, "{}<div class=\"leaf\">{}</div>", pad, text).unwrap();
        } else {
            writeln!(out, "{}<details open=\"open\"><summary>{}</summary>", pad, text).unwrap();
            for c in &n.children {
                go(c, namer, out, depth + 1);
            }
            writeln!(out, "{}</details>", pad).unwrap();
        }
    }
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\"/>\n");
    writeln!(out, "<title>{}</title>", escape_html(title)).unwrap();
    out.push_str(
        "<style>\nbody { font-family: monospace; }\ndetails, .leaf { margin-left: 1.5em; }\nsummary { cursor: pointer; }\n</style>\n</head>\n<body>\n",
    );
    go(root, namer, &mut out, 0);
    out.push_str("</body>\n</html>\n");
    out
}

/// Fills a `#pred` template for `lit`, or falls back to a generic phrase.
pub fn describe_literal(
    naf: bool,
    lit: &Literal,
    templates: &BTreeMap<PredKey, Template>,
    namer: &mut VarNamer,
) -> String {
    let base = match templates.get(&lit.key()) {
        Some(t) => {
            let mut text = t.pattern.clone();
            for (param, arg) in t.params.iter().zip(&lit.args) {
                if let Some(name) = param {
                    let value = Printer::new(namer).term(arg);
                    text = text.replace(&format!("@({})", name), &value);
                }
            }
            text
        }
        None => format!("'{}' holds", Printer::new(namer).literal(lit)),
    };
    if naf {
        format!("there is no evidence that {}", base)
    } else {
        base
    }
}

fn describe_node(n: &ProofNode, templates: &BTreeMap<PredKey, Template>, namer: &mut VarNamer) -> String {
    match &n.label {
        NodeLabel::Literal { naf, lit } => describe_literal(*naf, lit, templates, namer),
        NodeLabel::Query(_) => "the query holds".to_string(),
        NodeLabel::GlobalConstraints => "the global constraints hold".to_string(),
        other => label_text(other, namer),
    }
}

/// One sentence per internal node: "X because A and B". Leaves get their
/// own sentence only when they stand alone.
pub fn render_nl(root: &ProofNode, templates: &BTreeMap<PredKey, Template>, namer: &mut VarNamer) -> String {
    fn go(n: &ProofNode, t: &BTreeMap<PredKey, Template>, namer: &mut VarNamer, depth: usize, out: &mut String) {
        let head = describe_node(n, t, namer);
        let pad = "  ".repeat(depth);
        if n.children.is_empty() {
            let why = match n.kind {
                ProofKind::Fact => ", as a fact",
                ProofKind::Coinductive => ", by assumption",
                ProofKind::ChsReuse => ", as established above",
                _ => "",
            };
            writeln!(out, "{}{}{}.", pad, head, why).unwrap();
            return;
        }
        let reasons: Vec<String> = n.children.iter().map(|c| describe_node(c, t, namer)).collect();
        writeln!(out, "{}{} because {}.", pad, head, reasons.join(" and ")).unwrap();
        for c in n.children.iter().filter(|c| !c.children.is_empty()) {
            go(c, t, namer, depth + 1, out);
        }
    }
    let mut out = String::new();
    go(root, templates, namer, 0, &mut out);
    out
}
