//! Surface-syntax printing. Everything printed here reparses to a variant
//! of the original.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use num::{BigRational, One, Signed};

use crate::term::{Goal, Head, Literal, Program, Query, RelOp, Rule, Term, Var, VarId};

/// Assigns stable, distinct print names to variables.
///
/// A variable keeps its source name when that name is still free; clashes get
/// a numeric suffix, and anonymous variables are lettered `A`, `B`, ...
#[derive(Clone, Debug, Default)]
pub struct VarNamer {
    names: HashMap<VarId, String>,
    used: BTreeSet<String>,
    next_letter: usize,
}

impl VarNamer {
    pub fn new() -> Self {
        VarNamer::default()
    }

    /// Pins `v` to `name` (used to show query variables under their own names).
    pub fn assign(&mut self, v: &Var, name: &str) {
        if self.names.contains_key(&v.id) {
            return;
        }
        let name = self.unique(name);
        self.used.insert(name.clone());
        self.names.insert(v.id, name);
    }

    pub fn is_named(&self, v: &Var) -> bool {
        self.names.contains_key(&v.id)
    }

    pub fn name(&mut self, v: &Var) -> String {
        if let Some(n) = self.names.get(&v.id) {
            return n.clone();
        }
        let name = if is_user_var_name(&v.name) {
            self.unique(&v.name)
        } else {
            self.letter()
        };
        self.used.insert(name.clone());
        self.names.insert(v.id, name.clone());
        name
    }

    fn unique(&self, base: &str) -> String {
        if !self.used.contains(base) {
            return base.to_string();
        }
        (1..).map(|i| format!("{}_{}", base, i)).find(|n| !self.used.contains(n)).unwrap()
    }

    fn letter(&mut self) -> String {
        loop {
            let i = self.next_letter;
            self.next_letter += 1;
            let letter = (b'A' + (i % 26) as u8) as char;
            let name = if i < 26 { letter.to_string() } else { format!("{}{}", letter, i / 26) };
            if !self.used.contains(&name) {
                return name;
            }
        }
    }
}

fn is_user_var_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some('_') => name.len() > 1 && chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

/// Identifiers that print bare; everything else is quoted.
pub fn is_plain_atom(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !matches!(name, "not" | "forall")
        }
        _ => false,
    }
}

pub fn quote_atom(name: &str) -> String {
    if is_plain_atom(name) {
        return name.to_string();
    }
    let mut out = String::from("'");
    for c in name.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// Binding strength for infix printing; lower binds tighter.
fn precedence(t: &Term) -> u32 {
    match t {
        Term::Compound(f, args) if args.len() == 2 && (f == "+" || f == "-") => 500,
        Term::Compound(f, args) if args.len() == 2 && (f == "*" || f == "/") => 400,
        // signed and fractional operands are parenthesized inside products
        Term::Compound(f, args) if args.len() == 1 && f == "-" => 450,
        Term::Num(r) if r.is_negative() || !r.denom().is_one() => 450,
        _ => 0,
    }
}

pub struct Printer<'a> {
    pub namer: &'a mut VarNamer,
}

impl<'a> Printer<'a> {
    pub fn new(namer: &'a mut VarNamer) -> Self {
        Printer { namer }
    }

    pub fn term(&mut self, t: &Term) -> String {
        let mut out = String::new();
        self.write_term(&mut out, t);
        out
    }

    fn write_operand(&mut self, out: &mut String, t: &Term, limit: u32) {
        let signed = matches!(t, Term::Num(r) if r.is_negative())
            || matches!(t, Term::Compound(f, a) if f == "-" && a.len() == 1);
        if signed || precedence(t) > limit {
            out.push('(');
            self.write_term(out, t);
            out.push(')');
        } else {
            self.write_term(out, t);
        }
    }

    fn write_term(&mut self, out: &mut String, t: &Term) {
        match t {
            Term::Var(v) => out.push_str(&self.namer.name(v)),
            Term::Const(c) => out.push_str(&quote_atom(c)),
            Term::Num(r) => out.push_str(&format_rational(r)),
            Term::Compound(f, args) if t.is_arith() && args.len() == 2 => {
                let p = precedence(t);
                // left-associative: the right operand must bind strictly tighter
                self.write_operand(out, &args[0], p);
                out.push_str(f);
                self.write_operand(out, &args[1], p - 1);
            }
            Term::Compound(_, args) if t.is_arith() => {
                out.push('-');
                if let Term::Num(_) = &args[0] {
                    // keeps `-(3)` distinct from the literal number -3
                    out.push('(');
                    self.write_term(out, &args[0]);
                    out.push(')');
                } else {
                    self.write_operand(out, &args[0], 199);
                }
            }
            Term::Compound(f, args) => {
                out.push_str(&quote_atom(f));
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.write_term(out, a);
                }
                out.push(')');
            }
        }
    }

    pub fn literal(&mut self, l: &Literal) -> String {
        let mut out = String::new();
        if l.strong_neg {
            out.push('-');
        }
        out.push_str(&quote_atom(&l.predicate));
        if !l.args.is_empty() {
            out.push('(');
            for (i, a) in l.args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.write_term(&mut out, a);
            }
            out.push(')');
        }
        out
    }

    pub fn goal(&mut self, g: &Goal) -> String {
        match g {
            Goal::Pos(l) => self.literal(l),
            Goal::Not(l) => format!("not {}", self.literal(l)),
            Goal::Rel(op, a, b) => format!("{} {} {}", self.term(a), op.symbol(), self.term(b)),
            Goal::Forall(v, g) => {
                let name = self.namer.name(v);
                format!("forall({}, {})", name, self.goal(g))
            }
        }
    }

    pub fn goals(&mut self, gs: &[Goal]) -> String {
        gs.iter().map(|g| self.goal(g)).collect::<Vec<_>>().join(", ")
    }

    pub fn rule(&mut self, r: &Rule) -> String {
        let head = match &r.head {
            Head::Lit(l) => self.literal(l),
            Head::False => String::new(),
        };
        match (&r.head, r.body.is_empty()) {
            (Head::False, _) => format!(":- {}.", self.goals(&r.body)),
            (_, true) => format!("{}.", head),
            (_, false) => format!("{} :- {}.", head, self.goals(&r.body)),
        }
    }
}

pub fn print_term(t: &Term) -> String {
    Printer::new(&mut VarNamer::new()).term(t)
}

pub fn print_literal(l: &Literal) -> String {
    Printer::new(&mut VarNamer::new()).literal(l)
}

pub fn print_goal(g: &Goal) -> String {
    Printer::new(&mut VarNamer::new()).goal(g)
}

pub fn print_rule(r: &Rule) -> String {
    Printer::new(&mut VarNamer::new()).rule(r)
}

pub fn print_query(q: &Query) -> String {
    format!("?- {}.", Printer::new(&mut VarNamer::new()).goals(&q.goals))
}

pub fn print_relation(op: RelOp, a: &Term, b: &Term) -> String {
    print_goal(&Goal::Rel(op, a.clone(), b.clone()))
}

/// Prints a whole program: directives, rules, then queries.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for key in &p.abducibles {
        let neg = if key.strong_neg { "-" } else { "" };
        if key.arity == 0 {
            writeln!(out, "#abducible {}{}.", neg, quote_atom(&key.name)).unwrap();
        } else {
            writeln!(out, "#abducible {}{}/{}.", neg, quote_atom(&key.name), key.arity).unwrap();
        }
    }
    for t in p.templates.values() {
        let args: Vec<String> = t
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| p.clone().unwrap_or_else(|| format!("_{}", i)))
            .collect();
        let neg = if t.key.strong_neg { "-" } else { "" };
        let head = if args.is_empty() {
            format!("{}{}", neg, quote_atom(&t.key.name))
        } else {
            format!("{}{}({})", neg, quote_atom(&t.key.name), args.join(","))
        };
        writeln!(out, "#pred {} :: {}.", head, quote_atom_always(&t.pattern)).unwrap();
    }
    for r in &p.rules {
        writeln!(out, "{}", print_rule(r)).unwrap();
    }
    for q in &p.queries {
        writeln!(out, "{}", print_query(q)).unwrap();
    }
    out
}

fn quote_atom_always(s: &str) -> String {
    let q = quote_atom(s);
    if q.starts_with('\'') {
        q
    } else {
        format!("'{}'", q)
    }
}
