//! Dual program construction: abducible desugaring, dual rules for
//! constructive negation, and the non-monotonic reasoning (NMR) check
//! that enforces global constraints and odd loops over negation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::print::{print_goal, print_rule, Printer, VarNamer};
use crate::term::{
    negate_goal, rename_apart, Goal, Head, Literal, Origin, PredKey, Program, RelOp, Rule, Template, Term, Var,
    VarGen, VarId,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DualError {
    #[error("abducible {0} must not also be defined by rules")]
    AbducibleHasRules(PredKey),
}

/// A program extended with its dual rules and NMR check.
#[derive(Clone, Debug)]
pub struct DualProgram {
    pub source: Program,
    /// Every rule the engine may resolve against; `rules[i].id == i`.
    pub rules: Vec<Rule>,
    by_head: HashMap<PredKey, Vec<usize>>,
    dual_of: HashMap<PredKey, PredKey>,
    /// Goals proved after each query succeeds.
    pub nmr: Vec<Goal>,
    /// Generated helper predicates; they never enter the model.
    pub transparent: BTreeSet<PredKey>,
    /// Complement predicates introduced for abducibles.
    pub hidden: BTreeSet<PredKey>,
    pub abducibles: BTreeSet<PredKey>,
    pub templates: BTreeMap<PredKey, Template>,
    /// Ids of user rules whose satisfaction the NMR check enforces.
    pub olon_rules: Vec<usize>,
}

impl DualProgram {
    pub fn rules_for(&self, key: &PredKey) -> &[usize] {
        self.by_head.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The predicate whose rules prove `not L` for literals of `key`.
    pub fn dual_key(&self, key: &PredKey) -> Option<&PredKey> {
        self.dual_of.get(key)
    }

    pub fn is_transparent(&self, key: &PredKey) -> bool {
        self.transparent.contains(key)
    }

    /// Whether literals of `key` belong in printed models.
    pub fn is_visible(&self, key: &PredKey) -> bool {
        !self.transparent.contains(key) && !self.hidden.contains(key)
    }

    pub fn max_var_id(&self) -> VarId {
        let rules = self.rules.iter().map(Rule::max_var_id);
        let nmr = self.nmr.iter().flat_map(|g| g.vars()).map(|v| v.id);
        rules.chain(nmr).chain(std::iter::once(self.source.max_var_id())).max().unwrap_or(0)
    }

    pub fn user_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| matches!(r.origin, Origin::User | Origin::AbducibleDesugar))
    }

    /// Surface text of the full transformed program. The NMR check appears as
    /// the body of a rule for a fresh zero-arity predicate.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut section = |title: &str, rules: Vec<&Rule>| {
            if rules.is_empty() {
                return;
            }
            out.push_str(&format!("% {}\n", title));
            for r in rules {
                out.push_str(&print_rule(r));
                out.push('\n');
            }
        };
        section("program", self.rules.iter().filter(|r| r.origin == Origin::User && !r.is_constraint()).collect());
        section("abducibles", self.rules.iter().filter(|r| r.origin == Origin::AbducibleDesugar).collect());
        section("dual rules", self.rules.iter().filter(|r| r.origin == Origin::Dual).collect());
        section("constraint checks", self.rules.iter().filter(|r| r.origin == Origin::Nmr).collect());
        if !self.nmr.is_empty() {
            let mut namer = VarNamer::new();
            let mut p = Printer::new(&mut namer);
            out.push_str(&format!("% global check\n{} :- {}.\n", self.nmr_head(), p.goals(&self.nmr)));
        }
        out
    }

    /// Name used for the NMR rule in dumps; distinct from every predicate.
    pub fn nmr_head(&self) -> String {
        let used: BTreeSet<String> = self.rules.iter().filter_map(|r| r.head.literal()).map(|l| l.predicate.clone()).collect();
        fresh_from(&used, "nmr_check")
    }

    pub fn describe_nmr_goal(&self, i: usize) -> String {
        print_goal(&self.nmr[i])
    }
}

fn fresh_from(used: &BTreeSet<String>, base: &str) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{}_{}", base, i)).find(|n| !used.contains(n)).unwrap()
}

struct Names {
    used: BTreeSet<String>,
}

impl Names {
    fn fresh(&mut self, base: &str) -> String {
        let name = fresh_from(&self.used, base);
        self.used.insert(name.clone());
        name
    }
}

struct Builder {
    names: Names,
    gen: VarGen,
    rules: Vec<Rule>,
    transparent: BTreeSet<PredKey>,
}

impl Builder {
    fn push(&mut self, head: Literal, body: Vec<Goal>, origin: Origin) {
        let id = self.rules.len();
        self.rules.push(Rule { head: Head::Lit(head), body, id, origin, span: None });
    }

    fn aux(&mut self, base: &str, arity: usize) -> String {
        let name = self.names.fresh(base);
        self.transparent.insert(PredKey::new(name.clone(), arity));
        name
    }

    fn fresh_vars(&self, n: usize) -> Vec<Var> {
        (0..n).map(|i| self.gen.fresh(format!("V{}", i + 1))).collect()
    }

    /// Emits `name(H) :- g1, ..., g(t-1), negate(gt)` for every position t.
    fn per_position(&mut self, name: &str, head_args: &[Term], body: &[Goal], origin: Origin) {
        for t in 0..body.len() {
            let mut b: Vec<Goal> = body[..t].to_vec();
            b.push(negate_goal(&body[t]));
            self.push(Literal::new(name, head_args.to_vec()), b, origin);
        }
    }

    /// Rules for the aux predicate `name`, which holds exactly when `rule` cannot fire.
    fn clause_dual(&mut self, rule: &Rule, name: &str) {
        let rule = rename_apart(rule, &self.gen);
        let head = rule.head.literal().expect("constraints have no dual").clone();
        let mut head_vars: Vec<Var> = Vec::new();
        let mut body: Vec<Goal> = Vec::new();
        for arg in &head.args {
            match arg {
                Term::Var(v) if !head_vars.contains(v) => head_vars.push(v.clone()),
                _ => {
                    let v = self.gen.fresh(format!("V{}", head_vars.len() + 1));
                    body.push(Goal::Rel(RelOp::Eq, Term::Var(v.clone()), arg.clone()));
                    head_vars.push(v);
                }
            }
        }
        body.extend(rule.body.iter().cloned());
        let body = eliminate_functional(body, &head_vars);
        let mut locals: Vec<Var> = Vec::new();
        for g in &body {
            for v in g.vars() {
                if !head_vars.contains(&v) && !locals.contains(&v) {
                    locals.push(v);
                }
            }
        }
        let head_args: Vec<Term> = head_vars.iter().map(Term::var).collect();
        if locals.is_empty() {
            self.per_position(name, &head_args, &body, Origin::Dual);
            return;
        }
        let inner_name = self.aux(&format!("{}_body", name), head_args.len() + locals.len());
        let mut inner_args = head_args.clone();
        inner_args.extend(locals.iter().map(Term::var));
        let mut goal = Goal::Pos(Literal::new(inner_name.clone(), inner_args.clone()));
        for v in locals.iter().rev() {
            goal = Goal::Forall(v.clone(), Box::new(goal));
        }
        self.push(Literal::new(name, head_args), vec![goal], Origin::Dual);
        self.per_position(&inner_name, &inner_args, &body, Origin::Dual);
    }

    fn predicate_dual(&mut self, key: &PredKey, dual_name: &str, rule_ids: &[usize]) {
        let vars = self.fresh_vars(key.arity);
        let args: Vec<Term> = vars.iter().map(Term::var).collect();
        if rule_ids.is_empty() {
            self.push(Literal::new(dual_name, args), vec![], Origin::Dual);
            return;
        }
        let mut body = Vec::new();
        let mut clause_names = Vec::new();
        for i in 1..=rule_ids.len() {
            let name = self.aux(&format!("{}_{}", dual_name, i), key.arity);
            body.push(Goal::Pos(Literal::new(name.clone(), args.clone())));
            clause_names.push(name);
        }
        self.push(Literal::new(dual_name, args), body, Origin::Dual);
        for (id, name) in rule_ids.iter().zip(clause_names) {
            let rule = self.rules[*id].clone();
            self.clause_dual(&rule, &name);
        }
    }

    /// Adds the check that `body` is false in the model and returns its goal.
    fn constraint_check(&mut self, body: Vec<Goal>) -> Goal {
        let body = eliminate_functional(body, &[]);
        let mut vars: Vec<Var> = Vec::new();
        for g in &body {
            g.collect_vars(&mut vars);
        }
        let name = self.aux("chk", vars.len());
        let args: Vec<Term> = vars.iter().map(Term::var).collect();
        self.per_position(&name, &args, &body, Origin::Nmr);
        let mut goal = Goal::Pos(Literal::new(name, args));
        for v in vars.iter().rev() {
            goal = Goal::Forall(v.clone(), Box::new(goal));
        }
        goal
    }
}

/// Drops equations `Y = e` for a local `Y` not occurring in `e`, substituting
/// `e` for `Y` in the remaining goals.
fn eliminate_functional(mut body: Vec<Goal>, keep: &[Var]) -> Vec<Goal> {
    loop {
        let found = body.iter().enumerate().find_map(|(i, g)| match g {
            Goal::Rel(RelOp::Eq, Term::Var(y), e) | Goal::Rel(RelOp::Eq, e, Term::Var(y))
                if !keep.contains(y) && !e.occurs(y.id) =>
            {
                Some((i, y.clone(), e.clone()))
            }
            _ => None,
        });
        let Some((i, y, e)) = found else { return body };
        body.remove(i);
        body = body
            .iter()
            .map(|g| g.map_terms(&mut |t| t.map_vars(&mut |v| if *v == y { e.clone() } else { Term::Var(v.clone()) })))
            .collect();
    }
}

fn goal_preds(g: &Goal, out: &mut Vec<(PredKey, bool)>) {
    match g {
        Goal::Pos(l) if !l.is_true() => out.push((l.key(), false)),
        Goal::Not(l) if !l.is_true() => out.push((l.key(), true)),
        Goal::Forall(_, g) => goal_preds(g, out),
        _ => {}
    }
}

/// Rules `h :- B` such that some body predicate reaches `h` through an odd
/// number of negations (counting the body occurrence itself).
pub fn odd_loop_rules(rules: &[Rule]) -> Vec<usize> {
    let mut edges: HashMap<PredKey, Vec<(PredKey, bool)>> = HashMap::new();
    for r in rules {
        if let Head::Lit(h) = &r.head {
            let mut out = Vec::new();
            r.body.iter().for_each(|g| goal_preds(g, &mut out));
            edges.entry(h.key()).or_default().extend(out);
        }
    }
    let mut reach_cache: HashMap<PredKey, BTreeSet<(PredKey, bool)>> = HashMap::new();
    let mut reach = |start: &PredKey| -> BTreeSet<(PredKey, bool)> {
        if let Some(r) = reach_cache.get(start) {
            return r.clone();
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert((start.clone(), false));
        queue.push_back((start.clone(), false));
        while let Some((p, parity)) = queue.pop_front() {
            for (q, neg) in edges.get(&p).map(Vec::as_slice).unwrap_or(&[]) {
                let next = (q.clone(), parity ^ neg);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        reach_cache.insert(start.clone(), seen.clone());
        seen
    };
    let mut out = Vec::new();
    for r in rules {
        let Head::Lit(h) = &r.head else { continue };
        let mut body = Vec::new();
        r.body.iter().for_each(|g| goal_preds(g, &mut body));
        if body.iter().any(|(q, neg)| reach(q).contains(&(h.key(), !neg))) {
            out.push(r.id);
        }
    }
    out
}

pub fn dualize(program: &Program) -> Result<DualProgram, DualError> {
    let mut used: BTreeSet<String> = program.predicates().into_iter().map(|k| k.name).collect();
    for q in &program.queries {
        let mut out = Vec::new();
        q.goals.iter().for_each(|g| goal_preds(g, &mut out));
        used.extend(out.into_iter().map(|(k, _)| k.name));
    }
    for r in &program.rules {
        if let Head::Lit(l) = &r.head {
            if program.abducibles.contains(&l.key()) {
                return Err(DualError::AbducibleHasRules(l.key()));
            }
        }
    }
    let mut b = Builder {
        names: Names { used },
        gen: VarGen::starting_after(program.max_var_id()),
        rules: Vec::new(),
        transparent: BTreeSet::new(),
    };
    for r in &program.rules {
        let id = b.rules.len();
        b.rules.push(Rule { id, ..r.clone() });
    }

    let mut hidden = BTreeSet::new();
    for key in &program.abducibles {
        let base = if key.strong_neg { format!("neg_neg_{}", key.name) } else { format!("neg_{}", key.name) };
        let neg_name = b.names.fresh(&base);
        let args: Vec<Term> = b.fresh_vars(key.arity).iter().map(Term::var).collect();
        let lit = Literal { strong_neg: key.strong_neg, predicate: key.name.clone(), args: args.clone() };
        let neg = Literal::new(neg_name.clone(), args);
        b.push(lit.clone(), vec![Goal::Not(neg.clone())], Origin::AbducibleDesugar);
        b.push(neg, vec![Goal::Not(lit)], Origin::AbducibleDesugar);
        hidden.insert(PredKey::new(neg_name, key.arity));
    }

    // every predicate that can be called, in first-appearance order
    let mut keys: Vec<PredKey> = Vec::new();
    let add_key = |k: PredKey, keys: &mut Vec<PredKey>| {
        if !keys.contains(&k) {
            keys.push(k);
        }
    };
    for r in &b.rules {
        if let Head::Lit(l) = &r.head {
            add_key(l.key(), &mut keys);
        }
        let mut out = Vec::new();
        r.body.iter().for_each(|g| goal_preds(g, &mut out));
        out.into_iter().for_each(|(k, _)| add_key(k, &mut keys));
    }
    for q in &program.queries {
        let mut out = Vec::new();
        q.goals.iter().for_each(|g| goal_preds(g, &mut out));
        out.into_iter().for_each(|(k, _)| add_key(k, &mut keys));
    }

    let user_rule_count = b.rules.len();
    let mut heads: HashMap<PredKey, Vec<usize>> = HashMap::new();
    for r in &b.rules {
        if let Head::Lit(l) = &r.head {
            heads.entry(l.key()).or_default().push(r.id);
        }
    }

    let mut dual_of = HashMap::new();
    for key in &keys {
        let base = if key.strong_neg { format!("not_neg_{}", key.name) } else { format!("not_{}", key.name) };
        let dual_name = b.aux(&base, key.arity);
        dual_of.insert(key.clone(), PredKey::new(dual_name.clone(), key.arity));
        let ids = heads.get(key).cloned().unwrap_or_default();
        b.predicate_dual(key, &dual_name, &ids);
    }

    let user_rules: Vec<Rule> = b.rules[..user_rule_count].to_vec();
    let mut nmr = Vec::new();
    for r in user_rules.iter().filter(|r| r.is_constraint()) {
        let body = rename_apart(r, &b.gen).body;
        nmr.push(b.constraint_check(body));
    }
    let olon_rules = odd_loop_rules(&user_rules);
    for id in &olon_rules {
        let r = rename_apart(&user_rules[*id], &b.gen);
        let mut body = r.body.clone();
        body.push(Goal::Not(r.head.literal().unwrap().clone()));
        nmr.push(b.constraint_check(body));
    }
    for key in keys.iter().filter(|k| !k.strong_neg && keys.contains(&k.complement())) {
        let args: Vec<Term> = b.fresh_vars(key.arity).iter().map(Term::var).collect();
        let pos = Literal::new(key.name.clone(), args.clone());
        nmr.push(b.constraint_check(vec![Goal::Pos(pos.clone()), Goal::Pos(pos.complement())]));
    }

    let mut by_head: HashMap<PredKey, Vec<usize>> = HashMap::new();
    for r in &b.rules {
        if let Head::Lit(l) = &r.head {
            by_head.entry(l.key()).or_default().push(r.id);
        }
    }
    Ok(DualProgram {
        source: program.clone(),
        rules: b.rules,
        by_head,
        dual_of,
        nmr,
        transparent: b.transparent,
        hidden,
        abducibles: program.abducibles.clone(),
        templates: program.templates.clone(),
        olon_rules,
    })
}
