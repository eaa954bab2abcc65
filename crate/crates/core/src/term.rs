//! Terms, literals, goals, rules and programs, plus the substitution
//! machinery shared by every later stage.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use num::{BigInt, BigRational, One, Zero};

pub type VarId = u64;

/// A logic variable. Identity is the id; the name only matters for printing.
#[derive(Clone, Debug)]
pub struct Var {
    pub id: VarId,
    pub name: String,
}

impl Var {
    pub fn new(id: VarId, name: impl Into<String>) -> Self {
        Var { id, name: name.into() }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(String),
    /// Exact rational; `BigRational` keeps it reduced with a positive denominator.
    Num(BigRational),
    /// Arity is always at least one; nullary symbols are `Const`.
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    pub fn int(n: i64) -> Term {
        Term::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Term {
        Term::Num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Builds a compound, collapsing the empty argument list to a constant.
    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        if args.is_empty() {
            Term::Const(functor)
        } else {
            Term::Compound(functor, args)
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Num(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::Const(_) | Term::Num(_) => {}
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn occurs(&self, id: VarId) -> bool {
        match self {
            Term::Var(v) => v.id == id,
            Term::Const(_) | Term::Num(_) => false,
            Term::Compound(_, args) => args.iter().any(|a| a.occurs(id)),
        }
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Term::Num(n) => Some(n),
            _ => None,
        }
    }

    /// True for `+ - * /` compounds, the only functors arithmetic interprets.
    pub fn is_arith(&self) -> bool {
        match self {
            Term::Compound(f, args) => {
                matches!((f.as_str(), args.len()), ("+" | "-" | "*" | "/", 2) | ("-", 1))
            }
            _ => false,
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Const(_) | Term::Num(_) => self.clone(),
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }
}

/// An atom with optional strong negation (`-p(t)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub strong_neg: bool,
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal { strong_neg: false, predicate: predicate.into(), args }
    }

    pub fn negated(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal { strong_neg: true, predicate: predicate.into(), args }
    }

    pub fn key(&self) -> PredKey {
        PredKey { strong_neg: self.strong_neg, name: self.predicate.clone(), arity: self.args.len() }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn is_true(&self) -> bool {
        !self.strong_neg && self.args.is_empty() && self.predicate == "true"
    }

    /// The classical complement: `p(t)` for `-p(t)` and vice versa.
    pub fn complement(&self) -> Literal {
        Literal { strong_neg: !self.strong_neg, ..self.clone() }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        self.args.iter().for_each(|a| a.collect_vars(out))
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Literal {
        Literal {
            strong_neg: self.strong_neg,
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|a| f(a)).collect(),
        }
    }
}

/// Predicate identity: name, arity, and whether it is the strongly negated form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub strong_neg: bool,
    pub name: String,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredKey { strong_neg: false, name: name.into(), arity }
    }

    pub fn complement(&self) -> PredKey {
        PredKey { strong_neg: !self.strong_neg, ..self.clone() }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = if self.strong_neg { "-" } else { "" };
        write!(f, "{}{}/{}", neg, self.name, self.arity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub const ALL: [RelOp; 6] = [RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge];

    pub fn complement(self) -> RelOp {
        match self {
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
            RelOp::Lt => RelOp::Ge,
            RelOp::Ge => RelOp::Lt,
            RelOp::Gt => RelOp::Le,
            RelOp::Le => RelOp::Gt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Ne => "\\=",
            RelOp::Lt => "<",
            RelOp::Le => "=<",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            RelOp::Eq => ord == Ordering::Equal,
            RelOp::Ne => ord != Ordering::Equal,
            RelOp::Lt => ord == Ordering::Less,
            RelOp::Le => ord != Ordering::Greater,
            RelOp::Gt => ord == Ordering::Greater,
            RelOp::Ge => ord != Ordering::Less,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Goal {
    Pos(Literal),
    /// Default negation, `not L`.
    Not(Literal),
    Rel(RelOp, Term, Term),
    /// Only produced by the dualizer and the NMR check.
    Forall(Var, Box<Goal>),
}

impl Goal {
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Goal::Pos(l) | Goal::Not(l) => l.collect_vars(out),
            Goal::Rel(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Goal::Forall(v, g) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
                g.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Goal {
        match self {
            Goal::Pos(l) => Goal::Pos(l.map_terms(f)),
            Goal::Not(l) => Goal::Not(l.map_terms(f)),
            Goal::Rel(op, a, b) => Goal::Rel(*op, f(a), f(b)),
            Goal::Forall(v, g) => {
                let bound = match f(&Term::Var(v.clone())) {
                    Term::Var(w) => w,
                    _ => v.clone(),
                };
                Goal::Forall(bound, Box::new(g.map_terms(f)))
            }
        }
    }

    pub fn contains_forall(&self) -> bool {
        matches!(self, Goal::Forall(..))
    }
}

/// Syntactic negation used by dual construction: swaps `L` and `not L`,
/// and complements relations.
pub fn negate_goal(goal: &Goal) -> Goal {
    match goal {
        Goal::Pos(l) => Goal::Not(l.clone()),
        Goal::Not(l) => Goal::Pos(l.clone()),
        Goal::Rel(op, a, b) => Goal::Rel(op.complement(), a.clone(), b.clone()),
        Goal::Forall(..) => unreachable!("forall goals never occur in rule bodies being dualized"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Lit(Literal),
    /// Distinguished head of a global constraint.
    False,
}

impl Head {
    pub fn literal(&self) -> Option<&Literal> {
        match self {
            Head::Lit(l) => Some(l),
            Head::False => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    User,
    Dual,
    Nmr,
    AbducibleDesugar,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Goal>,
    pub id: usize,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

impl Rule {
    pub fn new(head: Head, body: Vec<Goal>, origin: Origin) -> Self {
        Rule { head, body, id: 0, origin, span: None }
    }

    pub fn is_constraint(&self) -> bool {
        self.head == Head::False
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        if let Head::Lit(l) = &self.head {
            l.collect_vars(&mut out);
        }
        self.body.iter().for_each(|g| g.collect_vars(&mut out));
        out
    }

    pub fn max_var_id(&self) -> VarId {
        self.vars().iter().map(|v| v.id).max().unwrap_or(0)
    }
}

/// A natural-language rendering pattern for one predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub key: PredKey,
    /// Variable name bound at each argument position, if that argument is a variable.
    pub params: Vec<Option<String>>,
    pub pattern: String,
}

#[derive(Clone, Debug)]
pub struct Query {
    pub goals: Vec<Goal>,
    pub span: Option<SourceSpan>,
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub abducibles: BTreeSet<PredKey>,
    pub templates: BTreeMap<PredKey, Template>,
    pub queries: Vec<Query>,
}

impl Program {
    pub fn max_var_id(&self) -> VarId {
        let rules = self.rules.iter().map(Rule::max_var_id);
        let queries = self
            .queries
            .iter()
            .flat_map(|q| q.goals.iter().flat_map(|g| g.vars()).map(|v| v.id));
        rules.chain(queries).max().unwrap_or(0)
    }

    /// Predicates appearing in heads or bodies, in first-appearance order.
    pub fn predicates(&self) -> Vec<PredKey> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |k: PredKey| {
            if seen.insert(k.clone()) {
                out.push(k);
            }
        };
        for key in &self.abducibles {
            push(key.clone());
        }
        for rule in &self.rules {
            if let Head::Lit(l) = &rule.head {
                push(l.key());
            }
            for g in &rule.body {
                if let Goal::Pos(l) | Goal::Not(l) = g {
                    if !l.is_true() {
                        push(l.key());
                    }
                }
            }
        }
        out
    }
}

/// Monotonic source of fresh variable ids for one solver run.
#[derive(Debug)]
pub struct VarGen {
    next: Cell<VarId>,
}

impl VarGen {
    pub fn starting_after(id: VarId) -> Self {
        VarGen { next: Cell::new(id + 1) }
    }

    pub fn fresh(&self, name: impl Into<String>) -> Var {
        let id = self.next.get();
        self.next.set(id + 1);
        Var::new(id, name)
    }

    pub fn peek(&self) -> VarId {
        self.next.get()
    }
}

impl Default for VarGen {
    fn default() -> Self {
        VarGen::starting_after(0)
    }
}

/// Triangular substitution from variable ids to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<VarId, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn bind(&mut self, v: &Var, t: Term) {
        self.map.insert(v.id, t);
    }

    pub fn get(&self, id: VarId) -> Option<&Term> {
        self.map.get(&id)
    }

    pub fn is_bound(&self, id: VarId) -> bool {
        self.map.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Term)> {
        self.map.iter()
    }

    /// Follows variable-to-term links at the top level only.
    pub fn walk<'a>(&'a self, t: &'a Term) -> &'a Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.map.get(&v.id) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur
    }

    /// Fully applies the substitution.
    pub fn apply(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            other => other.clone(),
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        l.map_terms(&mut |t| self.apply(t))
    }

    pub fn apply_goal(&self, g: &Goal) -> Goal {
        g.map_terms(&mut |t| self.apply(t))
    }
}

pub fn apply_substitution(t: &Term, s: &Subst) -> Term {
    s.apply(t)
}

/// Returns a variant of `rule` whose variables are all fresh.
pub fn rename_apart(rule: &Rule, fresh: &VarGen) -> Rule {
    let mut map: HashMap<VarId, Var> = HashMap::new();
    let mut rename = |t: &Term| {
        t.map_vars(&mut |v| {
            Term::Var(map.entry(v.id).or_insert_with(|| fresh.fresh(v.name.clone())).clone())
        })
    };
    let head = match &rule.head {
        Head::Lit(l) => Head::Lit(l.map_terms(&mut rename)),
        Head::False => Head::False,
    };
    let body = rule.body.iter().map(|g| g.map_terms(&mut rename)).collect();
    Rule { head, body, id: rule.id, origin: rule.origin, span: rule.span.clone() }
}

/// Renames a goal list apart, returning the renamed goals and the old→new map.
pub fn rename_goals(goals: &[Goal], fresh: &VarGen) -> (Vec<Goal>, Vec<(Var, Var)>) {
    let mut map: Vec<(Var, Var)> = Vec::new();
    let mut rename = |t: &Term| {
        t.map_vars(&mut |v| {
            if let Some((_, new)) = map.iter().find(|(old, _)| old == v) {
                return Term::Var(new.clone());
            }
            let new = fresh.fresh(v.name.clone());
            map.push((v.clone(), new.clone()));
            Term::Var(new)
        })
    };
    let renamed = goals.iter().map(|g| g.map_terms(&mut rename)).collect();
    (renamed, map)
}

fn variant_terms(a: &Term, b: &Term, fwd: &mut HashMap<VarId, VarId>, back: &mut HashMap<VarId, VarId>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            match (fwd.get(&x.id), back.get(&y.id)) {
                (None, None) => {
                    fwd.insert(x.id, y.id);
                    back.insert(y.id, x.id);
                    true
                }
                (Some(&fy), Some(&bx)) => fy == y.id && bx == x.id,
                _ => false,
            }
        }
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Num(x), Term::Num(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| variant_terms(x, y, fwd, back))
        }
        _ => false,
    }
}

/// True iff a bijective variable renaming maps `a` onto `b`.
pub fn is_variant(a: &Literal, b: &Literal) -> bool {
    if a.strong_neg != b.strong_neg || a.predicate != b.predicate || a.args.len() != b.args.len() {
        return false;
    }
    let (mut fwd, mut back) = (HashMap::new(), HashMap::new());
    a.args.iter().zip(&b.args).all(|(x, y)| variant_terms(x, y, &mut fwd, &mut back))
}

pub fn is_variant_term(a: &Term, b: &Term) -> bool {
    variant_terms(a, b, &mut HashMap::new(), &mut HashMap::new())
}

/// Variant check across whole rules (head and body taken together).
pub fn is_variant_rule(a: &Rule, b: &Rule) -> bool {
    fn encode(rule: &Rule) -> Term {
        let head = match &rule.head {
            Head::Lit(l) => encode_lit("h", l),
            Head::False => Term::constant("$false"),
        };
        let mut parts = vec![head];
        parts.extend(rule.body.iter().map(encode_goal));
        Term::compound("$rule", parts)
    }
    fn encode_lit(tag: &str, l: &Literal) -> Term {
        let neg = if l.strong_neg { "-" } else { "+" };
        let mut args = vec![Term::constant(neg), Term::constant(l.predicate.clone())];
        args.extend(l.args.iter().cloned());
        Term::compound(tag, args)
    }
    fn encode_goal(g: &Goal) -> Term {
        match g {
            Goal::Pos(l) => encode_lit("pos", l),
            Goal::Not(l) => encode_lit("not", l),
            Goal::Rel(op, a, b) => Term::compound("rel", vec![Term::constant(op.symbol()), a.clone(), b.clone()]),
            Goal::Forall(v, g) => Term::compound("forall", vec![Term::Var(v.clone()), encode_goal(g)]),
        }
    }
    is_variant_term(&encode(a), &encode(b))
}

pub fn rational_is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}

pub fn rational_zero() -> BigRational {
    BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: VarId, name: &str) -> Var {
        Var::new(id, name)
    }

    fn lit(p: &str, args: Vec<Term>) -> Literal {
        Literal::new(p, args)
    }

    #[test]
    fn apply_single_binding() {
        let x = v(1, "X");
        let mut s = Subst::new();
        s.bind(&x, Term::constant("tweety"));
        let t = Term::compound("flies", vec![Term::var(&x)]);
        assert_eq!(apply_substitution(&t, &s), Term::compound("flies", vec![Term::constant("tweety")]));
    }

    #[test]
    fn apply_empty_is_identity() {
        let t = Term::compound("f", vec![Term::var(&v(1, "X")), Term::var(&v(2, "Y"))]);
        assert_eq!(apply_substitution(&t, &Subst::new()), t);
    }

    // Independent routine: repeatedly substitute one level until nothing changes.
    fn naive_fixpoint(t: &Term, pairs: &[(VarId, Term)]) -> Term {
        let mut cur = t.clone();
        loop {
            let next = cur.map_vars(&mut |var| {
                pairs
                    .iter()
                    .find(|(id, _)| *id == var.id)
                    .map(|(_, t)| t.clone())
                    .unwrap_or_else(|| Term::Var(var.clone()))
            });
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    #[test]
    fn apply_chained_bindings_reaches_fixpoint() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let fy = Term::compound("f", vec![Term::var(&y)]);
        let mut s = Subst::new();
        s.bind(&x, fy.clone());
        s.bind(&y, Term::constant("a"));
        let t = Term::compound("g", vec![Term::var(&x)]);
        let expected = Term::compound("g", vec![Term::compound("f", vec![Term::constant("a")])]);
        assert_eq!(s.apply(&t), expected);
        assert_eq!(naive_fixpoint(&t, &[(1, fy), (2, Term::constant("a"))]), expected);
    }

    #[test]
    fn rename_keeps_sharing() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let rule = Rule::new(
            Head::Lit(lit("p", vec![Term::var(&x), Term::var(&y), Term::var(&x)])),
            vec![Goal::Pos(lit("q", vec![Term::var(&y)]))],
            Origin::User,
        );
        let gen = VarGen::starting_after(10);
        let renamed = rename_apart(&rule, &gen);
        assert!(is_variant_rule(&rule, &renamed));
        let old: Vec<_> = rule.vars().iter().map(|v| v.id).collect();
        assert!(renamed.vars().iter().all(|v| !old.contains(&v.id)));
        let head = renamed.head.literal().unwrap();
        assert_eq!(head.args[0], head.args[2]);
        assert_ne!(head.args[0], head.args[1]);
    }

    #[test]
    fn rename_ground_fact_unchanged() {
        let rule = Rule::new(Head::Lit(lit("bird", vec![Term::constant("tweety")])), vec![], Origin::User);
        let renamed = rename_apart(&rule, &VarGen::default());
        assert_eq!(renamed.head, rule.head);
    }

    #[test]
    fn variant_examples() {
        let (x, y, a, b) = (v(1, "X"), v(2, "Y"), v(3, "A"), v(4, "B"));
        let pxy = lit("p", vec![Term::var(&x), Term::var(&y)]);
        let pab = lit("p", vec![Term::var(&a), Term::var(&b)]);
        let pxx = lit("p", vec![Term::var(&x), Term::var(&x)]);
        assert!(is_variant(&pxy, &pab));
        assert!(!is_variant(&pxx, &pab));
        assert!(!is_variant(&pab, &pxx));
        assert!(!is_variant(&lit("p", vec![Term::constant("a")]), &lit("p", vec![Term::constant("b")])));
        let pa = lit("p", vec![Term::constant("a")]);
        assert!(!is_variant(&pa, &pa.complement()));
    }

    // Brute force over every map from the variables of `a` into the variables
    // of `b`, keeping only bijections.
    fn brute_variant(a: &Literal, b: &Literal) -> bool {
        if a.key() != b.key() {
            return false;
        }
        let va: Vec<Var> = { let mut o = vec![]; a.collect_vars(&mut o); o };
        let vb: Vec<Var> = { let mut o = vec![]; b.collect_vars(&mut o); o };
        if va.len() != vb.len() {
            return false;
        }
        let n = va.len();
        let total = n.pow(n as u32).max(1);
        (0..total).any(|mut code| {
            let mut image = Vec::new();
            for _ in 0..n {
                image.push(code % n.max(1));
                code /= n.max(1);
            }
            let mut sorted = image.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != n {
                return false;
            }
            let mapped = a.map_terms(&mut |t| {
                t.map_vars(&mut |var| {
                    let i = va.iter().position(|w| w == var).unwrap();
                    Term::Var(vb[image[i]].clone())
                })
            });
            mapped == *b
        })
    }

    #[test]
    fn variant_agrees_with_brute_force_on_small_patterns() {
        let pool = [v(1, "X"), v(2, "Y"), v(3, "Z")];
        let other = [v(11, "A"), v(12, "B"), v(13, "C")];
        let shapes: Vec<Vec<usize>> = vec![
            vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0],
            vec![0, 1, 2], vec![0, 1, 1], vec![2, 1, 0],
        ];
        for sa in &shapes {
            for sb in &shapes {
                let a = lit("p", sa.iter().map(|&i| Term::var(&pool[i])).collect());
                let b = lit("p", sb.iter().map(|&i| Term::var(&other[i])).collect());
                assert_eq!(is_variant(&a, &b), brute_variant(&a, &b), "{:?} vs {:?}", sa, sb);
            }
        }
    }

    #[test]
    fn relop_complement_is_involution() {
        for op in RelOp::ALL {
            assert_eq!(op.complement().complement(), op);
            assert_ne!(op.complement(), op);
        }
        assert_eq!(RelOp::Lt.complement(), RelOp::Ge);
        assert_eq!(RelOp::Eq.complement(), RelOp::Ne);
    }

    #[test]
    fn compound_without_args_is_constant() {
        assert_eq!(Term::compound("a", vec![]), Term::constant("a"));
    }

    #[test]
    fn rationals_are_normalized() {
        assert_eq!(Term::ratio(2, -4), Term::ratio(-1, 2));
        if let Term::Num(r) = Term::ratio(6, -4) {
            assert!(r.denom() > &BigInt::from(0));
        }
    }
}
