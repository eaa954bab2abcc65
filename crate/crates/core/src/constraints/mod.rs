//! The constraint store carried by each proof state: a triangular
//! substitution, pending Herbrand disequalities, and a linear store.

pub mod linear;

use num::{BigRational, Zero};
use thiserror::Error;

use crate::print::print_term;
use crate::term::{Literal, RelOp, Subst, Term, Var};
use linear::{LinExpr, Linear};

pub use linear::{Ineq, Projection};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("nonlinear constraint: {0}")]
    Nonlinear(String),
}

type CResult<T> = Result<T, ConstraintError>;

/// One printed constraint of an answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub lhs: Term,
    pub op: RelOp,
    pub rhs: Term,
}

/// What a `forall` check finds for its variable after the body succeeded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForallStatus {
    /// The body only succeeded for a particular value.
    Bound,
    /// The variable entered the linear store.
    Linear,
    /// Disequalities that are not of the form `V \= ground`.
    Unsupported,
    /// Free except for these excluded ground values.
    Free(Vec<Term>),
}

/// Conjunction of all constraints of one branch. Cheap enough to clone at
/// every choicepoint. After any operation returns `Ok(false)` the store is
/// inconsistent and must be discarded.
#[derive(Clone, Debug, Default)]
pub struct Store {
    subst: Subst,
    diseqs: Vec<(Term, Term)>,
    linear: Linear,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn subst(&self) -> &Subst {
        &self.subst
    }

    pub fn linear(&self) -> &Linear {
        &self.linear
    }

    pub fn resolve(&self, t: &Term) -> Term {
        self.subst.apply(t)
    }

    pub fn resolve_literal(&self, l: &Literal) -> Literal {
        self.subst.apply_literal(l)
    }

    pub fn is_numeric(&self, v: &Var) -> bool {
        self.linear.mentions(v)
    }

    fn numericish(&self, t: &Term) -> bool {
        match t {
            Term::Num(_) => true,
            Term::Var(v) => self.is_numeric(v),
            t => t.is_arith(),
        }
    }

    pub fn unify(&mut self, a: &Term, b: &Term) -> CResult<bool> {
        Ok(self.unify_terms(a, b)? && self.recheck()?)
    }

    pub fn unify_literals(&mut self, a: &Literal, b: &Literal) -> CResult<bool> {
        if a.key() != b.key() {
            return Ok(false);
        }
        for (x, y) in a.args.iter().zip(&b.args) {
            if !self.unify_terms(x, y)? {
                return Ok(false);
            }
        }
        self.recheck()
    }

    fn unify_terms(&mut self, a: &Term, b: &Term) -> CResult<bool> {
        let a = self.subst.walk(a).clone();
        let b = self.subst.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => Ok(true),
            (Term::Var(x), Term::Var(y)) => {
                if self.is_numeric(x) || self.is_numeric(y) {
                    return self.linear_rel(RelOp::Eq, &a, &b);
                }
                // newer variables point at older ones
                if x.id > y.id {
                    self.subst.bind(x, b.clone());
                } else {
                    self.subst.bind(y, a.clone());
                }
                Ok(true)
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.is_arith() {
                    return self.linear_rel(RelOp::Eq, &a, &b);
                }
                if self.is_numeric(x) {
                    return match t {
                        Term::Num(_) => self.linear_rel(RelOp::Eq, &a, &b),
                        _ => Ok(false),
                    };
                }
                if self.subst.apply(t).occurs(x.id) {
                    return Ok(false);
                }
                self.subst.bind(x, t.clone());
                Ok(true)
            }
            (Term::Num(p), Term::Num(q)) => Ok(p == q),
            _ if a.is_arith() || b.is_arith() => self.linear_rel(RelOp::Eq, &a, &b),
            (Term::Const(p), Term::Const(q)) => Ok(p == q),
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Ok(false);
                }
                for (x, y) in xs.iter().zip(ys) {
                    if !self.unify_terms(x, y)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    /// Posts `a op b`.
    pub fn add_relation(&mut self, op: RelOp, a: &Term, b: &Term) -> CResult<bool> {
        match op {
            RelOp::Eq => self.unify(a, b),
            RelOp::Ne => self.add_diseq(a, b),
            _ => Ok(self.linear_rel(op, a, b)? && self.recheck()?),
        }
    }

    fn add_diseq(&mut self, a: &Term, b: &Term) -> CResult<bool> {
        let a = self.resolve(a);
        let b = self.resolve(b);
        let arith = a.is_arith() || b.is_arith();
        let numeric = self.numericish(&a)
            && self.numericish(&b)
            && (matches!(a, Term::Var(_)) || matches!(b, Term::Var(_)));
        if arith || numeric {
            return match (self.linearize(&a)?, self.linearize(&b)?) {
                (Some(x), Some(y)) => Ok(self.linear.add_neq(&x.sub(&y)) && self.absorb_determined() && self.recheck()?),
                // a number never equals a symbol
                _ => Ok(true),
            };
        }
        self.diseqs.push((a, b));
        self.recheck()
    }

    fn linear_rel(&mut self, op: RelOp, a: &Term, b: &Term) -> CResult<bool> {
        let (Some(x), Some(y)) = (self.linearize(a)?, self.linearize(b)?) else {
            return Ok(false);
        };
        let e = x.sub(&y);
        let ok = match op {
            RelOp::Eq => self.linear.add_eq(&e),
            RelOp::Ne => self.linear.add_neq(&e),
            RelOp::Lt => self.linear.add_ineq(&e.neg(), true),
            RelOp::Le => self.linear.add_ineq(&e.neg(), false),
            RelOp::Gt => self.linear.add_ineq(&e, true),
            RelOp::Ge => self.linear.add_ineq(&e, false),
        };
        Ok(ok && self.absorb_determined())
    }

    // Variables fixed by the linear store become ordinary bindings.
    fn absorb_determined(&mut self) -> bool {
        for (v, value) in self.linear.take_determined() {
            self.subst.bind(&v, Term::Num(value));
        }
        true
    }

    /// Resolves `t` and rewrites its arithmetic subterms into normal form.
    pub fn simplify(&self, t: &Term) -> Term {
        let t = self.resolve(t);
        if t.is_arith() {
            if let Ok(Some(e)) = self.linearize(&t) {
                return e.to_term(&[]);
            }
        }
        match t {
            Term::Compound(f, args) => Term::Compound(f, args.iter().map(|a| self.simplify(a)).collect()),
            other => other,
        }
    }

    /// Reads a term as a linear expression. `None` means it is not numeric at all.
    pub fn linearize(&self, t: &Term) -> CResult<Option<LinExpr>> {
        let t = self.resolve(t);
        Ok(self.linearize_resolved(&t)?.map(|e| self.linear.reduce(&e)))
    }

    fn linearize_resolved(&self, t: &Term) -> CResult<Option<LinExpr>> {
        match t {
            Term::Num(n) => Ok(Some(LinExpr::constant(n.clone()))),
            Term::Var(v) => Ok(Some(LinExpr::var(v))),
            Term::Compound(f, args) if t.is_arith() => {
                let mut parts = Vec::with_capacity(args.len());
                for a in args {
                    match self.linearize_resolved(a)? {
                        Some(e) => parts.push(self.linear.reduce(&e)),
                        None => return Ok(None),
                    }
                }
                match (f.as_str(), parts.as_slice()) {
                    ("-", [x]) => Ok(Some(x.neg())),
                    ("+", [x, y]) => Ok(Some(x.add(y))),
                    ("-", [x, y]) => Ok(Some(x.sub(y))),
                    ("*", [x, y]) => {
                        if x.is_constant() {
                            Ok(Some(y.scale(&x.constant)))
                        } else if y.is_constant() {
                            Ok(Some(x.scale(&y.constant)))
                        } else {
                            Err(ConstraintError::Nonlinear(print_term(t)))
                        }
                    }
                    ("/", [x, y]) => {
                        if !y.is_constant() {
                            Err(ConstraintError::Nonlinear(print_term(t)))
                        } else if y.constant.is_zero() {
                            Ok(None)
                        } else {
                            Ok(Some(x.scale(&(BigRational::from_integer(1.into()) / &y.constant))))
                        }
                    }
                    _ => unreachable!(),
                }
            }
            _ => Ok(None),
        }
    }

    // Re-examines pending disequalities against the current bindings.
    fn recheck(&mut self) -> CResult<bool> {
        loop {
            let mut changed = false;
            let mut kept = Vec::new();
            for (s, t) in std::mem::take(&mut self.diseqs) {
                let s = self.resolve(&s);
                let t = self.resolve(&t);
                match herbrand_mgu(&s, &t) {
                    None => {}
                    Some(m) if m.is_empty() => return Ok(false),
                    Some(m) if m.len() == 1 => {
                        let (x, u) = m.into_iter().next().unwrap();
                        let xt = Term::Var(x.clone());
                        if !self.is_numeric(&x) || matches!(u, Term::Var(_)) && !self.numericish(&u) {
                            push_unique(&mut kept, (xt, u));
                        } else if self.numericish(&u) {
                            // both sides live in the linear store now
                            let (Some(a), Some(b)) = (self.linearize(&xt)?, self.linearize(&u)?) else {
                                continue;
                            };
                            if !self.linear.add_neq(&a.sub(&b)) {
                                return Ok(false);
                            }
                            self.absorb_determined();
                            changed = true;
                        }
                        // otherwise a numeric variable against a symbol: always different
                    }
                    Some(_) => push_unique(&mut kept, (s, t)),
                }
            }
            self.diseqs = kept;
            if !changed {
                return Ok(true);
            }
        }
    }

    /// Pending disequalities, fully resolved.
    pub fn disequalities(&self) -> Vec<(Term, Term)> {
        self.diseqs.iter().map(|(s, t)| (self.resolve(s), self.resolve(t))).collect()
    }

    /// Terms `v` is required to differ from, when those are all simple `v \= t` forms.
    pub fn excluded_values(&self, v: &Var) -> Vec<Term> {
        self.disequalities()
            .into_iter()
            .filter_map(|(s, t)| match s {
                Term::Var(x) if x == *v => Some(t),
                _ => None,
            })
            .collect()
    }

    pub fn forall_status(&self, v: &Var) -> ForallStatus {
        if !matches!(self.subst.walk(&Term::Var(v.clone())), Term::Var(x) if x == v) {
            return ForallStatus::Bound;
        }
        if self.is_numeric(v) {
            return ForallStatus::Linear;
        }
        let mut excluded = Vec::new();
        for (s, t) in self.disequalities() {
            if !s.occurs(v.id) && !t.occurs(v.id) {
                continue;
            }
            match (&s, &t) {
                (Term::Var(x), u) if x == v && u.is_ground() => excluded.push(u.clone()),
                _ => return ForallStatus::Unsupported,
            }
        }
        excluded.dedup();
        ForallStatus::Free(excluded)
    }

    /// Constraints restricted to `visible` variables, in a printable form.
    pub fn residuals(&self, visible: &[Var]) -> Vec<Residual> {
        let mut out = Vec::new();
        let proj = self.linear.project(visible);
        for (v, e) in &proj.eqs {
            out.push(Residual { lhs: Term::Var(v.clone()), op: RelOp::Eq, rhs: e.to_term(visible) });
        }
        for i in &proj.ineqs {
            let (lead, rhs, flip) = lead_form(&i.expr, visible);
            let op = match (i.strict, flip) {
                (true, false) => RelOp::Gt,
                (true, true) => RelOp::Lt,
                (false, false) => RelOp::Ge,
                (false, true) => RelOp::Le,
            };
            out.push(Residual { lhs: Term::Var(lead), op, rhs });
        }
        for n in &proj.neqs {
            let (lead, rhs, _) = lead_form(n, visible);
            out.push(Residual { lhs: Term::Var(lead), op: RelOp::Ne, rhs });
        }
        for (s, t) in self.disequalities() {
            if s.vars().iter().chain(t.vars().iter()).all(|v| visible.contains(v)) {
                let (lhs, rhs) = if !matches!(s, Term::Var(_)) && matches!(t, Term::Var(_)) { (t, s) } else { (s, t) };
                let r = Residual { lhs, op: RelOp::Ne, rhs };
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out
    }
}

// Rewrites `e (op) 0` as `lead (op') rhs`; the flag says the relation flipped.
fn lead_form(e: &LinExpr, order: &[Var]) -> (Var, Term, bool) {
    let lead = e
        .vars()
        .min_by_key(|v| (order.iter().position(|o| o == *v).unwrap_or(usize::MAX), v.id))
        .unwrap()
        .clone();
    let a = e.coeff(&lead).unwrap().clone();
    let rhs = e.solve_for(&lead);
    (lead, rhs.to_term(order), a < BigRational::zero())
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// Syntactic most general unifier of two resolved terms, as a list of
/// bindings; `None` when they do not unify.
pub fn herbrand_mgu(a: &Term, b: &Term) -> Option<Vec<(Var, Term)>> {
    fn go(s: &mut Subst, a: &Term, b: &Term) -> bool {
        let a = s.walk(a).clone();
        let b = s.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if s.apply(t).occurs(x.id) {
                    return false;
                }
                s.bind(x, t.clone());
                true
            }
            (Term::Const(p), Term::Const(q)) => p == q,
            (Term::Num(p), Term::Num(q)) => p == q,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(s, x, y))
            }
            _ => false,
        }
    }
    let mut s = Subst::new();
    if !go(&mut s, a, b) {
        return None;
    }
    let bound: Vec<Var> = {
        let mut vs = a.vars();
        for v in b.vars() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        vs
    };
    Some(
        bound
            .into_iter()
            .filter(|v| s.is_bound(v.id))
            .map(|v| {
                let t = s.apply(&Term::Var(v.clone()));
                (v, t)
            })
            .collect(),
    )
}
