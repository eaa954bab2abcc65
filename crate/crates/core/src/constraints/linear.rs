//! Linear arithmetic over the rationals: solved-form equalities, strict and
//! non-strict inequalities decided by Fourier–Motzkin elimination, and
//! disequalities decided exactly against the inequality polyhedron.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, One, Signed, Zero};

use crate::term::{Term, Var};

/// `sum(coeff * var) + constant`, with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Var, BigRational>,
    pub constant: BigRational,
}

impl LinExpr {
    pub fn constant(c: BigRational) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: &Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v.clone(), BigRational::one());
        LinExpr { coeffs, constant: BigRational::zero() }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: &Var) -> Option<&BigRational> {
        self.coeffs.get(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let entry = out.coeffs.entry(v.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.coeffs.remove(v);
            }
        }
        out.constant += &other.constant;
        out
    }

    pub fn scale(&self, k: &BigRational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    /// Replaces `v` by `e`.
    pub fn substitute(&self, v: &Var, e: &LinExpr) -> LinExpr {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                let c = c.clone();
                rest.coeffs.remove(v);
                rest.add(&e.scale(&c))
            }
        }
    }

    /// Reading `self = 0`, returns the expression `v` equals.
    pub fn solve_for(&self, v: &Var) -> LinExpr {
        let a = self.coeffs[v].clone();
        let mut rest = self.clone();
        rest.coeffs.remove(v);
        rest.scale(&(-BigRational::one() / a))
    }

    pub fn eval(&self, value: &impl Fn(&Var) -> BigRational) -> BigRational {
        self.coeffs.iter().fold(self.constant.clone(), |acc, (v, c)| acc + c * value(v))
    }

    /// Builds a surface term, listing variables in `order` first.
    pub fn to_term(&self, order: &[Var]) -> Term {
        let mut vars: Vec<&Var> = self.coeffs.keys().collect();
        vars.sort_by_key(|v| (order.iter().position(|o| o == *v).unwrap_or(usize::MAX), v.id));
        let mut acc: Option<Term> = None;
        let mut push = |magnitude: Term, negative: bool| {
            acc = Some(match acc.take() {
                None if negative => match magnitude {
                    Term::Num(n) => Term::Num(-n),
                    m => Term::Compound("-".into(), vec![m]),
                },
                None => magnitude,
                Some(a) => Term::Compound(if negative { "-" } else { "+" }.into(), vec![a, magnitude]),
            });
        };
        for v in vars {
            let c = &self.coeffs[v];
            let abs = c.abs();
            let magnitude = if abs.is_one() {
                Term::Var(v.clone())
            } else {
                Term::Compound("*".into(), vec![Term::Num(abs), Term::Var(v.clone())])
            };
            push(magnitude, c.is_negative());
        }
        if !self.constant.is_zero() || self.coeffs.is_empty() {
            push(Term::Num(self.constant.abs()), self.constant.is_negative());
        }
        acc.unwrap()
    }
}

/// `expr > 0` when strict, else `expr >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ineq {
    pub expr: LinExpr,
    pub strict: bool,
}

impl Ineq {
    pub fn new(expr: LinExpr, strict: bool) -> Self {
        Ineq { expr, strict }
    }

    /// The complement: not (e > 0) is -e >= 0, not (e >= 0) is -e > 0.
    pub fn negation(&self) -> Ineq {
        Ineq { expr: self.expr.neg(), strict: !self.strict }
    }

    fn constant_holds(&self) -> bool {
        if self.strict {
            self.expr.constant.is_positive()
        } else {
            !self.expr.constant.is_negative()
        }
    }

    // Scales so the first coefficient has magnitude one.
    fn normalized(&self) -> Ineq {
        match self.expr.coeffs.values().next() {
            None => self.clone(),
            Some(c) => Ineq { expr: self.expr.scale(&(BigRational::one() / c.abs())), strict: self.strict },
        }
    }

    pub fn substitute(&self, v: &Var, e: &LinExpr) -> Ineq {
        Ineq { expr: self.expr.substitute(v, e), strict: self.strict }
    }
}

/// Removes `v` from the system by pairing every lower bound with every upper bound.
pub fn eliminate(system: &[Ineq], v: &Var) -> Vec<Ineq> {
    let (mut pos, mut neg, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for i in system {
        match i.expr.coeff(v) {
            Some(c) if c.is_positive() => pos.push(i),
            Some(_) => neg.push(i),
            None => out.push(i.clone()),
        }
    }
    for p in &pos {
        let a = p.expr.coeffs[v].clone();
        for n in &neg {
            let b = -n.expr.coeffs[v].clone();
            let mut expr = p.expr.scale(&b).add(&n.expr.scale(&a));
            expr.coeffs.remove(v);
            out.push(Ineq { expr, strict: p.strict || n.strict });
        }
    }
    simplify(out).unwrap_or_else(|| vec![Ineq::new(LinExpr::constant(-BigRational::one()), false)])
}

/// Drops trivially true constant rows and duplicates; `None` if a constant row is false.
fn simplify(system: Vec<Ineq>) -> Option<Vec<Ineq>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for i in system {
        if i.expr.is_constant() {
            if !i.constant_holds() {
                return None;
            }
            continue;
        }
        let n = i.normalized();
        // a strict row subsumes its non-strict twin
        if n.strict {
            let weak = Ineq { strict: false, ..n.clone() };
            if seen.remove(&weak) {
                out.retain(|x| *x != weak);
            }
        } else if seen.contains(&Ineq { strict: true, ..n.clone() }) {
            continue;
        }
        if seen.insert(n.clone()) {
            out.push(n);
        }
    }
    Some(out)
}

/// Whether the conjunction has a rational solution.
pub fn feasible(system: &[Ineq]) -> bool {
    let Some(mut system) = simplify(system.to_vec()) else { return false };
    loop {
        let vars: BTreeSet<Var> = system.iter().flat_map(|i| i.expr.vars().cloned()).collect();
        // eliminate the variable producing the fewest new rows
        let best = vars.iter().min_by_key(|v| {
            let pos = system.iter().filter(|i| i.expr.coeff(v).is_some_and(|c| c.is_positive())).count();
            let neg = system.iter().filter(|i| i.expr.coeff(v).is_some_and(|c| c.is_negative())).count();
            pos * neg
        });
        let Some(v) = best.cloned() else { return true };
        let next = eliminate(&system, &v);
        match simplify(next) {
            Some(s) => system = s,
            None => return false,
        }
    }
}

/// Whether every point of the (feasible) system satisfies `e = 0`.
fn entails_zero(system: &[Ineq], e: &LinExpr) -> bool {
    let mut above = system.to_vec();
    above.push(Ineq::new(e.clone(), true));
    let mut below = system.to_vec();
    below.push(Ineq::new(e.neg(), true));
    !feasible(&above) && !feasible(&below)
}

/// Conjunction of linear constraints kept in solved form.
#[derive(Clone, Debug, Default)]
pub struct Linear {
    /// `var = expr`; no key occurs in any expression of the store.
    solved: BTreeMap<Var, LinExpr>,
    ineqs: Vec<Ineq>,
    /// `expr != 0`.
    neqs: Vec<LinExpr>,
}

impl Linear {
    pub fn is_empty(&self) -> bool {
        self.solved.is_empty() && self.ineqs.is_empty() && self.neqs.is_empty()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.solved.iter().any(|(k, e)| k == v || e.mentions(v))
            || self.ineqs.iter().any(|i| i.expr.mentions(v))
            || self.neqs.iter().any(|e| e.mentions(v))
    }

    pub fn reduce(&self, e: &LinExpr) -> LinExpr {
        let mut out = e.clone();
        for (v, def) in &self.solved {
            out = out.substitute(v, def);
        }
        out
    }

    pub fn solved(&self) -> &BTreeMap<Var, LinExpr> {
        &self.solved
    }

    pub fn ineqs(&self) -> &[Ineq] {
        &self.ineqs
    }

    pub fn neqs(&self) -> &[LinExpr] {
        &self.neqs
    }

    /// Adds `e = 0`.
    pub fn add_eq(&mut self, e: &LinExpr) -> bool {
        let e = self.reduce(e);
        if e.is_constant() {
            return e.constant.is_zero();
        }
        // pivot on the newest variable so older ones (typically the query's) stay free
        let v = e.vars().max_by_key(|v| v.id).unwrap().clone();
        let def = e.solve_for(&v);
        for d in self.solved.values_mut() {
            *d = d.substitute(&v, &def);
        }
        for i in &mut self.ineqs {
            *i = i.substitute(&v, &def);
        }
        for n in &mut self.neqs {
            *n = n.substitute(&v, &def);
        }
        self.solved.insert(v, def);
        self.consistent()
    }

    /// Adds `e > 0` (strict) or `e >= 0`.
    pub fn add_ineq(&mut self, e: &LinExpr, strict: bool) -> bool {
        let e = self.reduce(e);
        self.ineqs.push(Ineq::new(e, strict));
        self.consistent()
    }

    /// Adds `e != 0`.
    pub fn add_neq(&mut self, e: &LinExpr) -> bool {
        let e = self.reduce(e);
        self.neqs.push(e);
        self.consistent()
    }

    /// Removes and returns variables whose value is now fixed by an equation.
    pub fn take_determined(&mut self) -> Vec<(Var, BigRational)> {
        let fixed: Vec<(Var, BigRational)> = self
            .solved
            .iter()
            .filter(|(_, e)| e.is_constant())
            .map(|(v, e)| (v.clone(), e.constant.clone()))
            .collect();
        for (v, _) in &fixed {
            self.solved.remove(v);
        }
        fixed
    }

    fn consistent(&mut self) -> bool {
        let mut ineqs = Vec::new();
        for i in std::mem::take(&mut self.ineqs) {
            if i.expr.is_constant() {
                if !i.constant_holds() {
                    return false;
                }
            } else {
                ineqs.push(i);
            }
        }
        self.ineqs = simplify(ineqs).unwrap_or_default();
        let mut neqs: Vec<LinExpr> = Vec::new();
        for n in std::mem::take(&mut self.neqs) {
            if n.is_constant() {
                if n.constant.is_zero() {
                    return false;
                }
            } else if !neqs.contains(&n) {
                neqs.push(n);
            }
        }
        self.neqs = neqs;
        if !feasible(&self.ineqs) {
            return false;
        }
        // a convex set avoids finitely many hyperplanes unless it lies inside one of them
        self.neqs.iter().all(|n| !entails_zero(&self.ineqs, n))
    }

    /// Projects the store onto `visible`, eliminating every other variable.
    pub fn project(&self, visible: &[Var]) -> Projection {
        let is_visible = |v: &Var| visible.contains(v);
        let mut eqs: Vec<LinExpr> = self
            .solved
            .iter()
            .map(|(v, e)| LinExpr::var(v).sub(e))
            .collect();
        let mut ineqs = self.ineqs.clone();
        let mut neqs = self.neqs.clone();

        // equations give hidden variables an explicit definition; substitute it away
        while let Some(pos) = eqs.iter().position(|e| e.vars().any(|v| !is_visible(v))) {
            let e = eqs.remove(pos);
            let hidden = e.vars().filter(|v| !is_visible(v)).max_by_key(|v| v.id).unwrap().clone();
            let def = e.solve_for(&hidden);
            for x in &mut eqs {
                *x = x.substitute(&hidden, &def);
            }
            for i in &mut ineqs {
                *i = i.substitute(&hidden, &def);
            }
            for n in &mut neqs {
                *n = n.substitute(&hidden, &def);
            }
        }
        eqs.retain(|e| !e.is_constant());

        let hidden: BTreeSet<Var> =
            ineqs.iter().flat_map(|i| i.expr.vars().cloned()).filter(|v| !is_visible(v)).collect();
        for v in &hidden {
            ineqs = eliminate(&ineqs, v);
        }
        neqs.retain(|n| n.vars().all(is_visible) && !n.is_constant());

        // reduced row echelon form in query order
        let mut solved: Vec<(Var, LinExpr)> = Vec::new();
        for v in visible {
            let Some(pos) = eqs.iter().position(|e| e.mentions(v)) else { continue };
            let e = eqs.remove(pos);
            let def = e.solve_for(v);
            for x in &mut eqs {
                *x = x.substitute(v, &def);
            }
            for (_, d) in &mut solved {
                *d = d.substitute(v, &def);
            }
            for i in &mut ineqs {
                *i = i.substitute(v, &def);
            }
            for n in &mut neqs {
                *n = n.substitute(v, &def);
            }
            solved.push((v.clone(), def));
        }

        let ineqs = simplify(ineqs).unwrap_or_default();
        // drop rows implied by the others
        let mut kept: Vec<Ineq> = ineqs.clone();
        let mut i = 0;
        while i < kept.len() {
            let mut others: Vec<Ineq> = kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect();
            others.push(kept[i].negation());
            if !feasible(&others) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        let mut uniq: Vec<LinExpr> = Vec::new();
        for n in neqs {
            if !n.is_constant() && !uniq.iter().any(|u| *u == n || *u == n.neg()) {
                uniq.push(n);
            }
        }
        Projection { eqs: solved, ineqs: kept, neqs: uniq }
    }
}

/// Constraints over visible variables only.
#[derive(Clone, Debug, Default)]
pub struct Projection {
    pub eqs: Vec<(Var, LinExpr)>,
    pub ineqs: Vec<Ineq>,
    pub neqs: Vec<LinExpr>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn x() -> Var {
        Var::new(1, "X")
    }

    fn y() -> Var {
        Var::new(2, "Y")
    }

    fn lin(terms: &[(i64, &Var)], c: i64) -> LinExpr {
        terms.iter().fold(LinExpr::constant(q(c)), |acc, (k, v)| acc.add(&LinExpr::var(v).scale(&q(*k))))
    }

    #[test]
    fn interval_feasibility() {
        // X > 1, X < 2
        let sys = vec![Ineq::new(lin(&[(1, &x())], -1), true), Ineq::new(lin(&[(-1, &x())], 2), true)];
        assert!(feasible(&sys));
        // X > 1, X =< 1
        let sys = vec![Ineq::new(lin(&[(1, &x())], -1), true), Ineq::new(lin(&[(-1, &x())], 1), false)];
        assert!(!feasible(&sys));
        // X >= 1, X =< 1
        let sys = vec![Ineq::new(lin(&[(1, &x())], -1), false), Ineq::new(lin(&[(-1, &x())], 1), false)];
        assert!(feasible(&sys));
    }

    #[test]
    fn chain_through_two_variables() {
        // X < Y, Y < X is empty
        let sys = vec![
            Ineq::new(lin(&[(1, &y()), (-1, &x())], 0), true),
            Ineq::new(lin(&[(1, &x()), (-1, &y())], 0), true),
        ];
        assert!(!feasible(&sys));
    }

    #[test]
    fn equality_binds_constant() {
        let mut l = Linear::default();
        assert!(l.add_eq(&lin(&[(1, &x()), (1, &y())], -3)));
        assert!(l.add_eq(&lin(&[(1, &x()), (-1, &y())], -1)));
        let mut fixed = l.take_determined();
        fixed.sort();
        assert_eq!(fixed, vec![(x(), q(2)), (y(), q(1))]);
        assert!(l.solved().is_empty());
    }

    #[test]
    fn disequality_inside_point_fails() {
        let mut l = Linear::default();
        assert!(l.add_ineq(&lin(&[(1, &x())], -1), false));
        assert!(l.add_ineq(&lin(&[(-1, &x())], 1), false));
        assert!(!l.add_neq(&lin(&[(1, &x())], -1)));
        let mut l = Linear::default();
        assert!(l.add_ineq(&lin(&[(1, &x())], -1), false));
        assert!(l.add_neq(&lin(&[(1, &x())], -1)));
    }

    #[test]
    fn projection_solves_for_first_visible() {
        let mut l = Linear::default();
        let z = Var::new(3, "Z");
        // Z = X + 1, Y = 2 * Z
        assert!(l.add_eq(&lin(&[(1, &z), (-1, &x())], -1)));
        assert!(l.add_eq(&lin(&[(1, &y()), (-2, &z)], 0)));
        let p = l.project(&[x(), y()]);
        assert_eq!(p.eqs.len(), 1);
        assert_eq!(p.eqs[0].0, x());
        // X = Y/2 - 1
        assert_eq!(p.eqs[0].1, lin(&[(1, &y())], -2).scale(&BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn projection_eliminates_hidden_inequality_vars() {
        let mut l = Linear::default();
        let z = Var::new(3, "Z");
        // X < Z, Z < Y  projects to X < Y
        assert!(l.add_ineq(&lin(&[(1, &z), (-1, &x())], 0), true));
        assert!(l.add_ineq(&lin(&[(1, &y()), (-1, &z)], 0), true));
        let p = l.project(&[x(), y()]);
        assert_eq!(p.ineqs.len(), 1);
        assert!(p.ineqs[0].strict);
        assert!(!p.ineqs[0].expr.mentions(&z));
    }

    #[test]
    fn redundant_bounds_are_dropped() {
        let mut l = Linear::default();
        assert!(l.add_ineq(&lin(&[(1, &x())], -1), true));
        assert!(l.add_ineq(&lin(&[(1, &x())], 0), true));
        let p = l.project(&[x()]);
        assert_eq!(p.ineqs, vec![Ineq::new(lin(&[(1, &x())], -1), true)]);
    }

    #[test]
    fn expression_to_term() {
        let e = lin(&[(1, &x()), (-3, &y())], 2);
        assert_eq!(crate::print::print_term(&e.to_term(&[x(), y()])), "X-3*Y+2");
        let e = lin(&[(-1, &y())], 0);
        assert_eq!(crate::print::print_term(&e.to_term(&[])), "-Y");
        assert_eq!(crate::print::print_term(&LinExpr::constant(q(-4)).to_term(&[])), "-4");
    }
}
