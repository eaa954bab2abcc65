//! Reference semantics for the function-free fragment: a naive grounder and a
//! brute-force stable model enumerator based on the Gelfond–Lifschitz reduct.
//! It shares no code with the dualizer or the engine.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::engine::Answer;
use crate::print::print_term;
use crate::term::{Goal, Head, Literal, Program, RelOp, Term, Var};

/// Models are enumerated over at most this many undetermined atoms.
pub const MAX_FREE_ATOMS: usize = 24;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("cannot ground `{0}`: only constants and numbers are supported")]
    Ungroundable(String),
    #[error("{0} undetermined atoms exceed the enumeration limit of {MAX_FREE_ATOMS}")]
    TooLarge(usize),
}

/// A ground rule over atom indices; `head == None` is a constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: Option<usize>,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    pub atoms: Vec<Literal>,
    /// Atoms that exist only to encode abducible choice.
    pub hidden: BTreeSet<usize>,
    pub rules: Vec<GroundRule>,
    index: HashMap<Literal, usize>,
}

impl GroundProgram {
    fn atom(&mut self, l: Literal) -> usize {
        if let Some(&i) = self.index.get(&l) {
            return i;
        }
        let i = self.atoms.len();
        self.atoms.push(l.clone());
        self.index.insert(l, i);
        i
    }

    pub fn lookup(&self, l: &Literal) -> Option<usize> {
        self.index.get(l).copied()
    }
}

fn check_term(t: &Term) -> Result<(), OracleError> {
    match t {
        Term::Var(_) | Term::Const(_) | Term::Num(_) => Ok(()),
        Term::Compound(..) => Err(OracleError::Ungroundable(print_term(t))),
    }
}

fn collect_constants(t: &Term, out: &mut BTreeSet<Term>) {
    if let Term::Const(_) | Term::Num(_) = t {
        out.insert(t.clone());
    }
}

fn instantiate(t: &Term, env: &BTreeMap<u64, Term>) -> Term {
    match t {
        Term::Var(v) => env[&v.id].clone(),
        other => other.clone(),
    }
}

// Ground relation between two constants.
fn relation_holds(op: RelOp, a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Num(x), Term::Num(y)) => op.holds(x.cmp(y)),
        _ => match op {
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            // ordering is only defined on numbers
            _ => false,
        },
    }
}

/// Instantiates every rule over the constants of the program and its queries.
pub fn ground(program: &Program) -> Result<GroundProgram, OracleError> {
    let mut universe = BTreeSet::new();
    for r in &program.rules {
        let mut terms: Vec<&Term> = Vec::new();
        if let Head::Lit(l) = &r.head {
            terms.extend(&l.args);
        }
        for g in &r.body {
            match g {
                Goal::Pos(l) | Goal::Not(l) => terms.extend(&l.args),
                Goal::Rel(_, a, b) => terms.extend([a, b]),
                Goal::Forall(..) => return Err(OracleError::Ungroundable("forall".into())),
            }
        }
        for g in &r.body {
            if let Goal::Rel(op, a, b) = g {
                let ordering = !matches!(op, RelOp::Eq | RelOp::Ne);
                if ordering && !(a.is_ground() && b.is_ground()) {
                    return Err(OracleError::Ungroundable(crate::print::print_goal(g)));
                }
            }
        }
        for t in terms {
            check_term(t)?;
            collect_constants(t, &mut universe);
        }
    }
    for q in &program.queries {
        for g in &q.goals {
            if let Goal::Pos(l) | Goal::Not(l) = g {
                for t in &l.args {
                    check_term(t)?;
                    collect_constants(t, &mut universe);
                }
            }
        }
    }
    let universe: Vec<Term> = universe.into_iter().collect();

    let mut g = GroundProgram::default();
    for key in &program.abducibles {
        let mut tuples: Vec<Vec<Term>> = vec![vec![]];
        for _ in 0..key.arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t| universe.iter().map(move |c| [t.clone(), vec![c.clone()]].concat()))
                .collect();
        }
        for args in tuples {
            let lit = Literal { strong_neg: key.strong_neg, predicate: key.name.clone(), args: args.clone() };
            // the complement lives outside the user namespace: predicate names never contain spaces
            let shadow = Literal::new(format!("{} (not abduced)", key), args);
            let a = g.atom(lit);
            let b = g.atom(shadow);
            g.hidden.insert(b);
            g.rules.push(GroundRule { head: Some(a), pos: vec![], neg: vec![b] });
            g.rules.push(GroundRule { head: Some(b), pos: vec![], neg: vec![a] });
        }
    }

    for r in &program.rules {
        let mut vars: Vec<Var> = r.vars();
        vars.sort();
        vars.dedup();
        let mut env = BTreeMap::new();
        let n = vars.len();
        let total = if n == 0 { 1 } else { universe.len().pow(n as u32) };
        'instances: for code in 0..total {
            let mut c = code;
            for v in &vars {
                env.insert(v.id, universe[c % universe.len()].clone());
                c /= universe.len();
            }
            let mut rule = GroundRule { head: None, pos: vec![], neg: vec![] };
            for goal in &r.body {
                match goal {
                    Goal::Rel(op, a, b) => {
                        if !relation_holds(*op, &instantiate(a, &env), &instantiate(b, &env)) {
                            continue 'instances;
                        }
                    }
                    Goal::Pos(l) if l.is_true() => {}
                    Goal::Not(l) if l.is_true() => continue 'instances,
                    Goal::Pos(l) => {
                        let gl = l.map_terms(&mut |t| instantiate(t, &env));
                        rule.pos.push(g.atom(gl));
                    }
                    Goal::Not(l) => {
                        let gl = l.map_terms(&mut |t| instantiate(t, &env));
                        rule.neg.push(g.atom(gl));
                    }
                    Goal::Forall(..) => unreachable!(),
                }
            }
            if let Head::Lit(h) = &r.head {
                rule.head = Some(g.atom(h.map_terms(&mut |t| instantiate(t, &env))));
            }
            rule.pos.sort();
            rule.pos.dedup();
            rule.neg.sort();
            rule.neg.dedup();
            g.rules.push(rule);
        }
    }
    g.rules.sort();
    g.rules.dedup();
    Ok(g)
}

fn least_model(n: usize, rules: &[&GroundRule], base: &[bool]) -> Vec<bool> {
    let mut m = base.to_vec();
    m.resize(n, false);
    loop {
        let mut changed = false;
        for r in rules {
            if let Some(h) = r.head {
                if !m[h] && r.pos.iter().all(|&a| m[a]) {
                    m[h] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return m;
        }
    }
}

/// The Gelfond–Lifschitz reduct by `model` (indexed by atom): rules whose
/// negated atoms are all false in the model, with those atoms removed.
/// Constraints are not part of the reduct.
pub fn reduct(g: &GroundProgram, model: &[bool]) -> Vec<GroundRule> {
    g.rules
        .iter()
        .filter(|r| r.head.is_some() && r.neg.iter().all(|&a| !model[a]))
        .map(|r| GroundRule { head: r.head, pos: r.pos.clone(), neg: Vec::new() })
        .collect()
}

/// Least model of `rules` over the atoms of `g`.
pub fn least_model_of(g: &GroundProgram, rules: &[GroundRule]) -> BTreeSet<Literal> {
    let refs: Vec<&GroundRule> = rules.iter().collect();
    let m = least_model(g.atoms.len(), &refs, &[]);
    (0..g.atoms.len()).filter(|&a| m[a]).map(|a| g.atoms[a].clone()).collect()
}

/// All stable models, each as the set of its visible literals.
pub fn stable_models(g: &GroundProgram) -> Result<Vec<BTreeSet<Literal>>, OracleError> {
    let n = g.atoms.len();
    let definite: Vec<&GroundRule> = g.rules.iter().filter(|r| r.head.is_some()).collect();

    // atoms that can possibly be true: ignore negative bodies
    let possible = least_model(n, &definite, &[]);
    // atoms true in every model: rules whose negated atoms cannot hold
    let sure_rules: Vec<&GroundRule> =
        definite.iter().copied().filter(|r| r.neg.iter().all(|&a| !possible[a])).collect();
    let sure = least_model(n, &sure_rules, &[]);

    let free: Vec<usize> = (0..n).filter(|&a| possible[a] && !sure[a]).collect();
    if free.len() > MAX_FREE_ATOMS {
        return Err(OracleError::TooLarge(free.len()));
    }

    let complements: Vec<(usize, usize)> = (0..n)
        .filter(|&a| !g.atoms[a].strong_neg)
        .filter_map(|a| g.lookup(&g.atoms[a].complement()).map(|b| (a, b)))
        .collect();

    let mut models = Vec::new();
    for mask in 0u64..(1u64 << free.len()) {
        let mut m = sure.clone();
        for (bit, &a) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                m[a] = true;
            }
        }
        let positive = reduct(g, &m);
        let positive: Vec<&GroundRule> = positive.iter().collect();
        if least_model(n, &positive, &[]) != m {
            continue;
        }
        let violated = g
            .rules
            .iter()
            .filter(|r| r.head.is_none())
            .any(|r| r.pos.iter().all(|&a| m[a]) && r.neg.iter().all(|&a| !m[a]));
        if violated || complements.iter().any(|&(a, b)| m[a] && m[b]) {
            continue;
        }
        models.push((0..n).filter(|&a| m[a] && !g.hidden.contains(&a)).map(|a| g.atoms[a].clone()).collect());
    }
    Ok(models)
}

pub fn program_models(program: &Program) -> Result<Vec<BTreeSet<Literal>>, OracleError> {
    stable_models(&ground(program)?)
}

pub fn count_models(program: &Program) -> Result<usize, OracleError> {
    Ok(program_models(program)?.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Index of a model containing every ground positive literal of the
    /// answer and none of its ground negated ones.
    Pass(usize),
    Fail,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass(_))
    }
}

pub fn check_literals<'a>(
    positive: impl IntoIterator<Item = &'a Literal>,
    negated: impl IntoIterator<Item = &'a Literal>,
    models: &[BTreeSet<Literal>],
) -> Verdict {
    let pos: Vec<&Literal> = positive.into_iter().filter(|l| l.is_ground()).collect();
    let neg: Vec<&Literal> = negated.into_iter().filter(|l| l.is_ground()).collect();
    models
        .iter()
        .position(|m| pos.iter().all(|l| m.contains(*l)) && neg.iter().all(|l| !m.contains(*l)))
        .map_or(Verdict::Fail, Verdict::Pass)
}

pub fn check_answer(answer: &Answer, models: &[BTreeSet<Literal>]) -> Verdict {
    check_literals(answer.positive_literals(), answer.negated_literals(), models)
}

/// Whether a ground conjunction of literals and negated literals holds in some model.
pub fn query_holds(goals: &[Goal], models: &[BTreeSet<Literal>]) -> bool {
    let pos: Vec<&Literal> = goals.iter().filter_map(|g| if let Goal::Pos(l) = g { Some(l) } else { None }).collect();
    let neg: Vec<&Literal> = goals.iter().filter_map(|g| if let Goal::Not(l) = g { Some(l) } else { None }).collect();
    models.iter().any(|m| {
        pos.iter().all(|l| l.is_true() || m.contains(*l)) && neg.iter().all(|l| !l.is_true() && !m.contains(*l))
    })
}
