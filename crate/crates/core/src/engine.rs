//! Goal-directed evaluation over a dual program.
//!
//! The solver is an explicit choicepoint machine: each branch is a [`State`]
//! holding its constraint store, the coinductive hypothesis set (CHS), the
//! ancestor chain used for loop detection, and a continuation of pending
//! work items. Answers are produced lazily, one per successful branch.

use std::collections::HashSet;
use std::rc::Rc;

use thiserror::Error;

use crate::constraints::{ConstraintError, ForallStatus, Residual, Store};
use crate::dual::DualProgram;
use crate::justify::{NodeLabel, ProofKind, ProofNode};
use crate::print::{Printer, VarNamer};
use crate::term::{is_variant, rename_apart, rename_goals, Goal, Head, Literal, RelOp, Term, Var, VarGen, VarId};

pub const DEFAULT_MAX_DEPTH: usize = 5000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("cannot check forall over {0}")]
    ForallUnsupported(String),
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Deepest resolution nesting explored on one branch before it is pruned.
    pub max_depth: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_depth: DEFAULT_MAX_DEPTH }
    }
}

/// One CHS entry: a literal proved true (`naf == false`) or proved to have no
/// support (`naf == true`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelEntry {
    pub naf: bool,
    pub lit: Literal,
    /// Per variable of `lit`, the ground values it must differ from.
    pub excluded: Vec<(Var, Vec<Term>)>,
}

#[derive(Clone, Debug)]
pub struct Answer {
    /// Query variable name and its value, for bound query variables.
    pub bindings: Vec<(String, Term)>,
    pub residue: Vec<Residual>,
    /// The partial stable model, in the order entries were proved.
    pub model: Vec<ModelEntry>,
    /// Positive model literals of abducible predicates.
    pub abduced: Vec<Literal>,
    pub justification: ProofNode,
    namer: VarNamer,
}

impl Answer {
    /// A namer that prints free query variables under their query names.
    pub fn namer(&self) -> VarNamer {
        self.namer.clone()
    }

    /// Bindings, constraints and model rendered with one consistent naming.
    pub fn render(&self) -> RenderedAnswer {
        let mut namer = self.namer.clone();
        let mut p = Printer::new(&mut namer);
        let bindings = self.bindings.iter().map(|(n, t)| format!("{} = {}", n, p.term(t))).collect();
        let mut constraints: Vec<String> = self
            .residue
            .iter()
            .map(|r| format!("{} {} {}", p.term(&r.lhs), r.op.symbol(), p.term(&r.rhs)))
            .collect();
        constraints.sort();
        let model = self.model.iter().map(|e| format_entry(e, &mut p)).collect();
        RenderedAnswer { bindings, constraints, model, namer }
    }

    pub fn positive_literals(&self) -> impl Iterator<Item = &Literal> {
        self.model.iter().filter(|e| !e.naf).map(|e| &e.lit)
    }

    pub fn negated_literals(&self) -> impl Iterator<Item = &Literal> {
        self.model.iter().filter(|e| e.naf).map(|e| &e.lit)
    }
}

fn canonical_entry(e: &ModelEntry) -> ModelEntry {
    let mut vars = Vec::new();
    e.lit.collect_vars(&mut vars);
    for (v, ts) in &e.excluded {
        vars.push(v.clone());
        ts.iter().for_each(|t| t.collect_vars(&mut vars));
    }
    let mut order: Vec<Var> = Vec::new();
    for v in vars {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    let rename = |t: &Term| {
        t.map_vars(&mut |v| {
            let i = order.iter().position(|o| o == v).unwrap();
            Term::Var(Var::new(i as VarId, "_"))
        })
    };
    ModelEntry {
        naf: e.naf,
        lit: e.lit.map_terms(&mut |t| rename(t)),
        excluded: e
            .excluded
            .iter()
            .map(|(v, ts)| {
                let Term::Var(w) = rename(&Term::Var(v.clone())) else { unreachable!() };
                (w, ts.iter().map(|t| rename(t)).collect())
            })
            .collect(),
    }
}

fn format_entry(e: &ModelEntry, p: &mut Printer) -> String {
    let mut s = if e.naf { format!("not {}", p.literal(&e.lit)) } else { p.literal(&e.lit) };
    let mut attrs: Vec<String> = Vec::new();
    for (v, ts) in &e.excluded {
        let name = p.term(&Term::Var(v.clone()));
        for t in ts {
            attrs.push(format!("{} \\= {}", name, p.term(t)));
        }
    }
    if !attrs.is_empty() {
        s.push_str(&format!(" | {{{}}}", attrs.join(", ")));
    }
    s
}

#[derive(Clone, Debug)]
pub struct RenderedAnswer {
    pub bindings: Vec<String>,
    pub constraints: Vec<String>,
    pub model: Vec<String>,
    /// The namer after printing the above, for rendering the tree consistently.
    pub namer: VarNamer,
}

type Anc = Option<Rc<AncNode>>;

struct AncNode {
    naf: bool,
    lit: Literal,
    parent: Anc,
}

type Cont = Option<Rc<ContNode>>;

struct ContNode {
    item: Item,
    next: Cont,
}

#[derive(Clone)]
enum Item {
    Goal(Goal, usize),
    /// A literal's proof is complete; restores the ancestor chain.
    Exit { naf: bool, lit: Literal, anc: Anc },
    ForallCheck { var: Var, goal: Goal, depth: usize },
    Close,
    NmrBegin,
    NmrEnd { height: usize },
    /// World enumeration: the literal either holds or has no support.
    Decide(Literal),
}

#[derive(Clone)]
enum Label {
    Lit { naf: bool, lit: Literal },
    Rel(RelOp, Term, Term),
    Forall(Var, Goal),
    Nmr,
}

#[derive(Clone)]
enum Event {
    Open(Label, ProofKind),
    Leaf(Label, ProofKind),
    Close,
}

type Trace = Option<Rc<TraceNode>>;

struct TraceNode {
    event: Event,
    prev: Trace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    naf: bool,
    lit: Literal,
}

#[derive(Clone)]
struct State {
    store: Store,
    proved: Vec<Entry>,
    anc: Anc,
    cont: Cont,
    trace: Trace,
}

impl State {
    fn push_items(&mut self, items: Vec<Item>) {
        for item in items.into_iter().rev() {
            self.cont = Some(Rc::new(ContNode { item, next: self.cont.take() }));
        }
    }

    fn event(&mut self, event: Event) {
        self.trace = Some(Rc::new(TraceNode { event, prev: self.trace.take() }));
    }
}

pub struct Engine<'p> {
    program: &'p DualProgram,
    config: EngineConfig,
}

impl<'p> Engine<'p> {
    pub fn new(program: &'p DualProgram) -> Self {
        Engine { program, config: EngineConfig::default() }
    }

    pub fn with_config(program: &'p DualProgram, config: EngineConfig) -> Self {
        Engine { program, config }
    }

    /// Lazily enumerates the answers to `query`. The query `?- true` alone
    /// enumerates whole worlds over the ground literals of the program.
    pub fn solve(&self, query: &[Goal]) -> Solutions<'p> {
        let mut max = self.program.max_var_id();
        for g in query {
            for v in g.vars() {
                max = max.max(v.id);
            }
        }
        let gen = VarGen::starting_after(max);
        let (goals, renaming) = rename_goals(query, &gen);
        let query_vars: Vec<(String, Var)> = renaming
            .iter()
            .filter(|(old, _)| !old.name.starts_with('_') && !old.name.is_empty())
            .map(|(old, new)| (old.name.clone(), new.clone()))
            .collect();

        let mut items: Vec<Item> = Vec::new();
        let enumerate_worlds = goals.iter().all(|g| matches!(g, Goal::Pos(l) if l.is_true()));
        if enumerate_worlds {
            items.extend(self.world_literals().into_iter().map(Item::Decide));
        } else {
            items.extend(goals.iter().cloned().map(|g| Item::Goal(g, 0)));
        }
        if !self.program.nmr.is_empty() {
            items.push(Item::NmrBegin);
        }
        let mut start = State { store: Store::new(), proved: Vec::new(), anc: None, cont: None, trace: None };
        start.push_items(items);
        Solutions {
            program: self.program,
            config: self.config.clone(),
            gen,
            query: goals.clone(),
            query_vars,
            stack: vec![start],
            seen: HashSet::new(),
            pruned: false,
            done: false,
        }
    }

    // Ground literals written anywhere in the program, in order of appearance.
    fn world_literals(&self) -> Vec<Literal> {
        let mut out: Vec<Literal> = Vec::new();
        let mut add = |l: &Literal| {
            if l.is_ground() && !l.is_true() && self.program.is_visible(&l.key()) && !out.contains(l) {
                out.push(l.clone());
            }
        };
        for r in self.program.user_rules() {
            if let Head::Lit(h) = &r.head {
                add(h);
            }
            for g in &r.body {
                if let Goal::Pos(l) | Goal::Not(l) = g {
                    add(l);
                }
            }
        }
        out
    }
}

pub struct Solutions<'p> {
    program: &'p DualProgram,
    config: EngineConfig,
    gen: VarGen,
    query: Vec<Goal>,
    query_vars: Vec<(String, Var)>,
    stack: Vec<State>,
    seen: HashSet<String>,
    pruned: bool,
    done: bool,
}

enum Step {
    Continue,
    Fail,
}

impl<'p> Solutions<'p> {
    /// Whether some branch was cut off by the depth limit.
    pub fn depth_exceeded(&self) -> bool {
        self.pruned
    }

    fn run(&mut self, mut st: State) -> Result<Option<State>, EngineError> {
        loop {
            let Some(node) = st.cont.take() else { return Ok(Some(st)) };
            st.cont = node.next.clone();
            let step = match &node.item {
                Item::Goal(g, depth) => self.goal(&mut st, g, *depth)?,
                Item::Exit { naf, lit, anc } => {
                    st.anc = anc.clone();
                    st.event(Event::Close);
                    if self.add_proved(&mut st, *naf, lit)? {
                        Step::Continue
                    } else {
                        Step::Fail
                    }
                }
                Item::ForallCheck { var, goal, depth } => self.forall_check(&mut st, var, goal, *depth)?,
                Item::Close => {
                    st.event(Event::Close);
                    Step::Continue
                }
                Item::NmrBegin => {
                    st.event(Event::Open(Label::Nmr, ProofKind::Nmr));
                    let mut items: Vec<Item> = self.program.nmr.iter().map(|g| Item::Goal(g.clone(), 0)).collect();
                    items.push(Item::NmrEnd { height: self.stack.len() });
                    items.push(Item::Close);
                    st.push_items(items);
                    Step::Continue
                }
                Item::NmrEnd { height } => {
                    // the first way of satisfying the constraints is enough
                    self.stack.truncate(*height);
                    Step::Continue
                }
                Item::Decide(lit) => {
                    let mut neg = st.clone();
                    neg.push_items(vec![Item::Goal(Goal::Not(lit.clone()), 0)]);
                    st.push_items(vec![Item::Goal(Goal::Pos(lit.clone()), 0)]);
                    self.stack.push(neg);
                    Step::Continue
                }
            };
            if let Step::Fail = step {
                return Ok(None);
            }
        }
    }

    fn branch(&mut self, st: &mut State, mut alternatives: Vec<State>) -> Step {
        if alternatives.is_empty() {
            return Step::Fail;
        }
        let first = alternatives.remove(0);
        while let Some(alt) = alternatives.pop() {
            self.stack.push(alt);
        }
        *st = first;
        Step::Continue
    }

    fn goal(&mut self, st: &mut State, g: &Goal, depth: usize) -> Result<Step, EngineError> {
        match g {
            Goal::Rel(op, a, b) => {
                if st.store.add_relation(*op, a, b)? {
                    st.event(Event::Leaf(Label::Rel(*op, a.clone(), b.clone()), ProofKind::Constraint));
                    Ok(Step::Continue)
                } else {
                    Ok(Step::Fail)
                }
            }
            Goal::Pos(l) if l.is_true() => {
                st.event(Event::Leaf(Label::Lit { naf: false, lit: l.clone() }, ProofKind::Builtin));
                Ok(Step::Continue)
            }
            Goal::Not(l) if l.is_true() => Ok(Step::Fail),
            Goal::Pos(l) if self.program.is_transparent(&l.key()) => self.expand(st, None, l, depth),
            Goal::Pos(l) => self.call(st, false, l, depth),
            Goal::Not(l) => self.call(st, true, l, depth),
            Goal::Forall(v, inner) => {
                let w = self.gen.fresh(v.name.clone());
                let body = inner.map_terms(&mut |t| {
                    t.map_vars(&mut |x| if x == v { Term::Var(w.clone()) } else { Term::Var(x.clone()) })
                });
                st.event(Event::Open(Label::Forall(w.clone(), body.clone()), ProofKind::Forall));
                st.push_items(vec![
                    Item::Goal(body.clone(), depth + 1),
                    Item::ForallCheck { var: w, goal: body, depth },
                    Item::Close,
                ]);
                Ok(Step::Continue)
            }
        }
    }

    fn forall_check(&mut self, st: &mut State, var: &Var, goal: &Goal, depth: usize) -> Result<Step, EngineError> {
        match st.store.forall_status(var) {
            ForallStatus::Bound => Ok(Step::Fail),
            ForallStatus::Linear => {
                Err(EngineError::ForallUnsupported(format!("`{}`, which is arithmetically constrained", var.name)))
            }
            ForallStatus::Unsupported => {
                Err(EngineError::ForallUnsupported(format!("`{}`, which has a non-ground disequality", var.name)))
            }
            ForallStatus::Free(excluded) => {
                let items = excluded
                    .iter()
                    .map(|t| {
                        let g = goal.map_terms(&mut |x| {
                            x.map_vars(&mut |y| if y == var { t.clone() } else { Term::Var(y.clone()) })
                        });
                        Item::Goal(g, depth + 1)
                    })
                    .collect();
                st.push_items(items);
                Ok(Step::Continue)
            }
        }
    }

    fn call(&mut self, st: &mut State, naf: bool, lit: &Literal, depth: usize) -> Result<Step, EngineError> {
        let r = st.store.resolve_literal(lit);
        let label = Label::Lit { naf, lit: r.clone() };
        if !naf {
            // positive loop: no well-founded support, even if assumed on the way
            let mut cur = st.anc.clone();
            while let Some(a) = cur {
                if a.naf {
                    break;
                }
                if is_variant(&st.store.resolve_literal(&a.lit), &r) {
                    return Ok(Step::Fail);
                }
                cur = a.parent.clone();
            }
        }
        for e in &st.proved {
            if e.naf == naf && st.store.resolve_literal(&e.lit) == r {
                st.event(Event::Leaf(label, ProofKind::ChsReuse));
                return Ok(Step::Continue);
            }
        }
        for e in &st.proved {
            let el = st.store.resolve_literal(&e.lit);
            if (e.naf != naf && el == r) || (!naf && !e.naf && el == r.complement()) {
                return Ok(Step::Fail);
            }
        }

        // nearest variant ancestor decides loops
        let mut flips = 0;
        let mut prev = naf;
        let mut cur = st.anc.clone();
        while let Some(a) = cur {
            if a.naf != prev {
                flips += 1;
            }
            prev = a.naf;
            let al = st.store.resolve_literal(&a.lit);
            if is_variant(&al, &r) {
                if a.naf != naf {
                    return Ok(Step::Fail);
                }
                if flips == 0 && !naf {
                    // positive loop: no well-founded support
                    return Ok(Step::Fail);
                }
                if !self.add_proved(st, naf, &r)? {
                    return Ok(Step::Fail);
                }
                st.event(Event::Leaf(label, ProofKind::Coinductive));
                return Ok(Step::Continue);
            }
            cur = a.parent.clone();
        }
        self.expand(st, Some(naf), &r, depth)
    }

    /// Resolves against the rules for `lit` (user rules, or the dual rules
    /// when `naf`). `polarity` is `None` for generated helper predicates.
    fn expand(&mut self, st: &mut State, polarity: Option<bool>, lit: &Literal, depth: usize) -> Result<Step, EngineError> {
        if depth > self.config.max_depth {
            self.pruned = true;
            return Ok(Step::Fail);
        }
        let target = match polarity {
            Some(true) => match self.program.dual_key(&lit.key()) {
                Some(k) => Literal::new(k.name.clone(), lit.args.clone()),
                None => {
                    // nothing can derive it
                    if !self.add_proved(st, true, lit)? {
                        return Ok(Step::Fail);
                    }
                    st.event(Event::Leaf(Label::Lit { naf: true, lit: lit.clone() }, ProofKind::Fact));
                    return Ok(Step::Continue);
                }
            },
            _ => lit.clone(),
        };
        let mut alternatives = Vec::new();
        for &id in self.program.rules_for(&target.key()) {
            let rule = rename_apart(&self.program.rules[id], &self.gen);
            let Head::Lit(head) = &rule.head else { continue };
            let mut s = st.clone();
            if !s.store.unify_literals(head, &target)? {
                continue;
            }
            let mut items: Vec<Item> = rule.body.iter().map(|g| Item::Goal(g.clone(), depth + 1)).collect();
            if let Some(naf) = polarity {
                let kind = if rule.body.is_empty() { ProofKind::Fact } else { ProofKind::Rule(id) };
                s.event(Event::Open(Label::Lit { naf, lit: lit.clone() }, kind));
                let old = s.anc.take();
                s.anc = Some(Rc::new(AncNode { naf, lit: lit.clone(), parent: old.clone() }));
                items.push(Item::Exit { naf, lit: lit.clone(), anc: old });
            }
            s.push_items(items);
            alternatives.push(s);
        }
        Ok(self.branch(st, alternatives))
    }

    /// Records a proved literal, constraining it away from complementary entries.
    fn add_proved(&mut self, st: &mut State, naf: bool, lit: &Literal) -> Result<bool, EngineError> {
        let r = st.store.resolve_literal(lit);
        let key = r.key();
        let mut clash = Vec::new();
        for e in &st.proved {
            let el = st.store.resolve_literal(&e.lit);
            if e.naf == naf && el == r {
                return Ok(true);
            }
            let ek = el.key();
            if (e.naf != naf && ek == key) || (!naf && !e.naf && ek == key.complement()) {
                clash.push(el);
            }
        }
        for el in clash {
            let a = Term::Compound("args".into(), el.args.clone());
            let b = Term::Compound("args".into(), r.args.clone());
            let ok = if r.args.is_empty() { false } else { st.store.add_relation(RelOp::Ne, &a, &b)? };
            if !ok {
                return Ok(false);
            }
        }
        st.proved.push(Entry { naf, lit: r });
        Ok(true)
    }

    fn answer(&self, st: &State) -> Answer {
        let store = &st.store;
        let mut namer = VarNamer::new();
        let mut bindings = Vec::new();
        let mut visible: Vec<Var> = Vec::new();
        for (name, v) in &self.query_vars {
            if let Term::Var(w) = store.resolve(&Term::Var(v.clone())) {
                if w == *v {
                    namer.assign(&w, name);
                    visible.push(w);
                }
            }
        }
        for (name, v) in &self.query_vars {
            let t = store.simplify(&Term::Var(v.clone()));
            if t != Term::Var(v.clone()) {
                for w in t.vars() {
                    if !visible.contains(&w) {
                        visible.push(w);
                    }
                }
                bindings.push((name.clone(), t));
            }
        }
        let residue = store.residuals(&visible);

        let mut model: Vec<ModelEntry> = Vec::new();
        // entries equal up to renaming are listed once
        let mut seen: Vec<ModelEntry> = Vec::new();
        for e in &st.proved {
            if !self.program.is_visible(&e.lit.key()) {
                continue;
            }
            let lit = e.lit.map_terms(&mut |t| store.simplify(t));
            let mut vars = Vec::new();
            lit.collect_vars(&mut vars);
            let excluded: Vec<(Var, Vec<Term>)> = vars
                .into_iter()
                .map(|v| {
                    let ex = store.excluded_values(&v);
                    (v, ex)
                })
                .filter(|(_, ex)| !ex.is_empty())
                .collect();
            let entry = ModelEntry { naf: e.naf, lit, excluded };
            let key = canonical_entry(&entry);
            if !seen.contains(&key) {
                seen.push(key);
                model.push(entry);
            }
        }
        let abduced = model
            .iter()
            .filter(|e| !e.naf && self.program.abducibles.contains(&e.lit.key()))
            .map(|e| e.lit.clone())
            .collect();
        let justification = self.build_tree(st);
        Answer { bindings, residue, model, abduced, justification, namer }
    }

    fn build_tree(&self, st: &State) -> ProofNode {
        let mut events = Vec::new();
        let mut cur = st.trace.clone();
        while let Some(n) = cur {
            events.push(n.event.clone());
            cur = n.prev.clone();
        }
        events.reverse();
        let resolve = |label: &Label| match label {
            Label::Lit { naf, lit } => {
                NodeLabel::Literal { naf: *naf, lit: lit.map_terms(&mut |t| st.store.simplify(t)) }
            }
            Label::Rel(op, a, b) => NodeLabel::Relation(*op, st.store.resolve(a), st.store.resolve(b)),
            Label::Forall(v, g) => NodeLabel::Forall(v.clone(), st.store.subst().apply_goal(g)),
            Label::Nmr => NodeLabel::GlobalConstraints,
        };
        let query_goals: Vec<Goal> = self.query.clone();
        let mut stack = vec![ProofNode::new(NodeLabel::Query(query_goals), ProofKind::Query)];
        for ev in &events {
            match ev {
                Event::Open(label, kind) => stack.push(ProofNode::new(resolve(label), *kind)),
                Event::Leaf(label, kind) => stack.last_mut().unwrap().children.push(ProofNode::new(resolve(label), *kind)),
                Event::Close => {
                    let node = stack.pop().unwrap();
                    stack.last_mut().unwrap().children.push(node);
                }
            }
        }
        while stack.len() > 1 {
            let node = stack.pop().unwrap();
            stack.last_mut().unwrap().children.push(node);
        }
        stack.pop().unwrap()
    }
}

impl<'p> Iterator for Solutions<'p> {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        while let Some(st) = self.stack.pop() {
            match self.run(st) {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Ok(None) => {}
                Ok(Some(st)) => {
                    let answer = self.answer(&st);
                    let r = answer.render();
                    let mut model = r.model.clone();
                    model.sort();
                    let key = format!("{:?}|{:?}|{:?}", r.bindings, r.constraints, model);
                    if self.seen.insert(key) {
                        return Some(Ok(answer));
                    }
                }
            }
        }
        self.done = true;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::dualize;
    use crate::parser::{parse_program, parse_query};

    fn answers(src: &str, query: &str) -> Vec<RenderedAnswer> {
        let p = parse_program(src).unwrap();
        let d = dualize(&p).unwrap();
        let q = parse_query(query).unwrap();
        Engine::new(&d).solve(&q).map(|a| a.unwrap().render()).collect()
    }

    fn sorted(mut v: Vec<String>) -> Vec<String> {
        v.sort();
        v
    }

    #[test]
    fn even_loop_query_p() {
        let a = answers("p :- not q. q :- not p.", "?- p.");
        assert_eq!(a.len(), 1);
        assert_eq!(sorted(a[0].model.clone()), vec!["not q", "p"]);
    }

    #[test]
    fn even_loop_worlds() {
        let a = answers("p :- not q. q :- not p.", "?- true.");
        let models: Vec<Vec<String>> = a.iter().map(|x| sorted(x.model.clone())).collect();
        assert_eq!(models, vec![vec!["not q", "p"], vec!["not p", "q"]]);
    }

    #[test]
    fn odd_loop_has_no_answer() {
        assert!(answers("p :- not p.", "?- p.").is_empty());
        assert!(answers("p :- not p. q.", "?- q.").is_empty());
    }

    #[test]
    fn deduction_binds_variables() {
        let a = answers("bird(tweety). bird(pengu). penguin(pengu). flies(X) :- bird(X), not penguin(X).", "?- flies(X).");
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].bindings, vec!["X = tweety"]);
    }

    #[test]
    fn constructive_negation_yields_disequality() {
        let a = answers("bird(tweety). flies(X) :- bird(X).", "?- not flies(V).");
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].constraints, vec!["V \\= tweety"]);
    }

    #[test]
    fn constraint_removes_world() {
        let a = answers(":- p. p :- not q. q :- not p.", "?- true.");
        assert_eq!(a.len(), 1);
        assert!(a[0].model.contains(&"q".to_string()));
    }

    #[test]
    fn positive_loop_fails() {
        assert!(answers("p :- q. q :- p.", "?- p.").is_empty());
        assert_eq!(answers("p :- q. q :- p.", "?- not p.").len(), 1);
    }

    #[test]
    fn strong_negation_conflict_is_rejected() {
        assert!(answers("p. -p.", "?- p.").is_empty());
        let a = answers("bird(tweety). bird(pengu). penguin(pengu). -flies(X) :- penguin(X). flies(X) :- bird(X), not ab(X). ab(X) :- penguin(X).", "?- flies(X).");
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].bindings, vec!["X = tweety"]);
    }

    #[test]
    fn arithmetic_residue() {
        let a = answers("p(X, Y) :- X > Y + 1.", "?- p(A, B).");
        assert_eq!(a[0].constraints, vec!["A > B+1"]);
    }

    #[test]
    fn abducible_has_two_worlds() {
        let p = parse_program("#abducible p.").unwrap();
        let d = dualize(&p).unwrap();
        let q = parse_query("?- p.").unwrap();
        let a: Vec<Answer> = Engine::new(&d).solve(&q).map(Result::unwrap).collect();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].abduced, vec![Literal::new("p", vec![])]);
        assert_eq!(answers("#abducible p.", "?- true.").len(), 2);
    }

    #[test]
    fn depth_limit_prunes() {
        let p = parse_program("nat(0). nat(s(X)) :- nat(X). big(X) :- nat(X), X = s(s(s(s(s(s(0)))))), fail.").unwrap();
        let d = dualize(&p).unwrap();
        let q = parse_query("?- big(X).").unwrap();
        let engine = Engine::with_config(&d, EngineConfig { max_depth: 40 });
        let mut sols = engine.solve(&q);
        assert!(sols.next().is_none());
        assert!(sols.depth_exceeded());
    }
}
