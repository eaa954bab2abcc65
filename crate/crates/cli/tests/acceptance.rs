//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use gdasp::constraints::Store;
use gdasp::dual::dualize;
use gdasp::engine::{Answer, Engine};
use gdasp::justify::{NodeLabel, ProofNode};
use gdasp::oracle::{check_answer, program_models, query_holds};
use gdasp::parser::{parse_program, parse_query};
use gdasp::print::print_literal;
use gdasp::term::{Goal, Literal, RelOp, Term};
use gdasp_cli::{corpus_output, corpus_programs};
use num::{BigRational, One};

type Check = Result<(), String>;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus(name: &str) -> String {
    fs::read_to_string(corpus_dir().join(format!("{}.gdasp", name))).unwrap()
}

fn solve(src: &str, query: &str) -> Result<Vec<Answer>, String> {
    let program = parse_program(src).map_err(|e| format!("{:?}", e))?;
    let dual = dualize(&program).map_err(|e| e.to_string())?;
    let goals = parse_query(query).map_err(|e| e.to_string())?;
    let engine = Engine::new(&dual);
    engine.solve(&goals).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())
}

fn models(src: &str) -> Result<Vec<BTreeSet<Literal>>, String> {
    program_models(&parse_program(src).unwrap()).map_err(|e| e.to_string())
}

fn model(a: &Answer) -> Vec<String> {
    a.render().model
}

fn has(a: &Answer, lit: &str) -> bool {
    model(a).iter().any(|m| m == lit)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn count(src: &str, query: &str) -> Result<usize, String> {
    Ok(solve(src, query)?.len())
}

fn all_pass_oracle(src: &str, answers: &[Answer]) -> Check {
    let ms = models(src)?;
    for a in answers {
        ensure(check_answer(a, &ms).is_pass(), format!("answer {:?} is in no stable model", model(a)))?;
    }
    Ok(())
}

fn oracle_holds(src: &str, query: &str) -> Result<bool, String> {
    Ok(query_holds(&parse_query(query).unwrap(), &models(src)?))
}

fn find<'a>(node: &'a ProofNode, pred: &impl Fn(&ProofNode) -> bool) -> Option<&'a ProofNode> {
    if pred(node) {
        return Some(node);
    }
    node.children.iter().find_map(|c| find(c, pred))
}

fn literal_node(node: &ProofNode, naf: bool, text: &str) -> bool {
    matches!(&node.label, NodeLabel::Literal { naf: n, lit } if *n == naf && print_literal(lit) == text)
}

fn two_worlds() -> Check {
    let start = Instant::now();
    let answers = solve("p :- not q. q :- not p.", "?- true.")?;
    let elapsed = start.elapsed();
    let worlds: BTreeSet<Vec<String>> = answers.iter().map(model).collect();
    let expected: BTreeSet<Vec<String>> =
        [vec!["p".to_string(), "not q".to_string()], vec!["not p".to_string(), "q".to_string()]].into_iter().collect();
    ensure(answers.len() == 2, format!("{} answers", answers.len()))?;
    ensure(worlds == expected, format!("worlds {:?}", worlds))?;
    ensure(elapsed < Duration::from_millis(100), format!("took {:?}", elapsed))
}

fn deduction() -> Check {
    let src = corpus("des03_tweety");
    ensure(count(&src, "?- flies(tweety).")? >= 1, "flies(tweety) fails")?;
    ensure(count(&src, "?- -flies(pengu).")? >= 1, "-flies(pengu) fails")?;
    ensure(count(&src, "?- flies(pengu).")? == 0, "flies(pengu) succeeds")?;
    let answers = solve(&src, "?- not flies(pengu).")?;
    ensure(!answers.is_empty(), "not flies(pengu) fails")?;
    for a in &answers {
        let negated = find(&a.justification, &|n| literal_node(n, true, "flies(pengu)"))
            .ok_or("no `not flies(pengu)` node")?;
        ensure(
            find(negated, &|n| literal_node(n, false, "penguin(pengu)")).is_some(),
            "justification of not flies(pengu) does not go through penguin(pengu)",
        )?;
    }
    all_pass_oracle(&src, &answers)?;
    let file = corpus_dir().join("des03_tweety.gdasp");
    let golden = fs::read_to_string(file.with_extension("expected")).unwrap();
    let first = corpus_output(&file);
    ensure(first == golden, "tree output differs from the golden file")?;
    ensure(corpus_output(&file) == first, "tree output is not stable across runs")
}

fn abduction() -> Check {
    let src = "#abducible p.";
    let answers = solve(src, "?- true.")?;
    ensure(answers.len() == 2, format!("{} worlds", answers.len()))?;
    let with_p: Vec<&Answer> = answers.iter().filter(|a| has(a, "p")).collect();
    ensure(with_p.len() == 1, "exactly one world assumes p")?;
    let abduced: Vec<String> = with_p[0].abduced.iter().map(print_literal).collect();
    ensure(abduced == ["p"], format!("abduced {:?}", abduced))?;
    let other = answers.iter().find(|a| !has(a, "p")).unwrap();
    ensure(other.abduced.is_empty(), "the other world abduces nothing")?;
    let n = models(src)?.len();
    ensure(n == 2, format!("oracle counts {} models", n))
}

fn quantifiers() -> Check {
    let bachelor = corpus("des07_bachelor");
    let john = solve(&bachelor, "?- bachelor(john).")?;
    ensure(!john.is_empty(), "bachelor(john) fails")?;
    ensure(
        john.iter().all(|a| find(&a.justification, &|n| matches!(n.label, NodeLabel::Forall(..))).is_some()),
        "no forall node in the justification of bachelor(john)",
    )?;
    ensure(count(&bachelor, "?- bachelor(bill).")? == 0, "bachelor(bill) succeeds")?;
    ensure(oracle_holds(&bachelor, "?- bachelor(john).")?, "oracle: bachelor(john) false")?;
    ensure(!oracle_holds(&bachelor, "?- bachelor(bill).")?, "oracle: bachelor(bill) true")?;
    all_pass_oracle(&bachelor, &john)?;

    let one = corpus("des07_swede_king");
    let answers = solve(&one, "?- hasking(a).")?;
    ensure(!answers.is_empty(), "one-king scenario has no answer")?;
    all_pass_oracle(&one, &answers)?;
    ensure(!models(&one)?.is_empty(), "oracle: one-king scenario has no model")?;
    let two = corpus("des07_swede_two_kings");
    ensure(count(&two, "?- hasking(a).")? == 0, "two-king scenario has answers")?;
    ensure(models(&two)?.is_empty(), "oracle: two-king scenario has models")
}

fn deontic() -> Check {
    let chisholm = corpus("des08_chisholm");
    let n = count(&chisholm, "?- true.")?;
    let m = models(&chisholm)?.len();
    ensure(n == 0 && m == 0, format!("dog without sign: {} answers, {} models", n, m))?;

    let sign = corpus("des08_chisholm_sign");
    let answers = solve(&sign, "?- dog.")?;
    ensure(!answers.is_empty(), "dog with sign fails")?;
    ensure(answers.iter().all(|a| has(a, "dog") && has(a, "warning_sign")), "answer without dog and warning_sign")?;
    all_pass_oracle(&sign, &answers)?;
    let worlds = count(&sign, "?- true.")?;
    let m = models(&sign)?.len();
    ensure(worlds == m, format!("with sign: {} worlds, {} models", worlds, m))?;

    let no_dog = corpus("des08_chisholm_no_dog");
    let answers = solve(&no_dog, "?- true.")?;
    ensure(answers.iter().all(|a| !has(a, "dog")), "a world contains dog")?;
    let m = models(&no_dog)?;
    ensure(m.iter().all(|w| !w.contains(&Literal::new("dog", vec![]))), "oracle: a model contains dog")?;
    ensure(answers.len() == m.len(), format!("rules 1-3: {} worlds, {} models", answers.len(), m.len()))
}

fn defaults() -> Check {
    let bold = corpus("des09_prescribe_bold");
    ensure(count(&bold, "?- prescribe(m, d, pat).")? >= 1, "bold prescription fails")?;
    let cautious = corpus("des09_prescribe_cautious");
    ensure(count(&cautious, "?- prescribe(m, d, pat).")? == 0, "cautious prescription succeeds without information")?;
    let ruled_out = corpus("des09_prescribe_ruled_out");
    ensure(count(&ruled_out, "?- prescribe(m, d, pat).")? >= 1, "cautious prescription fails with -has_side_effects")?;
    for (src, q, holds) in [
        (&bold, "?- prescribe(m, d, pat).", true),
        (&cautious, "?- prescribe(m, d, pat).", false),
        (&ruled_out, "?- prescribe(m, d, pat).", true),
    ] {
        ensure(oracle_holds(src, q)? == holds, format!("oracle disagrees on {}", q))?;
    }
    Ok(())
}

fn inconsistency() -> Check {
    let src = corpus("des17_posture");
    let answers = solve(&src, "?- true.")?;
    ensure(!answers.is_empty(), "no worlds")?;
    ensure(answers.iter().all(|a| !(has(a, "sit(ann)") && has(a, "stand(ann)"))), "a world sits and stands")?;
    all_pass_oracle(&src, &answers)?;
    let sit = Literal::new("sit", vec![Term::constant("ann")]);
    let stand = Literal::new("stand", vec![Term::constant("ann")]);
    let constrained = models(&src)?;
    ensure(constrained.iter().all(|m| !(m.contains(&sit) && m.contains(&stand))), "oracle: a model has both")?;
    let free = models(&src.replace("false :- person(X), sit(X), stand(X).", ""))?;
    ensure(free.iter().any(|m| m.contains(&sit) && m.contains(&stand)), "without the constraint no model has both")?;
    ensure(count(&src, "?- sit(ann), stand(ann).")? == 0, "sit(ann), stand(ann) succeeds")?;
    ensure(
        count(&corpus("des17_sit_stand"), "?- sit(p1).")? == 0 && models(&corpus("des17_sit_stand"))?.is_empty(),
        "a program asserting both has worlds",
    )
}

fn contexts() -> Check {
    let src = corpus("des11_nemo");
    let worlds = solve(&src, "?- true.")?;
    ensure(worlds.len() == 2, format!("{} worlds", worlds.len()))?;
    let talking = worlds.iter().filter(|a| has(a, "talk(nemo)")).count();
    let silent = worlds.iter().filter(|a| has(a, "not talk(nemo)")).count();
    ensure(talking == 1 && silent == 1, format!("{} worlds with talk(nemo), {} without", talking, silent))?;
    all_pass_oracle(&src, &worlds)?;
    let ms = models(&src)?;
    let talk = Literal::new("talk", vec![Term::constant("nemo")]);
    ensure(ms.len() == 2, format!("oracle: {} models", ms.len()))?;
    ensure(ms.iter().filter(|m| m.contains(&talk)).count() == 1, "oracle: talk(nemo) not in exactly one model")?;
    ensure(count(&src, "?- talk(nemo).")? >= 1 && count(&src, "?- not talk(nemo).")? >= 1, "a context is missing")
}

fn mortgage() -> Check {
    let src = corpus("des02_mortgage");
    let start = Instant::now();
    let answers = solve(&src, "?- mortgage(P, 12, 1/100, B, Mp).")?;
    let elapsed = start.elapsed();
    ensure(answers.len() == 1, format!("{} answers", answers.len()))?;
    let constraints = answers[0].render().constraints;
    ensure(constraints.len() == 1, format!("constraints {:?}", constraints))?;
    let goals = parse_query(&format!("?- {}.", constraints[0])).map_err(|e| e.to_string())?;
    let [Goal::Rel(RelOp::Eq, Term::Var(p), rhs)] = &goals[..] else {
        return Err(format!("not an equation for a variable: {}", constraints[0]));
    };
    ensure(p.name == "P", format!("solved for {}", p.name))?;
    let e = Store::new().linearize(rhs).map_err(|e| e.to_string())?.ok_or("right-hand side is not linear")?;
    let coeff = |name: &str| e.coeffs.iter().find(|(v, _)| v.name == name).map(|(_, c)| c.clone());
    // closed-form annuity: P = B / (1+i)^T + Mp * (1 - (1+i)^-T) / i
    let discount = BigRational::new(100.into(), 101.into());
    let mut d12 = BigRational::one();
    for _ in 0..12 {
        d12 *= &discount;
    }
    let b_coeff = d12.clone();
    let mp_coeff = BigRational::from_integer(100.into()) * (BigRational::one() - d12);
    ensure(e.coeffs.len() == 2 && num::Zero::is_zero(&e.constant), format!("unexpected terms in {}", constraints[0]))?;
    ensure(coeff("B") == Some(b_coeff.clone()), format!("B coefficient {:?}, expected {}", coeff("B"), b_coeff))?;
    ensure(coeff("Mp") == Some(mp_coeff.clone()), format!("Mp coefficient {:?}, expected {}", coeff("Mp"), mp_coeff))?;
    ensure(elapsed < Duration::from_millis(500), format!("took {:?}", elapsed))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut failures = Vec::new();
    for seed in 0..200 {
        let problems = support::compare(&support::random_program(seed));
        if !problems.is_empty() {
            failures.push(format!("seed {}: {}", seed, problems.join("; ")));
        }
    }
    for file in corpus_programs(&corpus_dir()).unwrap() {
        let src = fs::read_to_string(&file).unwrap();
        let Ok(ms) = models(&src) else { continue };
        let program = parse_program(&src).unwrap();
        for q in &program.queries {
            let text = gdasp::print::print_query(q);
            let answers = solve(&src, &text)?;
            if answers.iter().any(|a| !check_answer(a, &ms).is_pass()) {
                failures.push(format!("{}: {}: answer outside every model", file.display(), text));
            }
            let ground = q.goals.iter().all(|g| g.vars().is_empty());
            if ground && query_holds(&q.goals, &ms) && answers.is_empty() {
                failures.push(format!("{}: {}: holds but has no answer", file.display(), text));
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(failures.is_empty(), failures.join("\n"))?;
    ensure(elapsed < Duration::from_secs(60), format!("took {:?}", elapsed))
}

fn failure_duality() -> Check {
    let mut checked = 0;
    for file in corpus_programs(&corpus_dir()).unwrap() {
        let src = fs::read_to_string(&file).unwrap();
        let program = parse_program(&src).unwrap();
        let dual = dualize(&program).unwrap();
        if program.rules.iter().any(|r| r.is_constraint()) || !dual.olon_rules.is_empty() {
            continue;
        }
        for q in &program.queries {
            let [goal] = &q.goals[..] else { continue };
            if !goal.vars().is_empty() || matches!(goal, Goal::Pos(l) if l.is_true()) {
                continue;
            }
            let text = gdasp::print::print_query(q);
            if !solve(&src, &text)?.is_empty() {
                continue;
            }
            let negated = gdasp::term::negate_goal(goal);
            let query = format!("?- {}.", gdasp::print::print_goal(&negated));
            let answers = solve(&src, &query)?;
            ensure(!answers.is_empty(), format!("{}: {} fails and so does {}", file.display(), text, query))?;
            ensure(
                answers.iter().all(|a| !a.justification.children.is_empty()),
                format!("{}: {} has an empty justification", file.display(), query),
            )?;
            checked += 1;
        }
    }
    ensure(checked >= 3, format!("only {} failing queries checked", checked))
}

fn performance() -> Check {
    for file in corpus_programs(&corpus_dir()).unwrap() {
        let src = fs::read_to_string(&file).unwrap();
        for q in &parse_program(&src).unwrap().queries {
            let text = gdasp::print::print_query(q);
            let start = Instant::now();
            solve(&src, &text)?;
            let elapsed = start.elapsed();
            ensure(elapsed < Duration::from_secs(1), format!("{}: {} took {:?}", file.display(), text, elapsed))?;
        }
        ensure(corpus_output(&file) == corpus_output(&file), format!("{}: output differs between runs", file.display()))?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("two-world program has exactly two stable models", two_worlds),
        ("deduction and strong negation", deduction),
        ("abduction yields two worlds", abduction),
        ("quantifier fluency", quantifiers),
        ("deontic odd loop", deontic),
        ("defaults", defaults),
        ("inconsistency constraints", inconsistency),
        ("mutually exclusive contexts", contexts),
        ("exact mortgage residual", mortgage),
        ("oracle equivalence on random programs", oracle_equivalence),
        ("failure duality", failure_duality),
        ("performance and determinism", performance),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS {:>2} {}", i + 1, name),
            Err(e) => {
                println!("FAIL {:>2} {}: {}", i + 1, name, e);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "criteria failed: {:?}", failed);
}
