//! Seeded generator of small function-free programs and an engine-vs-oracle
//! comparison over all their ground queries.

#![allow(dead_code)]

use gdasp::dual::dualize;
use gdasp::engine::{Engine, EngineConfig};
use gdasp::oracle::{check_answer, program_models, query_holds};
use gdasp::parser::{parse_program, parse_query};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ground atoms of the generated language: three propositions, two unary
/// predicates over two constants and the strong negation of `p`.
pub const GROUND_ATOMS: [&str; 8] = ["p", "q", "r", "u(a)", "u(b)", "v(a)", "v(b)", "-p"];

const MAX_RULES: usize = 12;
const MAX_NEGATED: usize = 3;

fn atom(rng: &mut ChaCha8Rng, var_ok: bool) -> String {
    let pick = rng.gen_range(0..GROUND_ATOMS.len() + 2);
    if var_ok && pick >= GROUND_ATOMS.len() {
        return if pick % 2 == 0 { "u(X)".into() } else { "v(X)".into() };
    }
    GROUND_ATOMS[pick % GROUND_ATOMS.len()].to_string()
}

/// A ground program of at most 12 rules with at most 3 negated goals per body.
pub fn random_program(seed: u64) -> String {
    generate(seed, false)
}

/// Like [`random_program`] but rules may range over `X`; every rule is safe.
pub fn random_program_with_vars(seed: u64) -> String {
    generate(seed, true)
}

fn generate(seed: u64, vars: bool) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=MAX_RULES);
    let mut out = String::new();
    for _ in 0..n {
        let constraint = rng.gen_bool(0.1);
        let head = if constraint { String::new() } else { atom(&mut rng, vars) };
        let len = if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..=3) };
        let mut body = Vec::new();
        let mut negated = 0;
        for _ in 0..len {
            let a = atom(&mut rng, vars);
            if negated < MAX_NEGATED && rng.gen_bool(0.5) {
                negated += 1;
                body.push(format!("not {}", a));
            } else {
                body.push(a);
            }
        }
        let text = format!("{} {}", head, body.join(" "));
        let safe = body.iter().any(|g| !g.starts_with("not ") && g.contains("(X)"));
        if text.contains("(X)") && !safe {
            body.insert(0, ["u(X)", "v(X)"].choose(&mut rng).unwrap().to_string());
        }
        if constraint && body.is_empty() {
            body.push(atom(&mut rng, false));
        }
        match (constraint, body.is_empty()) {
            (true, _) => out.push_str(&format!(":- {}.\n", body.join(", "))),
            (false, true) => out.push_str(&format!("{}.\n", head)),
            (false, false) => out.push_str(&format!("{} :- {}.\n", head, body.join(", "))),
        }
    }
    out
}

/// Mismatches between the engine and the oracle on one program.
pub fn compare(src: &str) -> Vec<String> {
    compare_with(src, 2000).unwrap_or_else(|| vec!["depth limit reached".into()])
}

/// `None` when some query hit the depth limit.
pub fn compare_with(src: &str, max_depth: usize) -> Option<Vec<String>> {
    let program = parse_program(src).expect("generated program parses");
    let models = program_models(&program).expect("generated program grounds");
    let dual = dualize(&program).expect("generated program dualizes");
    let engine = Engine::with_config(&dual, EngineConfig { max_depth });
    let mut problems = Vec::new();
    let mut queries: Vec<String> = Vec::new();
    for g in GROUND_ATOMS {
        queries.push(g.to_string());
        queries.push(format!("not {}", g));
    }
    queries.push("u(X)".into());
    queries.push("true".into());
    for q in &queries {
        let goals = parse_query(&format!("?- {}.", q)).unwrap();
        let mut found = 0;
        let mut answers = engine.solve(&goals);
        for answer in answers.by_ref().take(64) {
            match answer {
                Ok(a) => {
                    found += 1;
                    if !check_answer(&a, &models).is_pass() {
                        problems.push(format!("?- {}: answer {:?} is in no stable model", q, a.render().model));
                    }
                }
                Err(e) => {
                    problems.push(format!("?- {}: {}", q, e));
                    break;
                }
            }
        }
        if answers.depth_exceeded() {
            return None;
        }
        let expected = goals.iter().all(|g| g.vars().is_empty()) && query_holds(&goals, &models);
        if expected && found == 0 {
            problems.push(format!("?- {}: holds in a stable model but has no answer", q));
        }
        if goals.iter().all(|g| g.vars().is_empty()) && !query_holds(&goals, &models) && found > 0 {
            problems.push(format!("?- {}: holds in no stable model but has an answer", q));
        }
    }
    Some(problems)
}
