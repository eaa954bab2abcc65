mod support;

use std::collections::BTreeSet;

use gdasp::oracle::{ground, least_model_of, program_models, reduct, stable_models, GroundProgram};
use gdasp::parser::parse_program;
use gdasp::print::print_literal;
use gdasp::term::Literal;
use proptest::prelude::*;

fn sorted(models: Vec<BTreeSet<Literal>>) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = models.iter().map(|m| m.iter().map(print_literal).collect()).collect();
    out.sort();
    out
}

fn as_mask(g: &GroundProgram, model: &BTreeSet<Literal>) -> Vec<bool> {
    g.atoms.iter().map(|a| model.contains(a)).collect()
}

// Every subset of atoms, checked directly against the definition.
fn brute_force_models(g: &GroundProgram) -> Vec<BTreeSet<Literal>> {
    let n = g.atoms.len();
    assert!(n <= 16, "{} atoms", n);
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let m: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let set: BTreeSet<Literal> = (0..n).filter(|&i| m[i]).map(|i| g.atoms[i].clone()).collect();
        if least_model_of(g, &reduct(g, &m)) != set {
            continue;
        }
        let violated = g
            .rules
            .iter()
            .any(|r| r.head.is_none() && r.pos.iter().all(|&a| m[a]) && r.neg.iter().all(|&a| !m[a]));
        let inconsistent = set.iter().any(|l| !l.strong_neg && set.contains(&l.complement()));
        if !violated && !inconsistent {
            out.push((0..n).filter(|&i| m[i] && !g.hidden.contains(&i)).map(|i| g.atoms[i].clone()).collect());
        }
    }
    out
}

#[test]
fn pruned_enumeration_matches_brute_force() {
    for seed in 0..200 {
        let src = support::random_program(seed);
        let g = ground(&parse_program(&src).unwrap()).unwrap();
        assert_eq!(sorted(stable_models(&g).unwrap()), sorted(brute_force_models(&g)), "seed {}:\n{}", seed, src);
    }
}

#[test]
fn non_ground_programs_match_brute_force() {
    for seed in 0..100 {
        let src = support::random_program_with_vars(seed);
        let g = ground(&parse_program(&src).unwrap()).unwrap();
        assert_eq!(sorted(stable_models(&g).unwrap()), sorted(brute_force_models(&g)), "seed {}:\n{}", seed, src);
    }
}

#[test]
fn models_are_fixpoints_of_their_reduct() {
    for seed in 0..200 {
        let src = support::random_program(seed);
        let g = ground(&parse_program(&src).unwrap()).unwrap();
        for m in stable_models(&g).unwrap() {
            assert_eq!(least_model_of(&g, &reduct(&g, &as_mask(&g, &m))), m, "seed {}", seed);
        }
    }
}

const ATOMS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn rule_text(head: Option<usize>, pos: &[usize], neg: &[usize]) -> String {
    let mut body: Vec<String> = pos.iter().map(|&i| ATOMS[i].to_string()).collect();
    body.extend(neg.iter().map(|&i| format!("not {}", ATOMS[i])));
    match (head, body.is_empty()) {
        (Some(h), true) => format!("{}.\n", ATOMS[h]),
        (Some(h), false) => format!("{} :- {}.\n", ATOMS[h], body.join(", ")),
        (None, _) => format!(":- {}.\n", body.join(", ")),
    }
}

type RawRule = (usize, Vec<usize>, Vec<usize>);

fn raw_rules(negation: bool) -> impl Strategy<Value = Vec<RawRule>> {
    let neg_len = if negation { 0..3usize } else { 0..1usize };
    prop::collection::vec(
        (0..ATOMS.len(), prop::collection::vec(0..ATOMS.len(), 0..3), prop::collection::vec(0..ATOMS.len(), neg_len)),
        1..9,
    )
}

fn render(rules: &[RawRule]) -> String {
    rules.iter().map(|(h, p, n)| rule_text(Some(*h), p, n)).collect()
}

proptest! {
    #[test]
    fn definite_programs_have_their_least_model(rules in raw_rules(false)) {
        let mut lm: BTreeSet<usize> = BTreeSet::new();
        loop {
            let before = lm.len();
            for (h, p, _) in &rules {
                if p.iter().all(|a| lm.contains(a)) {
                    lm.insert(*h);
                }
            }
            if lm.len() == before {
                break;
            }
        }
        let mut expected: Vec<String> = lm.iter().map(|&i| ATOMS[i].to_string()).collect();
        expected.sort();
        let models = program_models(&parse_program(&render(&rules)).unwrap()).unwrap();
        prop_assert_eq!(sorted(models), vec![expected]);
    }

    #[test]
    fn constraints_only_remove_models(
        rules in raw_rules(true),
        pos in prop::collection::vec(0..ATOMS.len(), 0..2),
        neg in prop::collection::vec(0..ATOMS.len(), 1..3),
    ) {
        let src = render(&rules);
        let before = sorted(program_models(&parse_program(&src).unwrap()).unwrap());
        let constrained = format!("{}{}", src, rule_text(None, &pos, &neg));
        let after = sorted(program_models(&parse_program(&constrained).unwrap()).unwrap());
        prop_assert!(after.iter().all(|m| before.contains(m)), "{}", constrained);
    }

    #[test]
    fn reduct_is_idempotent(rules in raw_rules(true), mask in prop::collection::vec(any::<bool>(), ATOMS.len())) {
        let g = ground(&parse_program(&render(&rules)).unwrap()).unwrap();
        let m: Vec<bool> = g.atoms.iter().map(|a| mask[ATOMS.iter().position(|x| *x == a.predicate).unwrap()]).collect();
        let once = reduct(&g, &m);
        prop_assert!(once.iter().all(|r| r.neg.is_empty()));
        let mut reduced = g.clone();
        reduced.rules = once.clone();
        prop_assert_eq!(reduct(&reduced, &m), once.clone());
        // with negation gone, the model no longer matters
        let other: Vec<bool> = m.iter().map(|b| !b).collect();
        prop_assert_eq!(reduct(&reduced, &other), once);
    }
}
