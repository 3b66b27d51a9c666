mod common;

use mlms::formula::{self as fm, Formula};
use mlms::hilbert::{self, bundled_lemmas, bundled_scripts, check_proof, match_axiom, Axiom, SpotCheck};
use mlms::parse::{parse_formula, parse_proof, print_formula, print_proof};
use proptest::prelude::*;

fn script(name: &str, f: &Formula) -> hilbert::ProofScript {
    parse_proof(&format!("name: {name}\n1. {} ; TAUT\n", print_formula(f))).unwrap()
}

proptest! {
    #![proptest_config(common::cases(96))]

    #[test]
    fn derived_rules_expand_to_checkable_scripts(f in common::formula(3, true)) {
        let store = bundled_lemmas().unwrap();
        let base = script("base", &fm::implies(f.clone(), f.clone()));
        prop_assert!(check_proof(&base, &store).is_ok());

        let k = hilbert::neck(&base);
        prop_assert_eq!(k.conclusion(), Some(&fm::boxk(fm::implies(f.clone(), f.clone()))));
        prop_assert!(check_proof(&k, &store).is_ok(), "{}", print_proof(&k));

        let kx = hilbert::necms(&base, "x");
        prop_assert!(check_proof(&kx, &store).is_ok(), "{}", print_proof(&kx));

        let kk = script("kk", &fm::implies(fm::boxk(f.clone()), fm::boxk(f.clone())));
        let r = hilbert::rktoms(&kk, "w9").unwrap();
        prop_assert!(check_proof(&r, &store).is_ok(), "{}", print_proof(&r));

        let both = fm::implies(f.clone(), f.clone());
        let eqv = script("eqv", &fm::and(both.clone(), both));
        let ctx = fm::and(Formula::Atom("p".into(), vec![]), fm::boxx("x", Formula::Atom("p".into(), vec![])));
        if let Some(re) = hilbert::replace_equivalents(&eqv, &ctx, "p") {
            prop_assert!(check_proof(&re, &store).is_ok(), "{}", print_proof(&re));
        }
    }

    #[test]
    fn subid_is_symmetric(f in common::formula(3, true), g in common::formula(3, true)) {
        let a = fm::implies(fm::eq("x", "y"), fm::implies(f.clone(), g.clone()));
        let b = fm::implies(fm::eq("x", "y"), fm::implies(g, f));
        prop_assert_eq!(match_axiom(Axiom::SubId, &a), match_axiom(Axiom::SubId, &b));
    }
}

#[test]
fn every_single_line_mutation_is_rejected() {
    let store = bundled_lemmas().unwrap();
    for (name, _, s) in bundled_scripts() {
        assert!(check_proof(&s, &store).is_ok(), "{name}");
        let again = parse_proof(&print_proof(&s)).unwrap();
        assert!(check_proof(&again, &store).is_ok(), "{name} after a round trip");
        for i in 0..s.lines.len() {
            let mut m = s.clone();
            m.lines[i].formula = fm::not(m.lines[i].formula.clone());
            assert!(check_proof(&m, &store).is_err(), "{name}: negating line {}", i + 1);
        }
    }
}

#[test]
fn bundled_lines_have_no_small_s5_countermodel() {
    for (name, _, s) in bundled_scripts() {
        for (i, l) in s.lines.iter().enumerate() {
            let r = hilbert::soundness_spot_check(&l.formula, 3, 3);
            assert_eq!(r, SpotCheck::NoCounterexampleWithinBounds, "{name} line {}", i + 1);
        }
    }
}

#[test]
fn k_schema_for_mention_some_fails() {
    let k = parse_formula("K[x](P(x) -> Q(x)) -> (K[x] P(x) -> K[x] Q(x))").unwrap();
    match hilbert::soundness_spot_check(&k, 1, 2) {
        SpotCheck::Counterexample(w) => {
            assert_eq!(w.model.worlds.len(), 1);
            assert!(!mlms::semantics::mc(&w.model, w.world, &w.assignment, &k).unwrap());
        }
        SpotCheck::NoCounterexampleWithinBounds => panic!("expected a countermodel"),
    }
}
