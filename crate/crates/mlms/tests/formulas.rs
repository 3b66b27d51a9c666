mod common;

use std::collections::BTreeMap;

use mlms::formula::{self as fm, free_vars};
use mlms::parse::{model_to_file, parse_formula, parse_model, print_formula};
use mlms::semantics::{mc, FrameClass};
use proptest::prelude::*;

proptest! {
    #![proptest_config(common::cases(512))]

    #[test]
    fn print_then_parse_is_identity(f in common::formula(5, true)) {
        prop_assert_eq!(parse_formula(&print_formula(&f)).unwrap(), f);
    }

    #[test]
    fn parsing_never_panics_and_is_deterministic(s in "[ -~]{0,40}") {
        prop_assert_eq!(parse_formula(&s), parse_formula(&s));
    }

    #[test]
    fn pnf_is_idempotent_small_and_equivalent(f in common::formula(5, false), (m, w, a) in common::pointed(FrameClass::Arbitrary)) {
        let p = fm::to_pnf(&f).unwrap();
        prop_assert!(fm::is_pnf(&p));
        prop_assert_eq!(fm::to_pnf(&p).unwrap(), p.clone());
        prop_assert!(fm::formula_size(&p) <= 2 * fm::formula_size(&f));
        prop_assert_eq!(mc(&m, w, &a, &f).unwrap(), mc(&m, w, &a, &p).unwrap());
    }

    #[test]
    fn relettering_keeps_size_and_truth(f in common::formula(5, true), (m, w, a) in common::pointed(FrameClass::Arbitrary)) {
        let c = fm::reletter_clean(&f);
        prop_assert!(fm::is_clean(&c));
        prop_assert_eq!(fm::formula_size(&c), fm::formula_size(&f));
        prop_assert_eq!(free_vars(&c), free_vars(&f));
        prop_assert_eq!(mc(&m, w, &a, &f).unwrap(), mc(&m, w, &a, &c).unwrap());
    }

    #[test]
    fn substituting_back_restores(f in common::formula(4, true)) {
        let y = "w9";
        if fm::is_admissible(&f, "x", y) {
            let g = fm::substitute(&f, "x", y);
            prop_assert_eq!(fm::substitute(&g, y, "x"), f);
        }
    }

    #[test]
    fn truth_depends_only_on_free_variables(
        f in common::formula(4, true),
        (m, w, a) in common::pointed(FrameClass::Arbitrary),
        pick in any::<prop::sample::Index>(),
    ) {
        let local: Vec<usize> = m.delta[w].iter().copied().collect();
        let mut b = a.clone();
        for x in common::VARS {
            if !free_vars(&f).contains(x) {
                b.map.insert(x.to_string(), local[pick.index(local.len())]);
            }
        }
        b.map.insert("unused".into(), local[0]);
        prop_assert_eq!(mc(&m, w, &a, &f).unwrap(), mc(&m, w, &b, &f).unwrap());
    }

    #[test]
    fn plain_box_is_mention_some_of_a_fresh_variable(f in common::formula(4, true), (m, w, a) in common::pointed(FrameClass::Arbitrary)) {
        let z = fm::fresh_var(&f.all_vars());
        prop_assert_eq!(mc(&m, w, &a, &fm::boxk(f.clone())).unwrap(), mc(&m, w, &a, &fm::boxx(&z, f)).unwrap());
    }

    #[test]
    fn models_survive_a_json_round_trip((m, _, _) in common::pointed(FrameClass::Arbitrary)) {
        let text = serde_json::to_string(&model_to_file(&m)).unwrap();
        prop_assert_eq!(parse_model(&text).unwrap(), m);
    }
}

#[test]
fn worked_examples() {
    let p = |s: &str| parse_formula(s).unwrap();
    assert_eq!(print_formula(&p("K[x] (P(x) | Q(x))")), "K[x] (P(x) | Q(x))");
    assert_eq!(fm::formula_size(&p("K[x] (P(x) | Q(x))")), 4);
    assert_eq!(
        print_formula(&fm::reletter_clean(&p("K[x] P(x) & D[x] Q(x)"))),
        "K[x] P(x) & D[_v0] Q(_v0)"
    );
    let pnf = fm::to_pnf(&p("~K[x] (P(x) -> K Q(y))")).unwrap();
    assert_eq!(print_formula(&pnf), "D[x] (P(x) & D[_v0] ~Q(y))");
    let renamed = fm::rename_free(&p("P(x) & K[x] Q(x)"), &BTreeMap::from([("x".to_string(), "y".to_string())]));
    assert_eq!(renamed, p("P(y) & K[x] Q(x)"));
}
