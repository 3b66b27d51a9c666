mod common;

use std::collections::{BTreeMap, BTreeSet};

use mlms::formula::free_vars;
use mlms::harness::PAIR_ONE;
use mlms::parse::parse_model;
use mlms::semantics::{mc, Assignment, FrameClass, KripkeModel};
use mlms::translate::{
    self, embed_prenex_fol, fo_eval, model_to_structure, object_structure, parse_prenex, to_2sfol, to_fol1, Elem,
    EmbedMode, FoFormula, Sort, TranslateOptions,
};
use mlms::bisim;
use proptest::prelude::*;

fn env(w: usize, a: &Assignment) -> BTreeMap<String, Elem> {
    let mut e: BTreeMap<String, Elem> = a.map.iter().map(|(k, &o)| (k.clone(), Elem::Object(o))).collect();
    e.insert("u".into(), Elem::World(w));
    e
}

proptest! {
    #![proptest_config(common::cases(512))]

    #[test]
    fn two_sorted_translation_agrees_with_mc(f in common::formula(4, true), (m, w, a) in common::pointed(FrameClass::Arbitrary)) {
        let s = model_to_structure(&m);
        let want = mc(&m, w, &a, &f).unwrap();
        prop_assert_eq!(fo_eval(&s, &env(w, &a), &to_2sfol(&f, "u")).unwrap(), want);
        let guarded = translate::to_2sfol_with(&f, "u", TranslateOptions { evx_guard: true });
        prop_assert_eq!(fo_eval(&s, &env(w, &a), &guarded).unwrap(), want);
    }

    #[test]
    fn one_sorted_reduction_agrees(f in common::formula(4, true), (m, w, a) in common::pointed(FrameClass::Arbitrary)) {
        let s = model_to_structure(&m);
        let mut sorts: BTreeMap<String, Sort> = a.map.keys().map(|k| (k.clone(), Sort::Object)).collect();
        sorts.insert("u".into(), Sort::World);
        let two = to_2sfol(&f, "u");
        let one = to_fol1(&two, &sorts);
        let with_theta = FoFormula::And(Box::new(one.formula.clone()), Box::new(one.theta.clone()));
        prop_assert_eq!(fo_eval(&s, &env(w, &a), &with_theta).unwrap(), mc(&m, w, &a, &f).unwrap());
        prop_assert!(fo_eval(&s, &env(w, &a), &one.chi).unwrap());
        prop_assert!(one.formula.free_vars().iter().all(|x| sorts.contains_key(x)));
    }

    /// Pointwise, over every structure with at most two elements: the
    /// sentence holds iff its embedding holds in the one-world reflexive
    /// model with the same domain and facts.
    #[test]
    fn prenex_embedding_tracks_first_order_truth(
        prefix in prop::collection::vec((any::<bool>(), 0usize..3), 0..3),
        f in common::formula(2, false).prop_filter("no modalities", |f| f.modal_depth() == 0),
    ) {
        let vars = ["x", "y", "z"];
        let mut text: String = prefix.iter().map(|(ex, i)| format!("{} {}. ", if *ex { "exists" } else { "forall" }, vars[*i])).collect();
        // R names the accessibility relation on the first-order side
        let matrix = mlms::parse::print_formula(&f).replace("R(", "M(");
        text.push_str(&matrix);
        let fo = parse_prenex(&text).unwrap();
        // close off what the prefix left free
        let bound: BTreeSet<&str> = prefix.iter().map(|(_, i)| vars[*i]).collect();
        let open: Vec<String> = free_vars(&f).into_iter().filter(|x| !bound.contains(x.as_str())).collect();
        for mode in [EmbedMode::DiaBox, EmbedMode::Dia] {
            let g = embed_prenex_fol(&fo, mode).unwrap();
            let open_g: Vec<String> = free_vars(&g).into_iter().collect();
            prop_assert_eq!(&open_g, &open);
            for n in 1..=2usize {
                for bits in 0u32..(1 << (2 * n + n * n + 1)) {
                    let (rels, m) = single_world(n, bits);
                    let s = object_structure(n, &rels);
                    let mut alpha = BTreeMap::new();
                    let mut sigma = Assignment::new();
                    for (k, x) in open.iter().enumerate() {
                        alpha.insert(x.clone(), Elem::Object(k % n));
                        sigma.map.insert(x.clone(), k % n);
                    }
                    prop_assert_eq!(fo_eval(&s, &alpha, &fo).unwrap(), mc(&m, 0, &sigma, &g).unwrap(), "{} / {}", text, n);
                }
            }
        }
    }
}

/// Facts for `P, Q` (unary), `M` (binary) and `p` from a bit pattern.
fn single_world(n: usize, bits: u32) -> (BTreeMap<String, BTreeSet<Vec<usize>>>, KripkeModel) {
    let mut k = 0;
    let mut take = || {
        let b = bits >> k & 1 == 1;
        k += 1;
        b
    };
    let mut rels: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for p in ["P", "Q"] {
        let e = rels.entry(p.to_string()).or_default();
        for a in 0..n {
            if take() {
                e.insert(vec![a]);
            }
        }
    }
    let e = rels.entry("M".to_string()).or_default();
    for a in 0..n {
        for b in 0..n {
            if take() {
                e.insert(vec![a, b]);
            }
        }
    }
    let e = rels.entry("p".to_string()).or_default();
    if take() {
        e.insert(vec![]);
    }
    let arity = BTreeMap::from([("P".to_string(), 1), ("Q".to_string(), 1), ("M".to_string(), 2), ("p".to_string(), 0)]);
    let m = KripkeModel {
        worlds: vec!["w".into()],
        objects: (0..n).map(|i| format!("o{i}")).collect(),
        delta: vec![(0..n).collect()],
        succ: vec![BTreeSet::from([0])],
        arity,
        rho: rels.iter().map(|(p, ts)| (p.clone(), vec![ts.clone()])).collect(),
    };
    (rels, m)
}

#[test]
fn box_exists_separates_a_bisimilar_pair() {
    let (m, n) = (parse_model(PAIR_ONE.0).unwrap(), parse_model(PAIR_ONE.1).unwrap());
    assert!(bisim::bisimilar(&m, 0, &[], &n, 0, &[]).unwrap());
    let f = parse_prenex("forall v. R(u,v) -> exists x. E(v,x) & Q_P(v,x)");
    assert!(f.is_err(), "the prenex reader only takes object formulas");
    let sentence = {
        use FoFormula::*;
        let v = "v".to_string();
        let x = "x".to_string();
        Forall(
            v.clone(),
            Some(Sort::World),
            Box::new(Implies(
                Box::new(Pred("R".into(), vec!["u".into(), v.clone()])),
                Box::new(Exists(
                    x.clone(),
                    Some(Sort::Object),
                    Box::new(And(
                        Box::new(Pred("E".into(), vec![v.clone(), x.clone()])),
                        Box::new(Pred(translate::q_pred("P"), vec![v, x])),
                    )),
                )),
            )),
        )
    };
    let at = |k: &KripkeModel| fo_eval(&model_to_structure(k), &BTreeMap::from([("u".to_string(), Elem::World(0))]), &sentence).unwrap();
    assert!(at(&m));
    assert!(!at(&n));
}
