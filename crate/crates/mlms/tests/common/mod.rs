#![allow(dead_code)]

use mlms::formula::{self as fm, Formula};
use mlms::harness::{gen_model, GenConfig};
use mlms::semantics::{Assignment, FrameClass, KripkeModel};
use proptest::prelude::*;
use rand::Rng;

pub const VARS: [&str; 3] = ["x", "y", "z"];

fn var() -> impl Strategy<Value = String> {
    prop::sample::select(&VARS[..]).prop_map(String::from)
}

fn leaf(equality: bool) -> BoxedStrategy<Formula> {
    let atoms = prop_oneof![
        var().prop_map(|x| Formula::Atom("P".into(), vec![x])),
        var().prop_map(|x| Formula::Atom("Q".into(), vec![x])),
        (var(), var()).prop_map(|(x, y)| Formula::Atom("R".into(), vec![x, y])),
        Just(Formula::Atom("p".into(), vec![])),
    ];
    if equality {
        prop_oneof![4 => atoms, 1 => (var(), var()).prop_map(|(x, y)| Formula::Eq(x, y))].boxed()
    } else {
        atoms.boxed()
    }
}

/// Formulas over `P/1, Q/1, R/2, p/0` and variables `x, y, z`.
pub fn formula(depth: u32, equality: bool) -> BoxedStrategy<Formula> {
    leaf(equality)
        .prop_recursive(depth, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(fm::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| fm::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| fm::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| fm::implies(a, b)),
                inner.clone().prop_map(fm::boxk),
                (var(), inner.clone()).prop_map(|(x, a)| fm::boxx(&x, a)),
                (var(), inner).prop_map(|(x, a)| fm::diax(&x, a)),
            ]
        })
        .boxed()
}

pub fn config(frame: FrameClass, seed: u64) -> GenConfig {
    GenConfig {
        frame,
        seed,
        max_w: 4,
        max_d: 3,
        ..GenConfig::default()
    }
}

/// A model, a world and an assignment of `x, y, z` into the local domain.
pub fn pointed(frame: FrameClass) -> impl Strategy<Value = (KripkeModel, usize, Assignment)> {
    any::<u64>().prop_map(move |seed| {
        let cfg = config(frame, seed);
        let mut rng = cfg.rng(0);
        let m = gen_model(&cfg, &mut rng);
        let w = rng.gen_range(0..m.worlds.len());
        let local: Vec<usize> = m.delta[w].iter().copied().collect();
        let mut a = Assignment::new();
        for x in VARS {
            a.map.insert(x.to_string(), local[rng.gen_range(0..local.len())]);
        }
        (m, w, a)
    })
}

/// Case count, with failures persisted next to the test sources.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: Some(Box::new(prop::test_runner::FileFailurePersistence::WithSource("regressions"))),
        ..ProptestConfig::default()
    }
}
