mod common;

use mlms::bisim::{self, check_relation, Game};
use mlms::harness::{duplicate_world, gen_model, gen_pointed_pair, permute, GenConfig, PAIR_ONE, PAIR_TWO};
use mlms::parse::parse_model;
use mlms::semantics::{mc, Assignment, FrameClass, KripkeModel};
use proptest::prelude::*;
use rand::Rng;

fn small(seed: u64) -> GenConfig {
    GenConfig {
        max_w: 3,
        max_d: 2,
        signature: vec![("P".into(), 1), ("p".into(), 0)],
        ..common::config(FrameClass::Arbitrary, seed)
    }
}

fn sample(seed: u64) -> (KripkeModel, usize) {
    let cfg = small(seed);
    let mut rng = cfg.rng(0);
    let m = gen_model(&cfg, &mut rng);
    let w = rng.gen_range(0..m.worlds.len());
    (m, w)
}

fn seq_assignment(seq: &[usize]) -> Assignment {
    let mut a = Assignment::new();
    for (i, &o) in seq.iter().enumerate() {
        a.map.insert(format!("x{}", i + 1), o);
    }
    a
}

fn named(m: &KripkeModel, w: &str, objs: &[&str]) -> (usize, Vec<usize>) {
    (m.world_index(w).unwrap(), objs.iter().map(|o| m.object_index(o).unwrap()).collect())
}

proptest! {
    #![proptest_config(common::cases(256))]

    #[test]
    fn bisimilarity_is_an_equivalence(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (m, w) = sample(s1);
        let (n, v) = sample(s2);
        prop_assert!(bisim::bisimilar(&m, w, &[], &m, w, &[]).unwrap());
        prop_assert_eq!(
            bisim::bisimilar(&m, w, &[], &n, v, &[]).unwrap(),
            bisim::bisimilar(&n, v, &[], &m, w, &[]).unwrap()
        );
        // m ~ copy(m); so m ~ n iff copy(m) ~ n
        let x = (s1 as usize) % m.worlds.len();
        let c = duplicate_world(&m, x);
        prop_assert!(bisim::bisimilar(&m, w, &[], &c, w, &[]).unwrap());
        prop_assert_eq!(
            bisim::bisimilar(&m, w, &[], &n, v, &[]).unwrap(),
            bisim::bisimilar(&c, w, &[], &n, v, &[]).unwrap()
        );
    }

    #[test]
    fn bisimilarity_is_transitive(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (m, w) = sample(s1);
        let (n, v) = sample(s2);
        let (k, u) = sample(s3);
        if bisim::bisimilar(&m, w, &[], &n, v, &[]).unwrap() && bisim::bisimilar(&n, v, &[], &k, u, &[]).unwrap() {
            prop_assert!(bisim::bisimilar(&m, w, &[], &k, u, &[]).unwrap());
        }
    }

    #[test]
    fn fixpoint_matches_the_bounded_game(s1 in any::<u64>(), s2 in any::<u64>(), i in 0usize..4, j in 0usize..4) {
        let (m, w) = sample(s1);
        let (n, v) = sample(s2);
        let a: Vec<usize> = m.delta[w].iter().copied().cycle().skip(i).take(1).collect();
        let b: Vec<usize> = n.delta[v].iter().copied().cycle().skip(j).take(1).collect();
        let g = Game::new(&m, w, &a, &n, v, &b).unwrap();
        for k in 0..=g.rounds + 1 {
            prop_assert_eq!(g.survives(k), bisim::game_bisimilar_bounded(&m, w, &a, &n, v, &b, k), "depth {}", k);
        }
        prop_assert_eq!(g.bisimilar(), g.survives(g.rounds + 1));
    }

    #[test]
    fn distinguishing_formulas_distinguish(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (m, w) = sample(s1);
        let (n, v) = sample(s2);
        let a: Vec<usize> = m.delta[w].iter().copied().take(1).collect();
        let b: Vec<usize> = n.delta[v].iter().copied().take(1).collect();
        match bisim::distinguish(&m, w, &a, &n, v, &b).unwrap() {
            Some(f) => {
                prop_assert!(!bisim::bisimilar(&m, w, &a, &n, v, &b).unwrap());
                prop_assert!(mc(&m, w, &seq_assignment(&a), &f).unwrap());
                prop_assert!(!mc(&n, v, &seq_assignment(&b), &f).unwrap());
            }
            None => prop_assert!(bisim::bisimilar(&m, w, &a, &n, v, &b).unwrap()),
        }
    }

    #[test]
    fn bisimilar_points_agree_on_formulas(seed in any::<u64>(), f in common::formula(4, true)) {
        let cfg = common::config(FrameClass::Arbitrary, seed);
        let (m, w, n, v) = gen_pointed_pair(&cfg, &mut cfg.rng(0));
        // close f by binding its free variables
        let g = mlms::formula::free_vars(&f).into_iter().fold(f, |acc, x| mlms::formula::boxx(&x, acc));
        prop_assert_eq!(mc(&m, w, &Assignment::new(), &g).unwrap(), mc(&n, v, &Assignment::new(), &g).unwrap());
    }

    #[test]
    fn renaming_objects_carries_sequences(seed in any::<u64>(), f in common::formula(4, true)) {
        let cfg = common::config(FrameClass::Arbitrary, seed);
        let mut rng = cfg.rng(1);
        let m = gen_model(&cfg, &mut rng);
        let w = rng.gen_range(0..m.worlds.len());
        let wp: Vec<usize> = (0..m.worlds.len()).rev().collect();
        let op: Vec<usize> = (0..m.objects.len()).rev().collect();
        let n = permute(&m, &wp, &op);
        let a: Vec<usize> = m.delta[w].iter().copied().take(2).collect();
        let b: Vec<usize> = a.iter().map(|&o| op[o]).collect();
        prop_assert!(bisim::bisimilar(&m, w, &a, &n, wp[w], &b).unwrap());
        let keep: Vec<String> = (1..=a.len()).map(|k| format!("x{k}")).collect();
        let g = mlms::formula::rename_free(&f, &[("x".to_string(), "x1".to_string()), ("y".to_string(), "x2".to_string())].into_iter().take(a.len()).collect());
        let g = mlms::formula::free_vars(&g).into_iter().filter(|x| !keep.contains(x)).fold(g, |acc, x| mlms::formula::diax(&x, acc));
        prop_assert_eq!(
            mc(&m, w, &seq_assignment(&a), &g).unwrap(),
            mc(&n, wp[w], &seq_assignment(&b), &g).unwrap()
        );
    }
}

#[test]
fn example_relations_are_bisimulations() {
    let (m, n) = (parse_model(PAIR_ONE.0).unwrap(), parse_model(PAIR_ONE.1).unwrap());
    let z = [
        (named(&m, "w", &[]), named(&n, "s", &[])),
        (named(&m, "v", &["a"]), named(&n, "t", &["c"])),
        (named(&m, "u", &["b"]), named(&n, "t", &["c"])),
        (named(&m, "v", &["b"]), named(&n, "r", &["c"])),
        (named(&m, "u", &["a"]), named(&n, "r", &["c"])),
    ];
    assert!(check_relation(&m, &n, &z).unwrap());
    assert!(!check_relation(&m, &n, &z[..4]).unwrap());
    assert!(bisim::bisimilar(&m, 0, &[], &n, 0, &[]).unwrap());

    let (m, n) = (parse_model(PAIR_TWO.0).unwrap(), parse_model(PAIR_TWO.1).unwrap());
    let z = [
        (named(&m, "w", &[]), named(&n, "s", &[])),
        (named(&m, "u", &["a"]), named(&n, "t", &["c"])),
        (named(&m, "v", &["b"]), named(&n, "t", &["c"])),
        (named(&m, "u", &["b"]), named(&n, "t", &["c"])),
    ];
    assert!(check_relation(&m, &n, &z).unwrap());
    assert!(bisim::bisimilar(&m, 0, &[], &n, 0, &[]).unwrap());
}
