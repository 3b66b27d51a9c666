//! Random instances and the cross-checking suites built on them.
//!
//! Every case draws from its own ChaCha stream `(seed, case index)`, so a
//! case can be rerun alone and suites can be sharded freely. A failing case
//! is dumped as JSON holding the concrete instance, and [`replay`] reruns
//! the same check on it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bisim::{self, Game};
use crate::formula::{self as fm, free_vars, Formula, Var};
use crate::hilbert::{self, check_proof, soundness_spot_check, SpotCheck};
use crate::parse::{model_from_file, model_to_file, parse_formula, parse_model, parse_proof, print_formula, print_proof, ModelFile};
use crate::par;
use crate::semantics::{bounded_search, mc, mc_derived, Assignment, DerivedOp, FrameClass, KripkeModel, SearchResult};
use crate::tableau::{self, Options, Verdict};
use crate::translate::{self, Elem, Sort, TranslateOptions};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub depth: usize,
    /// Predicates with arities.
    pub signature: Vec<(String, usize)>,
    /// Variables are drawn from the first `vars` names of [`VAR_POOL`].
    pub vars: usize,
    pub max_w: usize,
    pub max_d: usize,
    pub frame: FrameClass,
    pub seed: u64,
    pub equality: bool,
    /// Share of internal nodes that are modal.
    pub modal_share: f64,
    /// Reject formulas with more nodes than this.
    pub max_size: Option<usize>,
    /// Chance that a generated atom is negated.
    pub negation: f64,
}

pub const VAR_POOL: [&str; 6] = ["x", "y", "z", "x1", "y1", "z1"];

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            depth: 3,
            signature: vec![("P".into(), 1), ("Q".into(), 1), ("R".into(), 2), ("p".into(), 0)],
            vars: 3,
            max_w: 3,
            max_d: 2,
            frame: FrameClass::Arbitrary,
            seed: 0,
            equality: true,
            modal_share: 0.4,
            max_size: None,
            negation: 0.3,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.signature.is_empty() && !self.equality {
            return Err("nothing to generate".into());
        }
        if self.vars == 0 || self.vars > VAR_POOL.len() {
            return Err(format!("vars must be between 1 and {}", VAR_POOL.len()));
        }
        if self.max_w == 0 || self.max_d == 0 {
            return Err("model bounds must be at least 1".into());
        }
        Ok(())
    }

    /// The stream for case `i`.
    pub fn rng(&self, case: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(case as u64);
        r
    }
}

fn pick_var<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Var {
    VAR_POOL[rng.gen_range(0..cfg.vars)].to_string()
}

fn gen_leaf<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Formula {
    if cfg.signature.is_empty() || (cfg.equality && rng.gen_bool(0.15)) {
        return Formula::Eq(pick_var(cfg, rng), pick_var(cfg, rng));
    }
    let (p, n) = &cfg.signature[rng.gen_range(0..cfg.signature.len())];
    let args = (0..*n).map(|_| pick_var(cfg, rng)).collect();
    let a = Formula::Atom(p.clone(), args);
    if rng.gen_bool(cfg.negation) {
        fm::not(a)
    } else {
        a
    }
}

fn gen_at<R: Rng>(cfg: &GenConfig, depth: usize, rng: &mut R) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return gen_leaf(cfg, rng);
    }
    let sub = |rng: &mut R| gen_at(cfg, depth - 1, rng);
    if rng.gen_bool(cfg.modal_share) {
        match rng.gen_range(0..3) {
            0 => fm::boxk(sub(rng)),
            1 => {
                let x = pick_var(cfg, rng);
                fm::boxx(&x, sub(rng))
            }
            _ => {
                let x = pick_var(cfg, rng);
                fm::diax(&x, sub(rng))
            }
        }
    } else {
        match rng.gen_range(0..4) {
            0 => fm::not(sub(rng)),
            1 => fm::and(sub(rng), sub(rng)),
            2 => fm::or(sub(rng), sub(rng)),
            _ => fm::implies(sub(rng), sub(rng)),
        }
    }
}

pub fn gen_formula<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Formula {
    loop {
        let f = gen_at(cfg, cfg.depth, rng);
        if cfg.max_size.is_none_or(|n| fm::formula_size(&f) <= n) {
            return f;
        }
    }
}

/// Bind every free variable outside `keep` under a random `K[x]` or `D[x]`.
pub fn close<R: Rng>(f: Formula, keep: &[Var], rng: &mut R) -> Formula {
    free_vars(&f)
        .into_iter()
        .filter(|v| !keep.contains(v))
        .fold(f, |acc, v| if rng.gen_bool(0.5) { fm::boxx(&v, acc) } else { fm::diax(&v, acc) })
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A model in the configured frame class. Domains are increasing by
/// construction: each world's random domain is pushed along the relation.
pub fn gen_model<R: Rng>(cfg: &GenConfig, rng: &mut R) -> KripkeModel {
    let nw = rng.gen_range(1..=cfg.max_w);
    let nd = rng.gen_range(1..=cfg.max_d);
    let mut succ = vec![BTreeSet::new(); nw];
    let delta: Vec<BTreeSet<usize>> = match cfg.frame {
        FrameClass::S5 => {
            let class: Vec<usize> = (0..nw).map(|w| rng.gen_range(0..=w)).collect();
            for w in 0..nw {
                for v in 0..nw {
                    if class[w] == class[v] {
                        succ[w].insert(v);
                    }
                }
            }
            vec![(0..nd).collect(); nw]
        }
        FrameClass::Arbitrary => {
            for s in succ.iter_mut() {
                for v in 0..nw {
                    if rng.gen_bool(0.4) {
                        s.insert(v);
                    }
                }
            }
            let mut d: Vec<BTreeSet<usize>> = (0..nw)
                .map(|_| {
                    let mut s: BTreeSet<usize> = (0..nd).filter(|_| rng.gen_bool(0.5)).collect();
                    if s.is_empty() {
                        s.insert(rng.gen_range(0..nd));
                    }
                    s
                })
                .collect();
            loop {
                let mut changed = false;
                for w in 0..nw {
                    for &v in &succ[w].clone() {
                        let add: Vec<usize> = d[w].difference(&d[v]).copied().collect();
                        changed |= !add.is_empty();
                        d[v].extend(add);
                    }
                }
                if !changed {
                    break;
                }
            }
            d
        }
    };
    let mut rho = BTreeMap::new();
    let mut arity = BTreeMap::new();
    for (p, n) in &cfg.signature {
        arity.insert(p.clone(), *n);
        let tuples = all_tuples(nd, *n);
        let per_world = (0..nw)
            .map(|_| tuples.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect())
            .collect();
        rho.insert(p.clone(), per_world);
    }
    KripkeModel {
        worlds: names("w", nw),
        objects: names("o", nd),
        delta,
        succ,
        arity,
        rho,
    }
}

fn all_tuples(nd: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..nd).map(move |a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// An assignment of the given variables into `δ(w)`.
pub fn gen_assignment<R: Rng>(m: &KripkeModel, w: usize, vars: &BTreeSet<Var>, rng: &mut R) -> Assignment {
    let local: Vec<usize> = m.delta[w].iter().copied().collect();
    let mut a = Assignment::new();
    for v in vars {
        a.map.insert(v.clone(), *local.choose(rng).unwrap());
    }
    a
}

/// Copy world `x`: same domain, facts and successors, and every world that
/// sees `x` sees the copy too. The identity plus `(x, copy)` is an
/// ∃□-bisimulation, and S5 frames stay S5.
pub fn duplicate_world(m: &KripkeModel, x: usize) -> KripkeModel {
    let mut n = m.clone();
    let c = m.worlds.len();
    n.worlds.push(format!("{}'", m.worlds[x]));
    n.delta.push(m.delta[x].clone());
    let mut s = m.succ[x].clone();
    if s.contains(&x) {
        s.insert(c);
    }
    n.succ.push(s);
    for w in 0..c {
        if m.succ[w].contains(&x) {
            n.succ[w].insert(c);
        }
    }
    for per_world in n.rho.values_mut() {
        let facts = per_world[x].clone();
        per_world.push(facts);
    }
    n
}

/// Rename and reorder worlds and objects by permutations.
pub fn permute(m: &KripkeModel, wp: &[usize], op: &[usize]) -> KripkeModel {
    let nw = m.worlds.len();
    let nd = m.objects.len();
    let mut worlds = vec![String::new(); nw];
    let mut delta = vec![BTreeSet::new(); nw];
    let mut succ = vec![BTreeSet::new(); nw];
    for w in 0..nw {
        worlds[wp[w]] = format!("n{}", wp[w]);
        delta[wp[w]] = m.delta[w].iter().map(|&a| op[a]).collect();
        succ[wp[w]] = m.succ[w].iter().map(|&v| wp[v]).collect();
    }
    let rho = m
        .rho
        .iter()
        .map(|(p, per_world)| {
            let mut out = vec![BTreeSet::new(); nw];
            for (w, ts) in per_world.iter().enumerate() {
                out[wp[w]] = ts.iter().map(|t| t.iter().map(|&a| op[a]).collect()).collect();
            }
            (p.clone(), out)
        })
        .collect();
    KripkeModel {
        worlds,
        objects: (0..nd).map(|i| format!("d{i}")).collect(),
        delta,
        succ,
        arity: m.arity.clone(),
        rho,
    }
}

/// A pointed pair bisimilar by construction: world copies, then a renaming.
pub fn gen_pointed_pair<R: Rng>(cfg: &GenConfig, rng: &mut R) -> (KripkeModel, usize, KripkeModel, usize) {
    let m = gen_model(cfg, rng);
    let w = rng.gen_range(0..m.worlds.len());
    let mut n = m.clone();
    for _ in 0..rng.gen_range(1..=2) {
        let x = rng.gen_range(0..m.worlds.len());
        n = duplicate_world(&n, x);
    }
    let mut wp: Vec<usize> = (0..n.worlds.len()).collect();
    wp.shuffle(rng);
    let mut op: Vec<usize> = (0..n.objects.len()).collect();
    op.shuffle(rng);
    let n = permute(&n, &wp, &op);
    (m, w, n, wp[w])
}

// ---------------------------------------------------------------- cases

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pointed {
    pub model: ModelFile,
    pub world: String,
    #[serde(default)]
    pub assignment: BTreeMap<Var, String>,
}

impl Pointed {
    fn new(m: &KripkeModel, w: usize, a: &Assignment) -> Self {
        Pointed {
            model: model_to_file(m),
            world: m.worlds[w].clone(),
            assignment: a.map.iter().map(|(k, &o)| (k.clone(), m.objects[o].clone())).collect(),
        }
    }

    fn load(&self) -> Result<(KripkeModel, usize, Assignment), String> {
        let m = model_from_file(&self.model, false).map_err(|e| e.to_string())?;
        let w = m.world_index(&self.world).map_err(|e| e.to_string())?;
        let mut a = Assignment::new();
        for (k, o) in &self.assignment {
            a.map.insert(k.clone(), m.object_index(o).map_err(|e| e.to_string())?);
        }
        Ok((m, w, a))
    }
}

/// A concrete instance of one suite's check.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "kebab-case")]
pub enum Case {
    Pnf {
        formula: String,
        at: Pointed,
    },
    BisimInvariance {
        left: Pointed,
        right: Pointed,
        /// Object sequences, by name.
        seq_left: Vec<String>,
        seq_right: Vec<String>,
        /// Formulas over `x1..xn` for sequences of length n.
        formulas: Vec<String>,
        /// Bisimilar by construction; the checker must agree.
        constructed: bool,
    },
    TableauVsOracle {
        formula: String,
    },
    Translation {
        formula: String,
        at: Pointed,
    },
    S5Equivalences {
        formula: String,
        at: Pointed,
        x: Var,
        vec: Vec<Var>,
    },
    Proofs {
        /// The script text as checked, mutation applied.
        script: String,
        mutated_line: Option<usize>,
    },
}

/// Counters a check reports back, merged per suite.
pub type Notes = BTreeMap<String, usize>;

fn note(n: &mut Notes, key: &str, v: usize) {
    *n.entry(key.to_string()).or_insert(0) += v;
}

fn note_max(n: &mut Notes, key: &str, v: usize) {
    let e = n.entry(key.to_string()).or_insert(0);
    *e = (*e).max(v);
}

fn pf(s: &str) -> Result<Formula, String> {
    parse_formula(s).map_err(|e| format!("{s}: {e}"))
}

/// Bounds for the tableau oracle: enough worlds for sizes up to seven.
pub const ORACLE_MAX_W: usize = 64;
pub const ORACLE_MAX_D: usize = 7;
/// Live tableau frames stay within this multiple of the formula size.
pub const LIVE_FRAME_FACTOR: usize = 2;

pub fn check_case(case: &Case, notes: &mut Notes) -> Result<(), String> {
    match case {
        Case::Pnf { formula, at } => {
            let f = pf(formula)?;
            let (m, w, a) = at.load()?;
            let clean = fm::reletter_clean(&f);
            if !fm::is_clean(&clean) {
                return Err(format!("reletter_clean gave an unclean {}", print_formula(&clean)));
            }
            let p = fm::to_pnf(&clean).map_err(|e| e.to_string())?;
            if !fm::is_pnf(&p) {
                return Err(format!("not in PNF: {}", print_formula(&p)));
            }
            if fm::to_pnf(&p).map_err(|e| e.to_string())? != p {
                return Err("to_pnf is not idempotent".into());
            }
            let n = fm::formula_size(&f);
            if fm::formula_size(&clean) != n {
                return Err("relettering changed the size".into());
            }
            if fm::formula_size(&p) > 2 * n {
                return Err(format!("PNF size {} exceeds twice {n}", fm::formula_size(&p)));
            }
            let vals: Vec<bool> = [&f, &clean, &p]
                .iter()
                .map(|g| mc(&m, w, &a, g).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            if vals.iter().any(|&v| v != vals[0]) {
                return Err(format!("truth values differ (original, clean, pnf) = {vals:?}"));
            }
            Ok(())
        }
        Case::BisimInvariance {
            left,
            right,
            seq_left,
            seq_right,
            formulas,
            constructed,
        } => {
            let (m, w, _) = left.load()?;
            let (n, v, _) = right.load()?;
            let idx = |k: &KripkeModel, s: &[String]| {
                s.iter()
                    .map(|o| k.object_index(o).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()
            };
            let (a, b) = (idx(&m, seq_left)?, idx(&n, seq_right)?);
            let g = Game::new(&m, w, &a, &n, v, &b).map_err(|e| e.to_string())?;
            let same = g.bisimilar();
            if *constructed && !same {
                return Err("pair built to be bisimilar is reported not bisimilar".into());
            }
            note(notes, if *constructed { "constructed pairs" } else { "random pairs" }, 1);
            note(notes, if same { "bisimilar" } else { "not bisimilar" }, 1);
            for k in 0..=g.rounds + 1 {
                if g.survives(k) != bisim::game_bisimilar_bounded(&m, w, &a, &n, v, &b, k) {
                    return Err(format!("fixpoint and sequence game disagree at depth {k}"));
                }
            }
            if same {
                let sa = seq_assignment(&a);
                let sb = seq_assignment(&b);
                for text in formulas {
                    let f = pf(text)?;
                    let l = mc(&m, w, &sa, &f).map_err(|e| e.to_string())?;
                    let r = mc(&n, v, &sb, &f).map_err(|e| e.to_string())?;
                    if l != r {
                        return Err(format!("bisimilar points disagree on {text}"));
                    }
                    note(notes, "formulas compared", 1);
                }
            } else {
                // distinguish() asserts its own formula with mc
                let d = bisim::distinguish(&m, w, &a, &n, v, &b).map_err(|e| e.to_string())?;
                if d.is_none() {
                    return Err("no distinguishing formula for a non-bisimilar pair".into());
                }
                note(notes, "distinguishing formulas", 1);
            }
            Ok(())
        }
        Case::TableauVsOracle { formula } => {
            let f = pf(formula)?;
            let size = fm::formula_size(&f);
            let stats = tableau::run(&f, Options::default()).map_err(|e| e.to_string())?.stats;
            note_max(notes, "max live frames", stats.max_live);
            if stats.max_live > LIVE_FRAME_FACTOR * size {
                return Err(format!("{} live frames for size {size}", stats.max_live));
            }
            let verdict = tableau::decide_sat(&f).map_err(|e| e.to_string())?;
            let oracle = bounded_search(&f, ORACLE_MAX_W, ORACLE_MAX_D, FrameClass::Arbitrary);
            if verdict.is_sat() != oracle.is_found() {
                return Err(format!(
                    "tableau says {}, bounded search says {}",
                    if verdict.is_sat() { "sat" } else { "unsat" },
                    if oracle.is_found() { "sat" } else { "not found" }
                ));
            }
            if let SearchResult::Found(wit) = &oracle {
                note_max(notes, "oracle max worlds", wit.model.worlds.len());
            }
            match verdict {
                Verdict::Unsat => note(notes, "unsat", 1),
                Verdict::Sat(t) => {
                    note(notes, "sat", 1);
                    let ex = tableau::extract_model(&t).map_err(|e| e.to_string())?;
                    let m = &ex.model;
                    if !m.is_increasing() {
                        return Err("extracted model is not increasing".into());
                    }
                    if m.delta.iter().any(|d| d.is_empty()) {
                        return Err("extracted model has an empty local domain".into());
                    }
                    if ex.depth > 2 * size {
                        return Err(format!("depth {} exceeds twice the size {size}", ex.depth));
                    }
                    if m.objects.len() > size {
                        return Err(format!("{} objects exceed the size {size}", m.objects.len()));
                    }
                    if !mc(m, ex.root, &ex.assignment, &f).map_err(|e| e.to_string())? {
                        return Err("extracted model does not satisfy the formula".into());
                    }
                    note_max(notes, "extracted max worlds", m.worlds.len());
                }
            }
            Ok(())
        }
        Case::Translation { formula, at } => {
            let f = pf(formula)?;
            let (m, w, a) = at.load()?;
            let want = mc(&m, w, &a, &f).map_err(|e| e.to_string())?;
            let s = translate::model_to_structure(&m);
            let mut alpha: BTreeMap<Var, Elem> = a.map.iter().map(|(k, &o)| (k.clone(), Elem::Object(o))).collect();
            alpha.insert("u".into(), Elem::World(w));
            let two = translate::to_2sfol(&f, "u");
            let got = translate::fo_eval(&s, &alpha, &two).map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!("mc = {want}, two-sorted evaluation = {got}"));
            }
            let mut sorts: BTreeMap<Var, Sort> = a.map.keys().map(|k| (k.clone(), Sort::Object)).collect();
            sorts.insert("u".into(), Sort::World);
            let one = translate::to_fol1(&two, &sorts);
            let conj = |x: translate::FoFormula, y: translate::FoFormula| translate::FoFormula::And(Box::new(x), Box::new(y));
            let got1 = translate::fo_eval(&s, &alpha, &conj(one.formula.clone(), one.theta.clone())).map_err(|e| e.to_string())?;
            if got1 != want {
                return Err(format!("mc = {want}, one-sorted evaluation = {got1}"));
            }
            if !translate::fo_eval(&s, &alpha, &one.chi).map_err(|e| e.to_string())? {
                return Err("increasing-domain axiom fails on an increasing model".into());
            }
            let guarded = translate::to_2sfol_with(&f, "u", TranslateOptions { evx_guard: true });
            let got2 = translate::fo_eval(&s, &alpha, &guarded).map_err(|e| e.to_string())?;
            if got2 != want {
                return Err(format!("mc = {want}, guarded translation = {got2}"));
            }
            Ok(())
        }
        Case::S5Equivalences { formula, at, x, vec } => {
            let f = pf(formula)?;
            let (m, w, a) = at.load()?;
            if !m.is_s5() {
                return Err("generated model is not S5".into());
            }
            let ev = |g: &Formula| mc(&m, w, &a, g).map_err(|e| e.to_string());
            let derived = |op: DerivedOp| {
                mc_derived(&m, w, &a, &op, &f)
                    .map(|r| r.value)
                    .map_err(|e| e.to_string())
            };
            let checks = [
                (
                    "mention-all",
                    derived(DerivedOp::MentionAll(x.clone()))?,
                    ev(&fm::diax(x, fm::or(fm::boxk(f.clone()), fm::boxk(fm::not(f.clone())))))?,
                ),
                (
                    "box-forall",
                    derived(DerivedOp::BoxForall(x.clone()))?,
                    ev(&fm::diax(x, fm::boxk(f.clone())))?,
                ),
                (
                    "box-vector",
                    derived(DerivedOp::BoxVec(vec.clone()))?,
                    ev(&vec.iter().rev().fold(f.clone(), |acc, y| fm::boxx(y, acc)))?,
                ),
                ("KK", ev(&fm::boxk(fm::boxk(f.clone())))?, ev(&fm::boxk(f.clone()))?),
                ("DK", ev(&fm::diamond(fm::boxk(f.clone())))?, ev(&fm::boxk(f.clone()))?),
            ];
            for (name, l, r) in checks {
                if l != r {
                    return Err(format!("{name}: {l} vs {r}"));
                }
            }
            Ok(())
        }
        Case::Proofs { script, mutated_line } => {
            let store = hilbert::bundled_lemmas().map_err(|e| e.to_string())?;
            let s = parse_proof(script).map_err(|e| e.to_string())?;
            // a script may cite itself only through earlier bundled entries
            let result = check_proof(&s, &store);
            match (mutated_line, result) {
                (None, Ok(())) => {
                    for (i, l) in s.lines.iter().enumerate() {
                        if let SpotCheck::Counterexample(_) = soundness_spot_check(&l.formula, 3, 3) {
                            return Err(format!("line {} has an S5 countermodel", i + 1));
                        }
                    }
                    note(notes, "scripts", 1);
                    Ok(())
                }
                (None, Err(e)) => Err(e.to_string()),
                (Some(i), Ok(())) => Err(format!("mutating line {i} went unnoticed")),
                (Some(_), Err(_)) => {
                    note(notes, "mutations caught", 1);
                    Ok(())
                }
            }
        }
    }
}

fn seq_assignment(seq: &[usize]) -> Assignment {
    let mut a = Assignment::new();
    for (i, &o) in seq.iter().enumerate() {
        a.map.insert(format!("x{}", i + 1), o);
    }
    a
}

// ---------------------------------------------------------------- suites

pub const SUITES: [&str; 6] = [
    "pnf",
    "bisim-invariance",
    "tableau-vs-oracle",
    "translation",
    "s5-equivalences",
    "proofs",
];

fn pick_point<R: Rng>(m: &KripkeModel, f: &Formula, rng: &mut R) -> Pointed {
    let w = rng.gen_range(0..m.worlds.len());
    let a = gen_assignment(m, w, &free_vars(f), rng);
    Pointed::new(m, w, &a)
}

/// Two small example pairs. In the first, a root sees two worlds that split
/// `P` between two objects, against one object with `P` at one of two
/// successors. In the second, `P` holds of one object at one successor,
/// against a single successor where `P` is empty.
pub const PAIR_ONE: (&str, &str) = (include_str!("../models/ex1-m.json"), include_str!("../models/ex1-n.json"));
pub const PAIR_TWO: (&str, &str) = (include_str!("../models/ex2-m.json"), include_str!("../models/ex2-n.json"));

/// Build case `i` of a suite. `None` past the end of a finite suite.
pub fn make_case(suite: &str, i: usize, cfg: &GenConfig) -> Option<Case> {
    let mut rng = cfg.rng(i);
    let rng = &mut rng;
    Some(match suite {
        "pnf" => {
            let f = gen_formula(&GenConfig { equality: false, ..cfg.clone() }, rng);
            let m = gen_model(cfg, rng);
            Case::Pnf {
                formula: print_formula(&f),
                at: pick_point(&m, &f, rng),
            }
        }
        "bisim-invariance" => {
            let fcfg = GenConfig { depth: 4, ..cfg.clone() };
            let (m, w, n, v, constructed) = match i {
                0 | 1 => {
                    let (l, r) = if i == 0 { PAIR_ONE } else { PAIR_TWO };
                    (parse_model(l).unwrap(), 0, parse_model(r).unwrap(), 0, true)
                }
                _ if i % 4 == 3 => {
                    let small = GenConfig {
                        max_w: 3,
                        max_d: 2,
                        signature: vec![("P".into(), 1), ("p".into(), 0)],
                        ..cfg.clone()
                    };
                    let m = gen_model(&small, rng);
                    let n = gen_model(&small, rng);
                    let (w, v) = (rng.gen_range(0..m.worlds.len()), rng.gen_range(0..n.worlds.len()));
                    (m, w, n, v, false)
                }
                _ => {
                    let (m, w, n, v) = gen_pointed_pair(cfg, rng);
                    (m, w, n, v, true)
                }
            };
            let len = if constructed { 0 } else { rng.gen_range(0..=1) };
            let a: Vec<usize> = (0..len).map(|_| **m.delta[w].iter().collect::<Vec<_>>().choose(rng).unwrap()).collect();
            let b: Vec<usize> = (0..len).map(|_| **n.delta[v].iter().collect::<Vec<_>>().choose(rng).unwrap()).collect();
            let keep: Vec<Var> = (1..=len).map(|k| format!("x{k}")).collect();
            let fcfg = GenConfig {
                signature: m.arity.iter().map(|(p, k)| (p.clone(), *k)).collect(),
                ..fcfg
            };
            let formulas = (0..20)
                .map(|_| {
                    let mut f = gen_formula(&fcfg, rng);
                    if let Some(x) = keep.first() {
                        f = fm::rename_free(&f, &BTreeMap::from([("x".to_string(), x.clone())]));
                    }
                    print_formula(&close(f, &keep, rng))
                })
                .collect();
            Case::BisimInvariance {
                left: Pointed::new(&m, w, &Assignment::new()),
                right: Pointed::new(&n, v, &Assignment::new()),
                seq_left: a.iter().map(|&o| m.objects[o].clone()).collect(),
                seq_right: b.iter().map(|&o| n.objects[o].clone()).collect(),
                formulas,
                constructed,
            }
        }
        "tableau-vs-oracle" => {
            // conjunctions over a small vocabulary, so that a fair share
            // of the cases is unsatisfiable
            let max = cfg.max_size.unwrap_or(7);
            let tcfg = GenConfig {
                equality: false,
                depth: 2,
                vars: 2,
                signature: vec![("P".into(), 1), ("Q".into(), 1), ("p".into(), 0)],
                modal_share: 0.6,
                negation: 0.5,
                max_size: Some(max),
                ..cfg.clone()
            };
            let small = GenConfig { max_size: Some(3), ..tcfg.clone() };
            let f = loop {
                let g = gen_formula(&tcfg, rng);
                let f = match i % 4 {
                    // g & ~g, and g against the negation of a near relative
                    0 => {
                        let g = gen_formula(&small, rng);
                        fm::and(g.clone(), fm::not(g))
                    }
                    1 => {
                        let g = gen_formula(&small, rng);
                        let h = gen_formula(&small, rng);
                        fm::and(g, fm::not(h))
                    }
                    _ => fm::and(g, gen_formula(&tcfg, rng)),
                };
                if fm::formula_size(&f) <= max {
                    break f;
                }
                if rng.gen_bool(0.2) {
                    break gen_formula(&tcfg, rng);
                }
            };
            Case::TableauVsOracle {
                formula: print_formula(&f),
            }
        }
        "translation" => {
            let f = gen_formula(cfg, rng);
            let m = gen_model(cfg, rng);
            Case::Translation {
                formula: print_formula(&f),
                at: pick_point(&m, &f, rng),
            }
        }
        "s5-equivalences" => {
            let scfg = GenConfig {
                frame: FrameClass::S5,
                vars: cfg.vars.max(2),
                ..cfg.clone()
            };
            let f = gen_formula(&scfg, rng);
            let m = gen_model(&scfg, rng);
            let x = pick_var(&scfg, rng);
            let mut pool: Vec<Var> = VAR_POOL[..scfg.vars].iter().map(|s| s.to_string()).collect();
            pool.shuffle(rng);
            let vec = pool[..2].to_vec();
            let mut vars = free_vars(&f);
            vars.extend(pool.iter().cloned());
            let w = rng.gen_range(0..m.worlds.len());
            let a = gen_assignment(&m, w, &vars, rng);
            Case::S5Equivalences {
                formula: print_formula(&f),
                at: Pointed::new(&m, w, &a),
                x,
                vec,
            }
        }
        "proofs" => {
            let scripts = hilbert::bundled_scripts();
            let mut k = i;
            for (_, _, s) in &scripts {
                if k <= s.lines.len() {
                    let mut s = s.clone();
                    let mutated_line = if k == 0 {
                        None
                    } else {
                        let l = &mut s.lines[k - 1];
                        l.formula = fm::not(l.formula.clone());
                        Some(k)
                    };
                    // keep the target so a mutated last line is also caught there
                    return Some(Case::Proofs {
                        script: print_proof(&s),
                        mutated_line,
                    });
                }
                k -= s.lines.len() + 1;
            }
            return None;
        }
        _ => return None,
    })
}

/// Number of cases in a finite suite, or `None` for generated ones.
pub fn suite_len(suite: &str) -> Option<usize> {
    (suite == "proofs").then(|| hilbert::bundled_scripts().iter().map(|(_, _, s)| s.lines.len() + 1).sum())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Failure {
    pub case: usize,
    pub message: String,
    pub dump: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<Failure>,
    pub notes: Notes,
    pub elapsed_ms: u128,
}

#[derive(Serialize, Deserialize)]
struct Dump {
    seed: u64,
    case_index: usize,
    message: String,
    case: Case,
}

/// Run a suite with cases sharded across workers; the report lists results
/// in case order regardless of scheduling.
pub fn run_suite(suite: &str, cases: usize, cfg: &GenConfig, dump: Option<&Path>) -> Result<SuiteReport, String> {
    if !SUITES.contains(&suite) {
        return Err(format!("unknown suite '{suite}' (expected one of {})", SUITES.join(", ")));
    }
    cfg.validate()?;
    let start = Instant::now();
    let n = suite_len(suite).unwrap_or(cases);
    let results = par::map_range(n, |i| {
        let case = make_case(suite, i, cfg).expect("case index in range");
        let mut notes = Notes::new();
        let r = check_case(&case, &mut notes);
        (case, r, notes)
    });
    let mut report = SuiteReport {
        suite: suite.to_string(),
        seed: cfg.seed,
        cases: n,
        passed: 0,
        failed: 0,
        failures: Vec::new(),
        notes: Notes::new(),
        elapsed_ms: 0,
    };
    for (i, (case, r, notes)) in results.into_iter().enumerate() {
        for (k, v) in notes {
            if k.starts_with("max") || k.contains(" max ") {
                note_max(&mut report.notes, &k, v);
            } else {
                note(&mut report.notes, &k, v);
            }
        }
        match r {
            Ok(()) => report.passed += 1,
            Err(message) => {
                report.failed += 1;
                let dump = match dump {
                    Some(dir) => Some(write_dump(dir, suite, cfg.seed, i, &message, &case)?),
                    None => None,
                };
                report.failures.push(Failure { case: i, message, dump });
            }
        }
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

fn write_dump(dir: &Path, suite: &str, seed: u64, i: usize, message: &str, case: &Case) -> Result<PathBuf, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(format!("{suite}-{seed}-{i}.json"));
    let d = Dump {
        seed,
        case_index: i,
        message: message.to_string(),
        case: case.clone(),
    };
    let text = serde_json::to_string_pretty(&d).map_err(|e| e.to_string())?;
    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(path)
}

/// Rerun a dumped case. Returns the recorded message and the fresh outcome.
pub fn replay(path: &Path) -> Result<(String, Result<(), String>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let d: Dump = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((d.message, check_case(&d.case, &mut Notes::new())))
}
