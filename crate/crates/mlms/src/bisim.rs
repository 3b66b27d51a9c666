//! ∃□-bisimulation between finite pointed models with object sequences.
//!
//! A pair of sequences `(a⃗, b⃗)` only matters through the correspondence
//! `{(a_i, b_i)}` it induces, so the checker works on abstract states
//! `(w, v, f)` with `f` a partial injection. Bisimilarity is the greatest
//! fixpoint over the states reachable from the start, computed by rounds.
//! A state dropped in round `r` is told apart by a formula of modal depth
//! `r`, which [`distinguish`] assembles from the recorded failures.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::formula::{boxx, conj, disj, eq, not, rename_free, Formula, Var};
use crate::par;
use crate::semantics::{mc, Assignment, KripkeModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BisimError {
    #[error("sequences have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("object index {0} is out of range")]
    UnknownObject(usize),
    #[error("world index {0} is out of range")]
    UnknownWorld(usize),
}

/// A world with an object sequence.
pub type Pointed = (usize, Vec<usize>);

fn check_point(m: &KripkeModel, p: &(usize, &[usize])) -> Result<(), BisimError> {
    if p.0 >= m.worlds.len() {
        return Err(BisimError::UnknownWorld(p.0));
    }
    if let Some(&o) = p.1.iter().find(|&&o| o >= m.objects.len()) {
        return Err(BisimError::UnknownObject(o));
    }
    Ok(())
}

/// Predicates of either model with their arities.
fn predicates(m: &KripkeModel, n: &KripkeModel) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for model in [m, n] {
        for (p, k) in &model.arity {
            out.insert(p.clone(), *k);
        }
        for (p, per_world) in &model.rho {
            if let Some(t) = per_world.iter().flat_map(|s| s.iter()).next() {
                out.entry(p.clone()).or_insert(t.len());
            }
        }
    }
    out
}

fn correspondence(a: &[usize], b: &[usize]) -> Option<Vec<(usize, usize)>> {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return None;
        }
    }
    Some(fwd.into_iter().collect())
}

/// Partial isomorphism between `a⃗` at `w` and `b⃗` at `v`.
pub fn piso(m: &KripkeModel, w: usize, a: &[usize], n: &KripkeModel, v: usize, b: &[usize]) -> Result<bool, BisimError> {
    if a.len() != b.len() {
        return Err(BisimError::LengthMismatch(a.len(), b.len()));
    }
    check_point(m, &(w, a))?;
    check_point(n, &(v, b))?;
    Ok(match correspondence(a, b) {
        None => false,
        Some(f) => piso_pairs(m, w, n, v, &f, &predicates(m, n)),
    })
}

/// PISO for the correspondence `f`: every predicate fact over `dom f` at `w`
/// maps to one over `ran f` at `v`, and back.
fn piso_pairs(
    m: &KripkeModel,
    w: usize,
    n: &KripkeModel,
    v: usize,
    f: &[(usize, usize)],
    preds: &BTreeMap<String, usize>,
) -> bool {
    let fwd: BTreeMap<usize, usize> = f.iter().copied().collect();
    let ran: BTreeSet<usize> = f.iter().map(|p| p.1).collect();
    let empty = BTreeSet::new();
    preds.keys().all(|p| {
        let left = m.rho.get(p).map_or(&empty, |r| &r[w]);
        let right = n.rho.get(p).map_or(&empty, |r| &r[v]);
        let mapped: BTreeSet<Vec<usize>> = left
            .iter()
            .filter_map(|t| t.iter().map(|o| fwd.get(o).copied()).collect::<Option<Vec<_>>>())
            .collect();
        let inside: BTreeSet<Vec<usize>> = right
            .iter()
            .filter(|t| t.iter().all(|o| ran.contains(o)))
            .cloned()
            .collect();
        mapped == inside
    })
}

/// Verify that an explicit relation is an ∃□-bisimulation.
pub fn check_relation(m: &KripkeModel, n: &KripkeModel, z: &[(Pointed, Pointed)]) -> Result<bool, BisimError> {
    let set: HashSet<(&Pointed, &Pointed)> = z.iter().map(|(l, r)| (l, r)).collect();
    let member = |w: usize, a: &[usize], v: usize, b: &[usize]| set.contains(&(&(w, a.to_vec()), &(v, b.to_vec())));
    for ((w, a), (v, b)) in z {
        if !piso(m, *w, a, n, *v, b)? {
            return Ok(false);
        }
        let ext = |x: &[usize], o: usize| {
            let mut s = x.to_vec();
            s.push(o);
            s
        };
        let zig = m.delta[*w].iter().all(|&c| {
            n.delta[*v].iter().any(|&d| {
                n.succ[*v]
                    .iter()
                    .all(|&v2| m.succ[*w].iter().any(|&w2| member(w2, &ext(a, c), v2, &ext(b, d))))
            })
        });
        let zag = n.delta[*v].iter().all(|&d| {
            m.delta[*w].iter().any(|&c| {
                m.succ[*w]
                    .iter()
                    .all(|&w2| n.succ[*v].iter().any(|&v2| member(w2, &ext(a, c), v2, &ext(b, d))))
            })
        });
        if !zig || !zag {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Explicit sequence game: no PISO, Zig or Zag failure within `k` extensions.
pub fn game_bisimilar_bounded(m: &KripkeModel, w: usize, a: &[usize], n: &KripkeModel, v: usize, b: &[usize], k: usize) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let preds = predicates(m, n);
    let mut memo = HashMap::new();
    game(m, n, &preds, w, a.to_vec(), v, b.to_vec(), k, &mut memo)
}

type GameKey = (usize, Vec<usize>, usize, Vec<usize>, usize);

#[allow(clippy::too_many_arguments)]
fn game(
    m: &KripkeModel,
    n: &KripkeModel,
    preds: &BTreeMap<String, usize>,
    w: usize,
    a: Vec<usize>,
    v: usize,
    b: Vec<usize>,
    k: usize,
    memo: &mut HashMap<GameKey, bool>,
) -> bool {
    let key = (w, a, v, b, k);
    if let Some(&r) = memo.get(&key) {
        return r;
    }
    let (w, a, v, b, k) = key.clone();
    let ok = match correspondence(&a, &b) {
        None => false,
        Some(f) if !piso_pairs(m, w, n, v, &f, preds) => false,
        Some(_) if k == 0 => true,
        Some(_) => {
            let mut play = |c: usize, d: usize, w2: usize, v2: usize| {
                let mut a2 = a.clone();
                a2.push(c);
                let mut b2 = b.clone();
                b2.push(d);
                game(m, n, preds, w2, a2, v2, b2, k - 1, memo)
            };
            let zig = m.delta[w].iter().all(|&c| {
                n.delta[v]
                    .iter()
                    .any(|&d| n.succ[v].iter().all(|&v2| m.succ[w].iter().any(|&w2| play(c, d, w2, v2))))
            });
            zig && n.delta[v].iter().all(|&d| {
                m.delta[w]
                    .iter()
                    .any(|&c| m.succ[w].iter().all(|&w2| n.succ[v].iter().any(|&v2| play(c, d, w2, v2))))
            })
        }
    };
    memo.insert(key, ok);
    ok
}

// ---------------------------------------------------------------- fixpoint

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbstractState {
    pub w: usize,
    pub v: usize,
    /// Sorted pairs `(c, d)`; functional and injective.
    pub f: Vec<(usize, usize)>,
}

impl AbstractState {
    fn extend(&self, c: usize, d: usize) -> Option<Vec<(usize, usize)>> {
        for &(x, y) in &self.f {
            if (x == c) != (y == d) {
                return None;
            }
            if x == c {
                return Some(self.f.clone());
            }
        }
        let mut g = self.f.clone();
        g.push((c, d));
        g.sort_unstable();
        Some(g)
    }
}

/// Successor state ids indexed by `[w' position][v' position]`.
type Successors = Vec<Vec<usize>>;

/// The reachable state space with the outcome of the fixpoint.
pub struct Game<'m> {
    m: &'m KripkeModel,
    n: &'m KripkeModel,
    preds: BTreeMap<String, usize>,
    pub states: Vec<AbstractState>,
    /// `ext[s][ci][di]`: for `c = δ(w)[ci]`, `d = δ(v)[di]`, the successors
    /// of the extended state, or `None` when `f ∪ {(c,d)}` is not injective.
    ext: Vec<Vec<Vec<Option<Successors>>>>,
    piso: Vec<bool>,
    /// Round in which a state was dropped (0 = PISO fails); `None` survives.
    pub removed: Vec<Option<usize>>,
    pub rounds: usize,
    start: Option<usize>,
}

impl<'m> Game<'m> {
    pub fn new(m: &'m KripkeModel, w: usize, a: &[usize], n: &'m KripkeModel, v: usize, b: &[usize]) -> Result<Self, BisimError> {
        if a.len() != b.len() {
            return Err(BisimError::LengthMismatch(a.len(), b.len()));
        }
        check_point(m, &(w, a))?;
        check_point(n, &(v, b))?;
        let mut g = Game {
            m,
            n,
            preds: predicates(m, n),
            states: Vec::new(),
            ext: Vec::new(),
            piso: Vec::new(),
            removed: Vec::new(),
            rounds: 0,
            start: None,
        };
        if let Some(f) = correspondence(a, b) {
            g.explore(AbstractState { w, v, f });
            g.start = Some(0);
            g.solve();
        }
        Ok(g)
    }

    fn explore(&mut self, start: AbstractState) {
        let mut index: HashMap<AbstractState, usize> = HashMap::new();
        index.insert(start.clone(), 0);
        self.states.push(start);
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            let st = self.states[s].clone();
            let (m, n) = (self.m, self.n);
            let mut table = Vec::new();
            for &c in &m.delta[st.w] {
                let mut row = Vec::new();
                for &d in &n.delta[st.v] {
                    row.push(st.extend(c, d).map(|g| {
                        m.succ[st.w]
                            .iter()
                            .map(|&w2| {
                                n.succ[st.v]
                                    .iter()
                                    .map(|&v2| {
                                        let t = AbstractState { w: w2, v: v2, f: g.clone() };
                                        *index.entry(t.clone()).or_insert_with(|| {
                                            self.states.push(t);
                                            queue.push_back(self.states.len() - 1);
                                            self.states.len() - 1
                                        })
                                    })
                                    .collect()
                            })
                            .collect()
                    }));
                }
                table.push(row);
            }
            self.ext.push(table);
        }
    }

    /// The first `c` with no answering `d`, if any. An extension that breaks
    /// injectivity is never in the relation, but the successor condition can
    /// still hold vacuously.
    fn zig(&self, s: usize, alive: &dyn Fn(usize) -> bool) -> Option<usize> {
        let st = &self.states[s];
        let nw = self.m.succ[st.w].len();
        let nv = self.n.succ[st.v].len();
        let ext = &self.ext[s];
        (0..ext.len()).find(|&ci| {
            !ext[ci].iter().any(|cell| match cell {
                None => nv == 0,
                Some(grid) => (0..nv).all(|vi| (0..nw).any(|wi| alive(grid[wi][vi]))),
            })
        })
    }

    fn zag(&self, s: usize, alive: &dyn Fn(usize) -> bool) -> Option<usize> {
        let st = &self.states[s];
        let nw = self.m.succ[st.w].len();
        let nv = self.n.succ[st.v].len();
        let ext = &self.ext[s];
        (0..self.n.delta[st.v].len()).find(|&di| {
            !ext.iter().any(|row| match &row[di] {
                None => nw == 0,
                Some(grid) => (0..nw).all(|wi| (0..nv).any(|vi| alive(grid[wi][vi]))),
            })
        })
    }

    fn solve(&mut self) {
        let ns = self.states.len();
        self.piso = par::map(&self.states, |st| piso_pairs(self.m, st.w, self.n, st.v, &st.f, &self.preds));
        self.removed = self.piso.iter().map(|&p| if p { None } else { Some(0) }).collect();
        let mut round = 0;
        loop {
            round += 1;
            let good: Vec<bool> = self.removed.iter().map(|r| r.is_none()).collect();
            let alive = |t: usize| good[t];
            let drop = par::map_range(ns, |s| good[s] && (self.zig(s, &alive).is_some() || self.zag(s, &alive).is_some()));
            if !drop.iter().any(|&d| d) {
                break;
            }
            for (s, d) in drop.into_iter().enumerate() {
                if d {
                    self.removed[s] = Some(round);
                }
            }
        }
        self.rounds = round - 1;
    }

    pub fn bisimilar(&self) -> bool {
        self.start.is_some_and(|s| self.removed[s].is_none())
    }

    /// Whether the start state survives the first `k` rounds, which is what
    /// the explicit game checks with `k` extensions.
    pub fn survives(&self, k: usize) -> bool {
        self.start.is_some_and(|s| self.removed[s].is_none_or(|r| r > k))
    }

    /// The surviving reachable states: an ∃□-bisimulation on abstract states.
    pub fn relation(&self) -> Vec<&AbstractState> {
        self.states
            .iter()
            .zip(&self.removed)
            .filter(|(_, r)| r.is_none())
            .map(|(s, _)| s)
            .collect()
    }
}

pub fn bisimilar(m: &KripkeModel, w: usize, a: &[usize], n: &KripkeModel, v: usize, b: &[usize]) -> Result<bool, BisimError> {
    Ok(Game::new(m, w, a, n, v, b)?.bisimilar())
}

// ---------------------------------------------------------------- distinguishing formulas

fn pair_var((c, d): (usize, usize)) -> Var {
    format!("_p{c}_{d}")
}

struct Builder<'g, 'm> {
    g: &'g Game<'m>,
    memo: HashMap<usize, Formula>,
    fresh: usize,
}

impl Builder<'_, '_> {
    fn bound(&mut self) -> Var {
        self.fresh += 1;
        format!("_q{}", self.fresh)
    }

    /// A formula true at `M, w` and false at `N, v` for state `s`, over the
    /// pair variables of `f`.
    fn formula(&mut self, s: usize) -> Formula {
        if let Some(f) = self.memo.get(&s) {
            return f.clone();
        }
        let g = self.g;
        let st = &g.states[s];
        let r = g.removed[s].expect("only dropped states are distinguished");
        let out = if r == 0 {
            self.atomic(st)
        } else {
            let alive = |t: usize| g.removed[t].is_none_or(|rt| rt >= r);
            if let Some(ci) = g.zig(s, &alive) {
                self.zig_formula(s, ci, &alive)
            } else {
                let di = g.zag(s, &alive).expect("a dropped state fails Zig or Zag");
                self.zag_formula(s, di, &alive)
            }
        };
        self.memo.insert(s, out.clone());
        out
    }

    fn atomic(&self, st: &AbstractState) -> Formula {
        let g = self.g;
        let empty = BTreeSet::new();
        let fwd: BTreeMap<usize, usize> = st.f.iter().copied().collect();
        let back: BTreeMap<usize, usize> = st.f.iter().map(|&(c, d)| (d, c)).collect();
        for p in g.preds.keys() {
            let left = g.m.rho.get(p).map_or(&empty, |r| &r[st.w]);
            let right = g.n.rho.get(p).map_or(&empty, |r| &r[st.v]);
            for t in left {
                if let Some(u) = t.iter().map(|o| fwd.get(o).copied()).collect::<Option<Vec<_>>>() {
                    if !right.contains(&u) {
                        let args = t.iter().zip(&u).map(|(&c, &d)| pair_var((c, d))).collect();
                        return Formula::Atom(p.clone(), args);
                    }
                }
            }
            for u in right {
                if let Some(t) = u.iter().map(|o| back.get(o).copied()).collect::<Option<Vec<_>>>() {
                    if !left.contains(&t) {
                        let args = t.iter().zip(u).map(|(&c, &d)| pair_var((c, d))).collect();
                        return not(Formula::Atom(p.clone(), args));
                    }
                }
            }
        }
        unreachable!("PISO failure without a differing fact")
    }

    /// Formula for the extension by `(c, d)` into `(w', v')`, with the new
    /// position named `x`.
    fn child(&mut self, s: usize, ci: usize, di: usize, wi: usize, vi: usize, x: &str) -> Formula {
        let g = self.g;
        let st = &g.states[s];
        let c = g.m.delta[st.w].iter().nth(ci).copied().unwrap();
        let d = g.n.delta[st.v].iter().nth(di).copied().unwrap();
        match &g.ext[s][ci][di] {
            None => {
                // f ∪ {(c,d)} breaks injectivity: say which way with ≈.
                if let Some(&(_, d2)) = st.f.iter().find(|p| p.0 == c) {
                    eq(x, &pair_var((c, d2)))
                } else {
                    let &(c2, _) = st.f.iter().find(|p| p.1 == d).unwrap();
                    not(eq(x, &pair_var((c2, d))))
                }
            }
            Some(grid) => {
                let t = grid[wi][vi];
                let inner = self.formula(t);
                let map = BTreeMap::from([(pair_var((c, d)), x.to_string())]);
                rename_free(&inner, &map)
            }
        }
    }

    fn zig_formula(&mut self, s: usize, ci: usize, alive: &dyn Fn(usize) -> bool) -> Formula {
        let g = self.g;
        let st = g.states[s].clone();
        let x = self.bound();
        let nw = g.m.succ[st.w].len();
        let nv = g.n.succ[st.v].len();
        let mut conjuncts = Vec::new();
        for di in 0..g.n.delta[st.v].len() {
            // a successor of v that no successor of w matches
            let vi = (0..nv)
                .find(|&vi| match &g.ext[s][ci][di] {
                    None => true,
                    Some(grid) => (0..nw).all(|wi| !alive(grid[wi][vi])),
                })
                .expect("Zig fails for every d");
            let disjuncts = (0..nw).map(|wi| self.child(s, ci, di, wi, vi, &x)).collect();
            conjuncts.push(disj(disjuncts));
        }
        boxx(&x, conj(conjuncts))
    }

    fn zag_formula(&mut self, s: usize, di: usize, alive: &dyn Fn(usize) -> bool) -> Formula {
        let g = self.g;
        let st = g.states[s].clone();
        let x = self.bound();
        let nw = g.m.succ[st.w].len();
        let nv = g.n.succ[st.v].len();
        let mut conjuncts = Vec::new();
        for ci in 0..g.m.delta[st.w].len() {
            let wi = (0..nw)
                .find(|&wi| match &g.ext[s][ci][di] {
                    None => true,
                    Some(grid) => (0..nv).all(|vi| !alive(grid[wi][vi])),
                })
                .expect("Zag fails for every c");
            let disjuncts = (0..nv).map(|vi| not(self.child(s, ci, di, wi, vi, &x))).collect();
            conjuncts.push(disj(disjuncts));
        }
        not(boxx(&x, conj(conjuncts)))
    }
}

/// A formula `φ(x1, …, xn)` with `M, w ⊨ φ[a⃗]` and `N, v ⊭ φ[b⃗]`, when the
/// pointed models are not bisimilar. Checked with `mc` before it is returned.
///
/// Only predicates appear unless the sequences or their extensions differ in
/// their identity pattern, in which case `≈` is used.
pub fn distinguish(
    m: &KripkeModel,
    w: usize,
    a: &[usize],
    n: &KripkeModel,
    v: usize,
    b: &[usize],
) -> Result<Option<Formula>, BisimError> {
    let g = Game::new(m, w, a, n, v, b)?;
    if g.bisimilar() {
        return Ok(None);
    }
    let pos = |i: usize| format!("x{}", i + 1);
    let f = match g.start {
        None => {
            // the sequences themselves disagree on identity
            let (i, j) = (0..a.len())
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .find(|&(i, j)| (a[i] == a[j]) != (b[i] == b[j]))
                .unwrap();
            let e = eq(&pos(j), &pos(i));
            if a[i] == a[j] {
                e
            } else {
                not(e)
            }
        }
        Some(s) => {
            let mut builder = Builder {
                g: &g,
                memo: HashMap::new(),
                fresh: 0,
            };
            let raw = builder.formula(s);
            let mut map = BTreeMap::new();
            for (i, (&c, &d)) in a.iter().zip(b).enumerate().rev() {
                map.insert(pair_var((c, d)), pos(i));
            }
            rename_free(&raw, &map)
        }
    };
    let mut sa = Assignment::new();
    let mut sb = Assignment::new();
    for (i, (&c, &d)) in a.iter().zip(b).enumerate() {
        sa.map.insert(pos(i), c);
        sb.map.insert(pos(i), d);
    }
    let left = mc(m, w, &sa, &f).expect("distinguishing formula evaluates on M");
    let right = mc(n, v, &sb, &f).expect("distinguishing formula evaluates on N");
    assert!(left && !right, "distinguishing formula failed its check: {f}");
    Ok(Some(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;

    pub const EX1_M: &str = r#"{"worlds": ["w","v","u"], "domain": ["a","b"],
        "delta": {"w": ["a","b"], "v": ["a","b"], "u": ["a","b"]},
        "relation": [["w","v"],["w","u"]],
        "rho": {"P": {"v": [["a"]], "u": [["b"]]}}}"#;
    pub const EX1_N: &str = r#"{"worlds": ["s","t","r"], "domain": ["c"],
        "delta": {"s": ["c"], "t": ["c"], "r": ["c"]},
        "relation": [["s","t"],["s","r"]],
        "rho": {"P": {"t": [["c"]]}}}"#;

    fn ex1() -> (KripkeModel, KripkeModel) {
        (parse_model(EX1_M).unwrap(), parse_model(EX1_N).unwrap())
    }

    #[test]
    fn piso_examples() {
        let (m, n) = ex1();
        let (v, u) = (1, 2);
        let (t, r) = (1, 2);
        assert!(piso(&m, v, &[0], &n, t, &[0]).unwrap());
        assert!(!piso(&m, v, &[0], &n, r, &[0]).unwrap());
        assert!(piso(&m, u, &[], &n, r, &[]).unwrap());
        assert_eq!(piso(&m, 0, &[0], &n, 0, &[]), Err(BisimError::LengthMismatch(1, 0)));
    }

    #[test]
    fn example_relation() {
        let (m, n) = ex1();
        let z = vec![
            ((0, vec![]), (0, vec![])),
            ((1, vec![0]), (1, vec![0])),
            ((2, vec![1]), (1, vec![0])),
            ((1, vec![1]), (2, vec![0])),
            ((2, vec![0]), (2, vec![0])),
        ];
        assert!(check_relation(&m, &n, &z).unwrap());
        assert!(!check_relation(&m, &n, &z[..4]).unwrap());
        assert!(bisimilar(&m, 0, &[], &n, 0, &[]).unwrap());
        assert!(game_bisimilar_bounded(&m, 0, &[], &n, 0, &[], 3));
    }

    #[test]
    fn dead_ends_with_empty_sequences() {
        let (m, n) = ex1();
        assert!(bisimilar(&m, 1, &[], &n, 2, &[]).unwrap());
        assert!(!bisimilar(&m, 1, &[0], &n, 2, &[0]).unwrap());
    }

    #[test]
    fn distinguishing_formulas_check_out() {
        let (m, n) = ex1();
        // v with a vs t with c agree; v with a vs r with c do not
        assert_eq!(distinguish(&m, 1, &[0], &n, 1, &[0]).unwrap(), None);
        let f = distinguish(&m, 1, &[0], &n, 2, &[0]).unwrap().unwrap();
        assert_eq!(f.to_string(), "P(x1)");
        // root of M against the dead end t
        let f = distinguish(&m, 0, &[], &n, 1, &[]).unwrap().unwrap();
        assert!(f.modal_depth() >= 1);
        let f = distinguish(&m, 0, &[0, 1], &n, 0, &[0, 0]).unwrap().unwrap();
        assert_eq!(f.to_string(), "~x1 = x2");
    }

    #[test]
    fn survives_matches_the_game() {
        let (m, n) = ex1();
        for (w, v) in [(0, 0), (0, 1), (0, 2), (1, 0), (2, 2)] {
            let g = Game::new(&m, w, &[], &n, v, &[]).unwrap();
            for k in 0..=g.rounds + 1 {
                assert_eq!(g.survives(k), game_bisimilar_bounded(&m, w, &[], &n, v, &[], k), "{w} {v} {k}");
            }
        }
    }
}
