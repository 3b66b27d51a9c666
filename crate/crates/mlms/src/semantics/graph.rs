//! Frame-by-frame model enumeration.
//!
//! Candidates come in the order: world count, domain size, relation bitmask,
//! local domains, then the valuation. The valuation is found by a depth-first
//! search over atoms with three-valued evaluation, so a partial valuation that
//! already decides the formula stops the search early.

use std::collections::{BTreeMap, BTreeSet};

use super::{object_name, Assignment, FrameClass, KripkeModel, SearchResult, Witness};
use crate::formula::{free_vars, Formula};
use crate::par;

/// Enumerate every frame within the bounds (rooted at world 0, every world
/// reachable) and return the first model of `φ`.
///
/// Intended as an oracle for tiny bounds: the number of relations grows as
/// `2^(W*W)`.
pub fn exhaustive_search(f: &Formula, max_w: usize, max_d: usize, fc: FrameClass) -> SearchResult {
    match search(f, max_w, max_d, fc) {
        Some(w) => SearchResult::Found(w),
        None => SearchResult::NotFoundWithinBounds,
    }
}

pub(super) fn search(f: &Formula, max_w: usize, max_d: usize, fc: FrameClass) -> Option<Witness> {
    let sig = f.signature().ok()?;
    let vars: Vec<String> = free_vars(f).into_iter().collect();
    for n in 1..=max_w {
        for d in 1..=max_d {
            let found = match fc {
                FrameClass::S5 => {
                    let all: Vec<usize> = (0..n).collect();
                    let frame = Frame {
                        n,
                        d,
                        succ: vec![all; n],
                        delta: vec![(0..d).collect(); n],
                    };
                    frame.solve(f, &sig, &vars)
                }
                FrameClass::Arbitrary => {
                    assert!(n * n < 64, "relation bitmask too wide");
                    let masks: Vec<u64> = (0..1u64 << (n * n)).filter(|&m| rooted(n, m)).collect();
                    par::find_first(&masks, |&mask| {
                        let succ: Vec<Vec<usize>> = (0..n)
                            .map(|i| (0..n).filter(|&j| mask >> (i * n + j) & 1 == 1).collect())
                            .collect();
                        domains(&succ, d)
                            .into_iter()
                            .find_map(|delta| Frame { n, d, succ: succ.clone(), delta }.solve(f, &sig, &vars))
                    })
                }
            };
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

fn rooted(n: usize, mask: u64) -> bool {
    let mut seen = 1u64;
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if mask >> (i * n + j) & 1 == 1 && seen >> j & 1 == 0 {
                seen |= 1 << j;
                stack.push(j);
            }
        }
    }
    seen.count_ones() as usize == n
}

/// Increasing assignments of nonempty local domains whose union is every object.
fn domains(succ: &[Vec<usize>], d: usize) -> Vec<Vec<Vec<usize>>> {
    let n = succ.len();
    let full = (1u32 << d) - 1;
    let mut out = Vec::new();
    let mut digits = vec![1u32; n];
    loop {
        let increasing = (0..n).all(|i| succ[i].iter().all(|&j| digits[i] & !digits[j] == 0));
        let union = digits.iter().fold(0, |a, b| a | b);
        if increasing && union == full {
            out.push(
                digits
                    .iter()
                    .map(|m| (0..d).filter(|o| m >> o & 1 == 1).collect())
                    .collect(),
            );
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if digits[i] < full {
                digits[i] += 1;
                break;
            }
            digits[i] = 1;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum T3 {
    F,
    U,
    T,
}

impl T3 {
    fn not(self) -> T3 {
        match self {
            T3::F => T3::T,
            T3::U => T3::U,
            T3::T => T3::F,
        }
    }
}

struct Frame {
    n: usize,
    d: usize,
    succ: Vec<Vec<usize>>,
    delta: Vec<Vec<usize>>,
}

struct Layout<'a> {
    preds: BTreeMap<&'a str, (usize, usize)>,
    d: usize,
}

impl Layout<'_> {
    fn block(&self, arity: usize) -> usize {
        self.d.pow(arity as u32)
    }

    fn index(&self, p: &str, w: usize, tuple: impl Iterator<Item = usize>) -> usize {
        let (offset, arity) = self.preds[p];
        let code = tuple.fold(0, |acc, o| acc * self.d + o);
        offset + w * self.block(arity) + code
    }
}

struct Ctx<'a> {
    frame: &'a Frame,
    layout: Layout<'a>,
    val: Vec<Option<bool>>,
}

impl<'a> Ctx<'a> {
    fn eval(&self, w: usize, f: &'a Formula, env: &mut Vec<(&'a str, usize)>) -> T3 {
        let look = |env: &[(&str, usize)], x: &str| env.iter().rev().find(|(y, _)| *y == x).unwrap().1;
        match f {
            Formula::Eq(x, y) => {
                if look(env, x) == look(env, y) {
                    T3::T
                } else {
                    T3::F
                }
            }
            Formula::Atom(p, args) => {
                let i = self.layout.index(p, w, args.iter().map(|a| look(env, a)));
                match self.val[i] {
                    None => T3::U,
                    Some(true) => T3::T,
                    Some(false) => T3::F,
                }
            }
            Formula::Not(a) => self.eval(w, a, env).not(),
            Formula::And(a, b) => {
                let l = self.eval(w, a, env);
                if l == T3::F {
                    return T3::F;
                }
                l.min(self.eval(w, b, env))
            }
            Formula::Or(a, b) => {
                let l = self.eval(w, a, env);
                if l == T3::T {
                    return T3::T;
                }
                l.max(self.eval(w, b, env))
            }
            Formula::Implies(a, b) => {
                let l = self.eval(w, a, env).not();
                if l == T3::T {
                    return T3::T;
                }
                l.max(self.eval(w, b, env))
            }
            Formula::Box(a) => self.all_succ(w, a, env),
            Formula::BoxX(x, a) => {
                let mut acc = T3::F;
                for &o in &self.frame.delta[w] {
                    env.push((x, o));
                    acc = acc.max(self.all_succ(w, a, env));
                    env.pop();
                    if acc == T3::T {
                        break;
                    }
                }
                acc
            }
            Formula::DiaX(x, a) => {
                let mut acc = T3::T;
                for &o in &self.frame.delta[w] {
                    env.push((x, o));
                    let mut some = T3::F;
                    for &v in &self.frame.succ[w] {
                        some = some.max(self.eval(v, a, env));
                        if some == T3::T {
                            break;
                        }
                    }
                    env.pop();
                    acc = acc.min(some);
                    if acc == T3::F {
                        break;
                    }
                }
                acc
            }
        }
    }

    fn all_succ(&self, w: usize, a: &'a Formula, env: &mut Vec<(&'a str, usize)>) -> T3 {
        let mut acc = T3::T;
        for &v in &self.frame.succ[w] {
            acc = acc.min(self.eval(v, a, env));
            if acc == T3::F {
                break;
            }
        }
        acc
    }
}

impl Frame {
    fn solve(&self, f: &Formula, sig: &BTreeMap<String, usize>, vars: &[String]) -> Option<Witness> {
        let mut preds = BTreeMap::new();
        let mut offset = 0;
        for (p, &k) in sig {
            preds.insert(p.as_str(), (offset, k));
            offset += self.n * self.d.pow(k as u32);
        }
        let layout = Layout { preds, d: self.d };
        // Only tuples inside the local domain can ever be inspected at a world.
        let mut relevant = Vec::new();
        for (p, &(_, k)) in &layout.preds {
            for w in 0..self.n {
                let dom = &self.delta[w];
                let count = dom.len().pow(k as u32);
                for code in 0..count {
                    let mut c = code;
                    let mut t = vec![0; k];
                    for slot in t.iter_mut().rev() {
                        *slot = dom[c % dom.len()];
                        c /= dom.len();
                    }
                    relevant.push(layout.index(p, w, t.into_iter()));
                }
            }
        }
        relevant.sort_unstable_by(|a, b| b.cmp(a));
        let root = &self.delta[0];
        let nsig = root.len().pow(vars.len() as u32);
        let sigmas: Vec<Vec<(&str, usize)>> = (0..nsig)
            .map(|code| {
                let mut c = code;
                let mut env = vec![("", 0); vars.len()];
                for (i, x) in vars.iter().enumerate().rev() {
                    env[i] = (x.as_str(), root[c % root.len()]);
                    c /= root.len();
                }
                env
            })
            .collect();
        let mut ctx = Ctx {
            frame: self,
            layout,
            val: vec![None; offset],
        };
        if !dfs(&mut ctx, f, &sigmas, &relevant, 0) {
            return None;
        }
        for v in ctx.val.iter_mut() {
            v.get_or_insert(false);
        }
        let sigma = sigmas
            .iter()
            .find(|s| ctx.eval(0, f, &mut (*s).clone()) == T3::T)
            .expect("a decided valuation satisfies some assignment");
        Some(self.witness(&ctx, sig, sigma))
    }

    fn witness(&self, ctx: &Ctx, sig: &BTreeMap<String, usize>, sigma: &[(&str, usize)]) -> Witness {
        let mut rho = BTreeMap::new();
        for (p, &(offset, k)) in &ctx.layout.preds {
            let block = ctx.layout.block(k);
            let per_world: Vec<BTreeSet<Vec<usize>>> = (0..self.n)
                .map(|w| {
                    (0..block)
                        .filter(|code| ctx.val[offset + w * block + code] == Some(true))
                        .map(|code| {
                            let mut c = code;
                            let mut t = vec![0; k];
                            for slot in t.iter_mut().rev() {
                                *slot = c % self.d;
                                c /= self.d;
                            }
                            t
                        })
                        .collect()
                })
                .collect();
            rho.insert(p.to_string(), per_world);
        }
        let model = KripkeModel {
            worlds: (0..self.n).map(|i| format!("w{i}")).collect(),
            objects: (0..self.d).map(object_name).collect(),
            delta: self.delta.iter().map(|d| d.iter().copied().collect()).collect(),
            succ: self.succ.iter().map(|s| s.iter().copied().collect()).collect(),
            arity: sig.clone(),
            rho,
        };
        let mut assignment = Assignment::new();
        for (x, o) in sigma {
            assignment.map.insert(x.to_string(), *o);
        }
        Witness {
            model,
            world: 0,
            assignment,
        }
    }
}

fn status<'a>(ctx: &Ctx<'a>, f: &'a Formula, sigmas: &[Vec<(&'a str, usize)>]) -> T3 {
    let mut acc = T3::F;
    for s in sigmas {
        acc = acc.max(ctx.eval(0, f, &mut s.clone()));
        if acc == T3::T {
            break;
        }
    }
    acc
}

fn dfs<'a>(ctx: &mut Ctx<'a>, f: &'a Formula, sigmas: &[Vec<(&'a str, usize)>], order: &[usize], k: usize) -> bool {
    match status(ctx, f, sigmas) {
        T3::T => return true,
        T3::F => return false,
        T3::U => {}
    }
    let Some(&atom) = order.get(k) else {
        unreachable!("a total valuation decides the formula")
    };
    for b in [false, true] {
        ctx.val[atom] = Some(b);
        if dfs(ctx, f, sigmas, order, k + 1) {
            return true;
        }
    }
    ctx.val[atom] = None;
    false
}
