//! Increasing-domain Kripke models and the satisfaction relation.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::{free_vars, Formula, Var};
use crate::parse::{violation, SchemaError};

mod graph;
mod tree;

pub use graph::exhaustive_search;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub worlds: Vec<String>,
    pub objects: Vec<String>,
    /// Local domain of each world, as object indices.
    pub delta: Vec<BTreeSet<usize>>,
    /// Successors of each world.
    pub succ: Vec<BTreeSet<usize>>,
    pub arity: BTreeMap<String, usize>,
    /// `rho[P][w]` is the set of tuples satisfying `P` at `w`.
    pub rho: BTreeMap<String, Vec<BTreeSet<Vec<usize>>>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemError {
    #[error("predicate {pred} has arity {expected} in the model but is used with {found} arguments")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown world {0}")]
    UnknownWorld(String),
    #[error("variable {0} has no value")]
    Unassigned(Var),
    #[error("unknown object {0}")]
    UnknownObject(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameClass {
    Arbitrary,
    S5,
}

/// Finite variable map with an optional fallback object.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub map: BTreeMap<Var, usize>,
    pub default: Option<usize>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, x: &str, obj: usize) -> Self {
        self.map.insert(x.to_string(), obj);
        self
    }

    pub fn get(&self, x: &str) -> Option<usize> {
        self.map.get(x).copied().or(self.default)
    }

    /// Resolve names through a model, e.g. `[("x", "a")]`.
    pub fn from_names(m: &KripkeModel, pairs: &[(&str, &str)]) -> Result<Self, SemError> {
        let mut a = Assignment::new();
        for (x, o) in pairs {
            a.map.insert(x.to_string(), m.object_index(o)?);
        }
        Ok(a)
    }
}

impl KripkeModel {
    pub fn world_index(&self, name: &str) -> Result<usize, SemError> {
        self.worlds
            .iter()
            .position(|w| w == name)
            .ok_or_else(|| SemError::UnknownWorld(name.to_string()))
    }

    pub fn object_index(&self, name: &str) -> Result<usize, SemError> {
        self.objects
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| SemError::UnknownObject(name.to_string()))
    }

    pub fn holds(&self, pred: &str, w: usize, tuple: &[usize]) -> bool {
        self.rho
            .get(pred)
            .is_some_and(|per_world| per_world[w].contains(tuple))
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let nw = self.worlds.len();
        let no = self.objects.len();
        if self.delta.len() != nw || self.succ.len() != nw {
            return Err(violation("shape", "per-world tables have the wrong length"));
        }
        for (w, ds) in self.delta.iter().enumerate() {
            if ds.is_empty() {
                return Err(violation(
                    "nonempty local domain",
                    format!("world '{}' has an empty local domain", self.worlds[w]),
                ));
            }
            if ds.iter().any(|&o| o >= no) {
                return Err(violation("known object", "local domain outside the object set"));
            }
        }
        for (w, ss) in self.succ.iter().enumerate() {
            for &v in ss {
                if v >= nw {
                    return Err(violation("known world", "edge to an unknown world"));
                }
                if !self.delta[w].is_subset(&self.delta[v]) {
                    return Err(violation(
                        "increasing domain",
                        format!(
                            "'{}' sees '{}' but its local domain is not contained in the successor's",
                            self.worlds[w], self.worlds[v]
                        ),
                    ));
                }
            }
        }
        for (p, per_world) in &self.rho {
            let n = self.arity.get(p).copied();
            if per_world.len() != nw {
                return Err(violation("shape", format!("'{p}' is not interpreted at every world")));
            }
            for tuples in per_world {
                for t in tuples {
                    if n.is_some_and(|n| n != t.len()) {
                        return Err(violation("arity", format!("tuple of '{p}' has the wrong length")));
                    }
                    if t.iter().any(|&o| o >= no) {
                        return Err(violation("known object", format!("tuple of '{p}' names an unknown object")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_increasing(&self) -> bool {
        self.succ
            .iter()
            .enumerate()
            .all(|(w, ss)| ss.iter().all(|&v| self.delta[w].is_subset(&self.delta[v])))
    }

    pub fn is_constant_domain(&self) -> bool {
        self.delta.windows(2).all(|p| p[0] == p[1])
            && self.delta.first().is_some_and(|d| d.len() == self.objects.len())
    }

    pub fn is_equivalence(&self) -> bool {
        let n = self.worlds.len();
        let r = |a: usize, b: usize| self.succ[a].contains(&b);
        (0..n).all(|a| r(a, a))
            && (0..n).all(|a| self.succ[a].iter().all(|&b| r(b, a)))
            && (0..n).all(|a| {
                self.succ[a]
                    .iter()
                    .all(|&b| self.succ[b].iter().all(|&c| r(a, c)))
            })
    }

    pub fn is_s5(&self) -> bool {
        self.is_equivalence() && self.is_constant_domain()
    }

    fn check_arities(&self, f: &Formula) -> Result<(), SemError> {
        let sig = f.signature().map_err(|e| match e {
            crate::formula::FormulaError::ArityConflict {
                name,
                first,
                second,
            } => SemError::ArityMismatch {
                pred: name,
                expected: first,
                found: second,
            },
            crate::formula::FormulaError::EqualityNotSupported => unreachable!(),
        })?;
        for (p, n) in sig {
            if let Some(&m) = self.arity.get(&p) {
                if m != n {
                    return Err(SemError::ArityMismatch {
                        pred: p,
                        expected: m,
                        found: n,
                    });
                }
            }
        }
        Ok(())
    }

    fn env_for(&self, f: &Formula, sigma: &Assignment) -> Result<Vec<(String, usize)>, SemError> {
        free_vars(f)
            .into_iter()
            .map(|x| {
                sigma
                    .get(&x)
                    .map(|o| (x.clone(), o))
                    .ok_or(SemError::Unassigned(x))
            })
            .collect()
    }
}

/// Does `φ` hold at world `w` under `σ`?
pub fn mc(m: &KripkeModel, w: usize, sigma: &Assignment, f: &Formula) -> Result<bool, SemError> {
    if w >= m.worlds.len() {
        return Err(SemError::UnknownWorld(w.to_string()));
    }
    m.check_arities(f)?;
    let owned = m.env_for(f, sigma)?;
    let mut env: Vec<(&str, usize)> = owned.iter().map(|(x, o)| (x.as_str(), *o)).collect();
    Ok(eval(m, w, f, &mut env))
}

fn lookup(env: &[(&str, usize)], x: &str) -> usize {
    env.iter()
        .rev()
        .find(|(y, _)| *y == x)
        .map(|(_, o)| *o)
        .expect("free variables are bound before evaluation")
}

pub(crate) fn eval<'a>(m: &KripkeModel, w: usize, f: &'a Formula, env: &mut Vec<(&'a str, usize)>) -> bool {
    match f {
        Formula::Eq(x, y) => lookup(env, x) == lookup(env, y),
        Formula::Atom(p, args) => {
            let t: Vec<usize> = args.iter().map(|a| lookup(env, a)).collect();
            m.holds(p, w, &t)
        }
        Formula::Not(a) => !eval(m, w, a, env),
        Formula::And(a, b) => eval(m, w, a, env) && eval(m, w, b, env),
        Formula::Or(a, b) => eval(m, w, a, env) || eval(m, w, b, env),
        Formula::Implies(a, b) => !eval(m, w, a, env) || eval(m, w, b, env),
        Formula::Box(a) => m.succ[w].iter().all(|&v| eval(m, v, a, env)),
        Formula::BoxX(x, a) => m.delta[w].iter().any(|&o| {
            env.push((x, o));
            let r = m.succ[w].iter().all(|&v| eval(m, v, a, env));
            env.pop();
            r
        }),
        Formula::DiaX(x, a) => m.delta[w].iter().all(|&o| {
            env.push((x, o));
            let r = m.succ[w].iter().any(|&v| eval(m, v, a, env));
            env.pop();
            r
        }),
    }
}

/// The derived S5 operators, evaluated by their own clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DerivedOp {
    /// For every object, `K φ` or `K ~φ`.
    MentionAll(Var),
    /// For every object, `K φ`.
    BoxForall(Var),
    /// Some tuple of objects makes `K φ` true.
    BoxVec(Vec<Var>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedResult {
    pub value: bool,
    /// Set when the model is not S5; the clauses still evaluate.
    pub warning: Option<String>,
}

pub fn mc_derived(
    m: &KripkeModel,
    w: usize,
    sigma: &Assignment,
    op: &DerivedOp,
    f: &Formula,
) -> Result<DerivedResult, SemError> {
    if w >= m.worlds.len() {
        return Err(SemError::UnknownWorld(w.to_string()));
    }
    m.check_arities(f)?;
    let bound: Vec<&str> = match op {
        DerivedOp::MentionAll(x) | DerivedOp::BoxForall(x) => vec![x.as_str()],
        DerivedOp::BoxVec(xs) => xs.iter().map(|x| x.as_str()).collect(),
    };
    let mut owned = Vec::new();
    for x in free_vars(f) {
        if bound.contains(&x.as_str()) {
            continue;
        }
        let o = sigma.get(&x).ok_or_else(|| SemError::Unassigned(x.clone()))?;
        owned.push((x, o));
    }
    let mut env: Vec<(&str, usize)> = owned.iter().map(|(x, o)| (x.as_str(), *o)).collect();
    let objects: Vec<usize> = (0..m.objects.len()).collect();
    fn knows<'a>(m: &KripkeModel, w: usize, f: &'a Formula, env: &mut Vec<(&'a str, usize)>, negated: bool) -> bool {
        m.succ[w].iter().all(|&v| eval(m, v, f, env) != negated)
    }
    let value = match op {
        DerivedOp::MentionAll(x) => objects.iter().all(|&d| {
            env.push((x, d));
            let r = knows(m, w, f, &mut env, false) || knows(m, w, f, &mut env, true);
            env.pop();
            r
        }),
        DerivedOp::BoxForall(x) => objects.iter().all(|&d| {
            env.push((x, d));
            let r = knows(m, w, f, &mut env, false);
            env.pop();
            r
        }),
        DerivedOp::BoxVec(xs) => {
            let n = xs.len();
            let k = objects.len();
            let total = k.checked_pow(n as u32).unwrap_or(usize::MAX);
            (0..total).any(|code| {
                let mut c = code;
                for x in xs {
                    env.push((x, c % k));
                    c /= k;
                }
                let r = knows(m, w, f, &mut env, false);
                env.truncate(env.len() - n);
                r
            })
        }
    };
    Ok(DerivedResult {
        value,
        warning: (!m.is_s5()).then(|| "model is not S5; the defining equivalences only hold over S5".to_string()),
    })
}

/// A pointed model with an assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub model: KripkeModel,
    pub world: usize,
    pub assignment: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Found(Witness),
    NotFoundWithinBounds,
}

impl SearchResult {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchResult::Found(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SearchResult::Found(w) => Some(w),
            SearchResult::NotFoundWithinBounds => None,
        }
    }
}

/// Look for a model of `φ` with at most `max_w` worlds and `max_d` objects.
///
/// S5 runs the frame enumeration of [`exhaustive_search`]. Arbitrary frames
/// use a search over tree-shaped models of depth at most the modal depth of
/// `φ`, returning one with the fewest worlds, then the fewest objects. See the
/// `tree` module for why that covers every model up to unravelling.
pub fn bounded_search(f: &Formula, max_w: usize, max_d: usize, fc: FrameClass) -> SearchResult {
    assert!(max_w >= 1 && max_d >= 1, "bounds must be positive");
    let found = match fc {
        FrameClass::S5 => graph::search(f, max_w, max_d, fc),
        FrameClass::Arbitrary => tree::search(f, max_w, max_d),
    };
    match found {
        Some(w) => SearchResult::Found(w),
        None => SearchResult::NotFoundWithinBounds,
    }
}

/// Object names used by generated models: `a`..`z`, then `o26`, `o27`, …
pub fn object_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("o{i}")
    }
}
