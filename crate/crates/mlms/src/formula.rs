//! Abstract syntax for the mention-some language with equality and the plain
//! knowledge modality, plus the syntactic operations the rest of the crate
//! relies on: free variables, substitution, cleanness and positive normal form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Variables are plain identifiers ordered by string comparison.
pub type Var = String;

/// Reserved 0-ary predicate used to spell out `top` as `_T | ~_T`.
pub const TOP_PRED: &str = "_T";

/// Prefix reserved for machine-chosen variable names.
pub const FRESH_PREFIX: &str = "_v";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Eq(Var, Var),
    Atom(String, Vec<Var>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Plain knowledge `K φ`.
    Box(Box<Formula>),
    /// Mention-some `K[x] φ`: some object works for every successor.
    BoxX(Var, Box<Formula>),
    /// Dual `D[x] φ`: every object has a successor where φ holds.
    DiaX(Var, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("equality is not supported here")]
    EqualityNotSupported,
    #[error("predicate {name} used with arities {first} and {second}")]
    ArityConflict {
        name: String,
        first: usize,
        second: usize,
    },
}

pub fn atom(p: &str, args: &[&str]) -> Formula {
    Formula::Atom(p.to_string(), args.iter().map(|a| a.to_string()).collect())
}

pub fn eq(x: &str, y: &str) -> Formula {
    Formula::Eq(x.to_string(), y.to_string())
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

/// `a <-> b`, spelled as a conjunction of two implications.
pub fn iff(a: Formula, b: Formula) -> Formula {
    and(implies(a.clone(), b.clone()), implies(b, a))
}

pub fn boxk(f: Formula) -> Formula {
    Formula::Box(Box::new(f))
}

pub fn boxx(x: &str, f: Formula) -> Formula {
    Formula::BoxX(x.to_string(), Box::new(f))
}

pub fn diax(x: &str, f: Formula) -> Formula {
    Formula::DiaX(x.to_string(), Box::new(f))
}

/// Plain diamond `~K~φ`.
pub fn diamond(f: Formula) -> Formula {
    not(boxk(not(f)))
}

pub fn top() -> Formula {
    let t = Formula::Atom(TOP_PRED.to_string(), vec![]);
    or(t.clone(), not(t))
}

pub fn bot() -> Formula {
    not(top())
}

/// Conjunction of a list, `top` when empty.
pub fn conj(items: Vec<Formula>) -> Formula {
    let mut it = items.into_iter();
    match it.next() {
        None => top(),
        Some(first) => it.fold(first, and),
    }
}

/// Disjunction of a list, `bot` when empty.
pub fn disj(items: Vec<Formula>) -> Formula {
    let mut it = items.into_iter();
    match it.next() {
        None => bot(),
        Some(first) => it.fold(first, or),
    }
}

impl Formula {
    pub fn is_top(&self) -> bool {
        *self == top()
    }

    pub fn is_bot(&self) -> bool {
        *self == bot()
    }

    /// Atom or negated atom.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(..) => true,
            Formula::Not(inner) => matches!(**inner, Formula::Atom(..)),
            _ => false,
        }
    }

    pub fn is_modal(&self) -> bool {
        matches!(
            self,
            Formula::Box(_) | Formula::BoxX(..) | Formula::DiaX(..)
        )
    }

    /// Maximum nesting of modalities.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Eq(..) | Formula::Atom(..) => 0,
            Formula::Not(a) => a.modal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Box(a) | Formula::BoxX(_, a) | Formula::DiaX(_, a) => 1 + a.modal_depth(),
        }
    }

    pub fn has_equality(&self) -> bool {
        match self {
            Formula::Eq(..) => true,
            Formula::Atom(..) => false,
            Formula::Not(a) | Formula::Box(a) | Formula::BoxX(_, a) | Formula::DiaX(_, a) => {
                a.has_equality()
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_equality() || b.has_equality()
            }
        }
    }

    /// Predicates with their arities; a name used at two arities is an error.
    pub fn signature(&self) -> Result<BTreeMap<String, usize>, FormulaError> {
        let mut sig = BTreeMap::new();
        self.collect_signature(&mut sig)?;
        Ok(sig)
    }

    fn collect_signature(&self, sig: &mut BTreeMap<String, usize>) -> Result<(), FormulaError> {
        match self {
            Formula::Eq(..) => Ok(()),
            Formula::Atom(p, args) => match sig.get(p) {
                Some(&n) if n != args.len() => Err(FormulaError::ArityConflict {
                    name: p.clone(),
                    first: n,
                    second: args.len(),
                }),
                _ => {
                    sig.insert(p.clone(), args.len());
                    Ok(())
                }
            },
            Formula::Not(a) | Formula::Box(a) | Formula::BoxX(_, a) | Formula::DiaX(_, a) => {
                a.collect_signature(sig)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_signature(sig)?;
                b.collect_signature(sig)
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free, binders included.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Eq(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Formula::Atom(_, args) => out.extend(args.iter().cloned()),
            Formula::Not(a) | Formula::Box(a) => a.collect_all_vars(out),
            Formula::BoxX(x, a) | Formula::DiaX(x, a) => {
                out.insert(x.clone());
                a.collect_all_vars(out);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_all_vars(out);
                b.collect_all_vars(out);
            }
        }
    }

    /// Binder occurrences in preorder.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut Vec<Var>) {
        match self {
            Formula::Eq(..) | Formula::Atom(..) => {}
            Formula::Not(a) | Formula::Box(a) => a.collect_binders(out),
            Formula::BoxX(x, a) | Formula::DiaX(x, a) => {
                out.push(x.clone());
                a.collect_binders(out);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_binders(out);
                b.collect_binders(out);
            }
        }
    }
}

pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    collect_free(f, &mut bound, &mut out);
    out
}

fn collect_free(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    let mut note = |v: &Var, bound: &Vec<Var>| {
        if !bound.contains(v) {
            out.insert(v.clone());
        }
    };
    match f {
        Formula::Eq(x, y) => {
            note(x, bound);
            note(y, bound);
        }
        Formula::Atom(_, args) => {
            for a in args {
                note(a, bound);
            }
        }
        Formula::Not(a) | Formula::Box(a) => collect_free(a, bound, out),
        Formula::BoxX(x, a) | Formula::DiaX(x, a) => {
            bound.push(x.clone());
            collect_free(a, bound, out);
            bound.pop();
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
    }
}

pub fn is_free_in(x: &str, f: &Formula) -> bool {
    match f {
        Formula::Eq(a, b) => a == x || b == x,
        Formula::Atom(_, args) => args.iter().any(|a| a == x),
        Formula::Not(a) | Formula::Box(a) => is_free_in(x, a),
        Formula::BoxX(y, a) | Formula::DiaX(y, a) => y != x && is_free_in(x, a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            is_free_in(x, a) || is_free_in(x, b)
        }
    }
}

/// `φ[y/x]`: replace every free occurrence of `x` by `y`. No capture check.
pub fn substitute(f: &Formula, x: &str, y: &str) -> Formula {
    let swap = |v: &Var| if v == x { y.to_string() } else { v.clone() };
    match f {
        Formula::Eq(a, b) => Formula::Eq(swap(a), swap(b)),
        Formula::Atom(p, args) => Formula::Atom(p.clone(), args.iter().map(swap).collect()),
        Formula::Not(a) => not(substitute(a, x, y)),
        Formula::Box(a) => boxk(substitute(a, x, y)),
        Formula::BoxX(z, _) | Formula::DiaX(z, _) if z == x => f.clone(),
        Formula::BoxX(z, a) => Formula::BoxX(z.clone(), Box::new(substitute(a, x, y))),
        Formula::DiaX(z, a) => Formula::DiaX(z.clone(), Box::new(substitute(a, x, y))),
        Formula::And(a, b) => and(substitute(a, x, y), substitute(b, x, y)),
        Formula::Or(a, b) => or(substitute(a, x, y), substitute(b, x, y)),
        Formula::Implies(a, b) => implies(substitute(a, x, y), substitute(b, x, y)),
    }
}

/// Simultaneous renaming of free variables according to `map`.
pub fn rename_free(f: &Formula, map: &BTreeMap<Var, Var>) -> Formula {
    fn go(f: &Formula, map: &BTreeMap<Var, Var>, bound: &mut Vec<Var>) -> Formula {
        let swap = |v: &Var, bound: &Vec<Var>| {
            if bound.contains(v) {
                v.clone()
            } else {
                map.get(v).cloned().unwrap_or_else(|| v.clone())
            }
        };
        match f {
            Formula::Eq(a, b) => Formula::Eq(swap(a, bound), swap(b, bound)),
            Formula::Atom(p, args) => {
                Formula::Atom(p.clone(), args.iter().map(|a| swap(a, bound)).collect())
            }
            Formula::Not(a) => not(go(a, map, bound)),
            Formula::Box(a) => boxk(go(a, map, bound)),
            Formula::BoxX(z, a) | Formula::DiaX(z, a) => {
                bound.push(z.clone());
                let inner = Box::new(go(a, map, bound));
                bound.pop();
                if matches!(f, Formula::BoxX(..)) {
                    Formula::BoxX(z.clone(), inner)
                } else {
                    Formula::DiaX(z.clone(), inner)
                }
            }
            Formula::And(a, b) => and(go(a, map, bound), go(b, map, bound)),
            Formula::Or(a, b) => or(go(a, map, bound), go(b, map, bound)),
            Formula::Implies(a, b) => implies(go(a, map, bound), go(b, map, bound)),
        }
    }
    go(f, map, &mut Vec::new())
}

/// True iff no free `x` sits under a modality binding `y`.
pub fn is_admissible(f: &Formula, x: &str, y: &str) -> bool {
    if x == y {
        return true;
    }
    match f {
        Formula::Eq(..) | Formula::Atom(..) => true,
        Formula::Not(a) | Formula::Box(a) => is_admissible(a, x, y),
        Formula::BoxX(z, a) | Formula::DiaX(z, a) => {
            if z == x {
                true
            } else if z == y {
                !is_free_in(x, a)
            } else {
                is_admissible(a, x, y)
            }
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            is_admissible(a, x, y) && is_admissible(b, x, y)
        }
    }
}

/// AST node count.
pub fn formula_size(f: &Formula) -> usize {
    match f {
        Formula::Eq(..) | Formula::Atom(..) => 1,
        Formula::Not(a) | Formula::Box(a) | Formula::BoxX(_, a) | Formula::DiaX(_, a) => {
            1 + formula_size(a)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            1 + formula_size(a) + formula_size(b)
        }
    }
}

/// Symbol count: node count plus one per variable occurrence, binders included.
/// This is the measure under which the small-domain bound of the tableau
/// construction holds (`P(x,y)` has one node but needs two objects).
pub fn formula_length(f: &Formula) -> usize {
    match f {
        Formula::Eq(..) => 3,
        Formula::Atom(_, args) => 1 + args.len(),
        Formula::Not(a) | Formula::Box(a) => 1 + formula_length(a),
        Formula::BoxX(_, a) | Formula::DiaX(_, a) => 2 + formula_length(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            1 + formula_length(a) + formula_length(b)
        }
    }
}

/// First name `_v0`, `_v1`, … not in `used`.
pub fn fresh_var(used: &BTreeSet<Var>) -> Var {
    (0..)
        .map(|i| format!("{FRESH_PREFIX}{i}"))
        .find(|v| !used.contains(v))
        .expect("unbounded name supply")
}

/// No variable both free and bound, and no variable bound twice.
pub fn is_clean(f: &Formula) -> bool {
    let binders = f.binders();
    let distinct: BTreeSet<&Var> = binders.iter().collect();
    if distinct.len() != binders.len() {
        return false;
    }
    let free = free_vars(f);
    binders.iter().all(|b| !free.contains(b))
}

/// Rename binders so the result is clean. Free variables, shape and size are kept.
pub fn reletter_clean(f: &Formula) -> Formula {
    let free = free_vars(f);
    let mut used = f.all_vars();
    let mut taken: BTreeSet<Var> = BTreeSet::new();
    fn go(
        f: &Formula,
        free: &BTreeSet<Var>,
        used: &mut BTreeSet<Var>,
        taken: &mut BTreeSet<Var>,
        env: &mut Vec<(Var, Var)>,
    ) -> Formula {
        let look = |v: &Var, env: &Vec<(Var, Var)>| {
            env.iter()
                .rev()
                .find(|(from, _)| from == v)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| v.clone())
        };
        match f {
            Formula::Eq(a, b) => Formula::Eq(look(a, env), look(b, env)),
            Formula::Atom(p, args) => {
                Formula::Atom(p.clone(), args.iter().map(|a| look(a, env)).collect())
            }
            Formula::Not(a) => not(go(a, free, used, taken, env)),
            Formula::Box(a) => boxk(go(a, free, used, taken, env)),
            Formula::BoxX(x, a) | Formula::DiaX(x, a) => {
                let name = if free.contains(x) || taken.contains(x) {
                    let n = fresh_var(used);
                    used.insert(n.clone());
                    n
                } else {
                    x.clone()
                };
                taken.insert(name.clone());
                env.push((x.clone(), name.clone()));
                let inner = Box::new(go(a, free, used, taken, env));
                env.pop();
                if matches!(f, Formula::BoxX(..)) {
                    Formula::BoxX(name, inner)
                } else {
                    Formula::DiaX(name, inner)
                }
            }
            Formula::And(a, b) => {
                let l = go(a, free, used, taken, env);
                and(l, go(b, free, used, taken, env))
            }
            Formula::Or(a, b) => {
                let l = go(a, free, used, taken, env);
                or(l, go(b, free, used, taken, env))
            }
            Formula::Implies(a, b) => {
                let l = go(a, free, used, taken, env);
                implies(l, go(b, free, used, taken, env))
            }
        }
    }
    go(f, &free, &mut used, &mut taken, &mut Vec::new())
}

/// Literals, ∧, ∨, `K[x]`, `D[x]` only.
pub fn is_pnf(f: &Formula) -> bool {
    match f {
        Formula::Atom(..) => true,
        Formula::Not(a) => matches!(**a, Formula::Atom(..)),
        Formula::And(a, b) | Formula::Or(a, b) => is_pnf(a) && is_pnf(b),
        Formula::BoxX(_, a) | Formula::DiaX(_, a) => is_pnf(a),
        Formula::Eq(..) | Formula::Implies(..) | Formula::Box(_) => false,
    }
}

/// Push negations to atoms. Each plain `K` becomes `K[z]` for a fresh `z`.
pub fn to_pnf(f: &Formula) -> Result<Formula, FormulaError> {
    if f.has_equality() {
        return Err(FormulaError::EqualityNotSupported);
    }
    let mut used = f.all_vars();
    Ok(pnf(f, true, &mut used))
}

fn pnf(f: &Formula, pos: bool, used: &mut BTreeSet<Var>) -> Formula {
    match f {
        Formula::Eq(..) => unreachable!("equality rejected before rewriting"),
        Formula::Atom(..) => {
            if pos {
                f.clone()
            } else {
                not(f.clone())
            }
        }
        Formula::Not(a) => pnf(a, !pos, used),
        Formula::And(a, b) => {
            let (l, r) = (pnf(a, pos, used), pnf(b, pos, used));
            if pos {
                and(l, r)
            } else {
                or(l, r)
            }
        }
        Formula::Or(a, b) => {
            let (l, r) = (pnf(a, pos, used), pnf(b, pos, used));
            if pos {
                or(l, r)
            } else {
                and(l, r)
            }
        }
        Formula::Implies(a, b) => {
            let (l, r) = (pnf(a, !pos, used), pnf(b, pos, used));
            if pos {
                or(l, r)
            } else {
                and(l, r)
            }
        }
        Formula::Box(a) => {
            let z = fresh_var(used);
            used.insert(z.clone());
            let inner = Box::new(pnf(a, pos, used));
            if pos {
                Formula::BoxX(z, inner)
            } else {
                Formula::DiaX(z, inner)
            }
        }
        Formula::BoxX(x, a) => {
            let inner = Box::new(pnf(a, pos, used));
            if pos {
                Formula::BoxX(x.clone(), inner)
            } else {
                Formula::DiaX(x.clone(), inner)
            }
        }
        Formula::DiaX(x, a) => {
            let inner = Box::new(pnf(a, pos, used));
            if pos {
                Formula::DiaX(x.clone(), inner)
            } else {
                Formula::BoxX(x.clone(), inner)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parse::print_formula(self))
    }
}
