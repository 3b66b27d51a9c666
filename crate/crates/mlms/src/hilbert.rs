//! Proof checking for the S5 mention-some systems with and without equality.
//!
//! The kernel knows the axiom schemata, MP, MONOMS and lemma instances.
//! Derived rules (NECK, NECMS, RKtoMS, RE) are script generators that expand
//! to kernel steps. `D[x] φ` is read as `~K[x]~φ` throughout.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{
    and, boxk, boxx, diax, fresh_var, iff, implies, is_admissible, is_free_in, not, or, substitute, top, Formula, Var,
    TOP_PRED,
};
use crate::par;
use crate::semantics::{bounded_search, FrameClass, SearchResult, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Taut,
    DistK,
    T,
    FourMs,
    FiveMs,
    KtoMs,
    MsToK,
    MsToMsk,
    Kt,
    Id,
    SubId,
}

impl Axiom {
    pub const ALL: [Axiom; 11] = [
        Axiom::Taut,
        Axiom::DistK,
        Axiom::T,
        Axiom::FourMs,
        Axiom::FiveMs,
        Axiom::KtoMs,
        Axiom::MsToK,
        Axiom::MsToMsk,
        Axiom::Kt,
        Axiom::Id,
        Axiom::SubId,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Taut => "TAUT",
            Axiom::DistK => "DISTK",
            Axiom::T => "T",
            Axiom::FourMs => "4MS",
            Axiom::FiveMs => "5MS",
            Axiom::KtoMs => "KtoMS",
            Axiom::MsToK => "MStoK",
            Axiom::MsToMsk => "MStoMSK",
            Axiom::Kt => "KT",
            Axiom::Id => "ID",
            Axiom::SubId => "SUBID",
        }
    }

    pub fn from_name(s: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Axiom(Axiom),
    Mp(usize, usize),
    MonoMs(usize, String),
    Lemma(String, Vec<usize>),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(a) => write!(f, "{}", a.name()),
            Justification::Mp(i, j) => write!(f, "MP {i} {j}"),
            Justification::MonoMs(i, x) => write!(f, "MONOMS {i} {x}"),
            Justification::Lemma(n, refs) => {
                write!(f, "LEMMA {n}")?;
                for r in refs {
                    write!(f, " {r}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub formula: Formula,
    pub just: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofScript {
    pub name: String,
    pub lines: Vec<ProofLine>,
    pub target: Option<Formula>,
}

impl ProofScript {
    /// The proved formula: the target when given, else the last line.
    pub fn conclusion(&self) -> Option<&Formula> {
        self.target.as_ref().or(self.lines.last().map(|l| &l.formula))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HilbertError {
    #[error("unknown axiom '{0}'")]
    UnknownAxiom(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{script}: line {line}: {reason}")]
pub struct ProofError {
    pub script: String,
    /// 1-based; 0 when the script as a whole is at fault.
    pub line: usize,
    pub reason: String,
}

/// `D[x] φ` becomes `~K[x]~φ`, everywhere.
pub fn unfold(f: &Formula) -> Formula {
    match f {
        Formula::Eq(..) | Formula::Atom(..) => f.clone(),
        Formula::Not(a) => not(unfold(a)),
        Formula::And(a, b) => and(unfold(a), unfold(b)),
        Formula::Or(a, b) => or(unfold(a), unfold(b)),
        Formula::Implies(a, b) => implies(unfold(a), unfold(b)),
        Formula::Box(a) => boxk(unfold(a)),
        Formula::BoxX(x, a) => boxx(x, unfold(a)),
        Formula::DiaX(x, a) => not(boxx(x, not(unfold(a)))),
    }
}

fn imp_parts(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::Implies(a, b) => Some((a, b)),
        _ => None,
    }
}

// ---------------------------------------------------------------- axioms

/// Schema membership with side conditions. `f` should already be unfolded.
pub fn match_axiom(ax: Axiom, f: &Formula) -> bool {
    use Formula::*;
    match ax {
        Axiom::Taut => is_tautology(f),
        Axiom::DistK => matches!(f, Implies(l, r) if matches!((&**l, &**r),
            (Box(ab), Implies(ka, kb)) if matches!((&**ab, &**ka, &**kb),
                (Implies(a, b), Box(a2), Box(b2)) if a == a2 && b == b2))),
        Axiom::T => matches!(f, Implies(l, r) if matches!(&**l, Box(a) if a == r)),
        Axiom::FourMs => matches!(f, Implies(l, r) if matches!((&**l, &**r),
            (BoxX(..), Box(inner)) if inner == l)),
        Axiom::FiveMs => matches!(f, Implies(l, r) if matches!((&**l, &**r),
            (Not(m), Box(inner)) if matches!(&**m, BoxX(..)) && inner == l)),
        Axiom::KtoMs => match f {
            Implies(l, r) => match (&**l, &**r) {
                (Box(inst), BoxX(x, phi)) => ktoms_witness(inst, x, phi).is_some(),
                _ => false,
            },
            _ => false,
        },
        Axiom::MsToK => matches!(f, Implies(l, r) if matches!((&**l, &**r),
            (BoxX(x, a), Box(b)) if a == b && !is_free_in(x, a))),
        Axiom::MsToMsk => matches!(f, Implies(l, r) if matches!((&**l, &**r),
            (BoxX(x, a), BoxX(y, kb)) if x == y && matches!(&**kb, Box(b) if b == a))),
        Axiom::Kt => matches!(f, Box(a) if a.is_top()),
        Axiom::Id => matches!(f, Eq(x, y) if x == y),
        Axiom::SubId => match f {
            Implies(l, r) => match (&**l, &**r) {
                (Eq(x, y), Implies(a, b)) => differ_by_swap(a, b, x, y, &mut Vec::new()),
                _ => false,
            },
            _ => false,
        },
    }
}

/// By name, for callers holding a string.
pub fn match_axiom_name(name: &str, f: &Formula) -> Result<bool, HilbertError> {
    let ax = Axiom::from_name(name).ok_or_else(|| HilbertError::UnknownAxiom(name.to_string()))?;
    Ok(match_axiom(ax, &unfold(f)))
}

/// A `y` with `inst = φ[y/x]` and the substitution admissible.
fn ktoms_witness(inst: &Formula, x: &str, phi: &Formula) -> Option<Var> {
    let mut candidates: Vec<Var> = vec![x.to_string()];
    candidates.extend(inst.all_vars());
    candidates
        .into_iter()
        .find(|y| is_admissible(phi, x, y) && substitute(phi, x, y) == *inst)
}

/// `a` and `b` agree except at free positions holding `x` in one and `y` in
/// the other.
fn differ_by_swap(a: &Formula, b: &Formula, x: &str, y: &str, bound: &mut Vec<Var>) -> bool {
    use Formula::*;
    let same = |u: &Var, v: &Var, bound: &Vec<Var>| {
        u == v
            || (!bound.contains(u)
                && !bound.contains(v)
                && ((u == x && v == y) || (u == y && v == x)))
    };
    match (a, b) {
        (Eq(u1, u2), Eq(v1, v2)) => same(u1, v1, bound) && same(u2, v2, bound),
        (Atom(p, us), Atom(q, vs)) => {
            p == q && us.len() == vs.len() && us.iter().zip(vs).all(|(u, v)| same(u, v, bound))
        }
        (Not(a), Not(b)) | (Box(a), Box(b)) => differ_by_swap(a, b, x, y, bound),
        (And(a1, a2), And(b1, b2)) | (Or(a1, a2), Or(b1, b2)) | (Implies(a1, a2), Implies(b1, b2)) => {
            differ_by_swap(a1, b1, x, y, bound) && differ_by_swap(a2, b2, x, y, bound)
        }
        (BoxX(u, a), BoxX(v, b)) | (DiaX(u, a), DiaX(v, b)) if u == v => {
            bound.push(u.clone());
            let ok = differ_by_swap(a, b, x, y, bound);
            bound.pop();
            ok
        }
        _ => false,
    }
}

const MAX_TAUT_ATOMS: usize = 22;

/// Truth table over the propositional skeleton; maximal non-Boolean
/// subformulas are the letters.
pub fn is_tautology(f: &Formula) -> bool {
    fn letters<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::Not(a) => letters(a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                letters(a, out);
                letters(b, out);
            }
            _ => {
                if !out.contains(&f) {
                    out.push(f)
                }
            }
        }
    }
    fn eval(f: &Formula, letters: &[&Formula], bits: u64) -> bool {
        match f {
            Formula::Not(a) => !eval(a, letters, bits),
            Formula::And(a, b) => eval(a, letters, bits) && eval(b, letters, bits),
            Formula::Or(a, b) => eval(a, letters, bits) || eval(b, letters, bits),
            Formula::Implies(a, b) => !eval(a, letters, bits) || eval(b, letters, bits),
            _ => {
                let i = letters.iter().position(|l| *l == f).unwrap();
                bits >> i & 1 == 1
            }
        }
    }
    let mut ls = Vec::new();
    letters(f, &mut ls);
    if ls.len() > MAX_TAUT_ATOMS {
        return false;
    }
    (0..1u64 << ls.len()).all(|bits| eval(f, &ls, bits))
}

// ---------------------------------------------------------------- lemmas

/// Checked scripts by name. Only grows; a name cannot be rebound.
#[derive(Clone, Debug, Default)]
pub struct LemmaStore {
    scripts: BTreeMap<String, ProofScript>,
}

impl LemmaStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Check `s` against the current store and add it.
    pub fn add(&mut self, s: ProofScript) -> Result<(), ProofError> {
        if self.scripts.contains_key(&s.name) {
            return Err(ProofError {
                script: s.name.clone(),
                line: 0,
                reason: "a lemma with this name is already stored".into(),
            });
        }
        check_proof(&s, self)?;
        self.scripts.insert(s.name.clone(), s);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ProofScript> {
        self.scripts.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.scripts.keys()
    }

    pub fn len(&self) -> usize {
        self.scripts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scripts.is_empty()
    }
}

/// Schematic letters: 0-ary predicates other than the one behind `top`.
fn is_letter(f: &Formula) -> bool {
    matches!(f, Formula::Atom(p, args) if args.is_empty() && p != TOP_PRED)
}

#[derive(Default, Debug)]
struct Subst {
    letters: BTreeMap<String, Formula>,
    vars: BTreeMap<Var, Var>,
}

impl Subst {
    fn var(&mut self, u: &Var, v: &Var) -> bool {
        self.vars.entry(u.clone()).or_insert_with(|| v.clone()) == v
    }

    /// Extend so that `pat` instantiates to `f`.
    fn matches(&mut self, pat: &Formula, f: &Formula) -> bool {
        use Formula::*;
        if is_letter(pat) {
            let Atom(p, _) = pat else { unreachable!() };
            return self.letters.entry(p.clone()).or_insert_with(|| f.clone()) == f;
        }
        match (pat, f) {
            (Eq(a, b), Eq(c, d)) => self.var(a, c) && self.var(b, d),
            (Atom(p, us), Atom(q, vs)) => {
                p == q && us.len() == vs.len() && us.iter().zip(vs).all(|(u, v)| self.var(u, v))
            }
            (Not(a), Not(b)) | (Box(a), Box(b)) => self.matches(a, b),
            (And(a1, a2), And(b1, b2)) | (Or(a1, a2), Or(b1, b2)) | (Implies(a1, a2), Implies(b1, b2)) => {
                self.matches(a1, b1) && self.matches(a2, b2)
            }
            (BoxX(u, a), BoxX(v, b)) => self.var(u, v) && self.matches(a, b),
            _ => false,
        }
    }

    /// Apply to a line of the lemma's proof. Variables the match did not fix
    /// move out of the way of everything the substitution introduces.
    fn apply(&self, f: &Formula, extra: &BTreeMap<Var, Var>) -> Formula {
        use Formula::*;
        let rn = |v: &Var| self.vars.get(v).or(extra.get(v)).cloned().unwrap_or_else(|| v.clone());
        match f {
            _ if is_letter(f) => {
                let Atom(p, _) = f else { unreachable!() };
                self.letters.get(p).cloned().unwrap_or_else(|| f.clone())
            }
            Eq(a, b) => Eq(rn(a), rn(b)),
            Atom(p, args) => Atom(p.clone(), args.iter().map(rn).collect()),
            Not(a) => not(self.apply(a, extra)),
            Box(a) => boxk(self.apply(a, extra)),
            BoxX(x, a) => boxx(&rn(x), self.apply(a, extra)),
            DiaX(x, a) => diax(&rn(x), self.apply(a, extra)),
            And(a, b) => and(self.apply(a, extra), self.apply(b, extra)),
            Or(a, b) => or(self.apply(a, extra), self.apply(b, extra)),
            Implies(a, b) => implies(self.apply(a, extra), self.apply(b, extra)),
        }
    }

    fn instantiate(&self, s: &ProofScript) -> ProofScript {
        let mut taken: BTreeSet<Var> = self.vars.values().cloned().collect();
        for f in self.letters.values() {
            taken.extend(f.all_vars());
        }
        let mut own = BTreeSet::new();
        for l in &s.lines {
            own.extend(unfold(&l.formula).all_vars());
        }
        let mut extra = BTreeMap::new();
        for v in own.iter().filter(|v| !self.vars.contains_key(*v)) {
            if taken.contains(v) {
                let mut avoid = taken.clone();
                avoid.extend(own.iter().cloned());
                let fresh = fresh_var(&avoid);
                taken.insert(fresh.clone());
                extra.insert(v.clone(), fresh);
            } else {
                taken.insert(v.clone());
            }
        }
        let lines = s
            .lines
            .iter()
            .map(|l| ProofLine {
                formula: self.apply(&unfold(&l.formula), &extra),
                just: match &l.just {
                    Justification::MonoMs(i, x) => Justification::MonoMs(
                        *i,
                        self.vars.get(x).or(extra.get(x)).cloned().unwrap_or_else(|| x.clone()),
                    ),
                    j => j.clone(),
                },
            })
            .collect();
        ProofScript {
            name: s.name.clone(),
            lines,
            target: None,
        }
    }
}

/// Peel `A1 -> ... -> Ak -> B` into premises and conclusion.
fn premises(f: &Formula, k: usize) -> Option<(Vec<&Formula>, &Formula)> {
    let mut ps = Vec::new();
    let mut cur = f;
    for _ in 0..k {
        let (a, b) = imp_parts(cur)?;
        ps.push(a);
        cur = b;
    }
    Some((ps, cur))
}

// ---------------------------------------------------------------- checking

struct Checker<'s> {
    store: &'s LemmaStore,
    /// Lemma instances already re-checked, by lemma name.
    seen: RefCell<HashSet<(String, Formula)>>,
}

impl Checker<'_> {
    fn check(&self, s: &ProofScript) -> Result<(), ProofError> {
        let err = |line: usize, reason: String| ProofError {
            script: s.name.clone(),
            line,
            reason,
        };
        if s.lines.is_empty() {
            return Err(err(0, "no lines".into()));
        }
        let forms: Vec<Formula> = s.lines.iter().map(|l| unfold(&l.formula)).collect();
        for (idx, l) in s.lines.iter().enumerate() {
            let n = idx + 1;
            let f = &forms[idx];
            let earlier = |i: usize| -> Result<&Formula, ProofError> {
                if i == 0 || i >= n {
                    Err(err(n, format!("line {i} is not an earlier line")))
                } else {
                    Ok(&forms[i - 1])
                }
            };
            match &l.just {
                Justification::Axiom(ax) => {
                    if !match_axiom(*ax, f) {
                        return Err(err(n, format!("not an instance of {}", ax.name())));
                    }
                }
                Justification::Mp(i, j) => {
                    let (a, imp) = (earlier(*i)?, earlier(*j)?);
                    match imp_parts(imp) {
                        Some((ante, cons)) if ante == a && cons == f => {}
                        Some((ante, _)) if ante != a => {
                            return Err(err(n, format!("line {i} is not the antecedent of line {j}")))
                        }
                        Some(_) => return Err(err(n, format!("line {j} does not conclude this formula"))),
                        None => return Err(err(n, format!("line {j} is not an implication"))),
                    }
                }
                Justification::MonoMs(i, x) => {
                    let prem = earlier(*i)?;
                    let Some((a, b)) = imp_parts(prem) else {
                        return Err(err(n, format!("line {i} is not an implication")));
                    };
                    if *f != implies(boxx(x, a.clone()), boxx(x, b.clone())) {
                        return Err(err(n, format!("not K[{x}] applied to both sides of line {i}")));
                    }
                }
                Justification::Lemma(name, refs) => {
                    let prems = refs.iter().map(|&i| earlier(i)).collect::<Result<Vec<_>, _>>()?;
                    self.lemma(name, &prems, f).map_err(|r| err(n, r))?;
                }
            }
        }
        if let Some(t) = &s.target {
            if unfold(t) != *forms.last().unwrap() {
                return Err(err(s.lines.len(), "last line differs from the target".into()));
            }
        }
        Ok(())
    }

    fn lemma(&self, name: &str, prems: &[&Formula], f: &Formula) -> Result<(), String> {
        let lemma = self
            .store
            .get(name)
            .ok_or_else(|| format!("no checked lemma named '{name}'"))?;
        let stated = unfold(lemma.conclusion().unwrap());
        let (pats, concl) = premises(&stated, prems.len())
            .ok_or_else(|| format!("lemma '{name}' does not take {} premises", prems.len()))?;
        let mut sub = Subst::default();
        let ok = pats.iter().zip(prems).all(|(p, g)| sub.matches(p, g)) && sub.matches(concl, f);
        if !ok {
            return Err(format!("not an instance of lemma '{name}'"));
        }
        let key = (name.to_string(), sub.apply(&stated, &BTreeMap::new()));
        if self.seen.borrow().contains(&key) {
            return Ok(());
        }
        let inst = sub.instantiate(lemma);
        self.check(&inst)
            .map_err(|e| format!("instance of lemma '{name}' fails at its line {}: {}", e.line, e.reason))?;
        if inst.lines.last().unwrap().formula != key.1 {
            return Err(format!("instance of lemma '{name}' proves something else"));
        }
        self.seen.borrow_mut().insert(key);
        Ok(())
    }
}

/// Check every line of `s`, reporting the first bad one.
///
/// A `LEMMA name i…` line must be an instance of the stored lemma's
/// conclusion after peeling one implication per cited line, with the cited
/// lines as the premises. The whole lemma proof is re-checked under the
/// substitution, so side conditions are never taken on trust.
pub fn check_proof(s: &ProofScript, store: &LemmaStore) -> Result<(), ProofError> {
    Checker {
        store,
        seen: RefCell::new(HashSet::new()),
    }
    .check(s)
}

/// Check independent scripts, in parallel when enabled.
pub fn check_all(scripts: &[ProofScript], store: &LemmaStore) -> Vec<Result<(), ProofError>> {
    par::map(scripts, |s| check_proof(s, store))
}

// ---------------------------------------------------------------- bundled library

/// In dependency order.
const BUNDLED: [(&str, &str); 15] = [
    ("MSKtoMS", include_str!("../proofs/MSKtoMS.prf")),
    ("MStotK", include_str!("../proofs/MStotK.prf")),
    ("MST", include_str!("../proofs/MST.prf")),
    ("NECK-instance", include_str!("../proofs/NECK-instance.prf")),
    ("NECMS-instance", include_str!("../proofs/NECMS-instance.prf")),
    ("RKtoMS-instance", include_str!("../proofs/RKtoMS-instance.prf")),
    ("4", include_str!("../proofs/4.prf")),
    ("5", include_str!("../proofs/5.prf")),
    ("RMS-instance", include_str!("../proofs/RMS-instance.prf")),
    ("Barcan-shape", include_str!("../proofs/Barcan-shape.prf")),
    ("KIMP", include_str!("../proofs/KIMP.prf")),
    ("SYM", include_str!("../proofs/SYM.prf")),
    ("TRANS", include_str!("../proofs/TRANS.prf")),
    ("KEQ", include_str!("../proofs/KEQ.prf")),
    ("KNEQ", include_str!("../proofs/KNEQ.prf")),
];

/// The bundled scripts as parsed, in dependency order.
pub fn bundled_scripts() -> Vec<(&'static str, &'static str, ProofScript)> {
    BUNDLED
        .iter()
        .map(|(file, text)| {
            let s = crate::parse::parse_proof(text).unwrap_or_else(|e| panic!("bundled {file}.prf: {e}"));
            (*file, *text, s)
        })
        .collect()
}

/// Check the bundled scripts in order, each against the ones before it.
pub fn bundled_lemmas() -> Result<LemmaStore, ProofError> {
    let mut store = LemmaStore::new();
    for (_, _, s) in bundled_scripts() {
        store.add(s)?;
    }
    Ok(store)
}

/// Load every `*.prf` in `dir`, in name order, checking each as it is added.
/// A file may cite any script already in the store.
pub fn load_lemmas(dir: &std::path::Path, mut store: LemmaStore) -> Result<LemmaStore, String> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "prf"))
        .collect();
    paths.sort();
    // retry until no progress so files need not be named in dependency order
    let mut pending: Vec<(std::path::PathBuf, ProofScript)> = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
        let s = crate::parse::parse_proof(&text).map_err(|e| format!("{}: {e}", p.display()))?;
        pending.push((p, s));
    }
    while !pending.is_empty() {
        let before = pending.len();
        let mut last_err = None;
        pending.retain(|(p, s)| match store.add(s.clone()) {
            Ok(()) => false,
            Err(e) => {
                last_err = Some(format!("{}: {e}", p.display()));
                true
            }
        });
        if pending.len() == before {
            return Err(last_err.unwrap());
        }
    }
    Ok(store)
}

// ---------------------------------------------------------------- soundness

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpotCheck {
    NoCounterexampleWithinBounds,
    Counterexample(Witness),
}

/// Look for an S5 model of `~φ` within the bounds.
pub fn soundness_spot_check(f: &Formula, max_w: usize, max_d: usize) -> SpotCheck {
    match bounded_search(&not(f.clone()), max_w, max_d, FrameClass::S5) {
        SearchResult::Found(w) => SpotCheck::Counterexample(w),
        SearchResult::NotFoundWithinBounds => SpotCheck::NoCounterexampleWithinBounds,
    }
}

// ---------------------------------------------------------------- generators

/// Appends kernel steps; every method returns the 1-based line it wrote.
#[derive(Clone, Debug, Default)]
pub struct ScriptBuilder {
    pub lines: Vec<ProofLine>,
}

impl ScriptBuilder {
    pub fn from_script(s: &ProofScript) -> Self {
        ScriptBuilder {
            lines: s.lines.clone(),
        }
    }

    pub fn formula(&self, i: usize) -> &Formula {
        &self.lines[i - 1].formula
    }

    pub fn push(&mut self, formula: Formula, just: Justification) -> usize {
        self.lines.push(ProofLine { formula, just });
        self.lines.len()
    }

    pub fn axiom(&mut self, ax: Axiom, f: Formula) -> usize {
        self.push(f, Justification::Axiom(ax))
    }

    pub fn mp(&mut self, i: usize, j: usize) -> usize {
        let (_, b) = imp_parts(self.formula(j)).expect("MP needs an implication");
        let b = b.clone();
        self.push(b, Justification::Mp(i, j))
    }

    pub fn monoms(&mut self, i: usize, x: &str) -> usize {
        let (a, b) = imp_parts(self.formula(i)).expect("MONOMS needs an implication");
        let f = implies(boxx(x, a.clone()), boxx(x, b.clone()));
        self.push(f, Justification::MonoMs(i, x.to_string()))
    }

    /// `concl` from the given lines through one TAUT step and MPs.
    pub fn taut(&mut self, from: &[usize], concl: Formula) -> usize {
        let t = from
            .iter()
            .rev()
            .fold(concl, |acc, &i| implies(self.formula(i).clone(), acc));
        let mut cur = self.axiom(Axiom::Taut, t);
        for &i in from {
            cur = self.mp(i, cur);
        }
        cur
    }

    /// NECK on line `i`: `K φ` through MST, MONOMS and MStoK.
    pub fn neck(&mut self, i: usize) -> usize {
        let phi = self.formula(i).clone();
        let y = pick_var(&phi);
        let ms = self.necms_with(i, &y);
        self.push(
            implies(self.formula(ms).clone(), boxk(phi.clone())),
            Justification::Axiom(Axiom::MsToK),
        );
        self.mp(ms, self.lines.len())
    }

    /// NECMS on line `i`: `K[x] φ`.
    pub fn necms_with(&mut self, i: usize, x: &str) -> usize {
        let phi = self.formula(i).clone();
        let t1 = self.taut(&[i], implies(top(), phi));
        let mono = self.monoms(t1, x);
        let mst = self.push(boxx(x, top()), Justification::Lemma("MST".into(), vec![]));
        self.mp(mst, mono)
    }

    /// From `K φ -> ψ` at line `i`, `K[x] φ -> ψ` when `x ∉ FV(ψ)`.
    pub fn rktoms(&mut self, i: usize, x: &str) -> Option<usize> {
        let (kphi, psi) = imp_parts(self.formula(i))?;
        let Formula::Box(phi) = kphi else { return None };
        let (phi, psi) = ((**phi).clone(), psi.clone());
        if is_free_in(x, &psi) {
            return None;
        }
        let a = self.axiom(Axiom::MsToMsk, implies(boxx(x, phi.clone()), boxx(x, boxk(phi.clone()))));
        let b = self.monoms(i, x);
        let c = self.axiom(Axiom::MsToK, implies(boxx(x, psi.clone()), boxk(psi.clone())));
        let d = self.axiom(Axiom::T, implies(boxk(psi.clone()), psi.clone()));
        Some(self.taut(&[a, b, c, d], implies(boxx(x, phi), psi)))
    }

    /// Lines `i: φ -> ψ` and `j: ψ -> φ` give `χ(φ) -> χ(ψ)` and back, where
    /// `χ` is `ctx` with the letter `hole` in place of the replaced part.
    pub fn replace(&mut self, i: usize, j: usize, ctx: &Formula, hole: &str) -> (usize, usize) {
        let (phi, psi) = {
            let (a, b) = imp_parts(self.formula(i)).expect("implication");
            (a.clone(), b.clone())
        };
        let fill = |c: &Formula, with: &Formula| plug(c, hole, with);
        let ctx = unfold(ctx);
        if !mentions(&ctx, hole) {
            let f = fill(&ctx, &phi);
            let k = self.axiom(Axiom::Taut, implies(f.clone(), f));
            return (k, k);
        }
        use Formula::*;
        match &ctx {
            Atom(p, _) if p == hole => (i, j),
            Not(a) => {
                let (l, r) = self.replace(i, j, a, hole);
                let (fa, fb) = (fill(a, &phi), fill(a, &psi));
                (
                    self.taut(&[r], implies(not(fa.clone()), not(fb.clone()))),
                    self.taut(&[l], implies(not(fb), not(fa))),
                )
            }
            And(a, b) | Or(a, b) | Implies(a, b) => {
                let (al, ar) = self.replace(i, j, a, hole);
                let (bl, br) = self.replace(i, j, b, hole);
                let (c1, c2) = (fill(&ctx, &phi), fill(&ctx, &psi));
                (
                    self.taut(&[al, ar, bl, br], implies(c1.clone(), c2.clone())),
                    self.taut(&[al, ar, bl, br], implies(c2, c1)),
                )
            }
            Box(a) => {
                let (l, r) = self.replace(i, j, a, hole);
                let dir = |k: usize, this: &mut Self| {
                    let nk = this.neck(k);
                    let (u, v) = imp_parts(this.formula(k)).map(|(u, v)| (u.clone(), v.clone())).unwrap();
                    let dk = this.axiom(Axiom::DistK, implies(boxk(implies(u.clone(), v.clone())), implies(boxk(u), boxk(v))));
                    this.mp(nk, dk)
                };
                let l2 = dir(l, self);
                let r2 = dir(r, self);
                (l2, r2)
            }
            BoxX(x, a) => {
                let (l, r) = self.replace(i, j, a, hole);
                (self.monoms(l, x), self.monoms(r, x))
            }
            _ => unreachable!("unfolded context"),
        }
    }

    pub fn finish(self, name: &str) -> ProofScript {
        ProofScript {
            name: name.to_string(),
            lines: self.lines,
            target: None,
        }
    }
}

fn mentions(f: &Formula, letter: &str) -> bool {
    match f {
        Formula::Atom(p, a) => a.is_empty() && p == letter,
        Formula::Eq(..) => false,
        Formula::Not(a) | Formula::Box(a) | Formula::BoxX(_, a) | Formula::DiaX(_, a) => mentions(a, letter),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => mentions(a, letter) || mentions(b, letter),
    }
}

/// Replace the 0-ary letter `hole` by `with`, capture and all.
pub fn plug(f: &Formula, hole: &str, with: &Formula) -> Formula {
    match f {
        Formula::Atom(p, a) if a.is_empty() && p == hole => with.clone(),
        Formula::Eq(..) | Formula::Atom(..) => f.clone(),
        Formula::Not(a) => not(plug(a, hole, with)),
        Formula::Box(a) => boxk(plug(a, hole, with)),
        Formula::BoxX(x, a) => boxx(x, plug(a, hole, with)),
        Formula::DiaX(x, a) => diax(x, plug(a, hole, with)),
        Formula::And(a, b) => and(plug(a, hole, with), plug(b, hole, with)),
        Formula::Or(a, b) => or(plug(a, hole, with), plug(b, hole, with)),
        Formula::Implies(a, b) => implies(plug(a, hole, with), plug(b, hole, with)),
    }
}

/// A readable variable that does not occur in `f`.
fn pick_var(f: &Formula) -> Var {
    let used = f.all_vars();
    ["y", "z", "u", "w", "x"]
        .into_iter()
        .map(String::from)
        .find(|v| !used.contains(v))
        .unwrap_or_else(|| fresh_var(&used))
}

/// NECK as a script transformer: from a proof of `φ`, a proof of `K φ`.
pub fn neck(s: &ProofScript) -> ProofScript {
    let mut b = ScriptBuilder::from_script(s);
    b.neck(s.lines.len());
    b.finish(&format!("{}-K", s.name))
}

/// NECMS: from a proof of `φ`, a proof of `K[x] φ`.
pub fn necms(s: &ProofScript, x: &str) -> ProofScript {
    let mut b = ScriptBuilder::from_script(s);
    b.necms_with(s.lines.len(), x);
    b.finish(&format!("{}-K{x}", s.name))
}

/// RKtoMS: from a proof of `K φ -> ψ`, a proof of `K[x] φ -> ψ`. `None` when
/// the last line has the wrong shape or `x` is free in `ψ`.
pub fn rktoms(s: &ProofScript, x: &str) -> Option<ProofScript> {
    let mut b = ScriptBuilder::from_script(s);
    b.rktoms(s.lines.len(), x)?;
    Some(b.finish(&format!("{}-RKtoMS", s.name)))
}

/// RE: from a proof of `φ <-> ψ` (spelled as two implications), a proof of
/// `χ(φ) <-> χ(ψ)`.
pub fn replace_equivalents(s: &ProofScript, ctx: &Formula, hole: &str) -> Option<ProofScript> {
    let last = unfold(&s.lines.last()?.formula);
    let Formula::And(l, r) = &last else { return None };
    let (phi, psi) = imp_parts(l)?;
    if imp_parts(r)? != (psi, phi) {
        return None;
    }
    let mut b = ScriptBuilder::from_script(s);
    let n = b.lines.len();
    let i = b.taut(&[n], (**l).clone());
    let j = b.taut(&[n], (**r).clone());
    let (fwd, back) = b.replace(i, j, ctx, hole);
    let (c1, c2) = (plug(&unfold(ctx), hole, phi), plug(&unfold(ctx), hole, psi));
    b.taut(&[fwd, back], iff(c1, c2));
    Some(b.finish(&format!("{}-RE", s.name)))
}
