//! Translations out of the modal language: first-order modal text, two-sorted
//! first-order logic over world and object variables, its one-sorted
//! reduction, TPTP text, and the embedding of prenex first-order formulas.
//! A finite evaluator checks the first-order side.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{self as fm, Formula, Var};
use crate::semantics::KripkeModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Object,
    World,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FoFormula {
    Eq(Var, Var),
    Pred(String, Vec<Var>),
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    Implies(Box<FoFormula>, Box<FoFormula>),
    /// `None` is an unsorted quantifier over the whole universe.
    Forall(Var, Option<Sort>, Box<FoFormula>),
    Exists(Var, Option<Sort>, Box<FoFormula>),
}

use FoFormula as Fo;

fn pred(p: &str, args: &[&str]) -> Fo {
    Fo::Pred(p.to_string(), args.iter().map(|a| a.to_string()).collect())
}
fn fnot(a: Fo) -> Fo {
    Fo::Not(Box::new(a))
}
fn fand(a: Fo, b: Fo) -> Fo {
    Fo::And(Box::new(a), Box::new(b))
}
fn for_(a: Fo, b: Fo) -> Fo {
    Fo::Or(Box::new(a), Box::new(b))
}
fn fimp(a: Fo, b: Fo) -> Fo {
    Fo::Implies(Box::new(a), Box::new(b))
}
fn forall(x: &str, s: Option<Sort>, a: Fo) -> Fo {
    Fo::Forall(x.to_string(), s, Box::new(a))
}
fn exists(x: &str, s: Option<Sort>, a: Fo) -> Fo {
    Fo::Exists(x.to_string(), s, Box::new(a))
}

/// Right-nested conjunction; the list must be non-empty.
fn conj(items: Vec<Fo>) -> Fo {
    let mut it = items.into_iter().rev();
    let last = it.next().expect("empty conjunction");
    it.fold(last, |acc, f| fand(f, acc))
}

fn flatten_and(f: Fo, out: &mut Vec<Fo>) {
    match f {
        Fo::And(a, b) => {
            flatten_and(*a, out);
            flatten_and(*b, out);
        }
        f => out.push(f),
    }
}

pub fn q_pred(p: &str) -> String {
    format!("Q_{p}")
}

impl FoFormula {
    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn go(f: &Fo, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                Fo::Eq(a, b) => {
                    for v in [a, b] {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                Fo::Pred(_, args) => out.extend(args.iter().filter(|v| !bound.contains(v)).cloned()),
                Fo::Not(a) => go(a, bound, out),
                Fo::And(a, b) | Fo::Or(a, b) | Fo::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Fo::Forall(x, _, a) | Fo::Exists(x, _, a) => {
                    bound.push(x.clone());
                    go(a, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn quantifier_free(&self) -> bool {
        match self {
            Fo::Eq(..) | Fo::Pred(..) => true,
            Fo::Not(a) => a.quantifier_free(),
            Fo::And(a, b) | Fo::Or(a, b) | Fo::Implies(a, b) => a.quantifier_free() && b.quantifier_free(),
            Fo::Forall(..) | Fo::Exists(..) => false,
        }
    }
}

// ---------------------------------------------------------------- printing

fn prec(f: &Fo) -> u8 {
    match f {
        Fo::Implies(..) => 1,
        Fo::Or(..) => 2,
        Fo::And(..) => 3,
        Fo::Forall(..) | Fo::Exists(..) => 0,
        _ => 4,
    }
}

fn sort_tag(s: &Option<Sort>) -> &'static str {
    match s {
        Some(Sort::Object) => ":obj",
        Some(Sort::World) => ":world",
        None => "",
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &Fo, min: u8) -> String {
            if prec(f) < min {
                format!("({f})")
            } else {
                f.to_string()
            }
        }
        match self {
            Fo::Eq(a, b) => write!(out, "{a} = {b}"),
            Fo::Pred(p, args) => write!(out, "{p}({})", args.join(",")),
            Fo::Not(a) => write!(out, "~{}", wrap(a, 4)),
            Fo::And(a, b) => write!(out, "{} & {}", wrap(a, 4), wrap(b, 3)),
            Fo::Or(a, b) => write!(out, "{} | {}", wrap(a, 3), wrap(b, 2)),
            Fo::Implies(a, b) => write!(out, "{} -> {}", wrap(a, 2), wrap(b, 1)),
            Fo::Forall(x, s, a) => write!(out, "forall {x}{}. {a}", sort_tag(s)),
            Fo::Exists(x, s, a) => write!(out, "exists {x}{}. {a}", sort_tag(s)),
        }
    }
}

// ---------------------------------------------------------------- first-order modal text

/// `K[x] φ` as `exists x . K φ`, `D[x] φ` as `forall x . <K> φ`.
pub fn to_foml_text(f: &Formula) -> String {
    fn p(f: &Formula) -> u8 {
        match f {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::BoxX(..) | Formula::DiaX(..) => 0,
            _ => 4,
        }
    }
    fn go(f: &Formula) -> String {
        let wrap = |g: &Formula, min: u8| {
            if p(g) < min {
                format!("({})", go(g))
            } else {
                go(g)
            }
        };
        if f.is_top() {
            return "top".into();
        }
        if f.is_bot() {
            return "bot".into();
        }
        match f {
            Formula::Eq(a, b) => format!("{a} = {b}"),
            Formula::Atom(q, args) if args.is_empty() => q.clone(),
            Formula::Atom(q, args) => format!("{q}({})", args.join(", ")),
            Formula::Not(a) => format!("~{}", wrap(a, 4)),
            Formula::And(a, b) => format!("{} & {}", wrap(a, 4), wrap(b, 3)),
            Formula::Or(a, b) => format!("{} | {}", wrap(a, 3), wrap(b, 2)),
            Formula::Implies(a, b) => format!("{} -> {}", wrap(a, 2), wrap(b, 1)),
            Formula::Box(a) => format!("K {}", wrap(a, 4)),
            Formula::BoxX(x, a) => format!("exists {x} . K {}", wrap(a, 4)),
            Formula::DiaX(x, a) => format!("forall {x} . <K> {}", wrap(a, 4)),
        }
    }
    go(f)
}

// ---------------------------------------------------------------- two-sorted translation

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Guard successors of `K[x]` with `E(v,x)`; equivalent on increasing
    /// domains only.
    pub evx_guard: bool,
}

/// The world variable paired with `u`: `v`, unless taken.
pub fn partner(u: &str, f: &Formula) -> Var {
    let used = f.all_vars();
    ["v", "w", "v1", "v2"]
        .into_iter()
        .map(String::from)
        .find(|c| c != u && !used.contains(c))
        .unwrap_or_else(|| format!("{u}_"))
}

/// The standard translation with world variable `u` free, alternating with
/// one more world variable.
pub fn to_2sfol(f: &Formula, u: &str) -> FoFormula {
    to_2sfol_with(f, u, TranslateOptions::default())
}

pub fn to_2sfol_with(f: &Formula, u: &str, opts: TranslateOptions) -> FoFormula {
    let v = partner(u, f);
    t(f, u, &v, opts)
}

fn t(f: &Formula, u: &str, v: &str, opts: TranslateOptions) -> Fo {
    let w = Some(Sort::World);
    let o = Some(Sort::Object);
    match f {
        Formula::Eq(a, b) => Fo::Eq(a.clone(), b.clone()),
        Formula::Atom(p, args) => {
            let mut all = vec![u.to_string()];
            all.extend(args.iter().cloned());
            Fo::Pred(q_pred(p), all)
        }
        Formula::Not(a) => fnot(t(a, u, v, opts)),
        Formula::And(a, b) => fand(t(a, u, v, opts), t(b, u, v, opts)),
        Formula::Or(a, b) => for_(t(a, u, v, opts), t(b, u, v, opts)),
        Formula::Implies(a, b) => fimp(t(a, u, v, opts), t(b, u, v, opts)),
        Formula::Box(a) => forall(v, w, fimp(pred("R", &[u, v]), t(a, v, u, opts))),
        Formula::BoxX(x, a) => {
            let mut guard = pred("R", &[u, v]);
            if opts.evx_guard {
                guard = fand(guard, pred("E", &[v, x]));
            }
            exists(
                x,
                o,
                fand(pred("E", &[u, x]), forall(v, w, fimp(guard, t(a, v, u, opts)))),
            )
        }
        Formula::DiaX(x, a) => {
            let mut guard = pred("R", &[u, v]);
            if opts.evx_guard {
                guard = fand(guard, pred("E", &[v, x]));
            }
            forall(
                x,
                o,
                fimp(pred("E", &[u, x]), exists(v, w, fand(guard, t(a, v, u, opts)))),
            )
        }
    }
}

// ---------------------------------------------------------------- one-sorted reduction

/// A one-sorted formula with the sort axiom `θ` and the increasing-domain
/// axiom `χ`, kept apart so callers decide what to conjoin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fol1 {
    pub formula: FoFormula,
    pub theta: FoFormula,
    pub chi: FoFormula,
}

fn sort_pred(s: Sort) -> &'static str {
    match s {
        Sort::Object => "S1",
        Sort::World => "S2",
    }
}

/// Relativise sorted quantifiers to `S1`/`S2`. Guards are merged into the
/// body: `exists x. (S1(x) & …)` and `forall v. ((S2(v) & A) -> B)`.
/// `free` gives the sorts of free variables; their guards join the outermost
/// existential when there is one, and are conjoined in front otherwise.
pub fn to_fol1(f: &FoFormula, free: &BTreeMap<Var, Sort>) -> Fol1 {
    let body = relativize(f);
    let guards: Vec<Fo> = free
        .iter()
        .filter(|(v, _)| f.free_vars().contains(*v))
        .map(|(v, s)| pred(sort_pred(*s), &[v]))
        .collect();
    let formula = if guards.is_empty() {
        body
    } else {
        match body {
            Fo::Exists(x, None, inner) => {
                let mut parts = Vec::new();
                flatten_and(*inner, &mut parts);
                let own = parts.remove(0);
                let mut all = vec![own];
                all.extend(guards);
                all.extend(parts);
                exists(&x, None, conj(all))
            }
            body => {
                let mut all = guards;
                all.push(body);
                conj(all)
            }
        }
    };
    Fol1 {
        formula,
        theta: theta(),
        chi: chi(),
    }
}

fn relativize(f: &Fo) -> Fo {
    match f {
        Fo::Eq(..) | Fo::Pred(..) => f.clone(),
        Fo::Not(a) => fnot(relativize(a)),
        Fo::And(a, b) => fand(relativize(a), relativize(b)),
        Fo::Or(a, b) => for_(relativize(a), relativize(b)),
        Fo::Implies(a, b) => fimp(relativize(a), relativize(b)),
        Fo::Exists(x, Some(s), a) => {
            let mut parts = vec![pred(sort_pred(*s), &[x])];
            flatten_and(relativize(a), &mut parts);
            exists(x, None, conj(parts))
        }
        Fo::Forall(x, Some(s), a) => {
            let guard = pred(sort_pred(*s), &[x]);
            match relativize(a) {
                Fo::Implies(l, r) => {
                    let mut parts = vec![guard];
                    flatten_and(*l, &mut parts);
                    forall(x, None, fimp(conj(parts), *r))
                }
                body => forall(x, None, fimp(guard, body)),
            }
        }
        Fo::Exists(x, None, a) => exists(x, None, relativize(a)),
        Fo::Forall(x, None, a) => forall(x, None, relativize(a)),
    }
}

/// `forall x. (S1(x) | S2(x)) & ~(S1(x) & S2(x))`
pub fn theta() -> FoFormula {
    let (s1, s2) = (pred("S1", &["x"]), pred("S2", &["x"]));
    forall(
        "x",
        None,
        fand(for_(s1.clone(), s2.clone()), fnot(fand(s1, s2))),
    )
}

/// Increasing domains: `forall u v x. (S2 u & S2 v & S1 x & E u x & R u v) -> E v x`.
pub fn chi() -> FoFormula {
    let ante = conj(vec![
        pred("S2", &["u"]),
        pred("S2", &["v"]),
        pred("S1", &["x"]),
        pred("E", &["u", "x"]),
        pred("R", &["u", "v"]),
    ]);
    forall(
        "u",
        None,
        forall("v", None, forall("x", None, fimp(ante, pred("E", &["v", "x"])))),
    )
}

// ---------------------------------------------------------------- TPTP

fn tptp_formula(f: &Fo, bound: &mut Vec<Var>) -> String {
    let term = |v: &Var, bound: &Vec<Var>| {
        if bound.contains(v) {
            format!("X{v}")
        } else {
            format!("c_{v}")
        }
    };
    let name = |p: &str| {
        let mut s = String::from("p_");
        s.push_str(p);
        s
    };
    match f {
        Fo::Eq(a, b) => format!("{} = {}", term(a, bound), term(b, bound)),
        Fo::Pred(p, args) => {
            let args: Vec<String> = args.iter().map(|a| term(a, bound)).collect();
            format!("{}({})", name(p), args.join(","))
        }
        Fo::Not(a) => format!("~ ({})", tptp_formula(a, bound)),
        Fo::And(a, b) => format!("({} & {})", tptp_formula(a, bound), tptp_formula(b, bound)),
        Fo::Or(a, b) => format!("({} | {})", tptp_formula(a, bound), tptp_formula(b, bound)),
        Fo::Implies(a, b) => format!("({} => {})", tptp_formula(a, bound), tptp_formula(b, bound)),
        Fo::Forall(x, _, a) | Fo::Exists(x, _, a) => {
            let q = if matches!(f, Fo::Forall(..)) { "!" } else { "?" };
            bound.push(x.clone());
            let body = tptp_formula(a, bound);
            bound.pop();
            format!("{q} [X{x}] : ({body})")
        }
    }
}

/// FOF problem text: `θ` and `χ` as axioms, the formula with its free
/// variables read as constants. Predicates get a `p_` prefix and bound
/// variables an `X` prefix to fit TPTP's case rules.
pub fn to_tptp(f: &Fol1) -> String {
    let mut out = String::new();
    for (name, g) in [("sorts", &f.theta), ("increasing", &f.chi), ("phi", &f.formula)] {
        out.push_str(&format!("fof({name}, axiom, {}).\n", tptp_formula(g, &mut Vec::new())));
    }
    out
}

// ---------------------------------------------------------------- evaluation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    World(usize),
    Object(usize),
}

impl Elem {
    fn sort(self) -> Sort {
        match self {
            Elem::World(_) => Sort::World,
            Elem::Object(_) => Sort::Object,
        }
    }
}

/// Worlds and objects as two carriers; an unsorted quantifier ranges over
/// both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoStructure {
    pub worlds: usize,
    pub objects: usize,
    pub rels: BTreeMap<String, BTreeSet<Vec<Elem>>>,
}

pub fn model_to_structure(m: &KripkeModel) -> FoStructure {
    let mut rels: BTreeMap<String, BTreeSet<Vec<Elem>>> = BTreeMap::new();
    let mut add = |p: &str, t: Vec<Elem>| {
        rels.entry(p.to_string()).or_default().insert(t);
    };
    for w in 0..m.worlds.len() {
        add("S2", vec![Elem::World(w)]);
        for &v in &m.succ[w] {
            add("R", vec![Elem::World(w), Elem::World(v)]);
        }
        for &a in &m.delta[w] {
            add("E", vec![Elem::World(w), Elem::Object(a)]);
        }
    }
    for a in 0..m.objects.len() {
        add("S1", vec![Elem::Object(a)]);
    }
    for (p, per_world) in &m.rho {
        let q = q_pred(p);
        for (w, tuples) in per_world.iter().enumerate() {
            for t in tuples {
                let mut row = vec![Elem::World(w)];
                row.extend(t.iter().map(|&a| Elem::Object(a)));
                add(&q, row);
            }
        }
    }
    for k in ["R", "E", "S1", "S2"] {
        rels.entry(k.to_string()).or_default();
    }
    FoStructure {
        worlds: m.worlds.len(),
        objects: m.objects.len(),
        rels,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoError {
    #[error("variable '{0}' is unassigned")]
    Unassigned(Var),
    #[error("'{0}' expects a {1:?} at argument {2}")]
    SortMismatch(String, Sort, usize),
}

fn expected_sorts(p: &str, n: usize) -> Option<Vec<Sort>> {
    match p {
        "R" => Some(vec![Sort::World; 2]),
        "E" => Some(vec![Sort::World, Sort::Object]),
        "S1" | "S2" => None,
        _ if p.starts_with("Q_") && n >= 1 => {
            let mut s = vec![Sort::World];
            s.extend(std::iter::repeat_n(Sort::Object, n - 1));
            Some(s)
        }
        _ => None,
    }
}

/// Classical truth. Sorted quantifiers range over their carrier and bind
/// elements of that sort; predicate arguments are then sort-checked.
/// Formulas with unsorted quantifiers are evaluated without sort checks.
pub fn fo_eval(s: &FoStructure, alpha: &BTreeMap<Var, Elem>, f: &FoFormula) -> Result<bool, FoError> {
    let mut env: Vec<(Var, Elem)> = alpha.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let sorted = is_sorted(f);
    eval(s, &mut env, f, sorted)
}

fn is_sorted(f: &Fo) -> bool {
    match f {
        Fo::Eq(..) | Fo::Pred(..) => true,
        Fo::Not(a) => is_sorted(a),
        Fo::And(a, b) | Fo::Or(a, b) | Fo::Implies(a, b) => is_sorted(a) && is_sorted(b),
        Fo::Forall(_, s, a) | Fo::Exists(_, s, a) => s.is_some() && is_sorted(a),
    }
}

fn lookup(env: &[(Var, Elem)], v: &Var) -> Result<Elem, FoError> {
    env.iter()
        .rev()
        .find(|(k, _)| k == v)
        .map(|(_, e)| *e)
        .ok_or_else(|| FoError::Unassigned(v.clone()))
}

fn eval(s: &FoStructure, env: &mut Vec<(Var, Elem)>, f: &Fo, sorted: bool) -> Result<bool, FoError> {
    Ok(match f {
        Fo::Eq(a, b) => lookup(env, a)? == lookup(env, b)?,
        Fo::Pred(p, args) => {
            let row = args.iter().map(|a| lookup(env, a)).collect::<Result<Vec<_>, _>>()?;
            if sorted {
                if let Some(want) = expected_sorts(p, row.len()) {
                    if want.len() != row.len() {
                        return Err(FoError::SortMismatch(p.clone(), want[0], row.len()));
                    }
                    if let Some(i) = (0..row.len()).find(|&i| row[i].sort() != want[i]) {
                        return Err(FoError::SortMismatch(p.clone(), want[i], i));
                    }
                }
            }
            s.rels.get(p).is_some_and(|r| r.contains(&row))
        }
        Fo::Not(a) => !eval(s, env, a, sorted)?,
        Fo::And(a, b) => eval(s, env, a, sorted)? && eval(s, env, b, sorted)?,
        Fo::Or(a, b) => eval(s, env, a, sorted)? || eval(s, env, b, sorted)?,
        Fo::Implies(a, b) => !eval(s, env, a, sorted)? || eval(s, env, b, sorted)?,
        Fo::Forall(x, sort, a) | Fo::Exists(x, sort, a) => {
            let all = matches!(f, Fo::Forall(..));
            let carrier: Vec<Elem> = match sort {
                Some(Sort::World) => (0..s.worlds).map(Elem::World).collect(),
                Some(Sort::Object) => (0..s.objects).map(Elem::Object).collect(),
                None => (0..s.worlds)
                    .map(Elem::World)
                    .chain((0..s.objects).map(Elem::Object))
                    .collect(),
            };
            let mut result = all;
            for e in carrier {
                env.push((x.clone(), e));
                let r = eval(s, env, a, sorted);
                env.pop();
                if r? != all {
                    result = !all;
                    break;
                }
            }
            result
        }
    })
}

// ---------------------------------------------------------------- prenex embedding

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmbedMode {
    /// `forall x` becomes `D[x] K`.
    #[default]
    DiaBox,
    /// `forall x` becomes `D[x]` alone.
    Dia,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("not in prenex form: a quantifier occurs inside the matrix")]
    NotPrenex,
    #[error("the matrix uses '{0}', which is not an object predicate")]
    WorldSymbol(String),
    #[error("quantifier over worlds: {0}")]
    WorldQuantifier(Var),
    #[error("syntax: {0}")]
    Syntax(String),
}

/// `exists x` becomes `K[x]`, `forall x` becomes `D[x] K` (or `D[x]`).
pub fn embed_prenex_fol(f: &FoFormula, mode: EmbedMode) -> Result<Formula, EmbedError> {
    match f {
        Fo::Exists(x, s, a) | Fo::Forall(x, s, a) => {
            if *s == Some(Sort::World) {
                return Err(EmbedError::WorldQuantifier(x.clone()));
            }
            let body = embed_prenex_fol(a, mode)?;
            Ok(if matches!(f, Fo::Exists(..)) {
                fm::boxx(x, body)
            } else {
                match mode {
                    EmbedMode::DiaBox => fm::diax(x, fm::boxk(body)),
                    EmbedMode::Dia => fm::diax(x, body),
                }
            })
        }
        m if m.quantifier_free() => matrix(m),
        _ => Err(EmbedError::NotPrenex),
    }
}

fn matrix(f: &Fo) -> Result<Formula, EmbedError> {
    Ok(match f {
        Fo::Eq(a, b) => Formula::Eq(a.clone(), b.clone()),
        Fo::Pred(p, _) if ["R", "E", "S1", "S2"].contains(&p.as_str()) || p.starts_with("Q_") => {
            return Err(EmbedError::WorldSymbol(p.clone()))
        }
        Fo::Pred(p, args) => Formula::Atom(p.clone(), args.clone()),
        Fo::Not(a) => fm::not(matrix(a)?),
        Fo::And(a, b) => fm::and(matrix(a)?, matrix(b)?),
        Fo::Or(a, b) => fm::or(matrix(a)?, matrix(b)?),
        Fo::Implies(a, b) => fm::implies(matrix(a)?, matrix(b)?),
        Fo::Forall(..) | Fo::Exists(..) => return Err(EmbedError::NotPrenex),
    })
}

/// Read `exists x. forall y. <matrix>`: a quantifier prefix, each entry
/// ending in `.`, then a quantifier-free matrix in formula syntax.
pub fn parse_prenex(text: &str) -> Result<FoFormula, EmbedError> {
    let mut rest = text.trim();
    let mut prefix = Vec::new();
    loop {
        let (kw, after) = match rest.split_once(char::is_whitespace) {
            Some((k, a)) if k == "exists" || k == "forall" => (k, a),
            _ => break,
        };
        let (var, after) = after
            .split_once('.')
            .ok_or_else(|| EmbedError::Syntax(format!("expected '.' after '{kw}'")))?;
        let var = var.trim();
        if var.is_empty() || !var.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(EmbedError::Syntax(format!("bad variable '{var}'")));
        }
        prefix.push((kw == "exists", var.to_string()));
        rest = after.trim_start();
    }
    let m = crate::parse::parse_formula(rest).map_err(|e| EmbedError::Syntax(e.to_string()))?;
    let mut out = from_matrix(&m)?;
    for (ex, x) in prefix.into_iter().rev() {
        out = if ex {
            exists(&x, Some(Sort::Object), out)
        } else {
            forall(&x, Some(Sort::Object), out)
        };
    }
    Ok(out)
}

fn from_matrix(f: &Formula) -> Result<Fo, EmbedError> {
    Ok(match f {
        Formula::Eq(a, b) => Fo::Eq(a.clone(), b.clone()),
        Formula::Atom(p, args) => Fo::Pred(p.clone(), args.clone()),
        Formula::Not(a) => fnot(from_matrix(a)?),
        Formula::And(a, b) => fand(from_matrix(a)?, from_matrix(b)?),
        Formula::Or(a, b) => for_(from_matrix(a)?, from_matrix(b)?),
        Formula::Implies(a, b) => fimp(from_matrix(a)?, from_matrix(b)?),
        _ => return Err(EmbedError::NotPrenex),
    })
}

/// A one-carrier structure for object-only formulas, from a predicate
/// interpretation over `0..n`.
pub fn object_structure(n: usize, rels: &BTreeMap<String, BTreeSet<Vec<usize>>>) -> FoStructure {
    FoStructure {
        worlds: 0,
        objects: n,
        rels: rels
            .iter()
            .map(|(p, ts)| {
                (
                    p.clone(),
                    ts.iter().map(|t| t.iter().map(|&a| Elem::Object(a)).collect()).collect(),
                )
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_model};
    use crate::semantics::{mc, Assignment};

    const EX1_M: &str = r#"{"worlds": ["w","v","u"], "domain": ["a","b"],
        "delta": {"w": ["a","b"], "v": ["a","b"], "u": ["a","b"]},
        "relation": [["w","v"],["w","u"]],
        "rho": {"P": {"v": [["a"]], "u": [["b"]]}}}"#;
    const EX1_N: &str = r#"{"worlds": ["s","t","r"], "domain": ["c"],
        "delta": {"s": ["c"], "t": ["c"], "r": ["c"]},
        "relation": [["s","t"],["s","r"]],
        "rho": {"P": {"t": [["c"]]}}}"#;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn standard_translation_examples() {
        assert_eq!(to_2sfol(&p("K[x]P(x)"), "u").to_string(), "exists x:obj. E(u,x) & (forall v:world. R(u,v) -> Q_P(v,x))");
        assert_eq!(to_2sfol(&p("x = y"), "u"), Fo::Eq("x".into(), "y".into()));
        assert_eq!(to_2sfol(&p("P(x)"), "u"), pred("Q_P", &["u", "x"]));
        // world variables alternate
        let f = to_2sfol(&p("K K P(x)"), "u").to_string();
        assert_eq!(f, "forall v:world. R(u,v) -> (forall u:world. R(v,u) -> Q_P(u,x))");
    }

    #[test]
    fn one_sorted_matches_the_displayed_form() {
        let two = to_2sfol(&p("K[x]P(x)"), "u");
        let one = to_fol1(&two, &BTreeMap::from([("u".to_string(), Sort::World)]));
        assert_eq!(
            one.formula.to_string(),
            "exists x. S1(x) & S2(u) & E(u,x) & (forall v. S2(v) & R(u,v) -> Q_P(v,x))"
        );
        assert_eq!(theta().to_string(), "forall x. (S1(x) | S2(x)) & ~(S1(x) & S2(x))");
        let guarded = to_2sfol_with(&p("K[x]P(x)"), "u", TranslateOptions { evx_guard: true });
        let g1 = to_fol1(&guarded, &BTreeMap::from([("u".to_string(), Sort::World)]));
        assert_eq!(
            g1.formula.to_string(),
            "exists x. S1(x) & S2(u) & E(u,x) & (forall v. S2(v) & R(u,v) & E(v,x) -> Q_P(v,x))"
        );
    }

    #[test]
    fn foml_text() {
        assert_eq!(to_foml_text(&p("K[x]P(x)")), "exists x . K P(x)");
        assert_eq!(to_foml_text(&p("D[x]P(x)")), "forall x . <K> P(x)");
        assert_eq!(to_foml_text(&p("P(x)")), "P(x)");
    }

    #[test]
    fn example_structures() {
        let (m, n) = (parse_model(EX1_M).unwrap(), parse_model(EX1_N).unwrap());
        // K (exists x. P x), written directly
        let box_some = |w: &str| {
            forall("v", Some(Sort::World), fimp(pred("R", &[w, "v"]), exists("x", Some(Sort::Object), pred("Q_P", &["v", "x"]))))
        };
        let at = |w: usize| BTreeMap::from([("u".to_string(), Elem::World(w))]);
        assert!(fo_eval(&model_to_structure(&m), &at(0), &box_some("u")).unwrap());
        assert!(!fo_eval(&model_to_structure(&n), &at(0), &box_some("u")).unwrap());
        let kx = to_2sfol(&p("K[x]P(x)"), "u");
        let sm = model_to_structure(&m);
        assert!(!fo_eval(&sm, &at(0), &kx).unwrap());
        assert!(!mc(&m, 0, &Assignment::new(), &p("K[x]P(x)")).unwrap());
        let e = fo_eval(&sm, &BTreeMap::from([("x".to_string(), Elem::World(0))]), &Fo::Eq("x".into(), "x".into()));
        assert_eq!(e, Ok(true));
        let bad = fo_eval(&sm, &BTreeMap::from([("u".to_string(), Elem::Object(0))]), &pred("R", &["u", "u"]));
        assert!(matches!(bad, Err(FoError::SortMismatch(..))));
    }

    #[test]
    fn embedding_examples() {
        let f = parse_prenex("exists x. forall y. M(x,y)").unwrap();
        assert_eq!(embed_prenex_fol(&f, EmbedMode::DiaBox).unwrap(), p("K[x] D[y] K M(x,y)"));
        assert_eq!(embed_prenex_fol(&parse_prenex("exists x. P(x)").unwrap(), EmbedMode::DiaBox).unwrap(), p("K[x] P(x)"));
        let qf = parse_prenex("P(x) & ~Q(y)").unwrap();
        assert_eq!(embed_prenex_fol(&qf, EmbedMode::DiaBox).unwrap(), p("P(x) & ~Q(y)"));
        let nested = fand(exists("x", Some(Sort::Object), pred("P", &["x"])), pred("Q", &["y"]));
        assert_eq!(embed_prenex_fol(&nested, EmbedMode::DiaBox), Err(EmbedError::NotPrenex));
        assert!(parse_prenex("exists x. K P(x)").is_err());
    }

    #[test]
    fn tptp_output_is_closed() {
        let two = to_2sfol(&p("K[x]P(x)"), "u");
        let text = to_tptp(&to_fol1(&two, &BTreeMap::from([("u".to_string(), Sort::World)])));
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("p_Q_P(Xv,Xx)"));
        assert!(text.contains("p_S2(c_u)"));
    }
}
