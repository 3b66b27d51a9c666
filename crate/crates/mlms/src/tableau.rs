//! Tableau decision procedure for equality-free formulas over increasing-domain
//! models, with tree countermodel extraction.
//!
//! Nodes are `(w, Γ, σ)` with `σ` the identity on a finite set of variables.
//! (∧) is applied eagerly in place, (∨) picks the first disjunction of `Γ` and
//! tries the left disjunct first, (BR) spawns one child per diamond and per
//! variable of `σ'`, and (END) drops the boxes when no diamond is left.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::formula::{formula_size, free_vars, fresh_var, reletter_clean, substitute, to_pnf, Formula, FormulaError, Var};
use crate::par;
use crate::semantics::{mc, Assignment, KripkeModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableauError {
    #[error("the tableau does not handle equality")]
    EqualityNotSupported,
    #[error("node invariant ({invariant}) violated: {detail}")]
    InternalInvariant { invariant: u8, detail: String },
    #[error("tableau is not open")]
    NotOpen,
    #[error("extracted model: {0}")]
    Extraction(String),
    #[error("{0}")]
    Formula(String),
}

impl From<FormulaError> for TableauError {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::EqualityNotSupported => TableauError::EqualityNotSupported,
            other => TableauError::Formula(other.to_string()),
        }
    }
}

/// One step `v^y_{y_i}` of a world name: successor for object `obj` and the
/// diamond binding `dia`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub obj: Var,
    pub dia: Var,
}

/// World name: the root `w` followed by segments.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub Vec<Segment>);

impl Label {
    pub fn root() -> Label {
        Label(Vec::new())
    }

    pub fn child(&self, obj: &str, dia: &str) -> Label {
        let mut s = self.0.clone();
        s.push(Segment {
            obj: obj.to_string(),
            dia: dia.to_string(),
        });
        Label(s)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn parent(&self) -> Option<Label> {
        let mut s = self.0.clone();
        s.pop().map(|_| Label(s))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w")?;
        for s in &self.0 {
            write!(f, "v^{}_{}", s.obj, s.dia)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Number of consecutive (∧) steps.
    And(usize),
    Or,
    Br,
    End,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::And(1) => write!(f, "(&)"),
            Rule::And(k) => write!(f, "(&)x{k}"),
            Rule::Or => write!(f, "(|)"),
            Rule::Br => write!(f, "(BR)"),
            Rule::End => write!(f, "(END)"),
        }
    }
}

/// How a child of a (∨) node relates to the selected tableau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Chosen,
    /// Explored only for display; open, but not selected.
    Alternative,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableauNode {
    pub label: Label,
    pub gamma: Vec<Formula>,
    /// Always the identity, so only its domain is stored.
    pub sigma: BTreeSet<Var>,
    pub rule: Option<Rule>,
    pub children: Vec<TableauNode>,
    pub mark: Mark,
    /// Complementary literals sit in `gamma`.
    pub contradiction: bool,
}

impl TableauNode {
    fn new(label: &Label, gamma: Vec<Formula>, sigma: &BTreeSet<Var>) -> Self {
        TableauNode {
            label: label.clone(),
            gamma,
            sigma: sigma.clone(),
            rule: None,
            children: Vec::new(),
            mark: Mark::Chosen,
            contradiction: false,
        }
    }

    /// The children that belong to the selected tableau.
    pub fn selected(&self) -> impl Iterator<Item = &TableauNode> {
        self.children.iter().filter(|c| c.mark == Mark::Chosen)
    }

    pub fn is_branching(&self) -> bool {
        self.rule == Some(Rule::Br)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    pub theta: Formula,
    pub root: TableauNode,
    /// The reserved variable added to `σ_r` when `θ` is closed.
    pub reserved: Option<Var>,
    /// Whether unselected (∨) alternatives were explored too.
    pub full: bool,
    /// Node count of the input formula; extraction keeps `|D|` within it.
    pub input_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prepared {
    pub theta: Formula,
    pub sigma: BTreeSet<Var>,
    pub reserved: Option<Var>,
}

/// `θ = to_pnf(reletter_clean(φ))` and the root assignment.
///
/// `σ_r` holds the free variables of `θ`. The reserved variable (named `z`
/// when that is unused) is added only when `θ` is closed: its one job is to
/// keep local domains nonempty, and any free variable already does that. This
/// keeps the running example's root at `{(z,z)}`.
pub fn prepare(f: &Formula) -> Result<Prepared, TableauError> {
    if f.has_equality() {
        return Err(TableauError::EqualityNotSupported);
    }
    let theta = to_pnf(&reletter_clean(f))?;
    let mut sigma = free_vars(&theta);
    let mut reserved = None;
    if sigma.is_empty() {
        let used = theta.all_vars();
        let z = if used.contains("z") { fresh_var(&used) } else { "z".to_string() };
        sigma.insert(z.clone());
        reserved = Some(z);
    }
    Ok(Prepared {
        theta,
        sigma,
        reserved,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    /// Keep the selected tableau (needed for printing and extraction).
    pub keep: bool,
    /// Also explore and keep every (∨) alternative. Implies `keep`.
    pub full: bool,
    /// Explore both disjuncts of a (∨) concurrently. The verdict and the
    /// selected tableau are the same as in the sequential search.
    pub parallel_or: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Largest number of frames alive at once: one per (∨) choice, (BR)
    /// child or (END) step on the current branch, plus the root.
    pub max_live: usize,
    /// Tableau nodes visited.
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub sat: bool,
    pub tableau: Option<Tableau>,
    pub stats: Stats,
    pub prepared: Prepared,
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Tableau),
    Unsat,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
}

pub fn decide_sat(f: &Formula) -> Result<Verdict, TableauError> {
    let run = run(f, Options { keep: true, ..Options::default() })?;
    Ok(match run.tableau {
        Some(t) if run.sat => Verdict::Sat(t),
        _ => Verdict::Unsat,
    })
}

pub fn run(f: &Formula, opts: Options) -> Result<Run, TableauError> {
    let prepared = prepare(f)?;
    let opts = Options {
        keep: opts.keep || opts.full,
        ..opts
    };
    let search = Search {
        opts,
        live: AtomicUsize::new(0),
        nodes: AtomicUsize::new(0),
    };
    let out = search.step(&Label::root(), vec![prepared.theta.clone()], &prepared.sigma, 1)?;
    let stats = Stats {
        max_live: search.live.load(Ordering::SeqCst),
        nodes: search.nodes.load(Ordering::SeqCst),
    };
    let tableau = out.node.map(|root| Tableau {
        theta: prepared.theta.clone(),
        root,
        reserved: prepared.reserved.clone(),
        full: opts.full,
        input_size: formula_size(f),
    });
    Ok(Run {
        sat: out.open,
        tableau,
        stats,
        prepared,
    })
}

struct Search {
    opts: Options,
    live: AtomicUsize,
    nodes: AtomicUsize,
}

struct Outcome {
    open: bool,
    node: Option<TableauNode>,
}

fn push_unique(gamma: &mut Vec<Formula>, f: Formula) {
    if !gamma.contains(&f) {
        gamma.push(f);
    }
}

/// Replace every conjunction by its conjuncts, in place. Returns the number of
/// (∧) steps.
fn apply_and(gamma: &[Formula]) -> (Vec<Formula>, usize) {
    let mut steps = 0;
    let mut out = Vec::new();
    fn go(f: &Formula, out: &mut Vec<Formula>, steps: &mut usize) {
        if let Formula::And(a, b) = f {
            *steps += 1;
            go(a, out, steps);
            go(b, out, steps);
        } else {
            push_unique(out, f.clone());
        }
    }
    for f in gamma {
        go(f, &mut out, &mut steps);
    }
    (out, steps)
}

fn contradiction(gamma: &[Formula]) -> bool {
    gamma.iter().any(|f| match f {
        Formula::Not(a) => gamma.contains(a),
        _ => false,
    })
}

fn violation(invariant: u8, detail: String) -> TableauError {
    TableauError::InternalInvariant { invariant, detail }
}

/// Invariants of every node reachable from a clean PNF root: (1) no variable
/// is bound twice in Γ, (2) σ avoids the bound variables, (3) free variables
/// lie in σ, (4, 5) the free variables of a box are not bound by any other
/// modality in Γ, and vice versa for diamonds, (6) σ is the identity.
fn check_invariants(gamma: &[Formula], sigma: &BTreeSet<Var>) -> Result<(), TableauError> {
    let mut bound: BTreeSet<Var> = BTreeSet::new();
    for f in gamma {
        for b in f.binders() {
            if !bound.insert(b.clone()) {
                return Err(violation(1, format!("variable {b} is bound twice")));
            }
        }
    }
    if let Some(x) = sigma.iter().find(|x| bound.contains(*x)) {
        return Err(violation(2, format!("{x} is in σ and bound in Γ")));
    }
    for f in gamma {
        if let Some(x) = free_vars(f).into_iter().find(|x| !sigma.contains(x)) {
            return Err(violation(3, format!("free variable {x} is not in σ")));
        }
    }
    for (i, f) in gamma.iter().enumerate() {
        if let Formula::BoxX(_, phi) = f {
            let fv = free_vars(phi);
            for (j, g) in gamma.iter().enumerate() {
                match g {
                    _ if i == j => {}
                    Formula::BoxX(y, _) if fv.contains(y) => {
                        return Err(violation(4, format!("{y} is free under another box")));
                    }
                    Formula::DiaX(y, psi) => {
                        if fv.contains(y) {
                            return Err(violation(5, format!("{y} is free under a box")));
                        }
                        if let Formula::BoxX(x, _) = f {
                            if free_vars(psi).contains(x) {
                                return Err(violation(5, format!("{x} is free under a diamond")));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    // (6) σ is stored as its domain, so σ(x) = x holds by construction.
    Ok(())
}

impl Search {
    fn enter(&self, depth: usize) {
        self.live.fetch_max(depth, Ordering::SeqCst);
        self.nodes.fetch_add(1, Ordering::Relaxed);
    }

    fn step(&self, label: &Label, gamma: Vec<Formula>, sigma: &BTreeSet<Var>, depth: usize) -> Result<Outcome, TableauError> {
        self.enter(depth);
        check_invariants(&gamma, sigma)?;
        let keep = self.opts.keep;
        let mut node = keep.then(|| TableauNode::new(label, gamma.clone(), sigma));
        if contradiction(&gamma) {
            if let Some(n) = node.as_mut() {
                n.contradiction = true;
            }
            return Ok(Outcome { open: false, node });
        }
        let (gamma2, ands) = apply_and(&gamma);
        if ands > 0 {
            // (∧) works in place: same frame, but the printed tree shows it.
            let inner = self.step_decomposed(label, gamma2, sigma, depth)?;
            let node = node.map(|mut n| {
                n.rule = Some(Rule::And(ands));
                n.children = inner.node.into_iter().collect();
                n
            });
            return Ok(Outcome { open: inner.open, node });
        }
        self.finish(label, gamma, sigma, depth, node)
    }

    /// Like `step`, for a `Γ` that (∧) has just produced.
    fn step_decomposed(&self, label: &Label, gamma: Vec<Formula>, sigma: &BTreeSet<Var>, depth: usize) -> Result<Outcome, TableauError> {
        check_invariants(&gamma, sigma)?;
        let mut node = self.opts.keep.then(|| TableauNode::new(label, gamma.clone(), sigma));
        if contradiction(&gamma) {
            if let Some(n) = node.as_mut() {
                n.contradiction = true;
            }
            return Ok(Outcome { open: false, node });
        }
        self.finish(label, gamma, sigma, depth, node)
    }

    fn finish(
        &self,
        label: &Label,
        gamma: Vec<Formula>,
        sigma: &BTreeSet<Var>,
        depth: usize,
        mut node: Option<TableauNode>,
    ) -> Result<Outcome, TableauError> {
        if let Some(i) = gamma.iter().position(|f| matches!(f, Formula::Or(..))) {
            let Formula::Or(l, r) = &gamma[i] else { unreachable!() };
            let alts: Vec<Vec<Formula>> = [l, r]
                .iter()
                .map(|alt| {
                    let mut g = Vec::with_capacity(gamma.len());
                    for (j, f) in gamma.iter().enumerate() {
                        push_unique(&mut g, if j == i { (***alt).clone() } else { f.clone() });
                    }
                    g
                })
                .collect();
            return self.choose(label, alts, sigma, depth, node);
        }
        let boxes: Vec<(&Var, &Formula)> = gamma
            .iter()
            .filter_map(|f| match f {
                Formula::BoxX(x, phi) => Some((x, &**phi)),
                _ => None,
            })
            .collect();
        let dias: Vec<(&Var, &Formula)> = gamma
            .iter()
            .filter_map(|f| match f {
                Formula::DiaX(y, psi) => Some((y, &**psi)),
                _ => None,
            })
            .collect();
        if !dias.is_empty() {
            let mut sigma2 = sigma.clone();
            for (x, _) in &boxes {
                sigma2.insert((*x).clone());
            }
            let mut children = Vec::new();
            for (yi, psi) in &dias {
                for y in &sigma2 {
                    let mut g: Vec<Formula> = Vec::new();
                    for (_, phi) in &boxes {
                        push_unique(&mut g, (*phi).clone());
                    }
                    push_unique(&mut g, substitute(psi, yi, y));
                    children.push((label.child(y, yi), g));
                }
            }
            let mut open = true;
            let mut kept = Vec::new();
            for (child_label, g) in children {
                let out = self.step(&child_label, g, &sigma2, depth + 1)?;
                if let Some(n) = out.node {
                    kept.push(n);
                }
                if !out.open {
                    open = false;
                    if !self.opts.full {
                        break;
                    }
                }
            }
            if let Some(n) = node.as_mut() {
                n.rule = Some(Rule::Br);
                n.children = kept;
            }
            return Ok(Outcome { open, node });
        }
        if !boxes.is_empty() {
            let lits: Vec<Formula> = gamma.iter().filter(|f| f.is_literal()).cloned().collect();
            let out = self.step(label, lits, sigma, depth + 1)?;
            if let Some(n) = node.as_mut() {
                n.rule = Some(Rule::End);
                n.children = out.node.into_iter().collect();
            }
            return Ok(Outcome { open: out.open, node });
        }
        debug_assert!(gamma.iter().all(|f| f.is_literal()));
        Ok(Outcome { open: true, node })
    }

    fn choose(
        &self,
        label: &Label,
        alts: Vec<Vec<Formula>>,
        sigma: &BTreeSet<Var>,
        depth: usize,
        mut node: Option<TableauNode>,
    ) -> Result<Outcome, TableauError> {
        let results: Vec<Result<Outcome, TableauError>> = if self.opts.parallel_or || self.opts.full {
            // Both disjuncts are explored; the left one wins when open.
            if self.opts.parallel_or {
                par::map(&alts, |g| self.step(label, g.clone(), sigma, depth + 1))
            } else {
                alts.iter().map(|g| self.step(label, g.clone(), sigma, depth + 1)).collect()
            }
        } else {
            let left = self.step(label, alts[0].clone(), sigma, depth + 1)?;
            if left.open {
                vec![Ok(left)]
            } else {
                vec![Ok(left), self.step(label, alts[1].clone(), sigma, depth + 1)]
            }
        };
        let mut outs = Vec::new();
        for r in results {
            outs.push(r?);
        }
        let chosen = outs.iter().position(|o| o.open);
        if let Some(n) = node.as_mut() {
            n.rule = Some(Rule::Or);
            for (k, o) in outs.into_iter().enumerate() {
                if let Some(mut c) = o.node {
                    c.mark = if Some(k) == chosen {
                        Mark::Chosen
                    } else if o.open {
                        Mark::Alternative
                    } else {
                        Mark::Closed
                    };
                    if self.opts.full || Some(k) == chosen {
                        n.children.push(c);
                    }
                }
            }
        }
        Ok(Outcome {
            open: chosen.is_some(),
            node,
        })
    }
}

// ---------------------------------------------------------------- extraction

/// Countermodel read off an open tableau.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extracted {
    pub model: KripkeModel,
    pub root: usize,
    pub assignment: Assignment,
    /// Longest path from the root, in edges.
    pub depth: usize,
}

struct LastNode<'a> {
    node: &'a TableauNode,
    domain: BTreeSet<Var>,
}

/// Follow the selected children of a world's first node to its last node: a
/// branching node or a leaf.
fn last_node(mut n: &TableauNode) -> LastNode<'_> {
    loop {
        match n.rule {
            Some(Rule::Br) => {
                let mut domain = n.sigma.clone();
                for f in &n.gamma {
                    if let Formula::BoxX(x, _) = f {
                        domain.insert(x.clone());
                    }
                }
                return LastNode { node: n, domain };
            }
            Some(_) => {
                n = n.selected().next().expect("open (∧)/(∨)/(END) nodes have a selected child");
            }
            None => {
                return LastNode {
                    node: n,
                    domain: n.sigma.clone(),
                }
            }
        }
    }
}

/// Worlds are the labels, `wRv` holds when `v` is an immediate (BR) child of
/// `w`, `δ(w)` is the domain of the last node of `w` (σ' at a branching node),
/// and `ρ` collects the positive literals of the last node.
pub fn extract_model(t: &Tableau) -> Result<Extracted, TableauError> {
    if node_closed(&t.root) {
        return Err(TableauError::NotOpen);
    }
    let mut worlds: Vec<(Label, LastNode)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut stack: Vec<(&TableauNode, Option<usize>)> = vec![(&t.root, None)];
    while let Some((first, parent)) = stack.pop() {
        let last = last_node(first);
        let me = worlds.len();
        if let Some(p) = parent {
            edges.push((p, me));
        }
        let children: Vec<&TableauNode> = if last.node.is_branching() {
            last.node.children.iter().collect()
        } else {
            Vec::new()
        };
        worlds.push((first.label.clone(), last));
        for c in children.into_iter().rev() {
            stack.push((c, Some(me)));
        }
    }
    let objects: BTreeSet<Var> = worlds.iter().flat_map(|(_, l)| l.domain.iter().cloned()).collect();
    let objects: Vec<Var> = objects.into_iter().collect();
    let oid = |x: &str| objects.iter().position(|o| o == x).expect("literal variables lie in the local domain");
    let arity = t.theta.signature()?;
    let mut rho: BTreeMap<String, Vec<BTreeSet<Vec<usize>>>> = arity
        .keys()
        .map(|p| (p.clone(), vec![BTreeSet::new(); worlds.len()]))
        .collect();
    for (w, (_, last)) in worlds.iter().enumerate() {
        for f in &last.node.gamma {
            if let Formula::Atom(p, args) = f {
                rho.get_mut(p).unwrap()[w].insert(args.iter().map(|a| oid(a)).collect());
            }
        }
    }
    let mut succ = vec![BTreeSet::new(); worlds.len()];
    for (a, b) in edges {
        succ[a].insert(b);
    }
    let depth = worlds.iter().map(|(l, _)| l.depth()).max().unwrap_or(0);
    let model = KripkeModel {
        worlds: worlds.iter().map(|(l, _)| l.to_string()).collect(),
        objects: objects.clone(),
        delta: worlds.iter().map(|(_, l)| l.domain.iter().map(|x| oid(x)).collect()).collect(),
        succ,
        arity,
        rho,
    };
    let mut assignment = Assignment::new();
    for x in &t.root.sigma {
        assignment.map.insert(x.clone(), oid(x));
    }
    let (model, assignment) = merge_objects(model, assignment, &t.theta, t.input_size)?;
    Ok(Extracted {
        model,
        root: 0,
        assignment,
        depth,
    })
}

/// While there are more objects than `bound`, identify a pair of them such
/// that the root still satisfies `θ`.
///
/// The raw model has one object per variable, which can exceed the node count
/// of the input (`R(x,z)` has one node). Identifying objects keeps domains
/// increasing and nonempty; the surviving object keeps the smaller name.
fn merge_objects(
    mut m: KripkeModel,
    mut a: Assignment,
    theta: &Formula,
    bound: usize,
) -> Result<(KripkeModel, Assignment), TableauError> {
    let holds = |m: &KripkeModel, a: &Assignment| {
        mc(m, 0, a, theta).map_err(|e| TableauError::Extraction(e.to_string()))
    };
    if !holds(&m, &a)? {
        return Err(TableauError::Extraction("the root fails θ".into()));
    }
    'outer: while m.objects.len() > bound {
        let n = m.objects.len();
        for j in (1..n).rev() {
            for i in 0..j {
                let (m2, a2) = identify(&m, &a, i, j);
                if holds(&m2, &a2)? {
                    m = m2;
                    a = a2;
                    continue 'outer;
                }
            }
        }
        break;
    }
    Ok((m, a))
}

/// Replace object `j` by `i` and drop `j`.
fn identify(m: &KripkeModel, a: &Assignment, i: usize, j: usize) -> (KripkeModel, Assignment) {
    let f = |o: usize| {
        let o = if o == j { i } else { o };
        if o > j {
            o - 1
        } else {
            o
        }
    };
    let mut objects = m.objects.clone();
    objects.remove(j);
    let model = KripkeModel {
        worlds: m.worlds.clone(),
        objects,
        delta: m.delta.iter().map(|d| d.iter().map(|&o| f(o)).collect()).collect(),
        succ: m.succ.clone(),
        arity: m.arity.clone(),
        rho: m
            .rho
            .iter()
            .map(|(p, per)| (p.clone(), per.iter().map(|ts| ts.iter().map(|t| t.iter().map(|&o| f(o)).collect()).collect()).collect()))
            .collect(),
    };
    let mut a2 = a.clone();
    for o in a2.map.values_mut() {
        *o = f(*o);
    }
    a2.default = a.default.map(f);
    (model, a2)
}

fn node_closed(n: &TableauNode) -> bool {
    if n.contradiction {
        return true;
    }
    match n.rule {
        None => false,
        Some(Rule::Br) => n.children.iter().any(node_closed),
        Some(_) => match n.selected().next() {
            Some(c) => node_closed(c),
            None => true,
        },
    }
}

// ---------------------------------------------------------------- printing

fn print_gamma(gamma: &[Formula]) -> String {
    let parts: Vec<String> = gamma.iter().map(|f| f.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn print_sigma(sigma: &BTreeSet<Var>) -> String {
    let parts: Vec<String> = sigma.iter().map(|x| format!("({x},{x})")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Indented rendering, one node per line: `label: Γ σ   rule`.
pub fn print_tableau(t: &Tableau) -> String {
    let mut out = String::new();
    print_node(&t.root, 0, t.full, &mut out);
    out
}

fn print_node(n: &TableauNode, indent: usize, full: bool, out: &mut String) {
    out.push_str(&"  ".repeat(indent));
    out.push_str(&format!("{}: {} {}", n.label, print_gamma(&n.gamma), print_sigma(&n.sigma)));
    if let Some(r) = n.rule {
        out.push_str(&format!("    {r}"));
    }
    if n.contradiction {
        out.push_str("    x");
    }
    if full {
        match n.mark {
            Mark::Chosen => {}
            Mark::Alternative => out.push_str("    [alternative]"),
            Mark::Closed => out.push_str("    [closed]"),
        }
    }
    out.push('\n');
    for c in &n.children {
        print_node(c, indent + 1, full, out);
    }
}

/// Every leaf of the printed tree with its literal set.
pub fn leaves(t: &Tableau) -> Vec<(Label, Vec<Formula>, Mark)> {
    let mut out = Vec::new();
    fn go(n: &TableauNode, mark: Mark, out: &mut Vec<(Label, Vec<Formula>, Mark)>) {
        let mark = if n.mark == Mark::Chosen { mark } else { n.mark };
        if n.children.is_empty() {
            out.push((n.label.clone(), n.gamma.clone(), mark));
        }
        for c in &n.children {
            go(c, mark, out);
        }
    }
    go(&t.root, Mark::Chosen, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::formula_size;
    use crate::parse::parse_formula;
    use crate::semantics::mc;

    const RUNNING: &str = "K[x](P(x) | Q(x)) & D[y] ~Q(y) & ~P(z)";

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn prepare_examples() {
        let pr = prepare(&p(RUNNING)).unwrap();
        assert_eq!(pr.sigma, BTreeSet::from(["z".to_string()]));
        assert_eq!(pr.reserved, None);
        let pr = prepare(&p("K[x]P(x)")).unwrap();
        assert_eq!(pr.sigma, BTreeSet::from(["z".to_string()]));
        let pr = prepare(&p("P(x)")).unwrap();
        assert_eq!(pr.sigma, BTreeSet::from(["x".to_string()]));
        assert_eq!(prepare(&p("x = y")), Err(TableauError::EqualityNotSupported));
    }

    #[test]
    fn running_example_shape() {
        let run = run(&p(RUNNING), Options { full: true, ..Options::default() }).unwrap();
        assert!(run.sat);
        let t = run.tableau.unwrap();
        assert_eq!(t.root.rule, Some(Rule::And(2)));
        let br = &t.root.children[0];
        assert_eq!(br.rule, Some(Rule::Br));
        assert_eq!(print_gamma(&br.gamma), "{K[x] (P(x) | Q(x)), D[y] ~Q(y), ~P(z)}");
        let labels: Vec<String> = br.children.iter().map(|c| c.label.to_string()).collect();
        assert_eq!(labels, ["wv^x_y", "wv^z_y"]);
        assert_eq!(print_gamma(&br.children[1].gamma), "{P(x) | Q(x), ~Q(z)}");
        assert_eq!(print_sigma(&br.children[0].sigma), "{(x,x), (z,z)}");
        let leaves: Vec<String> = leaves(&t)
            .iter()
            .map(|(l, g, m)| format!("{l} {} {m:?}", print_gamma(g)))
            .collect();
        assert_eq!(
            leaves,
            [
                "wv^x_y {P(x), ~Q(x)} Chosen",
                "wv^x_y {Q(x), ~Q(x)} Closed",
                "wv^z_y {P(x), ~Q(z)} Chosen",
                "wv^z_y {Q(x), ~Q(z)} Alternative",
            ]
        );
    }

    #[test]
    fn extraction_of_running_example() {
        let Verdict::Sat(t) = decide_sat(&p(RUNNING)).unwrap() else { panic!() };
        let e = extract_model(&t).unwrap();
        let m = &e.model;
        assert_eq!(m.worlds, ["w", "wv^x_y", "wv^z_y"]);
        assert_eq!(m.objects, ["x", "z"]);
        assert_eq!(m.delta[0].len(), 2);
        assert!(m.is_increasing());
        assert!(mc(m, 0, &e.assignment, &t.theta).unwrap());
        assert!(mc(m, 0, &e.assignment, &p(RUNNING)).unwrap());
        assert!(m.rho["P"][1].contains(&vec![0]));
    }

    #[test]
    fn extraction_merges_objects_beyond_the_input_size() {
        for (f, n) in [("R(z,x)", 1), ("P(x) & ~P(y)", 2), ("R(x,y) & ~R(y,x)", 2)] {
            let Verdict::Sat(t) = decide_sat(&p(f)).unwrap() else { panic!() };
            let e = extract_model(&t).unwrap();
            assert_eq!(e.model.objects.len(), n, "{f}");
            assert!(mc(&e.model, 0, &e.assignment, &p(f)).unwrap());
        }
    }

    #[test]
    fn rules_on_small_nodes() {
        let Verdict::Sat(t) = decide_sat(&p("K[x]P(x) & ~Q")).unwrap() else { panic!() };
        let n = &t.root.children[0];
        assert_eq!(n.rule, Some(Rule::End));
        assert_eq!(print_gamma(&n.children[0].gamma), "{~Q}");
        let Verdict::Sat(t) = decide_sat(&p("P(x)")).unwrap() else { panic!() };
        assert_eq!(t.root.rule, None);
        let e = extract_model(&t).unwrap();
        assert_eq!(e.model.worlds.len(), 1);
        assert!(e.model.succ[0].is_empty());
    }

    #[test]
    fn unsat_cases() {
        assert_eq!(decide_sat(&p("P(x) & ~P(x)")).unwrap(), Verdict::Unsat);
        assert_eq!(decide_sat(&p("K[x]P(x) & D[y]~P(y)")).unwrap(), Verdict::Unsat);
        assert!(decide_sat(&p("K[x]P(x) & D[y]~Q(y)")).unwrap().is_sat());
    }

    #[test]
    fn live_frames_stay_linear() {
        for s in [RUNNING, "(P | Q) & (~P | R) & (~R | S) & D[x] (P(x) | K[y] Q(y))", "K K K K P"] {
            let f = p(s);
            let r = run(&f, Options::default()).unwrap();
            assert!(r.stats.max_live <= 2 * formula_size(&f), "{s}: {:?}", r.stats);
        }
    }

    #[test]
    fn parallel_or_matches_sequential() {
        for s in [RUNNING, "(P | Q) & ~P & (Q -> K[x] R(x)) & D[y] ~R(y)", "D[x](P(x) | ~P(x)) & K[y](~P(y) & Q(y))"] {
            let f = p(s);
            let a = run(&f, Options { keep: true, ..Options::default() }).unwrap();
            let b = run(&f, Options { keep: true, parallel_or: true, ..Options::default() }).unwrap();
            assert_eq!(a.sat, b.sat);
            assert_eq!(a.tableau.map(|t| print_tableau(&t)), b.tableau.map(|t| print_tableau(&t)));
        }
    }
}
