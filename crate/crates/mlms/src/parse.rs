//! Concrete syntax: formulas, proof scripts and the model JSON format.
//!
//! Formula grammar, loosest binding first:
//!
//! ```text
//! iff   := imp ("<->" imp)*
//! imp   := or ("->" imp)?
//! or    := and ("|" and)*
//! and   := unary ("&" unary)*
//! unary := "~" unary | "K" "[" id "]" unary | "D" "[" id "]" unary
//!        | "K" unary | "D" unary | prim
//! prim  := "top" | "bot" | "(" iff ")" | id "(" ids ")" | id "=" id | id
//! ```
//!
//! `D φ` without a bracket is the plain diamond, read as `~K~φ`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{self as fm, Formula};
use crate::hilbert::{Justification, ProofLine, ProofScript};
use crate::semantics::KripkeModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {}..{}: expected {expected}, found {found}", span.start, span.end)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema violation ({invariant}): {detail}")]
    Invariant { invariant: String, detail: String },
}

impl SchemaError {
    pub fn invariant(&self) -> Option<&str> {
        match self {
            SchemaError::Invariant { invariant, .. } => Some(invariant),
            SchemaError::Json(_) => None,
        }
    }
}

pub(crate) fn violation(invariant: &str, detail: impl Into<String>) -> SchemaError {
    SchemaError::Invariant {
        invariant: invariant.to_string(),
        detail: detail.into(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("proof script line {line}: {reason}")]
pub struct ProofParseError {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Equals,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBrack => "'['".into(),
        Tok::RBrack => "']'".into(),
        Tok::Comma => "','".into(),
        Tok::Tilde => "'~'".into(),
        Tok::Amp => "'&'".into(),
        Tok::Bar => "'|'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::DArrow => "'<->'".into(),
        Tok::Equals => "'='".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBrack),
            b']' => Some(Tok::RBrack),
            b',' => Some(Tok::Comma),
            b'~' => Some(Tok::Tilde),
            b'&' => Some(Tok::Amp),
            b'|' => Some(Tok::Bar),
            b'=' => Some(Tok::Equals),
            _ => None,
        };
        if c.is_ascii_whitespace() {
            i += 1;
        } else if let Some(t) = single {
            i += 1;
            out.push((t, SourceSpan { start, end: i }));
        } else if text[i..].starts_with("->") {
            i += 2;
            out.push((Tok::Arrow, SourceSpan { start, end: i }));
        } else if text[i..].starts_with("<->") {
            i += 3;
            out.push((Tok::DArrow, SourceSpan { start, end: i }));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), SourceSpan { start, end: i }));
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                span: SourceSpan {
                    start,
                    end: start + ch.len_utf8(),
                },
                expected: "a formula token".into(),
                found: format!("'{ch}'"),
            });
        }
    }
    out.push((
        Tok::End,
        SourceSpan {
            start: text.len(),
            end: text.len(),
        },
    ));
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["K", "D", "top", "bot"];

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (t, span) = &self.toks[self.pos];
        Err(ParseError {
            span: *span,
            expected: expected.to_string(),
            found: describe(t),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn var(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail("a variable"),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.imp()?;
            lhs = fm::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.imp()?;
            return Ok(fm::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.and()?;
            lhs = fm::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = fm::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(fm::not(self.unary()?))
            }
            Tok::Ident(k) if k == "K" || k == "D" => {
                self.bump();
                if *self.peek() == Tok::LBrack {
                    self.bump();
                    let x = self.var()?;
                    self.expect(Tok::RBrack, "']'")?;
                    let body = Box::new(self.unary()?);
                    Ok(if k == "K" {
                        Formula::BoxX(x, body)
                    } else {
                        Formula::DiaX(x, body)
                    })
                } else {
                    let body = self.unary()?;
                    Ok(if k == "K" {
                        fm::boxk(body)
                    } else {
                        fm::diamond(body)
                    })
                }
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "top" => {
                self.bump();
                Ok(fm::top())
            }
            Tok::Ident(s) if s == "bot" => {
                self.bump();
                Ok(fm::bot())
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                if *self.peek_at(1) == Tok::Equals {
                    self.bump();
                    self.bump();
                    let y = self.var()?;
                    return Ok(Formula::Eq(s, y));
                }
                self.bump();
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    if *self.peek() != Tok::RParen {
                        args.push(self.var()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.var()?);
                        }
                    }
                    self.expect(Tok::RParen, "',' or ')'")?;
                }
                Ok(Formula::Atom(s, args))
            }
            _ => self.fail("a formula"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.iff()?;
    if *p.peek() != Tok::End {
        return p.fail("end of input");
    }
    Ok(f)
}

const P_IMP: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_UNARY: u8 = 4;

pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, 0, &mut s);
    s
}

fn write_formula(f: &Formula, ctx: u8, out: &mut String) {
    let (prec, text) = render(f);
    if prec < ctx {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn sub(f: &Formula, ctx: u8) -> String {
    let mut s = String::new();
    write_formula(f, ctx, &mut s);
    s
}

fn render(f: &Formula) -> (u8, String) {
    if f.is_top() {
        return (5, "top".into());
    }
    if f.is_bot() {
        return (5, "bot".into());
    }
    match f {
        Formula::Eq(x, y) => (5, format!("{x} = {y}")),
        Formula::Atom(p, args) if args.is_empty() => (5, p.clone()),
        Formula::Atom(p, args) => (5, format!("{p}({})", args.join(","))),
        Formula::Not(a) => (P_UNARY, format!("~{}", sub(a, P_UNARY))),
        Formula::Box(a) => (P_UNARY, format!("K {}", sub(a, P_UNARY))),
        Formula::BoxX(x, a) => (P_UNARY, format!("K[{x}] {}", sub(a, P_UNARY))),
        Formula::DiaX(x, a) => (P_UNARY, format!("D[{x}] {}", sub(a, P_UNARY))),
        Formula::And(a, b) => (P_AND, format!("{} & {}", sub(a, P_AND), sub(b, P_UNARY))),
        Formula::Or(a, b) => (P_OR, format!("{} | {}", sub(a, P_OR), sub(b, P_AND))),
        Formula::Implies(a, b) => (P_IMP, format!("{} -> {}", sub(a, P_OR), sub(b, P_IMP))),
    }
}

// ---------------------------------------------------------------- proof scripts

/// Line-oriented format: `name:` and `target:` headers, `#` comments, then
/// numbered lines `n. <formula> ; <justification>`.
pub fn parse_proof(text: &str) -> Result<ProofScript, ProofParseError> {
    let mut name = String::from("unnamed");
    let mut target = None;
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let err = |reason: String| ProofParseError {
            line: lineno,
            reason,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("name:") {
            name = rest.trim().to_string();
            continue;
        }
        if let Some(rest) = line.strip_prefix("target:") {
            target = Some(parse_formula(rest.trim()).map_err(|e| err(e.to_string()))?);
            continue;
        }
        let (num, rest) = line
            .split_once('.')
            .ok_or_else(|| err("expected 'n. formula ; justification'".into()))?;
        let n: usize = num
            .trim()
            .parse()
            .map_err(|_| err(format!("bad line number '{}'", num.trim())))?;
        if n != lines.len() + 1 {
            return Err(err(format!("line number {n} out of sequence")));
        }
        let (ftext, jtext) = rest
            .rsplit_once(';')
            .ok_or_else(|| err("missing ';' before the justification".into()))?;
        let formula = parse_formula(ftext.trim()).map_err(|e| err(e.to_string()))?;
        let just = parse_justification(jtext.trim()).map_err(err)?;
        lines.push(ProofLine { formula, just });
    }
    Ok(ProofScript {
        name,
        lines,
        target,
    })
}

fn parse_justification(text: &str) -> Result<Justification, String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("expected a line number, found '{s}'"))
    };
    match words.as_slice() {
        [] => Err("empty justification".into()),
        ["MP", i, j] => Ok(Justification::Mp(num(i)?, num(j)?)),
        ["MONOMS", i, x] => Ok(Justification::MonoMs(num(i)?, x.to_string())),
        ["LEMMA", name, rest @ ..] => Ok(Justification::Lemma(
            name.to_string(),
            rest.iter().map(|s| num(s)).collect::<Result<_, _>>()?,
        )),
        [axiom] => crate::hilbert::Axiom::from_name(axiom)
            .map(Justification::Axiom)
            .ok_or_else(|| format!("unknown justification '{axiom}'")),
        _ => Err(format!("malformed justification '{text}'")),
    }
}

pub fn print_proof(s: &ProofScript) -> String {
    let mut out = format!("name: {}\n", s.name);
    if let Some(t) = &s.target {
        out.push_str(&format!("target: {}\n", print_formula(t)));
    }
    for (i, l) in s.lines.iter().enumerate() {
        out.push_str(&format!(
            "{}. {} ; {}\n",
            i + 1,
            print_formula(&l.formula),
            l.just
        ));
    }
    out
}

// ---------------------------------------------------------------- model files

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    pub domain: Vec<String>,
    pub delta: BTreeMap<String, Vec<String>>,
    pub relation: Vec<(String, String)>,
    #[serde(default)]
    pub rho: BTreeMap<String, BTreeMap<String, Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub arity: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub s5: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub constant_domain: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Load a model, checking every structural invariant.
pub fn parse_model(text: &str) -> Result<KripkeModel, SchemaError> {
    parse_model_with(text, false)
}

/// As [`parse_model`]; `strict` also rejects interpretation tuples that leave
/// the local domain of their world.
pub fn parse_model_with(text: &str, strict: bool) -> Result<KripkeModel, SchemaError> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    model_from_file(&file, strict)
}

pub fn model_from_file(file: &ModelFile, strict: bool) -> Result<KripkeModel, SchemaError> {
    let index = |names: &[String], what: &str| -> Result<BTreeMap<String, usize>, SchemaError> {
        let mut map = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if map.insert(n.clone(), i).is_some() {
                return Err(violation("unique names", format!("{what} '{n}' listed twice")));
            }
        }
        Ok(map)
    };
    let widx = index(&file.worlds, "world")?;
    let oidx = index(&file.domain, "object")?;
    if file.worlds.is_empty() {
        return Err(violation("nonempty worlds", "no worlds"));
    }
    let world = |n: &String| {
        widx.get(n)
            .copied()
            .ok_or_else(|| violation("known world", format!("unknown world '{n}'")))
    };
    let object = |n: &String| {
        oidx.get(n)
            .copied()
            .ok_or_else(|| violation("known object", format!("unknown object '{n}'")))
    };

    let mut delta = vec![BTreeSet::new(); file.worlds.len()];
    for (w, objs) in &file.delta {
        let wi = world(w)?;
        for o in objs {
            delta[wi].insert(object(o)?);
        }
    }
    let mut succ = vec![BTreeSet::new(); file.worlds.len()];
    for (a, b) in &file.relation {
        succ[world(a)?].insert(world(b)?);
    }

    let mut arity = file.arity.clone();
    let mut rho: BTreeMap<String, Vec<BTreeSet<Vec<usize>>>> = BTreeMap::new();
    for (p, per_world) in &file.rho {
        let slot = rho
            .entry(p.clone())
            .or_insert_with(|| vec![BTreeSet::new(); file.worlds.len()]);
        for (w, tuples) in per_world {
            let wi = world(w)?;
            for t in tuples {
                match arity.get(p) {
                    Some(&n) if n != t.len() => {
                        return Err(violation(
                            "arity",
                            format!("predicate '{p}' has arity {n} but a tuple of length {}", t.len()),
                        ))
                    }
                    _ => {
                        arity.insert(p.clone(), t.len());
                    }
                }
                let tuple = t.iter().map(object).collect::<Result<Vec<_>, _>>()?;
                if strict && tuple.iter().any(|o| !delta[wi].contains(o)) {
                    return Err(violation(
                        "local domain",
                        format!("tuple of '{p}' at '{w}' leaves the local domain"),
                    ));
                }
                slot[wi].insert(tuple);
            }
        }
    }
    for p in arity.keys() {
        rho.entry(p.clone())
            .or_insert_with(|| vec![BTreeSet::new(); file.worlds.len()]);
    }

    let model = KripkeModel {
        worlds: file.worlds.clone(),
        objects: file.domain.clone(),
        delta,
        succ,
        arity,
        rho,
    };
    model.validate()?;
    if file.s5 && !model.is_s5() {
        return Err(violation("s5", "relation is not an equivalence or domains differ"));
    }
    if file.constant_domain && !model.is_constant_domain() {
        return Err(violation("constant domain", "local domains differ"));
    }
    Ok(model)
}

pub fn model_to_file(m: &KripkeModel) -> ModelFile {
    let mut delta = BTreeMap::new();
    for (w, ds) in m.delta.iter().enumerate() {
        delta.insert(
            m.worlds[w].clone(),
            ds.iter().map(|&o| m.objects[o].clone()).collect(),
        );
    }
    let mut relation = Vec::new();
    for (w, ss) in m.succ.iter().enumerate() {
        for &v in ss {
            relation.push((m.worlds[w].clone(), m.worlds[v].clone()));
        }
    }
    let mut rho = BTreeMap::new();
    for (p, per_world) in &m.rho {
        let mut entry = BTreeMap::new();
        for (w, tuples) in per_world.iter().enumerate() {
            if !tuples.is_empty() {
                entry.insert(
                    m.worlds[w].clone(),
                    tuples
                        .iter()
                        .map(|t| t.iter().map(|&o| m.objects[o].clone()).collect())
                        .collect(),
                );
            }
        }
        rho.insert(p.clone(), entry);
    }
    ModelFile {
        worlds: m.worlds.clone(),
        domain: m.objects.clone(),
        delta,
        relation,
        rho,
        arity: m.arity.clone(),
        s5: m.is_s5(),
        constant_domain: m.is_constant_domain(),
    }
}

pub fn print_model(m: &KripkeModel) -> String {
    serde_json::to_string_pretty(&model_to_file(m)).expect("model files always serialize")
}
