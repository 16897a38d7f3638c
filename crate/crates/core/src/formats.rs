//! Line-based text formats for structures, operators, programs,
//! interpretations and the bundles the command line reads and writes.
//!
//! Blank lines and anything after `#` are ignored. Every parse error names
//! the file and line.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::coding::{decode_fact, FactCode, Nat};
use crate::error::{Error, Result};
use crate::functors::{ComputableFunctor, EnumerableFunctor, Functor};
use crate::interpretations::{
    ComputableEquiv, Disjunct, EffectiveInterpretation, FamilyBody, QFFormula, ReferenceMap, Sigma1Family,
};
use crate::operators::{Axiom, EnumerationOperator, Instr, JoinPart, OperatorBody, OracleProgram, View};
use crate::structures::{builtin, FiniteStructure, SharedPresentation, Signature};

// ---------------------------------------------------------------------------
// Reader

struct Line {
    no: usize,
    toks: Vec<String>,
    raw: String,
}

pub struct Reader {
    file: String,
    lines: Vec<Line>,
    pos: usize,
}

impl Reader {
    pub fn new(file: &str, text: &str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let raw = l.split('#').next().unwrap_or("").trim().to_string();
                (!raw.is_empty()).then(|| Line { no: i + 1, toks: raw.split_whitespace().map(String::from).collect(), raw })
            })
            .collect();
        Reader { file: file.into(), lines, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let line = self.lines.get(self.pos).or(self.lines.last()).map_or(0, |l| l.no);
        Err(Error::Parse { file: self.file.clone(), line, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Line> {
        self.lines.get(self.pos)
    }

    fn peek_head(&self) -> Option<&str> {
        self.peek().map(|l| l.toks[0].as_str())
    }

    fn next(&mut self, what: &str) -> Result<&Line> {
        if self.pos >= self.lines.len() {
            return self.err(format!("unexpected end of file, expected {what}"));
        }
        self.pos += 1;
        Ok(&self.lines[self.pos - 1])
    }

    /// Consumes a line starting with `head` and returns its other tokens.
    fn expect(&mut self, head: &str) -> Result<Vec<String>> {
        match self.peek() {
            Some(l) if l.toks[0] == head => {
                let t = l.toks[1..].to_vec();
                self.pos += 1;
                Ok(t)
            }
            Some(l) => {
                let found = l.toks[0].clone();
                self.err(format!("expected {head}, found {found}"))
            }
            None => self.err(format!("unexpected end of file, expected {head}")),
        }
    }

    /// Reports the error against the previous line.
    fn back_err<T>(&mut self, msg: impl Into<String>) -> Result<T> {
        self.pos = self.pos.saturating_sub(1);
        self.err(msg)
    }

    fn num<T: std::str::FromStr>(&mut self, tok: Option<&String>, what: &str) -> Result<T> {
        match tok.and_then(|t| t.parse().ok()) {
            Some(v) => Ok(v),
            None => self.back_err(format!("expected {what}")),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(l) => self.err(format!("unexpected `{}`", l.toks[0])),
        }
    }
}

fn token(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join("_")
}

// ---------------------------------------------------------------------------
// Signatures and structures

fn write_sig(out: &mut String, head: &str, sig: &Signature) {
    match sig {
        Signature::Finite(ar) => {
            let _ = writeln!(out, "{head} {}", ar.len());
            for (i, a) in ar.iter().enumerate() {
                let _ = writeln!(out, "AR {i} {a}");
            }
        }
        Signature::Unbounded { arity } => {
            let _ = writeln!(out, "{head} * {arity}");
        }
    }
}

fn read_sig(r: &mut Reader, head: &str) -> Result<Signature> {
    let t = r.expect(head)?;
    if t.first().map(String::as_str) == Some("*") {
        let arity = r.num(t.get(1), "an arity")?;
        return Ok(Signature::Unbounded { arity });
    }
    let count: usize = r.num(t.first(), "a relation count")?;
    let mut ar = vec![0; count];
    for (i, slot) in ar.iter_mut().enumerate() {
        let t = r.expect("AR")?;
        let idx: usize = r.num(t.first(), "a relation index")?;
        let a: usize = r.num(t.get(1), "an arity")?;
        if idx != i {
            return r.back_err(format!("expected AR {i}"));
        }
        *slot = a;
    }
    let sig = Signature::Finite(ar);
    if let Err(e) = sig.validate() {
        return r.back_err(e.to_string());
    }
    Ok(sig)
}

/// `SIG`, `AR` lines, then `RULE <builtin>` or the `FACT` lines of a finite
/// structure.
pub fn parse_structure(file: &str, text: &str) -> Result<SharedPresentation> {
    let mut r = Reader::new(file, text);
    let sig = read_sig(&mut r, "SIG")?;
    if r.peek_head() == Some("RULE") {
        let t = r.expect("RULE")?;
        let name = t.first().cloned().unwrap_or_default();
        let p = match builtin(&name) {
            Ok(p) => p,
            Err(e) => return r.back_err(e.to_string()),
        };
        if *p.signature() != sig {
            return r.back_err(format!("{name} does not have the declared signature"));
        }
        r.finish()?;
        return Ok(p);
    }
    let mut facts = Vec::new();
    while r.peek().is_some() {
        let t = r.expect("FACT")?;
        let code: Nat = r.num(t.first(), "a fact code")?;
        match decode_fact(&FactCode(code)) {
            Ok(f) => facts.push(f),
            Err(e) => return r.back_err(e.to_string()),
        }
    }
    match FiniteStructure::from_facts(file, sig, &facts) {
        Ok(s) => Ok(Arc::new(s)),
        Err(e) => r.back_err(e.to_string()),
    }
}

pub fn write_structure(s: &FiniteStructure) -> String {
    let mut out = String::new();
    write_sig(&mut out, "SIG", &s.sig);
    for f in s.all_facts().facts.values() {
        let _ = writeln!(out, "FACT {}", f.code().0);
    }
    out
}

// ---------------------------------------------------------------------------
// Operators

fn write_op(out: &mut String, op: &EnumerationOperator) {
    match &op.body {
        OperatorBody::Identity => {
            let _ = writeln!(out, "OP identity");
        }
        OperatorBody::Complement { rel } => {
            let _ = writeln!(out, "OP complement {rel}");
        }
        OperatorBody::Explicit(axioms) => {
            let _ = writeln!(out, "OP explicit {} {}", token(&op.name), axioms.len());
            for a in axioms {
                let alpha: Vec<String> = a.alpha.iter().map(Nat::to_string).collect();
                let _ = writeln!(out, "AXIOM {} -> {}", alpha.join(","), a.output);
            }
        }
        OperatorBody::Synthesized(i) => {
            let _ = writeln!(out, "OP synthesized {}", token(&op.name));
            write_interp(out, i);
        }
    }
}

/// `AXIOM c1,c2,... -> b`.
fn read_axiom(r: &mut Reader) -> Result<Axiom> {
    let line = r.next("AXIOM")?;
    let raw = line.raw.clone();
    let Some(rest) = raw.strip_prefix("AXIOM") else { return r.back_err("expected AXIOM") };
    let Some((lhs, rhs)) = rest.split_once("->") else { return r.back_err("AXIOM needs `->`") };
    let mut alpha = Vec::new();
    for c in lhs.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        match c.parse::<Nat>() {
            Ok(v) => alpha.push(v),
            Err(_) => return r.back_err(format!("bad code `{c}`")),
        }
    }
    let output = match rhs.trim().parse::<Nat>() {
        Ok(v) => v,
        Err(_) => return r.back_err(format!("bad code `{}`", rhs.trim())),
    };
    Ok(Axiom { alpha, output })
}

fn read_op(r: &mut Reader) -> Result<EnumerationOperator> {
    let t = r.expect("OP")?;
    match t.first().map(String::as_str) {
        Some("identity") => Ok(EnumerationOperator::identity()),
        Some("complement") => Ok(EnumerationOperator::complement(r.num(t.get(1), "a relation index")?)),
        Some("explicit") => {
            let name = t.get(1).cloned().unwrap_or_else(|| "explicit".into());
            let n: usize = r.num(t.get(2), "an axiom count")?;
            let axioms = (0..n).map(|_| read_axiom(r)).collect::<Result<Vec<_>>>()?;
            Ok(EnumerationOperator::explicit(&name, axioms))
        }
        Some("synthesized") => {
            let name = t.get(1).cloned().unwrap_or_else(|| "synthesized".into());
            let i = read_interp(r)?;
            Ok(EnumerationOperator { name, body: OperatorBody::Synthesized(Arc::new(i)) })
        }
        other => r.back_err(format!("unknown operator kind {other:?}")),
    }
}

/// An operator file: `AXIOM` lines only.
pub fn parse_operator(file: &str, name: &str, text: &str) -> Result<EnumerationOperator> {
    let mut r = Reader::new(file, text);
    let mut axioms = Vec::new();
    while r.peek().is_some() {
        axioms.push(read_axiom(&mut r)?);
    }
    Ok(EnumerationOperator::explicit(name, axioms))
}

// ---------------------------------------------------------------------------
// Equivalences

fn sim_text(s: &ComputableEquiv) -> String {
    match s {
        ComputableEquiv::CodeEquality => "code-equality".into(),
        ComputableEquiv::UnorderedPair => "unordered-pair".into(),
        ComputableEquiv::Coordinate { arity, index } => format!("coordinate {arity} {index}"),
        ComputableEquiv::Constant => "constant".into(),
        ComputableEquiv::Table(classes) => {
            let cls: Vec<String> =
                classes.iter().map(|c| c.iter().map(Nat::to_string).collect::<Vec<_>>().join(",")).collect();
            format!("table {}", cls.join(";"))
        }
    }
}

fn read_sim(r: &mut Reader, t: &[String]) -> Result<ComputableEquiv> {
    Ok(match t.first().map(String::as_str) {
        Some("code-equality") => ComputableEquiv::CodeEquality,
        Some("unordered-pair") => ComputableEquiv::UnorderedPair,
        Some("constant") => ComputableEquiv::Constant,
        Some("coordinate") => {
            ComputableEquiv::Coordinate { arity: r.num(t.get(1), "an arity")?, index: r.num(t.get(2), "an index")? }
        }
        Some("table") => {
            let body = t.get(1).cloned().unwrap_or_default();
            let mut classes = Vec::new();
            for c in body.split(';').filter(|c| !c.is_empty()) {
                let class = c.split(',').map(str::parse::<Nat>).collect::<std::result::Result<Vec<_>, _>>();
                match class {
                    Ok(v) => classes.push(v),
                    Err(_) => return r.back_err(format!("bad class `{c}`")),
                }
            }
            ComputableEquiv::Table(classes)
        }
        other => return r.back_err(format!("unknown equivalence {other:?}")),
    })
}

// ---------------------------------------------------------------------------
// Programs

fn view_text(v: &View) -> String {
    match v {
        View::Base => "base".into(),
        View::Part(p, inner) => {
            let p = match p {
                JoinPart::Left => "left",
                JoinPart::Map => "map",
                JoinPart::Right => "right",
            };
            format!("{p}({})", view_text(inner))
        }
        View::Image(o, inner) => format!("image.{o}({})", view_text(inner)),
        View::Decide(p, inner) => format!("decide.{p}({})", view_text(inner)),
        View::Graph(p, inner) => format!("graph.{p}({})", view_text(inner)),
        View::Join(a, b, c) => format!("join({};{};{})", view_text(a), view_text(b), view_text(c)),
    }
}

/// Splits `head(body)` and checks the parentheses close at the end.
fn split_call(s: &str) -> Option<(&str, &str)> {
    let open = s.find('(')?;
    s.ends_with(')').then(|| (&s[..open], &s[open + 1..s.len() - 1]))
}

fn parse_view(s: &str) -> Option<View> {
    if s == "base" {
        return Some(View::Base);
    }
    let (head, body) = split_call(s)?;
    let (kind, idx) = match head.split_once('.') {
        Some((k, i)) => (k, Some(i.parse::<usize>().ok()?)),
        None => (head, None),
    };
    let inner = || parse_view(body).map(Box::new);
    Some(match (kind, idx) {
        ("left", None) => View::Part(JoinPart::Left, inner()?),
        ("map", None) => View::Part(JoinPart::Map, inner()?),
        ("right", None) => View::Part(JoinPart::Right, inner()?),
        ("image", Some(i)) => View::Image(i, inner()?),
        ("decide", Some(i)) => View::Decide(i, inner()?),
        ("graph", Some(i)) => View::Graph(i, inner()?),
        ("join", None) => {
            // split on top-level semicolons
            let (mut depth, mut parts, mut start) = (0i32, Vec::new(), 0);
            for (i, ch) in body.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ';' if depth == 0 => {
                        parts.push(&body[start..i]);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            parts.push(&body[start..]);
            if parts.len() != 3 {
                return None;
            }
            View::Join(
                Box::new(parse_view(parts[0])?),
                Box::new(parse_view(parts[1])?),
                Box::new(parse_view(parts[2])?),
            )
        }
        _ => return None,
    })
}

fn instr_text(i: &Instr) -> String {
    match i {
        Instr::Set(r, v) => format!("SET {r} {v}"),
        Instr::Mov(a, b) => format!("MOV {a} {b}"),
        Instr::Add(a, b, c) => format!("ADD {a} {b} {c}"),
        Instr::Sub(a, b, c) => format!("SUB {a} {b} {c}"),
        Instr::Pair(a, b, c) => format!("PAIR {a} {b} {c}"),
        Instr::Unpair(a, b, c) => format!("UNPAIR {a} {b} {c}"),
        Instr::Query(a, b, v) => format!("QUERY {a} {b} {}", view_text(v)),
        Instr::Lookup(a, b, v) => format!("LOOKUP {a} {b} {}", view_text(v)),
        Instr::Jmp(t) => format!("JMP {t}"),
        Instr::Jz(r, t) => format!("JZ {r} {t}"),
        Instr::Jeq(a, b, t) => format!("JEQ {a} {b} {t}"),
        Instr::Jlt(a, b, t) => format!("JLT {a} {b} {t}"),
        Instr::Call(a, p, b, v) => format!("CALL {a} {p} {b} {}", view_text(v)),
        Instr::Stage(a, o, b, v) => format!("STAGE {a} {o} {b} {}", view_text(v)),
        Instr::Rep(a, s, b) => format!("REP {a} {s} {b}"),
        Instr::Halt(r) => format!("HALT {r}"),
    }
}

fn read_instr(r: &mut Reader) -> Result<Instr> {
    let line = r.next("an instruction")?;
    let t = line.toks.clone();
    let n = |r: &mut Reader, i: usize| -> Result<usize> { r.num(t.get(i), "a number") };
    let view = |r: &mut Reader, i: usize| -> Result<View> {
        match t.get(i).and_then(|s| parse_view(s)) {
            Some(v) => Ok(v),
            None => r.back_err(format!("bad view {:?}", t.get(i))),
        }
    };
    let want = |r: &mut Reader, k: usize| -> Result<()> {
        if t.len() != k + 1 {
            return r.back_err(format!("{} takes {k} operands", t[0]));
        }
        Ok(())
    };
    let ins = match t[0].as_str() {
        "SET" => {
            want(r, 2)?;
            Instr::Set(n(r, 1)?, r.num(t.get(2), "a value")?)
        }
        "MOV" => {
            want(r, 2)?;
            Instr::Mov(n(r, 1)?, n(r, 2)?)
        }
        "ADD" | "SUB" | "PAIR" | "UNPAIR" | "REP" => {
            want(r, 3)?;
            let (a, b, c) = (n(r, 1)?, n(r, 2)?, n(r, 3)?);
            match t[0].as_str() {
                "ADD" => Instr::Add(a, b, c),
                "SUB" => Instr::Sub(a, b, c),
                "PAIR" => Instr::Pair(a, b, c),
                "UNPAIR" => Instr::Unpair(a, b, c),
                _ => Instr::Rep(a, b, c),
            }
        }
        "QUERY" | "LOOKUP" => {
            want(r, 3)?;
            let (a, b, v) = (n(r, 1)?, n(r, 2)?, view(r, 3)?);
            if t[0] == "QUERY" {
                Instr::Query(a, b, v)
            } else {
                Instr::Lookup(a, b, v)
            }
        }
        "JMP" => {
            want(r, 1)?;
            Instr::Jmp(n(r, 1)?)
        }
        "JZ" => {
            want(r, 2)?;
            Instr::Jz(n(r, 1)?, n(r, 2)?)
        }
        "JEQ" | "JLT" => {
            want(r, 3)?;
            let (a, b, c) = (n(r, 1)?, n(r, 2)?, n(r, 3)?);
            if t[0] == "JEQ" {
                Instr::Jeq(a, b, c)
            } else {
                Instr::Jlt(a, b, c)
            }
        }
        "CALL" | "STAGE" => {
            want(r, 4)?;
            let (a, p, b, v) = (n(r, 1)?, n(r, 2)?, n(r, 3)?, view(r, 4)?);
            if t[0] == "CALL" {
                Instr::Call(a, p, b, v)
            } else {
                Instr::Stage(a, p, b, v)
            }
        }
        "HALT" => {
            want(r, 1)?;
            Instr::Halt(n(r, 1)?)
        }
        other => return r.back_err(format!("unknown instruction {other}")),
    };
    Ok(ins)
}

/// `PROG <name> <registers>`, library items (`OP`, `SIM`, nested `PROG`),
/// then `CODE`, one instruction per line, and `END`.
pub fn write_program(out: &mut String, p: &OracleProgram) {
    let _ = writeln!(out, "PROG {} {}", token(&p.name), p.registers);
    for op in &p.ops {
        write_op(out, op);
    }
    for s in &p.sims {
        let _ = writeln!(out, "SIM {}", sim_text(s));
    }
    for sub in &p.progs {
        write_program(out, sub);
    }
    let _ = writeln!(out, "CODE");
    for i in &p.code {
        let _ = writeln!(out, "{}", instr_text(i));
    }
    let _ = writeln!(out, "END");
}

pub fn read_program(r: &mut Reader) -> Result<OracleProgram> {
    let t = r.expect("PROG")?;
    let name = t.first().cloned().unwrap_or_else(|| "prog".into());
    let registers = r.num(t.get(1), "a register count")?;
    let mut p = OracleProgram { name, registers, code: Vec::new(), ops: Vec::new(), progs: Vec::new(), sims: Vec::new() };
    loop {
        match r.peek_head() {
            Some("OP") => p.ops.push(Arc::new(read_op(r)?)),
            Some("SIM") => {
                let t = r.expect("SIM")?;
                p.sims.push(read_sim(r, &t)?);
            }
            Some("PROG") => p.progs.push(Arc::new(read_program(r)?)),
            Some("CODE") => {
                r.expect("CODE")?;
                break;
            }
            _ => return r.err("expected OP, SIM, PROG or CODE"),
        }
    }
    while r.peek_head() != Some("END") {
        p.code.push(read_instr(r)?);
    }
    r.expect("END")?;
    if let Err(e) = p.validate() {
        return r.back_err(e.to_string());
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// Interpretations

fn write_family(out: &mut String, f: &Sigma1Family) {
    let head = format!("FAM {} free={}", token(&f.name), f.free);
    match &f.body {
        FamilyBody::Explicit(list) => {
            let _ = writeln!(out, "{head}");
            for d in list.iter() {
                let _ = writeln!(out, "DISJ wit={} : {}", d.witnesses, d.formula);
            }
        }
        FamilyBody::OpDomain { op, dim } => {
            let _ = writeln!(out, "{head} op-domain {dim}");
            write_op(out, op);
        }
        FamilyBody::StarDomain { op, dim } => {
            let _ = writeln!(out, "{head} star-domain {dim}");
            write_op(out, op);
        }
        FamilyBody::StarDomainNeg { op, dim } => {
            let _ = writeln!(out, "{head} star-domain-neg {dim}");
            write_op(out, op);
        }
        FamilyBody::OpRelation { op, rel, positive, arity, block, coord } => {
            let sign = if *positive { "pos" } else { "neg" };
            let _ = writeln!(out, "{head} op-relation {rel} {sign} {arity} {block} {coord}");
            write_op(out, op);
        }
    }
}

fn read_family(r: &mut Reader) -> Result<Sigma1Family> {
    let t = r.expect("FAM")?;
    let name = t.first().cloned().unwrap_or_default();
    let free: usize = match t.get(1).and_then(|s| s.strip_prefix("free=")) {
        Some(v) => r.num(Some(&v.to_string()), "free=<k>")?,
        None => return r.back_err("FAM needs free=<k>"),
    };
    let dim = |r: &mut Reader| -> Result<usize> { r.num(t.get(3), "a dimension") };
    let body = match t.get(2).map(String::as_str) {
        None => {
            let mut list = Vec::new();
            while r.peek_head() == Some("DISJ") {
                let line = r.next("DISJ")?;
                let raw = line.raw.clone();
                let Some((head, formula)) = raw.split_once(':') else { return r.back_err("DISJ needs `:`") };
                let wit = head.trim().strip_prefix("DISJ").map(str::trim).and_then(|w| w.strip_prefix("wit="));
                let witnesses: usize = match wit.and_then(|w| w.parse().ok()) {
                    Some(w) => w,
                    None => return r.back_err("DISJ needs wit=<m>"),
                };
                let formula: QFFormula = match formula.trim().parse() {
                    Ok(f) => f,
                    Err(e) => return r.back_err(e.to_string()),
                };
                list.push(Disjunct { witnesses, formula });
            }
            FamilyBody::Explicit(Arc::new(list))
        }
        Some("op-domain") => {
            let dim = dim(r)?;
            FamilyBody::OpDomain { op: Arc::new(read_op(r)?), dim }
        }
        Some("star-domain") => {
            let dim = dim(r)?;
            FamilyBody::StarDomain { op: Arc::new(read_op(r)?), dim }
        }
        Some("star-domain-neg") => {
            let dim = dim(r)?;
            FamilyBody::StarDomainNeg { op: Arc::new(read_op(r)?), dim }
        }
        Some("op-relation") => {
            let rel = r.num(t.get(3), "a relation")?;
            let positive = match t.get(4).map(String::as_str) {
                Some("pos") => true,
                Some("neg") => false,
                _ => return r.back_err("expected pos or neg"),
            };
            let arity = r.num(t.get(5), "an arity")?;
            let block = r.num(t.get(6), "a block length")?;
            let coord = r.num(t.get(7), "a coordinate")?;
            FamilyBody::OpRelation { op: Arc::new(read_op(r)?), rel, positive, arity, block, coord }
        }
        Some(other) => return r.back_err(format!("unknown family kind {other}")),
    };
    Ok(Sigma1Family { name, free, body })
}

/// `INTERP <name>`, both signatures, `DOM-ARITY`, `SIM`, `REFERENCE`, then
/// the domain families and a positive and negative family per relation,
/// closed by `END`.
pub fn write_interp(out: &mut String, i: &EffectiveInterpretation) {
    let _ = writeln!(out, "INTERP {}", token(&i.name));
    write_sig(out, "SOURCE-SIG", &i.source_sig);
    write_sig(out, "TARGET-SIG", &i.target_sig);
    let _ = writeln!(out, "DOM-ARITY {}", i.dom_arity);
    let _ = writeln!(out, "SIM {}", sim_text(&i.sim));
    let reference = match &i.reference {
        None => "none".to_string(),
        Some(ReferenceMap::Coordinate(c)) => format!("coordinate {c}"),
        Some(ReferenceMap::TriangularIndex) => "triangular".into(),
    };
    let _ = writeln!(out, "REFERENCE {reference}");
    write_family(out, &i.dom_pos);
    write_family(out, &i.dom_neg);
    for (p, n) in i.rel_pos.iter().zip(&i.rel_neg) {
        write_family(out, p);
        write_family(out, n);
    }
    let _ = writeln!(out, "END");
}

pub fn read_interp(r: &mut Reader) -> Result<EffectiveInterpretation> {
    let t = r.expect("INTERP")?;
    let name = t.first().cloned().unwrap_or_default();
    let source_sig = read_sig(r, "SOURCE-SIG")?;
    let target_sig = read_sig(r, "TARGET-SIG")?;
    let t = r.expect("DOM-ARITY")?;
    let dom_arity = r.num(t.first(), "an arity")?;
    let t = r.expect("SIM")?;
    let sim = read_sim(r, &t)?;
    let t = r.expect("REFERENCE")?;
    let reference = match t.first().map(String::as_str) {
        Some("none") => None,
        Some("triangular") => Some(ReferenceMap::TriangularIndex),
        Some("coordinate") => Some(ReferenceMap::Coordinate(r.num(t.get(1), "a coordinate")?)),
        other => return r.back_err(format!("unknown reference {other:?}")),
    };
    let dom_pos = read_family(r)?;
    let dom_neg = read_family(r)?;
    let (mut rel_pos, mut rel_neg) = (Vec::new(), Vec::new());
    while r.peek_head() == Some("FAM") {
        rel_pos.push(read_family(r)?);
        rel_neg.push(read_family(r)?);
    }
    r.expect("END")?;
    let i = EffectiveInterpretation { name, source_sig, target_sig, dom_arity, dom_pos, dom_neg, sim, rel_pos, rel_neg, reference };
    if let Err(e) = i.validate() {
        return r.back_err(e.to_string());
    }
    Ok(i)
}

// ---------------------------------------------------------------------------
// Bundles

/// Everything the command line reads or writes.
#[derive(Clone, Debug)]
pub enum Bundle {
    Functor(Functor),
    /// An interpretation living in a named built-in structure.
    Interpretation { structure: String, interp: EffectiveInterpretation },
    /// A row to prepend to a sequence.
    Prepend { row: OracleProgram, seq: OracleProgram },
    Sequence(OracleProgram),
}

impl Bundle {
    pub fn kind(&self) -> &'static str {
        match self {
            Bundle::Functor(Functor::Enumerable(_)) => "functor",
            Bundle::Functor(Functor::Computable(_)) => "computable-functor",
            Bundle::Interpretation { .. } => "interpretation",
            Bundle::Prepend { .. } => "prepend",
            Bundle::Sequence(_) => "sequence",
        }
    }
}

pub fn write_bundle(b: &Bundle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "KIND {}", b.kind());
    match b {
        Bundle::Functor(f) => {
            let (name, source, ss, ts) = match f {
                Functor::Enumerable(f) => (&f.name, &f.source, &f.source_sig, &f.target_sig),
                Functor::Computable(f) => (&f.name, &f.source, &f.source_sig, &f.target_sig),
            };
            let _ = writeln!(out, "NAME {}", token(name));
            let _ = writeln!(out, "STRUCTURE {}", token(source));
            write_sig(&mut out, "SOURCE-SIG", ss);
            write_sig(&mut out, "TARGET-SIG", ts);
            match f {
                Functor::Enumerable(f) => {
                    let _ = writeln!(out, "PSI");
                    write_op(&mut out, &f.psi);
                }
                Functor::Computable(f) => {
                    let _ = writeln!(out, "PHI");
                    write_program(&mut out, &f.phi);
                }
            }
            let _ = writeln!(out, "STAR");
            write_program(&mut out, f.phi_star());
        }
        Bundle::Interpretation { structure, interp } => {
            let _ = writeln!(out, "STRUCTURE {}", token(structure));
            write_interp(&mut out, interp);
        }
        Bundle::Prepend { row, seq } => {
            let _ = writeln!(out, "ROW");
            write_program(&mut out, row);
            let _ = writeln!(out, "SEQ");
            write_program(&mut out, seq);
        }
        Bundle::Sequence(p) => write_program(&mut out, p),
    }
    out
}

fn read_structure_name(r: &mut Reader) -> Result<String> {
    let t = r.expect("STRUCTURE")?;
    let name = t.first().cloned().unwrap_or_default();
    if let Err(e) = builtin(&name) {
        return r.back_err(e.to_string());
    }
    Ok(name)
}

pub fn parse_bundle(file: &str, text: &str) -> Result<Bundle> {
    let mut r = Reader::new(file, text);
    let t = r.expect("KIND")?;
    let kind = t.first().cloned().unwrap_or_default();
    let b = match kind.as_str() {
        "functor" | "computable-functor" => {
            let t = r.expect("NAME")?;
            let name = t.first().cloned().unwrap_or_default();
            let source = read_structure_name(&mut r)?;
            let source_sig = read_sig(&mut r, "SOURCE-SIG")?;
            let target_sig = read_sig(&mut r, "TARGET-SIG")?;
            let f = if kind == "functor" {
                r.expect("PSI")?;
                let psi = Arc::new(read_op(&mut r)?);
                r.expect("STAR")?;
                let phi_star = Arc::new(read_program(&mut r)?);
                Functor::Enumerable(EnumerableFunctor { name, source, source_sig, target_sig, psi, phi_star })
            } else {
                r.expect("PHI")?;
                let phi = Arc::new(read_program(&mut r)?);
                r.expect("STAR")?;
                let phi_star = Arc::new(read_program(&mut r)?);
                Functor::Computable(ComputableFunctor { name, source, source_sig, target_sig, phi, phi_star })
            };
            Bundle::Functor(f)
        }
        "interpretation" => {
            let structure = read_structure_name(&mut r)?;
            Bundle::Interpretation { structure, interp: read_interp(&mut r)? }
        }
        "prepend" => {
            r.expect("ROW")?;
            let row = read_program(&mut r)?;
            r.expect("SEQ")?;
            Bundle::Prepend { row, seq: read_program(&mut r)? }
        }
        "sequence" => Bundle::Sequence(read_program(&mut r)?),
        other => return r.back_err(format!("unknown bundle kind `{other}`")),
    };
    r.finish()?;
    Ok(b)
}

/// Parses and checks the kind.
pub fn expect_kind(b: Bundle, expected: &str) -> Result<Bundle> {
    if b.kind() == expected {
        Ok(b)
    } else {
        Err(Error::KindMismatch { expected: expected.into(), found: b.kind().into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::Fact;
    use crate::programs;
    use crate::transforms::{enum_to_computable, functor_to_interp, interp_to_functor};

    fn round_trip(b: &Bundle) {
        let text = write_bundle(b);
        let back = parse_bundle("t", &text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(write_bundle(&back), text);
    }

    #[test]
    fn bundles_round_trip() {
        let f = EnumerableFunctor::complement("rado");
        round_trip(&Bundle::Functor(Functor::Enumerable(f.clone())));
        round_trip(&Bundle::Functor(Functor::Computable(enum_to_computable(&f).functor)));
        let fi = functor_to_interp(&f, 2);
        round_trip(&Bundle::Interpretation { structure: "rado".into(), interp: fi.star.clone() });
        let pi = Arc::new(EffectiveInterpretation::pair_intersection());
        round_trip(&Bundle::Interpretation { structure: "pure-equality".into(), interp: (*pi).clone() });
        round_trip(&Bundle::Functor(Functor::Enumerable(interp_to_functor(pi, "pure-equality"))));
        round_trip(&Bundle::Prepend { row: programs::evens(), seq: programs::divisible_rows() });
    }

    #[test]
    fn errors_carry_lines() {
        let text = "KIND functor\nNAME x\nSTRUCTURE rado\nSOURCE-SIG 1\nAR 0 2\nTARGET-SIG 1\nAR 0 2\nPSI\nOP frob\n";
        match parse_bundle("f.txt", text) {
            Err(Error::Parse { file, line, .. }) => assert_eq!((file.as_str(), line), ("f.txt", 9)),
            other => panic!("{other:?}"),
        }
        let text = "KIND sequence\nPROG p 1\nCODE\nHALT 4\nEND\n";
        match parse_bundle("s.txt", text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_bundle("k", "KIND nope"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn structures_and_operator_files() {
        let p = parse_structure("s", "SIG 1\nAR 0 2\nRULE rado\n").unwrap();
        assert_eq!(p.name(), "rado");
        let e = |x: u64| Fact::element(crate::coding::nat(x)).code().0;
        let text = format!("SIG 0\n# two points\nFACT {}\nFACT {}\n", e(0), e(1));
        let p = parse_structure("s", &text).unwrap();
        assert!(p.is_finite());
        let s = FiniteStructure::from_facts("s", Signature::empty(), &[Fact::element(crate::coding::nat(2))]).unwrap();
        assert_eq!(write_structure(&s), format!("SIG 0\nFACT {}\n", e(2)));
        let op = parse_operator("o", "ops", "AXIOM -> 3\nAXIOM 3,10 -> 4\n").unwrap();
        assert_eq!(op.axiom(&crate::coding::nat(1)).unwrap().alpha.len(), 2);
        assert!(parse_operator("o", "ops", "AXIOM 3 4\n").is_err());
    }

    #[test]
    fn views_parse() {
        for v in [
            View::Base,
            View::right(),
            View::Join(
                Box::new(View::Image(0, Box::new(View::Base))),
                Box::new(View::Graph(1, Box::new(View::Base))),
                Box::new(View::Decide(2, Box::new(View::left()))),
            ),
        ] {
            assert_eq!(parse_view(&view_text(&v)), Some(v));
        }
        assert_eq!(parse_view("join(base;base)"), None);
    }
}
