// SPDX-License-Identifier: Apache-2.0

//! Safety properties.
//!
//! A property file holds `prop NAME : EXPR` lines (and `xprop NAME : EXPR`
//! for generated X-propagation checks). Expressions are per-cycle
//! invariants over bit-vectors:
//!
//! | precedence | operators                          |
//! |------------|------------------------------------|
//! | lowest     | `->` (right associative)           |
//! |            | `\|`                               |
//! |            | `&`                                |
//! |            | `==` `!=` `<` `<=` `>` `>=`        |
//! | highest    | `~`, `known(sig)`, atoms, `( )`    |
//!
//! Signals are `inst.sig`, `inst.sig[i]` or `inst.sig[hi:lo]`; numbers are
//! decimal, `0x` or `0b`. Bitwise operators zero-extend to the wider
//! operand, comparisons are unsigned, and a vector is true when nonzero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{parse_number, syntax, ParseError};
use crate::logic::Tri;
use crate::netlist::{Design, FlatModel};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SigRef {
    pub name: String,
    /// `(hi, lo)`
    pub range: Option<(usize, usize)>,
}

impl SigRef {
    pub fn whole(name: &str) -> SigRef {
        SigRef {
            name: name.to_string(),
            range: None,
        }
    }

    pub fn instance(&self) -> Option<&str> {
        self.name.split_once('.').map(|(i, _)| i)
    }

    /// Selects the referenced bits out of the whole signal.
    pub fn select<T: Clone>(&self, bits: &[T]) -> Vec<T> {
        match self.range {
            None => bits.to_vec(),
            Some((hi, lo)) => bits[lo..=hi].to_vec(),
        }
    }
}

impl fmt::Display for SigRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.range {
            None => write!(f, "{}", self.name),
            Some((h, l)) if h == l => write!(f, "{}[{h}]", self.name),
            Some((h, l)) => write!(f, "{}[{h}:{l}]", self.name),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Implies,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Implies => "->",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Sig(SigRef),
    /// True when every referenced bit is known (not X).
    Known(SigRef),
    Const(u64),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn signals(&self, out: &mut Vec<SigRef>) {
        match self {
            Expr::Sig(s) | Expr::Known(s) => out.push(s.clone()),
            Expr::Const(_) => {}
            Expr::Not(e) => e.signals(out),
            Expr::Bin(_, a, b) => {
                a.signals(out);
                b.signals(out);
            }
        }
    }

    /// Lowers the expression to a single bit in any boolean algebra.
    /// `sig(r, known)` returns the value bits of `r`, or its known flags.
    pub fn lower<A: BitAlg>(&self, alg: &mut A, sig: &mut dyn FnMut(&SigRef, bool) -> Vec<A::B>) -> A::B {
        let v = self.lower_vec(alg, sig);
        alg.or_reduce(&v)
    }

    fn lower_vec<A: BitAlg>(&self, alg: &mut A, sig: &mut dyn FnMut(&SigRef, bool) -> Vec<A::B>) -> Vec<A::B> {
        match self {
            Expr::Sig(s) => sig(s, false),
            Expr::Known(s) => {
                let k = sig(s, true);
                vec![alg.and_reduce(&k)]
            }
            Expr::Const(c) => {
                let w = (64 - c.leading_zeros()).max(1) as usize;
                (0..w).map(|i| alg.lit(c >> i & 1 == 1)).collect()
            }
            Expr::Not(e) => {
                let v = e.lower_vec(alg, sig);
                v.iter().map(|b| alg.not(b)).collect()
            }
            Expr::Bin(op, a, b) => {
                let mut x = a.lower_vec(alg, sig);
                let mut y = b.lower_vec(alg, sig);
                if *op == BinOp::Implies {
                    let xa = alg.or_reduce(&x);
                    let yb = alg.or_reduce(&y);
                    let nx = alg.not(&xa);
                    return vec![alg.or(&nx, &yb)];
                }
                let w = x.len().max(y.len());
                let zero = alg.lit(false);
                x.resize(w, zero.clone());
                y.resize(w, zero);
                match op {
                    BinOp::And => x.iter().zip(&y).map(|(p, q)| alg.and(p, q)).collect(),
                    BinOp::Or => x.iter().zip(&y).map(|(p, q)| alg.or(p, q)).collect(),
                    BinOp::Eq | BinOp::Ne => {
                        let diffs: Vec<A::B> = x.iter().zip(&y).map(|(p, q)| alg.xor(p, q)).collect();
                        let any = alg.or_reduce(&diffs);
                        vec![if *op == BinOp::Ne { any } else { alg.not(&any) }]
                    }
                    BinOp::Lt => vec![less_than(alg, &x, &y)],
                    BinOp::Gt => vec![less_than(alg, &y, &x)],
                    BinOp::Le => {
                        let g = less_than(alg, &y, &x);
                        vec![alg.not(&g)]
                    }
                    BinOp::Ge => {
                        let l = less_than(alg, &x, &y);
                        vec![alg.not(&l)]
                    }
                    BinOp::Implies => unreachable!(),
                }
            }
        }
    }
}

fn less_than<A: BitAlg>(alg: &mut A, x: &[A::B], y: &[A::B]) -> A::B {
    let mut lt = alg.lit(false);
    for (a, b) in x.iter().zip(y) {
        let na = alg.not(a);
        let strict = alg.and(&na, b);
        let d = alg.xor(a, b);
        let same = alg.not(&d);
        let keep = alg.and(&same, &lt);
        lt = alg.or(&strict, &keep);
    }
    lt
}

/// A boolean algebra the property language can be lowered into.
pub trait BitAlg {
    type B: Clone;
    fn lit(&mut self, v: bool) -> Self::B;
    fn not(&mut self, a: &Self::B) -> Self::B;
    fn and(&mut self, a: &Self::B, b: &Self::B) -> Self::B;
    fn or(&mut self, a: &Self::B, b: &Self::B) -> Self::B;
    fn xor(&mut self, a: &Self::B, b: &Self::B) -> Self::B;

    fn or_reduce(&mut self, v: &[Self::B]) -> Self::B {
        let mut acc = self.lit(false);
        for b in v {
            acc = self.or(&acc, b);
        }
        acc
    }

    fn and_reduce(&mut self, v: &[Self::B]) -> Self::B {
        let mut acc = self.lit(true);
        for b in v {
            acc = self.and(&acc, b);
        }
        acc
    }
}

impl BitAlg for Tri {
    type B = Tri;
    fn lit(&mut self, v: bool) -> Tri {
        Tri::from_bool(v)
    }
    fn not(&mut self, a: &Tri) -> Tri {
        a.not()
    }
    fn and(&mut self, a: &Tri, b: &Tri) -> Tri {
        a.and(*b)
    }
    fn or(&mut self, a: &Tri, b: &Tri) -> Tri {
        a.or(*b)
    }
    fn xor(&mut self, a: &Tri, b: &Tri) -> Tri {
        a.xor(*b)
    }
}

impl BitAlg for bool {
    type B = bool;
    fn lit(&mut self, v: bool) -> bool {
        v
    }
    fn not(&mut self, a: &bool) -> bool {
        !a
    }
    fn and(&mut self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn or(&mut self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn xor(&mut self, a: &bool, b: &bool) -> bool {
        a ^ b
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Sig(s) => write!(f, "{s}"),
            Expr::Known(s) => write!(f, "known({s})"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Not(e) => write!(f, "~{e}"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PropKind {
    User,
    Xprop,
}

#[derive(Clone, Debug, Eq)]
pub struct PropertyAst {
    pub name: String,
    pub kind: PropKind,
    pub expr: Expr,
    /// Instances whose signals appear in the expression.
    pub scope: BTreeSet<String>,
    /// Source line (0 for generated properties); not part of equality.
    pub line: usize,
}

impl PartialEq for PropertyAst {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.kind == o.kind && self.expr == o.expr && self.scope == o.scope
    }
}

impl PropertyAst {
    pub fn new(name: &str, kind: PropKind, expr: Expr) -> PropertyAst {
        let mut sigs = Vec::new();
        expr.signals(&mut sigs);
        let scope = sigs
            .iter()
            .filter_map(|s| s.instance().map(str::to_string))
            .collect();
        PropertyAst {
            name: name.to_string(),
            kind,
            expr,
            scope,
            line: 0,
        }
    }

    /// Every signal reference must exist in `model` with in-range bits.
    pub fn check(&self, model: &FlatModel) -> Result<(), ParseError> {
        let mut sigs = Vec::new();
        self.expr.signals(&mut sigs);
        for s in sigs {
            let ok = match (model.signal(&s.name), s.range) {
                (Some(_), None) => true,
                (Some(bits), Some((h, l))) => h >= l && h < bits.len(),
                _ => false,
            };
            if !ok {
                return Err(ParseError::UnknownSignal {
                    line: self.line,
                    col: 1,
                    name: s.to_string(),
                });
            }
        }
        Ok(())
    }
}

// ---- parsing ----

#[derive(Clone, Debug, PartialEq)]
enum T {
    Ident(String),
    Num(u64),
    Op(&'static str),
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    line: usize,
    col0: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(&self) -> Result<Vec<(T, usize)>, ParseError> {
        let b = self.src.as_bytes();
        let mut i = 0;
        let mut out = Vec::new();
        while i < b.len() {
            let c = b[i] as char;
            let col = self.col0 + self.src[..i].chars().count();
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let s = i;
                while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b"_.$".contains(&b[i])) {
                    i += 1;
                }
                if i < b.len() && b[i] == b'[' {
                    match self.src[i..].find(']') {
                        Some(j) => i += j + 1,
                        None => return Err(syntax(self.line, col, "unterminated `[`")),
                    }
                }
                out.push((T::Ident(self.src[s..i].to_string()), col));
                continue;
            }
            if c.is_ascii_digit() {
                let s = i;
                while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                let n = parse_number(&self.src[s..i])
                    .ok_or_else(|| syntax(self.line, col, format!("bad number `{}`", &self.src[s..i])))?;
                out.push((T::Num(n), col));
                continue;
            }
            let two = self.src.get(i..i + 2).unwrap_or("");
            let op: &'static str = match two {
                "==" => "==",
                "!=" => "!=",
                "<=" => "<=",
                ">=" => ">=",
                "->" => "->",
                _ => match c {
                    '<' => "<",
                    '>' => ">",
                    '&' => "&",
                    '|' => "|",
                    '~' => "~",
                    '(' | ')' => "",
                    _ => {
                        return Err(syntax(self.line, col, format!("unexpected character `{c}`")));
                    }
                },
            };
            if op.is_empty() {
                out.push((if c == '(' { T::LParen } else { T::RParen }, col));
                i += 1;
            } else {
                out.push((T::Op(op), col));
                i += op.len();
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(T, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&T> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        syntax(self.line, self.col(), msg)
    }

    fn eat_op(&mut self, ops: &[&'static str]) -> Option<&'static str> {
        if let Some(T::Op(o)) = self.peek() {
            if let Some(&hit) = ops.iter().find(|x| *x == o) {
                self.pos += 1;
                return Some(hit);
            }
        }
        None
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let a = self.or()?;
        if self.eat_op(&["->"]).is_some() {
            let b = self.implies()?;
            return Ok(Expr::Bin(BinOp::Implies, Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut a = self.and()?;
        while self.eat_op(&["|"]).is_some() {
            let b = self.and()?;
            a = Expr::Bin(BinOp::Or, Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut a = self.cmp()?;
        while self.eat_op(&["&"]).is_some() {
            let b = self.cmp()?;
            a = Expr::Bin(BinOp::And, Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let a = self.unary()?;
        let Some(op) = self.eat_op(&["==", "!=", "<", "<=", ">", ">="]) else {
            return Ok(a);
        };
        let b = self.unary()?;
        let op = match op {
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            _ => BinOp::Ge,
        };
        if matches!(self.peek(), Some(T::Op("==" | "!=" | "<" | "<=" | ">" | ">="))) {
            return Err(self.err("comparisons do not chain; add parentheses"));
        }
        Ok(Expr::Bin(op, Box::new(a), Box::new(b)))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op(&["~"]).is_some() {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        match self.peek().cloned() {
            Some(T::LParen) => {
                self.pos += 1;
                let e = self.implies()?;
                if self.peek() != Some(&T::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(T::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            Some(T::Ident(id)) if id == "known" && self.toks.get(self.pos + 1).map(|t| &t.0) == Some(&T::LParen) => {
                self.pos += 2;
                let s = match self.peek().cloned() {
                    Some(T::Ident(s)) => self.sigref(&s)?,
                    _ => return Err(self.err("expected a signal")),
                };
                self.pos += 1;
                if self.peek() != Some(&T::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(Expr::Known(s))
            }
            Some(T::Ident(id)) => {
                let s = self.sigref(&id)?;
                self.pos += 1;
                Ok(Expr::Sig(s))
            }
            _ => Err(self.err("expected an operand")),
        }
    }

    fn sigref(&self, id: &str) -> Result<SigRef, ParseError> {
        let (name, range) = match id.find('[') {
            Some(i) => {
                let r = &id[i + 1..id.len() - 1];
                let num = |s: &str| s.trim().parse::<usize>().map_err(|_| self.err(format!("bad bit index in `{id}`")));
                let (h, l) = match r.split_once(':') {
                    Some((h, l)) => (num(h)?, num(l)?),
                    None => {
                        let v = num(r)?;
                        (v, v)
                    }
                };
                if h < l {
                    return Err(self.err(format!("reversed bit range in `{id}`")));
                }
                (&id[..i], Some((h, l)))
            }
            None => (id, None),
        };
        if name.ends_with('.') || name.contains("..") {
            return Err(self.err(format!("bad signal name `{name}`")));
        }
        Ok(SigRef {
            name: name.to_string(),
            range,
        })
    }
}

/// Parses a standalone expression (columns relative to `col0`).
pub fn parse_expr(src: &str, line: usize, col0: usize) -> Result<Expr, ParseError> {
    let toks = Lexer { src, line, col0 }.tokens()?;
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        end_col: col0 + src.chars().count(),
    };
    let e = p.implies()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

pub fn parse_props(text: &str) -> Result<Vec<PropertyAst>, ParseError> {
    let mut out: Vec<PropertyAst> = Vec::new();
    let mut names = BTreeSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let lead = body.len() - trimmed.len();
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let kind = match kw {
            "prop" => PropKind::User,
            "xprop" => PropKind::Xprop,
            _ => return Err(syntax(line, lead + 1, format!("expected `prop`, got `{kw}`"))),
        };
        let Some((name, expr)) = rest.split_once(':') else {
            return Err(syntax(line, lead + kw.len() + 2, "expected `NAME : EXPR`"));
        };
        let name = name.trim();
        let name_ok = !name.is_empty()
            && name.split('.').all(super::is_ident);
        if !name_ok {
            return Err(syntax(line, lead + kw.len() + 2, format!("bad property name `{name}`")));
        }
        if !names.insert(name.to_string()) {
            return Err(syntax(line, lead + kw.len() + 2, format!("duplicate property `{name}`")));
        }
        let expr_col = raw[..raw.find(':').unwrap() + 1].chars().count() + 1;
        let e = parse_expr(expr, line, expr_col)?;
        let mut p = PropertyAst::new(name, kind, e);
        p.line = line;
        out.push(p);
    }
    Ok(out)
}

pub fn write_props(props: &[PropertyAst]) -> String {
    let mut s = String::new();
    for p in props {
        let kw = match p.kind {
            PropKind::User => "prop",
            PropKind::Xprop => "xprop",
        };
        s.push_str(&format!("{kw} {} : {}\n", p.name, p.expr));
    }
    s
}

/// One X-propagation property per register: all its bits are known.
pub fn gen_xprops(model: &FlatModel) -> Vec<PropertyAst> {
    model
        .registers
        .iter()
        .map(|r| PropertyAst::new(&format!("xprop.{}", r.name), PropKind::Xprop, Expr::Known(SigRef::whole(&r.name))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropGroupKind {
    /// Every instance of one module.
    Ip { module: String, instances: Vec<String> },
    /// The `index + 1` highest-ranked instances.
    Subsystem { index: usize, instances: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropGroup {
    pub name: String,
    pub kind: PropGroupKind,
    pub props: Vec<PropertyAst>,
}

impl PropGroup {
    pub fn instances(&self) -> &[String] {
        match &self.kind {
            PropGroupKind::Ip { instances, .. } | PropGroupKind::Subsystem { instances, .. } => instances,
        }
    }
}

/// Assigns each property to the smallest architecture holding its scope:
/// its module's group for a single instance, otherwise the first
/// build-and-prove subsystem (in `ranked` order) that contains it.
pub fn divide_props(
    props: &[PropertyAst],
    design: &Design,
    ranked: &[String],
) -> Result<Vec<PropGroup>, ParseError> {
    let mut groups: Vec<PropGroup> = Vec::new();
    let mut by_module: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for i in &design.instances {
        by_module.entry(&i.module).or_default().push(i.name.clone());
    }
    for (m, insts) in &by_module {
        groups.push(PropGroup {
            name: m.to_string(),
            kind: PropGroupKind::Ip {
                module: m.to_string(),
                instances: insts.clone(),
            },
            props: Vec::new(),
        });
    }
    let n_ip = groups.len();
    for idx in 1..ranked.len() {
        groups.push(PropGroup {
            name: format!("subsystem-{idx}"),
            kind: PropGroupKind::Subsystem {
                index: idx,
                instances: ranked[..=idx].to_vec(),
            },
            props: Vec::new(),
        });
    }
    let pos: BTreeMap<&str, usize> = ranked.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    for p in props {
        let unknown = |name: &str| ParseError::UnknownSignal {
            line: p.line,
            col: 1,
            name: name.to_string(),
        };
        if p.scope.is_empty() {
            return Err(ParseError::UnresolvableScope(p.name.clone()));
        }
        let g = if p.scope.len() == 1 {
            let inst = p.scope.iter().next().unwrap();
            let module = &design.instance(inst).ok_or_else(|| unknown(inst))?.module;
            groups.iter().position(|g| &g.name == module).unwrap()
        } else {
            let mut m = 0;
            for inst in &p.scope {
                m = m.max(*pos.get(inst.as_str()).ok_or_else(|| unknown(inst))?);
            }
            n_ip + m.max(1) - 1
        };
        groups[g].props.push(p.clone());
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::Instance;

    fn eval(src: &str, env: &[(&str, u64, usize)]) -> bool {
        let e = parse_expr(src, 1, 1).unwrap();
        e.lower(&mut false, &mut |s, known| {
            let (_, v, w) = env.iter().find(|(n, _, _)| *n == s.name).unwrap();
            let bits: Vec<bool> = (0..*w).map(|i| known || v >> i & 1 == 1).collect();
            s.select(&bits)
        })
    }

    #[test]
    fn semantics() {
        let env = [("c.count", 3, 2), ("c.en", 1, 1)];
        assert!(!eval("c.count != 3", &env));
        assert!(eval("c.count < 4", &env));
        assert!(eval("c.count <= 3 & c.count > 2 & c.count >= 3", &env));
        assert!(eval("c.en -> c.count[1]", &env));
        assert!(eval("~c.en -> 0", &env));
        assert!(eval("(c.count & 2) == 2", &env));
        assert!(eval("c.count[1:0] == 0b11", &env));
        assert!(eval("known(c.count)", &env));
        assert!(!eval("c.en & 0 | 0", &env));
        assert!(eval("0 -> 1 -> 0", &[]));
    }

    #[test]
    fn precedence_and_round_trip() {
        let ps = parse_props("prop p1 : a.x == 1 | b.y & ~c.z -> a.w\nxprop xprop.a.r : known(a.r[3:0])\n").unwrap();
        assert_eq!(ps[0].expr.to_string(), "(((a.x == 1) | (b.y & ~c.z)) -> a.w)");
        assert_eq!(ps[0].scope.iter().collect::<Vec<_>>(), ["a", "b", "c"]);
        assert_eq!(ps[1].kind, PropKind::Xprop);
        assert_eq!(parse_props(&write_props(&ps)).unwrap(), ps);
    }

    #[test]
    fn errors() {
        let e = parse_props("prop p : a.x == \n").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 1, .. }));
        assert!(parse_props("prop p : a.x == 1 == 2\n").is_err());
        assert!(parse_props("assert p : a.x\n").is_err());
        assert!(parse_props("prop p : a.x\nprop p : a.y\n").is_err());
        assert!(parse_props("prop p : (a.x\n").is_err());
        assert!(parse_props("prop p : a.x ^ 1\n").is_err());
    }

    fn design() -> Design {
        let inst = |n: &str, m: &str| Instance {
            name: n.into(),
            module: m.into(),
        };
        Design {
            name: "g".into(),
            instances: vec![inst("cpu0", "cpu"), inst("ram0", "ram"), inst("can0", "can"), inst("eth0", "ethmac")],
            ..Default::default()
        }
    }

    #[test]
    fn grouping() {
        let ranked: Vec<String> = ["cpu0", "ram0", "can0", "eth0"].map(String::from).to_vec();
        let ps = parse_props("prop a : can0.MODE == 0\nprop b : cpu0.x -> ram0.y\nprop c : ram0.y | eth0.q\n").unwrap();
        let g = divide_props(&ps, &design(), &ranked).unwrap();
        let names: Vec<_> = g.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["can", "cpu", "ethmac", "ram", "subsystem-1", "subsystem-2", "subsystem-3"]);
        let find = |n: &str| g.iter().find(|g| g.name == n).unwrap();
        assert_eq!(find("can").props[0].name, "a");
        assert_eq!(find("subsystem-1").props[0].name, "b");
        assert_eq!(find("subsystem-3").props[0].name, "c");
        assert_eq!(g.iter().map(|g| g.props.len()).sum::<usize>(), 3);

        let empty = divide_props(&[], &design(), &ranked).unwrap();
        assert!(empty.iter().all(|g| g.props.is_empty()));

        let bad = parse_props("prop k : 1\n").unwrap();
        assert!(matches!(divide_props(&bad, &design(), &ranked), Err(ParseError::UnresolvableScope(_))));
    }
}
