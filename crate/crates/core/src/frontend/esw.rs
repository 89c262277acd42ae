// SPDX-License-Identifier: Apache-2.0

//! ESW transaction scripts: `reset N`, `write ADDR VAL`, `read ADDR`,
//! `wait N`. Addresses and values are hex.

use std::fmt::Write;

use super::{parse_hex, syntax, tokenize, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stmt {
    Reset(u32),
    Write { addr: u32, value: u32 },
    Read { addr: u32 },
    Wait(u32),
}

impl Stmt {
    pub fn address(&self) -> Option<u32> {
        match *self {
            Stmt::Write { addr, .. } | Stmt::Read { addr } => Some(addr),
            _ => None,
        }
    }

    /// Cycles the statement occupies.
    pub fn cycles(&self) -> u32 {
        match *self {
            Stmt::Reset(n) | Stmt::Wait(n) => n,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Eq)]
pub struct EswScript {
    pub stmts: Vec<Stmt>,
    /// Source line per statement.
    pub lines: Vec<usize>,
}

pub fn parse_esw(text: &str) -> Result<EswScript, ParseError> {
    let mut stmts = Vec::new();
    let mut lines = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        let arity = match head.text {
            "reset" | "wait" | "read" => 2,
            "write" => 3,
            other => return Err(syntax(line, head.col, format!("unknown statement `{other}`"))),
        };
        if toks.len() != arity {
            let col = toks.get(arity).map_or(head.col, |t| t.col);
            return Err(syntax(line, col, format!("`{}` takes {} arguments", head.text, arity - 1)));
        }
        let word = |i: usize, what: &str| -> Result<u32, ParseError> {
            let t = toks[i];
            let v = parse_hex(t.text).ok_or_else(|| syntax(line, t.col, format!("bad {what} `{}`", t.text)))?;
            u32::try_from(v).map_err(|_| ParseError::WidthOverflow {
                line,
                col: t.col,
                msg: format!("{what} {v:#x} exceeds the 32-bit bus"),
            })
        };
        let count = |i: usize| -> Result<u32, ParseError> {
            let t = toks[i];
            t.text
                .parse::<u32>()
                .map_err(|_| syntax(line, t.col, format!("bad cycle count `{}`", t.text)))
        };
        let st = match head.text {
            "reset" => {
                let n = count(1)?;
                if n == 0 {
                    return Err(syntax(line, toks[1].col, "reset needs at least one cycle"));
                }
                Stmt::Reset(n)
            }
            "wait" => Stmt::Wait(count(1)?),
            "read" => Stmt::Read { addr: word(1, "address")? },
            _ => Stmt::Write {
                addr: word(1, "address")?,
                value: word(2, "value")?,
            },
        };
        if stmts.is_empty() && !matches!(st, Stmt::Reset(_)) {
            return Err(syntax(line, head.col, "the script must start with `reset`"));
        }
        stmts.push(st);
        lines.push(line);
    }
    if stmts.is_empty() {
        return Err(syntax(1, 1, "empty script"));
    }
    Ok(EswScript { stmts, lines })
}

pub fn write_esw(s: &EswScript) -> String {
    let mut out = String::new();
    for st in &s.stmts {
        match *st {
            Stmt::Reset(n) => writeln!(out, "reset {n}"),
            Stmt::Wait(n) => writeln!(out, "wait {n}"),
            Stmt::Read { addr } => writeln!(out, "read {addr:#x}"),
            Stmt::Write { addr, value } => writeln!(out, "write {addr:#x} {value:#x}"),
        }
        .unwrap();
    }
    out
}

impl PartialEq for EswScript {
    fn eq(&self, o: &Self) -> bool {
        self.stmts == o.stmts
    }
}
