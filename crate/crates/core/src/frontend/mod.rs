// SPDX-License-Identifier: Apache-2.0

//! Text formats: netlists, designs, register maps, ESW scripts and
//! properties. Every parser reports errors with a 1-based line and column;
//! every format has a serializer whose output parses back to an equal value.

mod design_fmt;
mod esw;
mod netlist_fmt;
mod props;
mod regmap;

use thiserror::Error;

use crate::netlist::NetlistError;

pub use design_fmt::{parse_design, write_design};
pub use esw::{parse_esw, write_esw, EswScript, Stmt};
pub use netlist_fmt::{parse_library, parse_netlist, write_netlist};
pub use props::{
    divide_props, gen_xprops, parse_expr, parse_props, write_props, BitAlg, Expr, PropGroup,
    PropGroupKind, PropKind, PropertyAst, SigRef,
};
pub use regmap::{parse_regmap, write_regmap, RegMapEntry, RegisterMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown signal `{name}`")]
    UnknownSignal { line: usize, col: usize, name: String },
    #[error("{line}:{col}: duplicate address {addr:#x}")]
    DuplicateAddress { line: usize, col: usize, addr: u32 },
    #[error("{line}:{col}: value does not fit: {msg}")]
    WidthOverflow { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: {source}")]
    Netlist {
        line: usize,
        col: usize,
        source: NetlistError,
    },
    #[error("property `{0}` has an empty scope")]
    UnresolvableScope(String),
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UnknownSignal { line, .. }
            | ParseError::DuplicateAddress { line, .. }
            | ParseError::WidthOverflow { line, .. }
            | ParseError::Netlist { line, .. } => *line,
            ParseError::UnresolvableScope(_) => 0,
        }
    }
}

/// A whitespace-separated token with its 1-based column.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tok<'a> {
    pub text: &'a str,
    pub col: usize,
}

/// Splits a line into tokens, dropping `#` comments. Braces group:
/// `{a, b}` is one token even with spaces inside.
pub(crate) fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    let mut depth = 0i32;
    for (i, c) in line.char_indices() {
        match c {
            '{' => {
                depth += 1;
                start.get_or_insert(i);
            }
            '}' => {
                depth -= 1;
                start.get_or_insert(i);
            }
            c if c.is_whitespace() && depth <= 0 => {
                if let Some(s) = start.take() {
                    out.push(Tok {
                        text: &line[s..i],
                        col: line[..s].chars().count() + 1,
                    });
                }
            }
            _ => {
                start.get_or_insert(i);
            }
        }
    }
    if let Some(s) = start {
        out.push(Tok {
            text: &line[s..],
            col: line[..s].chars().count() + 1,
        });
    }
    out
}

pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

/// Decimal, `0x` hex or `0b` binary.
pub(crate) fn parse_number(s: &str) -> Option<u64> {
    let s = s.replace('_', "");
    if let Some(h) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(h, 16).ok()
    } else if let Some(b) = s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        u64::from_str_radix(b, 2).ok()
    } else {
        s.parse().ok()
    }
}

/// Hex with or without `0x`, as used by the register map and ESW script.
pub(crate) fn parse_hex(s: &str) -> Option<u64> {
    let h = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .unwrap_or(s)
        .replace('_', "");
    if h.is_empty() {
        return None;
    }
    u64::from_str_radix(&h, 16).ok()
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '$')
}
