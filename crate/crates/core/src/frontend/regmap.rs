// SPDX-License-Identifier: Apache-2.0

//! Register map: one `HEXADDR inst.reg` per line.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{parse_hex, syntax, tokenize, ParseError};
use crate::netlist::{Design, Library};

#[derive(Clone, Debug, Eq)]
pub struct RegMapEntry {
    pub address: u32,
    /// `inst.reg`
    pub register: String,
    /// Source position of the register name, for diagnostics only.
    pub line: usize,
    pub col: usize,
}

impl PartialEq for RegMapEntry {
    fn eq(&self, o: &Self) -> bool {
        self.address == o.address && self.register == o.register
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RegisterMap {
    pub entries: Vec<RegMapEntry>,
}

impl RegisterMap {
    pub fn register_at(&self, addr: u32) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.address == addr)
            .map(|e| e.register.as_str())
    }

    pub fn address_of(&self, reg: &str) -> Option<u32> {
        self.entries.iter().find(|e| e.register == reg).map(|e| e.address)
    }

    pub fn registers(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.register.as_str())
    }

    /// Every entry must name a software-visible register of an instance.
    pub fn check(&self, design: &Design, library: &Library) -> Result<(), ParseError> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            let unknown = || ParseError::UnknownSignal {
                line: e.line,
                col: e.col,
                name: e.register.clone(),
            };
            let (inst, reg) = e.register.split_once('.').ok_or_else(unknown)?;
            let module = design.instance(inst).ok_or_else(unknown)?;
            let decl = library
                .get(&module.module)
                .and_then(|m| m.register(reg))
                .filter(|r| r.software_visible)
                .ok_or_else(unknown)?;
            if decl.width() > 32 {
                return Err(ParseError::WidthOverflow {
                    line: e.line,
                    col: 1,
                    msg: format!("{} is wider than the 32-bit bus", e.register),
                });
            }
            if !seen.insert(&e.register) {
                return Err(syntax(e.line, 1, format!("{} mapped twice", e.register)));
            }
        }
        Ok(())
    }

    /// Attaches the map to a design as its bus table.
    pub fn apply(&self, design: &mut Design) {
        design.bus = self
            .entries
            .iter()
            .map(|e| (e.address, e.register.clone()))
            .collect();
    }
}

pub fn parse_regmap(text: &str) -> Result<RegisterMap, ParseError> {
    let mut map = RegisterMap::default();
    let mut addrs = BTreeSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 2 {
            let col = toks.get(2).map_or(toks[0].col, |t| t.col);
            return Err(syntax(line, col, "expected `HEXADDR inst.reg`"));
        }
        let a = parse_hex(toks[0].text)
            .ok_or_else(|| syntax(line, toks[0].col, format!("bad address `{}`", toks[0].text)))?;
        let address = u32::try_from(a).map_err(|_| ParseError::WidthOverflow {
            line,
            col: toks[0].col,
            msg: format!("address {a:#x} exceeds 32 bits"),
        })?;
        let reg = toks[1].text;
        match reg.split_once('.') {
            Some((i, r)) if super::is_ident(i) && super::is_ident(r) => {}
            _ => return Err(syntax(line, toks[1].col, format!("expected `inst.reg`, got `{reg}`"))),
        }
        if !addrs.insert(address) {
            return Err(ParseError::DuplicateAddress {
                line,
                col: toks[0].col,
                addr: address,
            });
        }
        map.entries.push(RegMapEntry {
            address,
            register: reg.to_string(),
            line,
            col: toks[1].col,
        });
    }
    Ok(map)
}

pub fn write_regmap(m: &RegisterMap) -> String {
    let mut s = String::new();
    for e in &m.entries {
        writeln!(s, "{:#010x} {}", e.address, e.register).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let m = parse_regmap("# map\n0x1000 can0.MODE\n1004 can0.COMMAND\n").unwrap();
        assert_eq!(m.register_at(0x1004), Some("can0.COMMAND"));
        assert_eq!(parse_regmap(&write_regmap(&m)).unwrap(), m);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_regmap("0x10 a.b\n0x10 a.c\n").unwrap_err(),
            ParseError::DuplicateAddress { line: 2, addr: 0x10, .. }
        ));
        assert!(matches!(parse_regmap("0x100000000 a.b\n"), Err(ParseError::WidthOverflow { .. })));
        assert_eq!(parse_regmap("zz a.b\n").unwrap_err().line(), 1);
        assert_eq!(parse_regmap("0x1 ab\n").unwrap_err().line(), 1);
    }
}
