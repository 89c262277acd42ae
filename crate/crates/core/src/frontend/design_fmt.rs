// SPDX-License-Identifier: Apache-2.0

//! Design format:
//!
//! ```text
//! .design gateway
//! .instance cpu cpu0
//! .instance ram ram0
//! .connect cpu0.mem_addr ram0.addr
//! .top rst cpu0.rst
//! ```

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{is_ident, syntax, tokenize, ParseError, Tok};
use crate::netlist::{Design, Instance, PortRef};

fn port_ref(line: usize, t: Option<&Tok<'_>>, prev: usize) -> Result<PortRef, ParseError> {
    let t = t.ok_or_else(|| syntax(line, prev, "missing port reference"))?;
    PortRef::parse(t.text)
        .filter(|p| is_ident(&p.instance) && is_ident(&p.port))
        .ok_or_else(|| syntax(line, t.col, format!("expected `instance.port`, got `{}`", t.text)))
}

pub fn parse_design(text: &str) -> Result<Design, ParseError> {
    let mut d: Option<Design> = None;
    let mut names = BTreeSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        let want = |n: usize| -> Result<(), ParseError> {
            if toks.len() < n {
                Err(syntax(line, head.col, format!("`{}` takes {} arguments", head.text, n - 1)))
            } else if toks.len() > n {
                Err(syntax(line, toks[n].col, "trailing tokens"))
            } else {
                Ok(())
            }
        };
        if head.text == ".design" {
            want(2)?;
            if d.is_some() {
                return Err(syntax(line, head.col, "duplicate `.design`"));
            }
            if !is_ident(toks[1].text) {
                return Err(syntax(line, toks[1].col, "bad design name"));
            }
            d = Some(Design {
                name: toks[1].text.to_string(),
                ..Default::default()
            });
            continue;
        }
        let Some(des) = d.as_mut() else {
            return Err(syntax(line, head.col, "expected `.design` first"));
        };
        match head.text {
            ".instance" => {
                want(3)?;
                for t in &toks[1..] {
                    if !is_ident(t.text) {
                        return Err(syntax(line, t.col, format!("bad identifier `{}`", t.text)));
                    }
                }
                if !names.insert(toks[2].text.to_string()) {
                    return Err(syntax(line, toks[2].col, format!("duplicate instance `{}`", toks[2].text)));
                }
                des.instances.push(Instance {
                    module: toks[1].text.to_string(),
                    name: toks[2].text.to_string(),
                });
            }
            ".connect" => {
                want(3)?;
                let a = port_ref(line, toks.get(1), head.col)?;
                let b = port_ref(line, toks.get(2), head.col)?;
                des.connections.push((a, b));
            }
            ".top" => {
                want(3)?;
                if !is_ident(toks[1].text) {
                    return Err(syntax(line, toks[1].col, "bad top-level port name"));
                }
                let p = port_ref(line, toks.get(2), head.col)?;
                des.tops.push((toks[1].text.to_string(), p));
            }
            other => return Err(syntax(line, head.col, format!("unknown directive `{other}`"))),
        }
    }
    d.ok_or_else(|| syntax(1, 1, "missing `.design`"))
}

/// The bus table is not part of this format (it lives in the register map).
pub fn write_design(d: &Design) -> String {
    let mut s = String::new();
    writeln!(s, ".design {}", d.name).unwrap();
    for i in &d.instances {
        writeln!(s, ".instance {} {}", i.module, i.name).unwrap();
    }
    for (a, b) in &d.connections {
        writeln!(s, ".connect {a} {b}").unwrap();
    }
    for (n, p) in &d.tops {
        writeln!(s, ".top {n} {p}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let src = ".design g\n.instance cpu cpu0 # core\n.instance ram ram0\n.connect cpu0.a ram0.a\n.top rst cpu0.rst\n";
        let d = parse_design(src).unwrap();
        assert_eq!(d.instances.len(), 2);
        assert_eq!(d.connections[0].1, PortRef::new("ram0", "a"));
        assert_eq!(parse_design(&write_design(&d)).unwrap(), d);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_design(".instance a b\n").unwrap_err().line(), 1);
        assert_eq!(parse_design(".design g\n.connect a b.c\n").unwrap_err().line(), 2);
        assert!(parse_design(".design g\n.instance m a\n.instance m a\n").is_err());
        assert!(parse_design("").is_err());
    }
}
