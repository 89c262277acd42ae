// SPDX-License-Identifier: Apache-2.0

//! Line-oriented netlist format.
//!
//! ```text
//! .module ctr
//! .output q 2
//! .reg q 2 init=0 sw        # register driving output `q`
//! .wire n 2
//! .gate NOT n[0] q[0]
//! .gate XOR n[1] q[1] q[0]
//! .dff q n
//! .endmodule
//! ```
//!
//! Net references are `name`, `name[i]`, `name[hi:lo]` or a concatenation
//! `{a, b}` (MSB first). Multi-bit gates apply bitwise; one-bit inputs are
//! broadcast.

use std::fmt::Write;

use super::{is_ident, parse_number, syntax, tokenize, ParseError, Tok};
use crate::logic::{pack_bits, Tri};
use crate::netlist::{
    Direction, GateKind, IpNetlist, NetId, NetlistBuilder, NetlistError, NodeKind, SignalKind,
};

struct Ctx {
    line: usize,
}

impl Ctx {
    fn err(&self, col: usize, msg: impl Into<String>) -> ParseError {
        syntax(self.line, col, msg)
    }

    fn net(&self, col: usize, e: NetlistError) -> ParseError {
        ParseError::Netlist {
            line: self.line,
            col,
            source: e,
        }
    }
}

fn parse_ref(b: &NetlistBuilder, cx: &Ctx, tok: Tok<'_>) -> Result<Vec<NetId>, ParseError> {
    let t = tok.text.trim();
    if let Some(inner) = t.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| cx.err(tok.col, "unterminated `{`"))?;
        let mut bits = Vec::new();
        for part in inner.split(',').rev() {
            let part = part.trim();
            if part.is_empty() {
                return Err(cx.err(tok.col, "empty concatenation element"));
            }
            bits.extend(parse_ref(b, cx, Tok { text: part, col: tok.col })?);
        }
        return Ok(bits);
    }
    let (name, range) = match t.find('[') {
        Some(i) => {
            let r = t[i + 1..]
                .strip_suffix(']')
                .ok_or_else(|| cx.err(tok.col, format!("bad net reference `{t}`")))?;
            (&t[..i], Some(r))
        }
        None => (t, None),
    };
    let sig = b.signal(name).ok_or_else(|| ParseError::UnknownSignal {
        line: cx.line,
        col: tok.col,
        name: name.to_string(),
    })?;
    let Some(r) = range else {
        return Ok(sig.bits.clone());
    };
    let idx = |s: &str| -> Result<usize, ParseError> {
        s.trim()
            .parse::<usize>()
            .map_err(|_| cx.err(tok.col, format!("bad bit index `{s}`")))
    };
    let (hi, lo) = match r.split_once(':') {
        Some((h, l)) => (idx(h)?, idx(l)?),
        None => {
            let i = idx(r)?;
            (i, i)
        }
    };
    if hi < lo || hi >= sig.width() {
        return Err(cx.err(tok.col, format!("bit range [{r}] out of bounds for `{name}`")));
    }
    Ok(sig.bits[lo..=hi].to_vec())
}

fn width_arg(cx: &Ctx, toks: &[Tok<'_>], i: usize) -> Result<usize, ParseError> {
    let t = toks.get(i).ok_or_else(|| cx.err(1, "missing width"))?;
    match t.text.parse::<usize>() {
        Ok(w) if w > 0 => Ok(w),
        _ => Err(cx.err(t.col, format!("bad width `{}`", t.text))),
    }
}

fn name_arg<'a>(cx: &Ctx, toks: &[Tok<'a>], i: usize) -> Result<Tok<'a>, ParseError> {
    let t = *toks.get(i).ok_or_else(|| cx.err(1, "missing name"))?;
    if !is_ident(t.text) {
        return Err(cx.err(t.col, format!("bad identifier `{}`", t.text)));
    }
    Ok(t)
}

/// Parses a file holding zero or more modules.
pub fn parse_library(text: &str) -> Result<Vec<IpNetlist>, ParseError> {
    let mut out = Vec::new();
    let mut cur: Option<NetlistBuilder> = None;
    let mut last_line = 0;
    for (ln, raw) in text.lines().enumerate() {
        let cx = Ctx { line: ln + 1 };
        last_line = ln + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        if head.text == ".module" {
            if cur.is_some() {
                return Err(cx.err(head.col, "nested `.module`"));
            }
            let n = name_arg(&cx, &toks, 1)?;
            if toks.len() > 2 {
                return Err(cx.err(toks[2].col, "trailing tokens"));
            }
            cur = Some(NetlistBuilder::new(n.text));
            continue;
        }
        let Some(b) = cur.as_mut() else {
            return Err(cx.err(head.col, format!("`{}` outside of a module", head.text)));
        };
        match head.text {
            ".endmodule" => {
                let nl = cur.take().unwrap().finish().map_err(|e| cx.net(head.col, e))?;
                out.push(nl);
            }
            ".input" | ".output" | ".wire" => {
                let n = name_arg(&cx, &toks, 1)?;
                let w = width_arg(&cx, &toks, 2)?;
                if toks.len() > 3 {
                    return Err(cx.err(toks[3].col, "trailing tokens"));
                }
                let r = match head.text {
                    ".input" => b.input(n.text, w),
                    ".output" => b.output(n.text, w),
                    _ => b.wire(n.text, w),
                };
                r.map_err(|e| cx.net(n.col, e))?;
            }
            ".reg" => {
                let n = name_arg(&cx, &toks, 1)?;
                let w = width_arg(&cx, &toks, 2)?;
                let mut init = None;
                let mut sw = false;
                for t in &toks[3..] {
                    if let Some(v) = t.text.strip_prefix("init=") {
                        if v.eq_ignore_ascii_case("x") {
                            init = None;
                        } else {
                            let v = parse_number(v)
                                .ok_or_else(|| cx.err(t.col, format!("bad init value `{v}`")))?;
                            if w < 64 && v >> w != 0 {
                                return Err(ParseError::WidthOverflow {
                                    line: cx.line,
                                    col: t.col,
                                    msg: format!("init {v:#x} wider than {w} bits"),
                                });
                            }
                            init = Some(v);
                        }
                    } else if t.text == "sw" {
                        sw = true;
                    } else {
                        return Err(cx.err(t.col, format!("unknown attribute `{}`", t.text)));
                    }
                }
                b.reg(n.text, w, init, sw).map_err(|e| cx.net(n.col, e))?;
            }
            ".gate" => {
                let kt = toks.get(1).ok_or_else(|| cx.err(head.col, "missing gate kind"))?;
                let kind = GateKind::parse(kt.text)
                    .ok_or_else(|| cx.err(kt.col, format!("unknown gate kind `{}`", kt.text)))?;
                let ot = *toks.get(2).ok_or_else(|| cx.err(kt.col, "missing output"))?;
                let out = parse_ref(b, &cx, ot)?;
                let ins: Vec<Vec<NetId>> = toks[3..]
                    .iter()
                    .map(|&t| parse_ref(b, &cx, t))
                    .collect::<Result<_, _>>()?;
                if ins.len() != kind.arity() {
                    return Err(cx.net(
                        kt.col,
                        NetlistError::Arity {
                            kind: kind.name(),
                            expected: kind.arity(),
                            got: ins.len(),
                        },
                    ));
                }
                for (k, i) in ins.iter().enumerate() {
                    if i.len() != out.len() && i.len() != 1 {
                        return Err(cx.net(
                            toks[3 + k].col,
                            NetlistError::WidthMismatch {
                                left: ot.text.to_string(),
                                lw: out.len(),
                                right: toks[3 + k].text.to_string(),
                                rw: i.len(),
                            },
                        ));
                    }
                }
                for (j, &o) in out.iter().enumerate() {
                    let args: Vec<NetId> =
                        ins.iter().map(|i| if i.len() == 1 { i[0] } else { i[j] }).collect();
                    b.gate(kind, o, &args);
                }
            }
            ".const" => {
                let ot = *toks.get(1).ok_or_else(|| cx.err(head.col, "missing output"))?;
                let out = parse_ref(b, &cx, ot)?;
                let vt = toks.get(2).ok_or_else(|| cx.err(ot.col, "missing value bits"))?;
                let bits = vt.text;
                if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
                    return Err(cx.err(vt.col, format!("bad constant `{bits}`")));
                }
                if bits.len() != out.len() {
                    return Err(ParseError::WidthOverflow {
                        line: cx.line,
                        col: vt.col,
                        msg: format!("{} bits for a {}-bit net", bits.len(), out.len()),
                    });
                }
                if toks.len() > 3 {
                    return Err(cx.err(toks[3].col, "trailing tokens"));
                }
                // MSB first
                for (j, c) in bits.chars().rev().enumerate() {
                    b.constant(out[j], c == '1');
                }
            }
            ".dff" => {
                let rt = *toks.get(1).ok_or_else(|| cx.err(head.col, "missing register"))?;
                let q = parse_ref(b, &cx, rt)?;
                let dt = *toks.get(2).ok_or_else(|| cx.err(rt.col, "missing data input"))?;
                let d = parse_ref(b, &cx, dt)?;
                if d.len() != q.len() {
                    return Err(cx.net(
                        dt.col,
                        NetlistError::WidthMismatch {
                            left: rt.text.to_string(),
                            lw: q.len(),
                            right: dt.text.to_string(),
                            rw: d.len(),
                        },
                    ));
                }
                let mut en = None;
                let mut rst = None;
                let mut rstval = None;
                for &t in &toks[3..] {
                    let one_bit = |s: &str| -> Result<NetId, ParseError> {
                        let v = parse_ref(b, &cx, Tok { text: s, col: t.col })?;
                        if v.len() != 1 {
                            return Err(cx.err(t.col, format!("`{s}` must be one bit")));
                        }
                        Ok(v[0])
                    };
                    if let Some(v) = t.text.strip_prefix("en=") {
                        en = Some(one_bit(v)?);
                    } else if let Some(v) = t.text.strip_prefix("rst=") {
                        rst = Some(one_bit(v)?);
                    } else if let Some(v) = t.text.strip_prefix("rstval=") {
                        let v = parse_number(v)
                            .ok_or_else(|| cx.err(t.col, format!("bad reset value `{v}`")))?;
                        if q.len() < 64 && v >> q.len() != 0 {
                            return Err(ParseError::WidthOverflow {
                                line: cx.line,
                                col: t.col,
                                msg: format!("reset value {v:#x} wider than {} bits", q.len()),
                            });
                        }
                        rstval = Some(v);
                    } else {
                        return Err(cx.err(t.col, format!("unknown attribute `{}`", t.text)));
                    }
                }
                let reset = match (rst, rstval) {
                    (Some(r), Some(v)) => Some((r, v)),
                    (None, None) => None,
                    (Some(_), None) => return Err(cx.err(rt.col, "`rst=` requires `rstval=`")),
                    (None, Some(_)) => return Err(cx.err(rt.col, "`rstval=` without `rst=`")),
                };
                for (j, (&qb, &db)) in q.iter().zip(&d).enumerate() {
                    let r = reset.map(|(n, v)| (n, j < 64 && v >> j & 1 == 1));
                    b.dff_bit(qb, db, en, r).map_err(|e| cx.net(rt.col, e))?;
                }
            }
            other => return Err(cx.err(head.col, format!("unknown directive `{other}`"))),
        }
    }
    if cur.is_some() {
        return Err(syntax(last_line.max(1), 1, "missing `.endmodule`"));
    }
    Ok(out)
}

/// Parses a file holding exactly one module.
pub fn parse_netlist(text: &str) -> Result<IpNetlist, ParseError> {
    let mut v = parse_library(text)?;
    match v.len() {
        1 => Ok(v.pop().unwrap()),
        n => Err(syntax(1, 1, format!("expected one module, found {n}"))),
    }
}

/// Bit-level serialization; `parse_netlist(&write_netlist(nl)) == nl`.
pub fn write_netlist(nl: &IpNetlist) -> String {
    let mut s = String::new();
    let net = |n: NetId| nl.nets[n.index()].as_str();
    writeln!(s, ".module {}", nl.name).unwrap();
    let init_of = |bits: &[NetId]| -> Vec<Tri> {
        bits.iter()
            .map(|b| {
                nl.nodes
                    .iter()
                    .find(|n| n.output == *b && n.is_dff())
                    .map(|n| match n.kind {
                        NodeKind::Dff(c) => c.init,
                        _ => Tri::X,
                    })
                    .unwrap_or(Tri::X)
            })
            .collect()
    };
    for sig in &nl.signals {
        let w = sig.width();
        match sig.kind {
            SignalKind::Input => writeln!(s, ".input {} {w}", sig.name).unwrap(),
            SignalKind::Output => writeln!(s, ".output {} {w}", sig.name).unwrap(),
            SignalKind::Wire => writeln!(s, ".wire {} {w}", sig.name).unwrap(),
            SignalKind::Reg | SignalKind::OutputReg => {
                if sig.kind == SignalKind::OutputReg {
                    writeln!(s, ".output {} {w}", sig.name).unwrap();
                }
                let reg = nl.register(&sig.name).unwrap();
                write!(s, ".reg {} {w}", sig.name).unwrap();
                if let Some(v) = (w <= 64).then(|| pack_bits(&init_of(&reg.bits))).flatten() {
                    write!(s, " init={v:#x}").unwrap();
                }
                if reg.software_visible {
                    s.push_str(" sw");
                }
                s.push('\n');
            }
        }
    }
    debug_assert!(nl.ports.iter().all(|p| p.dir == Direction::In || nl.signal(&p.name).is_some()));
    for node in &nl.nodes {
        match node.kind {
            NodeKind::Gate(g) => {
                write!(s, ".gate {} {}", g.name(), net(node.output)).unwrap();
                for &i in &node.inputs {
                    write!(s, " {}", net(i)).unwrap();
                }
                s.push('\n');
            }
            NodeKind::Const(v) => writeln!(s, ".const {} {}", net(node.output), v as u8).unwrap(),
            NodeKind::Dff(c) => {
                write!(s, ".dff {} {}", net(node.output), net(node.inputs[0])).unwrap();
                if let Some(e) = c.enable {
                    write!(s, " en={}", net(e)).unwrap();
                }
                if let Some((r, v)) = c.reset {
                    write!(s, " rst={} rstval={}", net(r), v as u8).unwrap();
                }
                s.push('\n');
            }
        }
    }
    s.push_str(".endmodule\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const CTR: &str = "\
# 2-bit counter
.module ctr
.input rst 1
.output q 2
.reg q 2 init=0 sw
.wire n 2
.gate NOT n[0] q[0]
.gate XOR n[1] q[1] q[0]
.dff q n rst=rst rstval=0b10
.endmodule
";

    #[test]
    fn parses_counter() {
        let nl = parse_netlist(CTR).unwrap();
        let r = nl.register("q").unwrap();
        assert_eq!(r.width(), 2);
        assert!(r.software_visible);
        assert_eq!(nl.state_bits(), 2);
        assert_eq!(nl.port("q").unwrap().dir, Direction::Out);
    }

    #[test]
    fn grammar_example() {
        let nl = parse_netlist(".module ctr\n.reg count 2 init=0\n.dff count count\n.endmodule\n").unwrap();
        let r = nl.register("count").unwrap();
        assert_eq!((r.name.as_str(), r.width()), ("count", 2));
    }

    #[test]
    fn round_trip() {
        let nl = parse_netlist(CTR).unwrap();
        let text = write_netlist(&nl);
        assert_eq!(parse_netlist(&text).unwrap(), nl);
    }

    #[test]
    fn concat_slice_and_broadcast() {
        let src = "\
.module m
.input a 4
.input s 1
.output o 4
.output p 2
.gate MUX o s a {a[1:0], a[3:2]}
.gate AND p a[3:2] s
.endmodule
";
        let nl = parse_netlist(src).unwrap();
        let a = &nl.signal("a").unwrap().bits;
        // o[0] = s ? a[2] : a[0]
        assert_eq!(nl.nodes[0].inputs, vec![nl.signal("s").unwrap().bits[0], a[0], a[2]]);
        assert_eq!(nl.nodes[4].inputs[0], a[2]);
        assert_eq!(parse_netlist(&write_netlist(&nl)).unwrap(), nl);
    }

    #[test]
    fn errors_are_positioned() {
        let e = parse_netlist(".module m\n.output o 1\n.gate NOT o nope\n.endmodule\n").unwrap_err();
        assert_eq!(
            e,
            ParseError::UnknownSignal {
                line: 3,
                col: 13,
                name: "nope".into()
            }
        );
        let e = parse_netlist(".module m\n.bogus\n").unwrap_err();
        assert_eq!(e.line(), 2);
        let e = parse_netlist(".module m\n.wire w 1\n.gate NOT w w\n.endmodule\n").unwrap_err();
        assert!(matches!(
            e,
            ParseError::Netlist {
                line: 4,
                source: NetlistError::CombinationalLoop(_),
                ..
            }
        ));
        assert!(parse_netlist(".module m\n.reg r 2 init=7\n").is_err());
        assert!(parse_netlist(".module m\n").is_err());
    }
}
