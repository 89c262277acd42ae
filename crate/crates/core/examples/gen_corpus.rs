// SPDX-License-Identifier: Apache-2.0

//! Writes the gateway corpus: four IPs (cpu, ram, can, ethmac), the
//! design, register map, boot script and user properties.
//!
//! Every IP except ram hides a multiplier-commutativity miter behind an
//! enable. Unconstrained, the miter is far beyond the shipped budgets; with
//! the enable pinned low it is trivial. The enables are wired so that the
//! register ranking needs 2 (can) and 3 (ethmac) registers, and never
//! helps for cpu (gated by a free input).
//!
//! usage: gen_corpus [OUT_DIR]   (default: corpus)

use std::fmt::Write;
use std::path::PathBuf;

struct Gen {
    body: String,
    decls: String,
    n: usize,
}

type Bit = Option<String>; // None = constant 0

impl Gen {
    fn new() -> Gen {
        Gen {
            body: String::new(),
            decls: String::new(),
            n: 0,
        }
    }

    fn decl(&mut self, line: &str) {
        self.decls.push_str(line);
        self.decls.push('\n');
    }

    fn gate(&mut self, kind: &str, ins: &[&str]) -> String {
        let w = format!("w{}", self.n);
        self.n += 1;
        writeln!(self.decls, ".wire {w} 1").unwrap();
        writeln!(self.body, ".gate {kind} {w} {}", ins.join(" ")).unwrap();
        w
    }

    fn and(&mut self, a: &Bit, b: &Bit) -> Bit {
        match (a, b) {
            (Some(a), Some(b)) => Some(self.gate("AND", &[a, b])),
            _ => None,
        }
    }

    fn xor(&mut self, a: &Bit, b: &Bit) -> Bit {
        match (a, b) {
            (Some(a), Some(b)) => Some(self.gate("XOR", &[a, b])),
            (x, None) | (None, x) => x.clone(),
        }
    }

    fn or(&mut self, a: &Bit, b: &Bit) -> Bit {
        match (a, b) {
            (Some(a), Some(b)) => Some(self.gate("OR", &[a, b])),
            (x, None) | (None, x) => x.clone(),
        }
    }

    fn full_add(&mut self, a: &Bit, b: &Bit, c: &Bit) -> (Bit, Bit) {
        let t = self.xor(a, b);
        let s = self.xor(&t, c);
        let c1 = self.and(a, b);
        let c2 = self.and(&t, c);
        (s, self.or(&c1, &c2))
    }

    /// Shift-and-add array multiplier, rows over `b`.
    fn mul(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let n = a.len();
        let mut acc: Vec<Bit> = vec![None; 2 * n];
        for i in 0..n {
            let mut carry = None;
            for j in 0..n {
                let pp = self.and(&a[j], &b[i]);
                let (s, c) = self.full_add(&acc[i + j], &pp, &carry);
                acc[i + j] = s;
                carry = c;
            }
            acc[i + n] = carry;
        }
        acc
    }

    /// OR of all bits.
    fn any(&mut self, bits: &[Bit]) -> Bit {
        let mut acc = None;
        for b in bits {
            acc = self.or(&acc, b);
        }
        acc
    }

    /// 8-bit operand registers loaded from `opa`/`opb`, `A*B` against
    /// `B*A`; returns the mismatch bit.
    fn miter(&mut self) -> String {
        self.decl(".input opa 8\n.input opb 8\n.reg A 8 init=0\n.reg B 8 init=0");
        writeln!(self.body, ".dff A opa rst=rst rstval=0\n.dff B opb rst=rst rstval=0").unwrap();
        let a: Vec<Bit> = (0..8).map(|i| Some(format!("A[{i}]"))).collect();
        let b: Vec<Bit> = (0..8).map(|i| Some(format!("B[{i}]"))).collect();
        let p = self.mul(&a, &b);
        let q = self.mul(&b, &a);
        let d: Vec<Bit> = p.iter().zip(&q).map(|(x, y)| self.xor(x, y)).collect();
        self.any(&d).unwrap()
    }

    /// `reg <= en & diff`, reset 0.
    fn check_reg(&mut self, reg: &str, en: &str, diff: &str) {
        let n = self.gate("AND", &[en, diff]);
        writeln!(self.decls, ".reg {reg} 1 init=0").unwrap();
        writeln!(self.body, ".dff {reg} {n} rst=rst rstval=0").unwrap();
    }

    fn sw_regs(&mut self, names: &[&str]) {
        for r in names {
            writeln!(self.decls, ".reg {r} 8 init=0 sw").unwrap();
            writeln!(self.body, ".dff {r} {r} rst=rst rstval=0").unwrap();
        }
    }

    /// `width` output bits, each `en & src[i % src.len()]`.
    fn gated_status(&mut self, out: &str, width: usize, en: &str, src: &[&str]) {
        writeln!(self.decls, ".output {out} {width}").unwrap();
        for i in 0..width {
            writeln!(self.body, ".gate AND {out}[{i}] {en} {}", src[i % src.len()]).unwrap();
        }
    }

    fn finish(self, name: &str, header: &str) -> String {
        format!(".module {name}\n{header}{}{}.endmodule\n", self.decls, self.body)
    }
}

fn can() -> String {
    let mut g = Gen::new();
    g.decl(".input rst 1\n.input cfg 7\n.output tx_data 8\n.output ev 5\n.output mode_busy 1");
    g.sw_regs(&["MODE", "COMMAND", "BTR", "IER", "ACR"]);
    let en = g.gate("OR", &["MODE[0]", "COMMAND[0]"]);
    g.gated_status("status", 16, &en, &["cfg[0]", "cfg[1]", "cfg[2]", "cfg[3]"]);
    // one extra reader so that MODE outranks COMMAND
    writeln!(g.body, ".gate NOT mode_busy MODE[1]").unwrap();
    writeln!(g.body, ".gate XOR tx_data BTR ACR").unwrap();
    writeln!(g.body, ".gate AND ev IER[4:0] cfg[6:2]").unwrap();
    let diff = g.miter();
    g.check_reg("chk", &en, &diff);
    g.finish("can", "")
}

fn ethmac() -> String {
    let mut g = Gen::new();
    g.decl(".input rst 1\n.input dbg 1\n.input cfg 7\n.input can_ev 5\n.output rx_data 8\n.output busy 3");
    g.sw_regs(&["MODER", "MIICOMMAND", "CTRLMODER", "INT_MASK", "PACKETLEN"]);
    let e0 = g.gate("OR", &["MODER[0]", "MIICOMMAND[0]"]);
    let en = g.gate("OR", &[&e0, "CTRLMODER[0]"]);
    g.gated_status("status", 16, &en, &["cfg[0]", "cfg[1]", "can_ev[0]", "can_ev[1]"]);
    // tie breakers: MODER > MIICOMMAND > CTRLMODER
    writeln!(g.body, ".gate NOT busy[0] MODER[1]\n.gate NOT busy[1] MODER[2]\n.gate NOT busy[2] MIICOMMAND[1]").unwrap();
    writeln!(g.body, ".gate XOR rx_data INT_MASK PACKETLEN").unwrap();
    let diff = g.miter();
    g.check_reg("chk", &en, &diff);
    g.check_reg("chk3", "dbg", &diff);
    g.finish("ethmac", "")
}

fn cpu() -> String {
    let mut g = Gen::new();
    g.decl(
        ".input rst 1\n.input irq 1\n.input mem_rdata 20\n.input can_rx 8\n.input eth_rx 8\n\
         .output mem_addr 10\n.output mem_wdata 10\n.output can_cfg 7\n.output eth_cfg 7",
    );
    g.sw_regs(&["CTRL", "STATUS", "PC", "SR", "EPCR"]);
    writeln!(
        g.body,
        ".gate XOR mem_addr {{PC[1:0], CTRL}} mem_rdata[19:10]\n\
         .gate XOR mem_wdata {{SR[1:0], EPCR}} mem_rdata[9:0]\n\
         .gate AND can_cfg STATUS[6:0] can_rx[6:0]\n\
         .gate OR eth_cfg STATUS[7:1] eth_rx[6:0]"
    )
    .unwrap();
    let diff = g.miter();
    g.check_reg("chk", "irq", &diff);
    g.finish("cpu", "")
}

fn ram() -> String {
    let mut g = Gen::new();
    g.decl(
        ".input rst 1\n.input addr 10\n.input wdata 10\n.output rdata 20\n.output perr 1\n\
         .reg data 10 init=0\n.reg par 1 init=0\n.reg scratch 4",
    );
    writeln!(g.body, ".dff data wdata rst=rst rstval=0\n.dff scratch scratch").unwrap();
    let parity = |g: &mut Gen, v: &str| {
        let mut acc: Bit = None;
        for i in 0..10 {
            acc = g.xor(&acc, &Some(format!("{v}[{i}]")));
        }
        acc.unwrap()
    };
    let pw = parity(&mut g, "wdata");
    writeln!(g.body, ".dff par {pw} rst=rst rstval=0").unwrap();
    let pd = parity(&mut g, "data");
    writeln!(g.body, ".gate XOR perr {pd} par").unwrap();
    writeln!(g.body, ".gate XOR rdata[9:0] data addr\n.gate NOT rdata[19:10] data").unwrap();
    g.finish("ram", "")
}

const DESIGN: &str = "\
# gateway SoC: one CPU, a RAM and two peripherals
.design gateway
.instance cpu cpu0
.instance ram ram0
.instance can can0
.instance ethmac ethmac0
.connect cpu0.mem_addr ram0.addr
.connect cpu0.mem_wdata ram0.wdata
.connect ram0.rdata cpu0.mem_rdata
.connect can0.tx_data cpu0.can_rx
.connect cpu0.can_cfg can0.cfg
.connect ethmac0.rx_data cpu0.eth_rx
.connect cpu0.eth_cfg ethmac0.cfg
.connect can0.ev ethmac0.can_ev
.top rst cpu0.rst
.top rst ram0.rst
.top rst can0.rst
.top rst ethmac0.rst
.top irq cpu0.irq
.top dbg ethmac0.dbg
";

const REGMAP: &str = "\
# address  register
1000 can0.MODE
1004 can0.COMMAND
1008 can0.BTR
100c can0.IER
1010 can0.ACR
2000 ethmac0.MODER
2004 ethmac0.MIICOMMAND
2008 ethmac0.CTRLMODER
200c ethmac0.INT_MASK
2010 ethmac0.PACKETLEN
3000 cpu0.CTRL
3004 cpu0.STATUS
3008 cpu0.PC
300c cpu0.SR
3010 cpu0.EPCR
";

const ESW: &str = "\
# boot: bring up the core, then configure both peripherals
reset 2
write 3000 0x80
write 3008 0x40
write 3004 0x02
wait 3
read 4000
# CAN: reset mode, bit timing, interrupts
write 1000 0x02
write 1008 0x1c
write 1004 0x04
write 100c 0x1e
write 1010 0xff
wait 2
# MAC
write 2000 0xa0
write 2004 0x02
write 2008 0x06
write 200c 0x7e
write 2010 0x40
read 1004
read 2010
wait 4
";

const PROPS: &str = "\
# per-IP safety
prop ram_parity : ram0.perr == 0
prop can_check : can0.chk == 0
prop mac_check : ethmac0.chk == 0
prop cpu_check : cpu0.chk == 0
# cross-IP
prop mem_path : (cpu0.chk | ram0.perr) == 0
prop can_mem : (can0.chk | ram0.perr) == 0
prop bridge : (ethmac0.chk3 | can0.chk) == 0
";

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&out).expect("create output directory");
    let files = [
        ("can.net", can()),
        ("ethmac.net", ethmac()),
        ("cpu.net", cpu()),
        ("ram.net", ram()),
        ("gateway.dsn", DESIGN.to_string()),
        ("gateway.map", REGMAP.to_string()),
        ("boot.esw", ESW.to_string()),
        ("user.prop", PROPS.to_string()),
    ];
    for (name, text) in files {
        let p = out.join(name);
        std::fs::write(&p, text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        println!("wrote {}", p.display());
    }
}
