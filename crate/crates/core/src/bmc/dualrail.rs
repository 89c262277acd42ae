// SPDX-License-Identifier: Apache-2.0

//! Dual-rail encoding of three-valued logic into a two-valued netlist.
//!
//! Every net `n` gets a value rail and a known rail. A known rail of 1 means
//! the three-valued simulator would compute the value-rail value; 0 means X
//! (the value rail is then unconstrained).

use crate::logic::Tri;
use crate::netlist::{DffCtl, FlatModel, GateKind, NetId, Node, NodeKind};

#[derive(Clone, Debug)]
pub struct DualRail {
    /// Two-valued model. Net `i < n` is the value rail of original net `i`.
    pub model: FlatModel,
    pub value: Vec<NetId>,
    pub known: Vec<NetId>,
}

type Rail = (NetId, NetId);

struct Enc {
    m: FlatModel,
    origin: Option<usize>,
    one: Option<NetId>,
    zero: Option<NetId>,
}

impl Enc {
    fn net(&mut self, tag: &str) -> NetId {
        let id = NetId(self.m.nets.len() as u32);
        self.m.nets.push(format!("dr.{}.{tag}", id.0));
        id
    }

    fn node(&mut self, kind: NodeKind, output: NetId, inputs: Vec<NetId>) {
        self.m.nodes.push(Node { kind, output, inputs });
        self.m.origin.push(self.origin);
    }

    fn gate(&mut self, g: GateKind, ins: &[NetId]) -> NetId {
        let o = self.net(g.name());
        self.node(NodeKind::Gate(g), o, ins.to_vec());
        o
    }

    fn gate_into(&mut self, g: GateKind, out: NetId, ins: &[NetId]) {
        self.node(NodeKind::Gate(g), out, ins.to_vec());
    }

    fn constant(&mut self, v: bool) -> NetId {
        let slot = if v { self.one } else { self.zero };
        if let Some(n) = slot {
            return n;
        }
        let o = self.net(if v { "one" } else { "zero" });
        let save = self.origin.take();
        self.node(NodeKind::Const(v), o, vec![]);
        self.origin = save;
        if v {
            self.one = Some(o);
        } else {
            self.zero = Some(o);
        }
        o
    }

    /// Known rail of `s ? b : a` into `out` (or a fresh net).
    fn mux_known(&mut self, s: Rail, a: Rail, b: Rail, out: Option<NetId>) -> NetId {
        let ksel = self.gate(GateKind::Mux, &[s.0, a.1, b.1]);
        let t1 = self.gate(GateKind::And, &[s.1, ksel]);
        let diff = self.gate(GateKind::Xor, &[a.0, b.0]);
        let same = self.gate(GateKind::Not, &[diff]);
        let kk = self.gate(GateKind::And, &[a.1, b.1]);
        let t2 = self.gate(GateKind::And, &[kk, same]);
        match out {
            Some(o) => {
                self.gate_into(GateKind::Or, o, &[t1, t2]);
                o
            }
            None => self.gate(GateKind::Or, &[t1, t2]),
        }
    }

    fn mux(&mut self, s: Rail, a: Rail, b: Rail) -> Rail {
        let v = self.gate(GateKind::Mux, &[s.0, a.0, b.0]);
        (v, self.mux_known(s, a, b, None))
    }
}

/// Builds the dual-rail model of `m`.
pub fn xprop_encode(m: &FlatModel) -> DualRail {
    let n = m.nets.len();
    let mut nets = m.nets.clone();
    nets.extend(m.nets.iter().map(|s| format!("{s}#k")));
    let value: Vec<NetId> = (0..n as u32).map(NetId).collect();
    let known: Vec<NetId> = (n as u32..2 * n as u32).map(NetId).collect();
    let mut e = Enc {
        m: FlatModel {
            name: m.name.clone(),
            nets,
            nodes: Vec::new(),
            origin: Vec::new(),
            inputs: m.inputs.clone(),
            outputs: m.outputs.clone(),
            registers: m.registers.clone(),
            instances: m.instances.clone(),
            signals: m.signals.clone(),
            driver: Vec::new(),
            topo: Vec::new(),
            dffs: Vec::new(),
        },
        origin: None,
        one: None,
        zero: None,
    };
    // primary inputs are always known
    for p in &m.inputs {
        for b in &p.bits {
            e.node(NodeKind::Const(true), known[b.index()], vec![]);
        }
    }
    let r = |x: NetId| (value[x.index()], known[x.index()]);
    for (i, node) in m.nodes.iter().enumerate() {
        e.origin = m.origin[i];
        let o = node.output.index();
        let ins: Vec<Rail> = node.inputs.iter().map(|&x| r(x)).collect();
        match node.kind {
            NodeKind::Const(c) => {
                e.node(NodeKind::Const(c), value[o], vec![]);
                e.node(NodeKind::Const(true), known[o], vec![]);
            }
            NodeKind::Gate(g) => {
                let iv: Vec<NetId> = ins.iter().map(|x| x.0).collect();
                e.gate_into(g, value[o], &iv);
                match g {
                    GateKind::Not => e.gate_into(GateKind::And, known[o], &[ins[0].1, ins[0].1]),
                    GateKind::Xor => e.gate_into(GateKind::And, known[o], &[ins[0].1, ins[1].1]),
                    GateKind::And | GateKind::Or => {
                        // controlling value known on either side, or both known
                        let ctl = |e: &mut Enc, x: Rail| {
                            if g == GateKind::And {
                                let nv = e.gate(GateKind::Not, &[x.0]);
                                e.gate(GateKind::And, &[x.1, nv])
                            } else {
                                e.gate(GateKind::And, &[x.1, x.0])
                            }
                        };
                        let ca = ctl(&mut e, ins[0]);
                        let cb = ctl(&mut e, ins[1]);
                        let kk = e.gate(GateKind::And, &[ins[0].1, ins[1].1]);
                        let c = e.gate(GateKind::Or, &[ca, cb]);
                        e.gate_into(GateKind::Or, known[o], &[c, kk]);
                    }
                    GateKind::Mux => {
                        e.mux_known(ins[0], ins[1], ins[2], Some(known[o]));
                    }
                }
            }
            NodeKind::Dff(c) => {
                let q = r(node.output);
                let mut next = ins[0];
                if let Some(en) = c.enable {
                    next = e.mux(r(en), q, next);
                }
                if let Some((rst, rv)) = c.reset {
                    let k1 = e.constant(true);
                    let rvv = e.constant(rv);
                    next = e.mux(r(rst), next, (rvv, k1));
                }
                let plain = |init: Tri| {
                    NodeKind::Dff(DffCtl {
                        enable: None,
                        reset: None,
                        init,
                    })
                };
                e.node(plain(c.init), value[o], vec![next.0]);
                e.node(plain(Tri::from_bool(c.init.is_known())), known[o], vec![next.1]);
            }
        }
    }
    let mut model = e.m;
    model
        .finalize()
        .expect("dual-rail encoding preserves acyclicity");
    DualRail {
        model,
        value,
        known,
    }
}
