// SPDX-License-Identifier: Apache-2.0

//! Bit-level netlist IR.
//!
//! An [`IpNetlist`] is one module definition. Every multi-bit signal is
//! stored as a vector of single-bit nets (LSB first); gates and flip-flops
//! operate on single bits. A [`Design`] instantiates modules and wires them
//! together, and [`elaborate`] flattens it into a [`FlatModel`].

mod cone;
mod design;
mod elaborate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::Tri;

pub use cone::{fanout_cone, Cone, ConeIndex};
pub use design::{list_unique_ips, rank_ips_by_connection, Design, Instance, Library, PortRef};
pub use elaborate::{
    blackbox, elaborate, Driver, FlatInstance, FlatModel, FlatPort, FlatRegister, BUS_ADDR, BUS_WDATA,
    BUS_WE, BUS_WIDTH,
};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct NetId(pub u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Direction {
    In,
    Out,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum SignalKind {
    Input,
    Output,
    Wire,
    Reg,
    /// An output port whose bits are register outputs.
    OutputReg,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Signal {
    pub name: String,
    pub kind: SignalKind,
    pub bits: Vec<NetId>,
}

impl Signal {
    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Port {
    pub name: String,
    pub dir: Direction,
    pub bits: Vec<NetId>,
}

impl Port {
    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum GateKind {
    And,
    Or,
    Xor,
    Not,
    Mux,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            GateKind::And | GateKind::Or | GateKind::Xor => 2,
            GateKind::Mux => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::Not => "NOT",
            GateKind::Mux => "MUX",
        }
    }

    pub fn parse(s: &str) -> Option<GateKind> {
        Some(match s.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "OR" => GateKind::Or,
            "XOR" => GateKind::Xor,
            "NOT" => GateKind::Not,
            "MUX" => GateKind::Mux,
            _ => return None,
        })
    }

    pub fn eval(self, ins: &[Tri]) -> Tri {
        match self {
            GateKind::And => ins[0].and(ins[1]),
            GateKind::Or => ins[0].or(ins[1]),
            GateKind::Xor => ins[0].xor(ins[1]),
            GateKind::Not => ins[0].not(),
            GateKind::Mux => Tri::mux(ins[0], ins[1], ins[2]),
        }
    }
}

/// Flip-flop control. Next state is `rst ? rstval : (en ? d : q)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DffCtl {
    pub enable: Option<NetId>,
    pub reset: Option<(NetId, bool)>,
    /// Power-on value; `X` when the register has no initializer.
    pub init: Tri,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum NodeKind {
    Gate(GateKind),
    Const(bool),
    Dff(DffCtl),
}

/// One single-bit cell. Gate inputs are ordered (`MUX` is sel/a/b and
/// selects `b` when `sel` is 1); a DFF has exactly one input, its data net.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub output: NetId,
    pub inputs: Vec<NetId>,
}

impl Node {
    pub fn is_dff(&self) -> bool {
        matches!(self.kind, NodeKind::Dff(_))
    }

    /// Every net this node reads, including DFF enable/reset.
    pub fn fanin(&self) -> impl Iterator<Item = NetId> + '_ {
        let ctl: Vec<NetId> = match self.kind {
            NodeKind::Dff(c) => c.enable.into_iter().chain(c.reset.map(|r| r.0)).collect(),
            _ => Vec::new(),
        };
        self.inputs.iter().copied().chain(ctl)
    }
}

/// Next-state function of a flip-flop in three-valued logic.
pub fn dff_next(ctl: &DffCtl, q: Tri, d: Tri, en: Option<Tri>, rst: Option<Tri>) -> Tri {
    let held = match en {
        Some(e) => Tri::mux(e, q, d),
        None => d,
    };
    match (ctl.reset, rst) {
        (Some((_, rv)), Some(r)) => Tri::mux(r, held, Tri::from_bool(rv)),
        _ => held,
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegisterDecl {
    pub name: String,
    pub bits: Vec<NetId>,
    pub software_visible: bool,
}

impl RegisterDecl {
    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("unknown port `{0}`")]
    UnknownPort(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("width mismatch: {left} has {lw} bits, {right} has {rw}")]
    WidthMismatch {
        left: String,
        lw: usize,
        right: String,
        rw: usize,
    },
    #[error("combinational loop through `{0}`")]
    CombinationalLoop(String),
    #[error("net `{0}` has multiple drivers")]
    MultipleDrivers(String),
    #[error("net `{0}` is used but never driven")]
    Undriven(String),
    #[error("`{kind}` expects {expected} inputs, got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("register `{0}` bit is not driven by a flip-flop")]
    RegisterWithoutDff(String),
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("invalid connection {0}")]
    InvalidConnection(String),
    #[error("register `{0}` has zero width")]
    ZeroWidth(String),
}

/// A validated module definition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IpNetlist {
    pub name: String,
    /// Bit-level net names, indexed by [`NetId`].
    pub nets: Vec<String>,
    /// Declared signals in declaration order.
    pub signals: Vec<Signal>,
    pub ports: Vec<Port>,
    pub nodes: Vec<Node>,
    pub registers: Vec<RegisterDecl>,
    index: BTreeMap<String, usize>,
}

impl IpNetlist {
    pub fn signal(&self, name: &str) -> Option<&Signal> {
        self.index.get(name).map(|&i| &self.signals[i])
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn register(&self, name: &str) -> Option<&RegisterDecl> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn state_bits(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_dff()).count()
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.dir == Direction::In)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.dir == Direction::Out)
    }

    fn validate(&self) -> Result<(), NetlistError> {
        let n = self.nets.len();
        let mut drivers = vec![0u32; n];
        for p in self.inputs() {
            for b in &p.bits {
                drivers[b.index()] += 1;
            }
        }
        for node in &self.nodes {
            let (kind, expected) = match node.kind {
                NodeKind::Gate(g) => (g.name(), g.arity()),
                NodeKind::Const(_) => ("CONST", 0),
                NodeKind::Dff(_) => ("DFF", 1),
            };
            if node.inputs.len() != expected {
                return Err(NetlistError::Arity {
                    kind,
                    expected,
                    got: node.inputs.len(),
                });
            }
            drivers[node.output.index()] += 1;
        }
        for (i, &d) in drivers.iter().enumerate() {
            if d > 1 {
                return Err(NetlistError::MultipleDrivers(self.nets[i].clone()));
            }
        }
        let mut used = vec![false; n];
        for node in &self.nodes {
            for i in node.fanin() {
                used[i.index()] = true;
            }
        }
        for p in self.outputs() {
            for b in &p.bits {
                used[b.index()] = true;
            }
        }
        for i in 0..n {
            if used[i] && drivers[i] == 0 {
                return Err(NetlistError::Undriven(self.nets[i].clone()));
            }
        }
        let mut dff_out = vec![false; n];
        for node in &self.nodes {
            if node.is_dff() {
                dff_out[node.output.index()] = true;
            }
        }
        for r in &self.registers {
            if r.bits.is_empty() {
                return Err(NetlistError::ZeroWidth(r.name.clone()));
            }
            if r.bits.iter().any(|b| !dff_out[b.index()]) {
                return Err(NetlistError::RegisterWithoutDff(r.name.clone()));
            }
        }
        if let Some(net) = find_comb_cycle(n, &self.nodes) {
            return Err(NetlistError::CombinationalLoop(self.nets[net.index()].clone()));
        }
        Ok(())
    }
}

/// Topological order of the combinational nodes, or a net on a cycle.
pub(crate) fn comb_topo_order(num_nets: usize, nodes: &[Node]) -> Result<Vec<usize>, NetId> {
    let mut producer: Vec<Option<usize>> = vec![None; num_nets];
    for (i, node) in nodes.iter().enumerate() {
        if !node.is_dff() {
            producer[node.output.index()] = Some(i);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; nodes.len()];
    let mut order = Vec::with_capacity(nodes.len());
    for root in 0..nodes.len() {
        if nodes[root].is_dff() || state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < nodes[node].inputs.len() {
                let input = nodes[node].inputs[*next];
                *next += 1;
                if let Some(p) = producer[input.index()] {
                    match state[p] {
                        0 => {
                            state[p] = 1;
                            stack.push((p, 0));
                        }
                        1 => return Err(input),
                        _ => {}
                    }
                }
            } else {
                state[node] = 2;
                order.push(node);
                stack.pop();
            }
        }
    }
    Ok(order)
}

fn find_comb_cycle(num_nets: usize, nodes: &[Node]) -> Option<NetId> {
    comb_topo_order(num_nets, nodes).err()
}

/// Incremental construction of an [`IpNetlist`]; `finish` validates.
#[derive(Debug)]
pub struct NetlistBuilder {
    nl: IpNetlist,
    reg_init: BTreeMap<NetId, Tri>,
}

impl NetlistBuilder {
    pub fn new(name: &str) -> NetlistBuilder {
        NetlistBuilder {
            nl: IpNetlist {
                name: name.to_string(),
                nets: Vec::new(),
                signals: Vec::new(),
                ports: Vec::new(),
                nodes: Vec::new(),
                registers: Vec::new(),
                index: BTreeMap::new(),
            },
            reg_init: BTreeMap::new(),
        }
    }

    fn declare(&mut self, name: &str, width: usize, kind: SignalKind) -> Result<Vec<NetId>, NetlistError> {
        if self.nl.index.contains_key(name) {
            return Err(NetlistError::Duplicate(name.to_string()));
        }
        let bits: Vec<NetId> = (0..width)
            .map(|i| {
                let id = NetId(self.nl.nets.len() as u32);
                self.nl.nets.push(if width == 1 {
                    name.to_string()
                } else {
                    format!("{name}[{i}]")
                });
                id
            })
            .collect();
        self.nl.index.insert(name.to_string(), self.nl.signals.len());
        self.nl.signals.push(Signal {
            name: name.to_string(),
            kind,
            bits: bits.clone(),
        });
        Ok(bits)
    }

    pub fn input(&mut self, name: &str, width: usize) -> Result<Vec<NetId>, NetlistError> {
        let bits = self.declare(name, width, SignalKind::Input)?;
        self.nl.ports.push(Port {
            name: name.to_string(),
            dir: Direction::In,
            bits: bits.clone(),
        });
        Ok(bits)
    }

    pub fn output(&mut self, name: &str, width: usize) -> Result<Vec<NetId>, NetlistError> {
        let bits = self.declare(name, width, SignalKind::Output)?;
        self.nl.ports.push(Port {
            name: name.to_string(),
            dir: Direction::Out,
            bits: bits.clone(),
        });
        Ok(bits)
    }

    pub fn wire(&mut self, name: &str, width: usize) -> Result<Vec<NetId>, NetlistError> {
        self.declare(name, width, SignalKind::Wire)
    }

    /// Declares a register. If an output port of the same name and width
    /// exists, the register drives that port directly.
    /// `init` of `None` leaves the register uninitialized (X).
    pub fn reg(
        &mut self,
        name: &str,
        width: usize,
        init: Option<u64>,
        software_visible: bool,
    ) -> Result<Vec<NetId>, NetlistError> {
        if width == 0 {
            return Err(NetlistError::ZeroWidth(name.to_string()));
        }
        let bits = match self.nl.index.get(name) {
            Some(&i) if self.nl.signals[i].kind == SignalKind::Output => {
                let sig = &mut self.nl.signals[i];
                if sig.width() != width {
                    return Err(NetlistError::WidthMismatch {
                        left: name.to_string(),
                        lw: sig.width(),
                        right: format!("reg {name}"),
                        rw: width,
                    });
                }
                sig.kind = SignalKind::OutputReg;
                sig.bits.clone()
            }
            _ => self.declare(name, width, SignalKind::Reg)?,
        };
        self.nl.registers.push(RegisterDecl {
            name: name.to_string(),
            bits: bits.clone(),
            software_visible,
        });
        for (i, b) in bits.iter().enumerate() {
            let v = init.map_or(Tri::X, |v| Tri::from_bool(i < 64 && v >> i & 1 == 1));
            self.reg_init.insert(*b, v);
        }
        Ok(bits)
    }

    pub fn signal(&self, name: &str) -> Option<&Signal> {
        self.nl.signal(name)
    }

    pub fn gate(&mut self, kind: GateKind, output: NetId, inputs: &[NetId]) {
        self.nl.nodes.push(Node {
            kind: NodeKind::Gate(kind),
            output,
            inputs: inputs.to_vec(),
        });
    }

    pub fn constant(&mut self, output: NetId, value: bool) {
        self.nl.nodes.push(Node {
            kind: NodeKind::Const(value),
            output,
            inputs: Vec::new(),
        });
    }

    /// Drives every bit of register `reg` from `d` (same width).
    pub fn dff(
        &mut self,
        reg: &str,
        d: &[NetId],
        enable: Option<NetId>,
        reset: Option<(NetId, u64)>,
    ) -> Result<(), NetlistError> {
        let r = self
            .nl
            .register(reg)
            .ok_or_else(|| NetlistError::UnknownRegister(reg.to_string()))?
            .clone();
        if r.width() != d.len() {
            return Err(NetlistError::WidthMismatch {
                left: reg.to_string(),
                lw: r.width(),
                right: "dff data".to_string(),
                rw: d.len(),
            });
        }
        for (i, (&q, &di)) in r.bits.iter().zip(d).enumerate() {
            self.dff_bit(q, di, enable, reset.map(|(net, v)| (net, i < 64 && v >> i & 1 == 1)))?;
        }
        Ok(())
    }

    /// Drives one register bit `q`.
    pub fn dff_bit(
        &mut self,
        q: NetId,
        d: NetId,
        enable: Option<NetId>,
        reset: Option<(NetId, bool)>,
    ) -> Result<(), NetlistError> {
        let init = *self
            .reg_init
            .get(&q)
            .ok_or_else(|| NetlistError::UnknownRegister(self.nl.nets[q.index()].clone()))?;
        self.nl.nodes.push(Node {
            kind: NodeKind::Dff(DffCtl {
                enable,
                reset,
                init,
            }),
            output: q,
            inputs: vec![d],
        });
        Ok(())
    }

    pub fn net_name(&self, n: NetId) -> &str {
        &self.nl.nets[n.index()]
    }

    pub fn finish(mut self) -> Result<IpNetlist, NetlistError> {
        let index = &self.nl.index;
        self.nl.registers.sort_by_key(|r| index[&r.name]);
        self.nl.validate()?;
        Ok(self.nl)
    }
}
