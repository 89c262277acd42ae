// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::design::Library;
use super::{
    comb_topo_order, Design, Direction, GateKind, NetId, NetlistError, Node, NodeKind, PortRef,
};

pub const BUS_WE: &str = "bus.we";
pub const BUS_ADDR: &str = "bus.addr";
pub const BUS_WDATA: &str = "bus.wdata";
pub const BUS_WIDTH: usize = 32;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatPort {
    pub name: String,
    pub bits: Vec<NetId>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatRegister {
    /// `inst.reg`
    pub name: String,
    pub instance: usize,
    pub bits: Vec<NetId>,
    pub software_visible: bool,
    pub address: Option<u32>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatInstance {
    pub name: String,
    pub module: String,
    pub inputs: Vec<FlatPort>,
    pub outputs: Vec<FlatPort>,
    pub blackboxed: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Driver {
    None,
    Input(usize),
    Node(usize),
}

/// Single-level netlist with hierarchical (`inst.net`) names.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatModel {
    pub name: String,
    pub nets: Vec<String>,
    pub nodes: Vec<Node>,
    /// Owning instance of each node; `None` for glue logic.
    pub origin: Vec<Option<usize>>,
    pub inputs: Vec<FlatPort>,
    pub outputs: Vec<FlatPort>,
    pub registers: Vec<FlatRegister>,
    pub instances: Vec<FlatInstance>,
    /// `inst.signal` (and top-level port names) to bits.
    pub signals: BTreeMap<String, Vec<NetId>>,
    pub driver: Vec<Driver>,
    /// Combinational nodes in evaluation order.
    pub topo: Vec<usize>,
    /// Indices of DFF nodes.
    pub dffs: Vec<usize>,
}

impl FlatModel {
    pub fn register(&self, name: &str) -> Option<&FlatRegister> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn register_index(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name == name)
    }

    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.name == name)
    }

    pub fn signal(&self, name: &str) -> Option<&[NetId]> {
        self.signals.get(name).map(Vec::as_slice)
    }

    pub fn state_bits(&self) -> usize {
        self.dffs.len()
    }

    pub fn input(&self, name: &str) -> Option<&FlatPort> {
        self.inputs.iter().find(|p| p.name == name)
    }

    /// Inputs treated as active-high resets: `rst` or `*.rst`.
    pub fn is_reset_input(name: &str) -> bool {
        name == "rst" || name.ends_with(".rst")
    }

    pub fn reset_inputs(&self) -> impl Iterator<Item = &FlatPort> {
        self.inputs.iter().filter(|p| Self::is_reset_input(&p.name))
    }

    pub fn is_blackboxed(&self, instance: &str) -> bool {
        self.instances
            .iter()
            .any(|i| i.name == instance && i.blackboxed)
    }

    /// For every net, the nodes that read it.
    pub fn fanout(&self) -> Vec<Vec<usize>> {
        let mut fo = vec![Vec::new(); self.nets.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for f in n.fanin() {
                if fo[f.index()].last() != Some(&i) {
                    fo[f.index()].push(i);
                }
            }
        }
        fo
    }

    /// Bitmap of nets that are primary outputs.
    pub fn output_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.nets.len()];
        for p in &self.outputs {
            for b in &p.bits {
                m[b.index()] = true;
            }
        }
        m
    }

    pub(crate) fn finalize(&mut self) -> Result<(), NetlistError> {
        let mut driver = vec![Driver::None; self.nets.len()];
        for (i, p) in self.inputs.iter().enumerate() {
            for b in &p.bits {
                driver[b.index()] = Driver::Input(i);
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if driver[n.output.index()] != Driver::None {
                return Err(NetlistError::MultipleDrivers(self.nets[n.output.index()].clone()));
            }
            driver[n.output.index()] = Driver::Node(i);
        }
        self.topo = comb_topo_order(self.nets.len(), &self.nodes)
            .map_err(|n| NetlistError::CombinationalLoop(self.nets[n.index()].clone()))?;
        self.dffs = (0..self.nodes.len()).filter(|&i| self.nodes[i].is_dff()).collect();
        self.driver = driver;
        Ok(())
    }

    fn new_net(&mut self, name: String) -> NetId {
        self.nets.push(name);
        NetId(self.nets.len() as u32 - 1)
    }

    fn push_gate(&mut self, kind: NodeKind, name: String, inputs: Vec<NetId>, origin: Option<usize>) -> NetId {
        let out = self.new_net(name);
        self.nodes.push(Node {
            kind,
            output: out,
            inputs,
        });
        self.origin.push(origin);
        out
    }

    fn add_input(&mut self, name: &str, width: usize) -> Vec<NetId> {
        let bits: Vec<NetId> = (0..width)
            .map(|i| self.new_net(bit_name(name, width, i)))
            .collect();
        self.inputs.push(FlatPort {
            name: name.to_string(),
            bits: bits.clone(),
        });
        self.signals.insert(name.to_string(), bits.clone());
        bits
    }

    /// Bus write decoder in front of every mapped register: a write to the
    /// register's address loads `wdata` on the next edge.
    fn add_bus(&mut self, bus: &[(u32, String)]) -> Result<(), NetlistError> {
        let mut mapped = Vec::new();
        for (addr, reg) in bus {
            let r = self
                .register_index(reg)
                .ok_or_else(|| NetlistError::UnknownRegister(reg.clone()))?;
            mapped.push((*addr, r));
        }
        if mapped.is_empty() {
            return Ok(());
        }
        let we = self.add_input(BUS_WE, 1)[0];
        let addr = self.add_input(BUS_ADDR, BUS_WIDTH);
        let wdata = self.add_input(BUS_WDATA, BUS_WIDTH);
        let mut dff_of: BTreeMap<NetId, usize> = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.is_dff() {
                dff_of.insert(n.output, i);
            }
        }
        for (a, r) in mapped {
            let reg = self.registers[r].clone();
            self.registers[r].address = Some(a);
            let org = Some(reg.instance);
            let tag = &reg.name;
            // sel = we & (addr == a)
            let mut acc = we;
            for (i, &bit) in addr.iter().enumerate() {
                let lit = if a >> i & 1 == 1 {
                    bit
                } else {
                    self.push_gate(
                        NodeKind::Gate(GateKind::Not),
                        format!("bus.{tag}.na{i}"),
                        vec![bit],
                        org,
                    )
                };
                acc = self.push_gate(
                    NodeKind::Gate(GateKind::And),
                    format!("bus.{tag}.m{i}"),
                    vec![acc, lit],
                    org,
                );
            }
            let sel = acc;
            for (j, &q) in reg.bits.iter().enumerate() {
                let di = dff_of[&q];
                let d = self.nodes[di].inputs[0];
                let nd = self.push_gate(
                    NodeKind::Gate(GateKind::Mux),
                    format!("bus.{tag}.d{j}"),
                    vec![sel, d, wdata[j]],
                    org,
                );
                let NodeKind::Dff(mut ctl) = self.nodes[di].kind else {
                    unreachable!()
                };
                if let Some(en) = ctl.enable {
                    ctl.enable = Some(self.push_gate(
                        NodeKind::Gate(GateKind::Or),
                        format!("bus.{tag}.en{j}"),
                        vec![en, sel],
                        org,
                    ));
                }
                self.nodes[di].kind = NodeKind::Dff(ctl);
                self.nodes[di].inputs[0] = nd;
            }
        }
        Ok(())
    }
}

fn bit_name(name: &str, width: usize, i: usize) -> String {
    if width == 1 {
        name.to_string()
    } else {
        format!("{name}[{i}]")
    }
}

/// Inlines every instance of `design` into one flat netlist and adds the
/// bus decoder for mapped registers.
pub fn elaborate(design: &Design, library: &Library) -> Result<FlatModel, NetlistError> {
    design.check(library)?;
    let mut m = FlatModel {
        name: design.name.clone(),
        nets: Vec::new(),
        nodes: Vec::new(),
        origin: Vec::new(),
        inputs: Vec::new(),
        outputs: Vec::new(),
        registers: Vec::new(),
        instances: Vec::new(),
        signals: BTreeMap::new(),
        driver: Vec::new(),
        topo: Vec::new(),
        dffs: Vec::new(),
    };

    // local net -> flat net, per instance; input-port bits resolved later
    let mut maps: Vec<Vec<Option<NetId>>> = Vec::new();
    for inst in &design.instances {
        let module = &library[&inst.module];
        let mut is_input = vec![false; module.nets.len()];
        for p in module.inputs() {
            for b in &p.bits {
                is_input[b.index()] = true;
            }
        }
        let map = (0..module.nets.len())
            .map(|i| {
                (!is_input[i]).then(|| m.new_net(format!("{}.{}", inst.name, module.nets[i])))
            })
            .collect();
        maps.push(map);
    }

    enum Src<'a> {
        Port(&'a PortRef),
        Top(&'a str),
    }
    let mut sources: BTreeMap<&PortRef, Src> = BTreeMap::new();
    let dir = |p: &PortRef| -> Direction {
        let inst = design.instance(&p.instance).unwrap();
        library[&inst.module].port(&p.port).unwrap().dir
    };
    let mut connected_outputs: BTreeMap<&PortRef, Vec<&str>> = BTreeMap::new();
    for (a, b) in &design.connections {
        let (src, dst) = if dir(a) == Direction::Out { (a, b) } else { (b, a) };
        if sources.insert(dst, Src::Port(src)).is_some() {
            return Err(NetlistError::MultipleDrivers(dst.to_string()));
        }
        connected_outputs.entry(src).or_default();
    }
    for (name, p) in &design.tops {
        if dir(p) == Direction::In {
            if sources.insert(p, Src::Top(name)).is_some() {
                return Err(NetlistError::MultipleDrivers(p.to_string()));
            }
        } else {
            connected_outputs.entry(p).or_default().push(name);
        }
    }

    let inst_index: BTreeMap<&str, usize> = design
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| (inst.name.as_str(), i))
        .collect();
    let port_bits = |maps: &Vec<Vec<Option<NetId>>>, p: &PortRef| -> Vec<NetId> {
        let k = inst_index[p.instance.as_str()];
        let module = &library[&design.instances[k].module];
        module.port(&p.port).unwrap().bits.iter().map(|b| maps[k][b.index()].unwrap()).collect()
    };

    let mut top_inputs: BTreeMap<&str, Vec<NetId>> = BTreeMap::new();
    for (k, inst) in design.instances.iter().enumerate() {
        let module = &library[&inst.module];
        for port in module.inputs() {
            let pr = PortRef::new(&inst.name, &port.name);
            let bits = match sources.get(&pr) {
                Some(Src::Port(src)) => port_bits(&maps, src),
                Some(Src::Top(name)) => match top_inputs.get(name) {
                    Some(b) => b.clone(),
                    None => {
                        let b = m.add_input(name, port.width());
                        top_inputs.insert(name, b.clone());
                        b
                    }
                },
                None => m.add_input(&pr.to_string(), port.width()),
            };
            for (lb, fb) in port.bits.iter().zip(bits) {
                maps[k][lb.index()] = Some(fb);
            }
        }
    }

    for (k, inst) in design.instances.iter().enumerate() {
        let module = &library[&inst.module];
        let map = &maps[k];
        let f = |n: NetId| map[n.index()].unwrap();
        for node in &module.nodes {
            let kind = match node.kind {
                NodeKind::Dff(mut c) => {
                    c.enable = c.enable.map(f);
                    c.reset = c.reset.map(|(n, v)| (f(n), v));
                    NodeKind::Dff(c)
                }
                k => k,
            };
            m.nodes.push(Node {
                kind,
                output: f(node.output),
                inputs: node.inputs.iter().map(|&n| f(n)).collect(),
            });
            m.origin.push(Some(k));
        }
        for sig in &module.signals {
            m.signals.insert(
                format!("{}.{}", inst.name, sig.name),
                sig.bits.iter().map(|&b| f(b)).collect(),
            );
        }
        for r in &module.registers {
            m.registers.push(FlatRegister {
                name: format!("{}.{}", inst.name, r.name),
                instance: k,
                bits: r.bits.iter().map(|&b| f(b)).collect(),
                software_visible: r.software_visible,
                address: None,
            });
        }
        let mut fi = FlatInstance {
            name: inst.name.clone(),
            module: inst.module.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            blackboxed: false,
        };
        for port in &module.ports {
            let fp = FlatPort {
                name: port.name.clone(),
                bits: port.bits.iter().map(|&b| f(b)).collect(),
            };
            if port.dir == Direction::In {
                fi.inputs.push(fp);
            } else {
                let pr = PortRef::new(&inst.name, &port.name);
                match connected_outputs.get(&pr) {
                    None => m.outputs.push(FlatPort {
                        name: pr.to_string(),
                        bits: fp.bits.clone(),
                    }),
                    Some(names) => {
                        for name in names {
                            m.outputs.push(FlatPort {
                                name: name.to_string(),
                                bits: fp.bits.clone(),
                            });
                            m.signals.insert(name.to_string(), fp.bits.clone());
                        }
                    }
                }
                fi.outputs.push(fp);
            }
        }
        m.instances.push(fi);
    }

    m.add_bus(&design.bus)?;
    m.finalize()?;
    Ok(m)
}

/// Removes an instance's logic; its outputs become free inputs.
pub fn blackbox(model: &FlatModel, instance: &str) -> Result<FlatModel, NetlistError> {
    let k = model
        .instance_index(instance)
        .ok_or_else(|| NetlistError::UnknownInstance(instance.to_string()))?;
    let mut m = model.clone();
    if m.instances[k].blackboxed {
        return Ok(m);
    }
    let keep: Vec<bool> = m.origin.iter().map(|o| *o != Some(k)).collect();
    let mut it = keep.iter();
    m.nodes.retain(|_| *it.next().unwrap());
    let mut it = keep.iter();
    m.origin.retain(|_| *it.next().unwrap());
    m.registers.retain(|r| r.instance != k);
    let removed = |n: NetId| matches!(model.driver[n.index()], Driver::Node(i) if !keep[i]);
    let outs = m.instances[k].outputs.clone();
    for p in outs {
        if p.bits.iter().any(|&b| removed(b)) {
            m.inputs.push(FlatPort {
                name: format!("{instance}.{}", p.name),
                bits: p.bits.clone(),
            });
        }
    }
    m.instances[k].blackboxed = true;
    m.finalize()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Instance, NetlistBuilder};

    fn lib() -> Library {
        let mut b = NetlistBuilder::new("ctr");
        let q = b.reg("count", 2, Some(0), true).unwrap();
        let o = b.output("q", 2).unwrap();
        let n = b.wire("nxt", 2).unwrap();
        b.gate(GateKind::Not, n[0], &[q[0]]);
        b.gate(GateKind::Xor, n[1], &[q[1], q[0]]);
        b.gate(GateKind::And, o[0], &[q[0], q[0]]);
        b.gate(GateKind::And, o[1], &[q[1], q[1]]);
        b.dff("count", &n, None, None).unwrap();
        let ctr = b.finish().unwrap();

        let mut b = NetlistBuilder::new("sink");
        let i = b.input("d", 4).unwrap();
        let o = b.output("y", 1).unwrap();
        b.gate(GateKind::Or, o[0], &[i[0], i[3]]);
        let sink = b.finish().unwrap();
        [ctr, sink].into_iter().map(|m| (m.name.clone(), m)).collect()
    }

    fn inst(n: &str, m: &str) -> Instance {
        Instance {
            name: n.into(),
            module: m.into(),
        }
    }

    #[test]
    fn single_counter() {
        let d = Design {
            name: "t".into(),
            instances: vec![inst("ctr", "ctr")],
            ..Default::default()
        };
        let m = elaborate(&d, &lib()).unwrap();
        assert_eq!(m.state_bits(), 2);
        let names: Vec<_> = m.registers.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["ctr.count"]);
        assert_eq!(m.outputs[0].name, "ctr.q");
    }

    #[test]
    fn two_instances_get_distinct_names() {
        let d = Design {
            name: "t".into(),
            instances: vec![inst("a", "ctr"), inst("b", "ctr")],
            ..Default::default()
        };
        let m = elaborate(&d, &lib()).unwrap();
        let names: Vec<_> = m.registers.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["a.count", "b.count"]);
    }

    #[test]
    fn width_mismatch() {
        let d = Design {
            name: "t".into(),
            instances: vec![inst("a", "ctr"), inst("s", "sink")],
            connections: vec![(PortRef::new("a", "q"), PortRef::new("s", "d"))],
            ..Default::default()
        };
        assert!(matches!(elaborate(&d, &lib()), Err(NetlistError::WidthMismatch { .. })));
    }

    #[test]
    fn unknown_module() {
        let d = Design {
            name: "t".into(),
            instances: vec![inst("a", "nope")],
            ..Default::default()
        };
        assert_eq!(elaborate(&d, &lib()), Err(NetlistError::UnknownModule("nope".into())));
    }

    #[test]
    fn blackbox_frees_outputs_and_is_idempotent() {
        let d = Design {
            name: "t".into(),
            instances: vec![inst("a", "ctr"), inst("s", "sink")],
            bus: vec![(0x10, "a.count".into())],
            ..Default::default()
        };
        let m = elaborate(&d, &lib()).unwrap();
        assert_eq!(m.register("a.count").unwrap().address, Some(0x10));
        let bb = blackbox(&m, "a").unwrap();
        assert_eq!(bb.state_bits(), 0);
        assert!(bb.input("a.q").is_some());
        assert_eq!(blackbox(&bb, "a").unwrap(), bb);
        let bs = blackbox(&m, "s").unwrap();
        assert_eq!(bs.inputs.len(), m.inputs.len() + 1);
        assert!(matches!(blackbox(&m, "zz"), Err(NetlistError::UnknownInstance(_))));
    }
}
