// SPDX-License-Identifier: Apache-2.0

//! Cycle-accurate three-valued simulation of a [`FlatModel`], driven by an
//! ESW script through the bus decoder.
//!
//! Timing: one script statement per bus transaction; `reset N` and
//! `wait N` take N cycles. A write is visible in its register after the
//! clock edge that ends its cycle. Inputs other than the bus and resets
//! are held at 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;

use crate::frontend::{EswScript, RegisterMap, Stmt};
use crate::logic::{pack_bits, Tri};
use crate::netlist::{dff_next, FlatModel, NetId, NodeKind, BUS_ADDR, BUS_WDATA, BUS_WE};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimState {
    /// Clock edges so far.
    pub cycle: u64,
    pub values: Vec<Tri>,
    /// Next script statement.
    pub pc: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poi {
    pub stmt: usize,
    pub addr: u32,
    pub register: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PoiSet {
    pub watched: Vec<Poi>,
}

impl PoiSet {
    pub fn len(&self) -> usize {
        self.watched.len()
    }

    pub fn is_empty(&self) -> bool {
        self.watched.is_empty()
    }

    fn at(&self, stmt: usize) -> Option<&Poi> {
        self.watched.iter().find(|p| p.stmt == stmt)
    }
}

/// Every statement touching a ranked register becomes a point of interest.
pub fn set_pois(regmap: &RegisterMap, ranked: &[String], script: &EswScript) -> PoiSet {
    let mut watched = Vec::new();
    for (i, st) in script.stmts.iter().enumerate() {
        let Some(addr) = st.address() else { continue };
        if let Some(reg) = regmap.register_at(addr) {
            if ranked.iter().any(|r| r == reg) {
                watched.push(Poi {
                    stmt: i,
                    addr,
                    register: reg.to_string(),
                });
            }
        }
    }
    PoiSet { watched }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Triggered(Poi),
    ScriptEnded,
}

/// Fully known register values at some cycle.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CapturedValues {
    pub values: BTreeMap<String, u64>,
    pub cycle: u64,
}

/// Per-cycle primary input assignment, one entry per input bit in
/// [`Simulator::input_bits`] order.
pub type InputVec = Vec<Tri>;

pub struct Simulator<'m> {
    model: &'m FlatModel,
    input_bits: Vec<NetId>,
    reset_bits: Vec<usize>,
    bus: Option<(usize, usize, usize)>,
    pub warnings: Vec<String>,
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m FlatModel) -> Simulator<'m> {
        let mut input_bits = Vec::new();
        let mut reset_bits = Vec::new();
        let mut offset = BTreeMap::new();
        for p in &model.inputs {
            offset.insert(p.name.as_str(), input_bits.len());
            if FlatModel::is_reset_input(&p.name) {
                reset_bits.extend(input_bits.len()..input_bits.len() + p.bits.len());
            }
            input_bits.extend(p.bits.iter().copied());
        }
        let bus = match (offset.get(BUS_WE), offset.get(BUS_ADDR), offset.get(BUS_WDATA)) {
            (Some(&w), Some(&a), Some(&d)) => Some((w, a, d)),
            _ => None,
        };
        Simulator {
            model,
            input_bits,
            reset_bits,
            bus,
            warnings: Vec::new(),
        }
    }

    pub fn model(&self) -> &'m FlatModel {
        self.model
    }

    pub fn input_bits(&self) -> &[NetId] {
        &self.input_bits
    }

    /// Power-on state: flip-flops at their init value (X if none).
    pub fn initial_state(&self) -> SimState {
        self.initial_state_with(|_, init| init)
    }

    /// Power-on state with an override `f(dff_output, init)`.
    pub fn initial_state_with(&self, mut f: impl FnMut(NetId, Tri) -> Tri) -> SimState {
        let mut values = vec![Tri::X; self.model.nets.len()];
        for &i in &self.model.dffs {
            let n = &self.model.nodes[i];
            if let NodeKind::Dff(c) = n.kind {
                values[n.output.index()] = f(n.output, c.init);
            }
        }
        SimState {
            cycle: 0,
            values,
            pc: 0,
        }
    }

    /// Applies inputs and settles the combinational logic.
    pub fn eval(&self, st: &mut SimState, inputs: &[Tri]) {
        for (b, v) in self.input_bits.iter().zip(inputs) {
            st.values[b.index()] = *v;
        }
        let mut ins = [Tri::X; 3];
        for &i in &self.model.topo {
            let n = &self.model.nodes[i];
            let v = match n.kind {
                NodeKind::Const(b) => Tri::from_bool(b),
                NodeKind::Gate(g) => {
                    for (k, x) in n.inputs.iter().enumerate() {
                        ins[k] = st.values[x.index()];
                    }
                    g.eval(&ins[..n.inputs.len()])
                }
                NodeKind::Dff(_) => continue,
            };
            st.values[n.output.index()] = v;
        }
    }

    /// Clock edge: every flip-flop loads its next state.
    pub fn clock(&self, st: &mut SimState) {
        let next: Vec<(NetId, Tri)> = self
            .model
            .dffs
            .iter()
            .map(|&i| {
                let n = &self.model.nodes[i];
                let NodeKind::Dff(c) = n.kind else { unreachable!() };
                let v = |x: NetId| st.values[x.index()];
                let nv = dff_next(
                    &c,
                    v(n.output),
                    v(n.inputs[0]),
                    c.enable.map(v),
                    c.reset.map(|(r, _)| v(r)),
                );
                (n.output, nv)
            })
            .collect();
        for (o, v) in next {
            st.values[o.index()] = v;
        }
        st.cycle += 1;
    }

    /// One full cycle: inputs, settle, edge.
    pub fn step(&self, st: &mut SimState, inputs: &[Tri]) {
        self.eval(st, inputs);
        self.clock(st);
    }

    fn stmt_inputs(&self, st: Option<&Stmt>) -> InputVec {
        let mut v = vec![Tri::Zero; self.input_bits.len()];
        let set_word = |v: &mut InputVec, at: usize, w: u32| {
            for i in 0..32 {
                v[at + i] = Tri::from_bool(w >> i & 1 == 1);
            }
        };
        match st {
            Some(Stmt::Reset(_)) => {
                for &r in &self.reset_bits {
                    v[r] = Tri::One;
                }
            }
            Some(Stmt::Write { addr, value }) => {
                if let Some((we, a, d)) = self.bus {
                    v[we] = Tri::One;
                    set_word(&mut v, a, *addr);
                    set_word(&mut v, d, *value);
                }
            }
            Some(Stmt::Read { addr }) => {
                if let Some((_, a, _)) = self.bus {
                    set_word(&mut v, a, *addr);
                }
            }
            _ => {}
        }
        v
    }

    /// Executes one statement; returns false past the end of the script.
    pub fn exec(&mut self, st: &mut SimState, script: &EswScript, regmap: &RegisterMap) -> bool {
        let Some(stmt) = script.stmts.get(st.pc) else {
            return false;
        };
        if let Some(addr) = stmt.address() {
            let mapped = regmap
                .register_at(addr)
                .is_some_and(|r| self.model.register(r).is_some_and(|r| r.address == Some(addr)));
            if !mapped && matches!(stmt, Stmt::Write { .. }) {
                let msg = format!(
                    "line {}: write to unmapped address {addr:#x}",
                    script.lines.get(st.pc).copied().unwrap_or(0)
                );
                warn!("{msg}");
                self.warnings.push(msg);
            }
        }
        let inputs = self.stmt_inputs(Some(stmt));
        for _ in 0..stmt.cycles() {
            self.step(st, &inputs);
        }
        st.pc += 1;
        true
    }

    /// Runs from `st` until a point-of-interest statement has completed.
    pub fn run_until_poi(
        &mut self,
        st: &mut SimState,
        script: &EswScript,
        regmap: &RegisterMap,
        pois: &PoiSet,
    ) -> RunOutcome {
        loop {
            let pc = st.pc;
            if !self.exec(st, script, regmap) {
                return RunOutcome::ScriptEnded;
            }
            if let Some(p) = pois.at(pc) {
                return RunOutcome::Triggered(p.clone());
            }
        }
    }

    /// Idle-cycle inputs (everything 0).
    pub fn idle_inputs(&self) -> InputVec {
        self.stmt_inputs(None)
    }
}

/// Fully-known values of `registers` in `st`; X-valued ones are skipped.
pub fn collect_sim_values(model: &FlatModel, st: &SimState, registers: &[String]) -> CapturedValues {
    let mut values = BTreeMap::new();
    for r in registers {
        let Some(reg) = model.register(r) else { continue };
        if reg.bits.len() > 64 {
            continue;
        }
        let bits: Vec<Tri> = reg.bits.iter().map(|b| st.values[b.index()]).collect();
        if let Some(v) = pack_bits(&bits) {
            values.insert(r.clone(), v);
        }
    }
    CapturedValues {
        values,
        cycle: st.cycle,
    }
}

/// Value-change dump of selected signals, one sample per cycle.
pub struct VcdWriter {
    signals: Vec<(String, Vec<NetId>, String)>,
    body: String,
    last: Vec<Option<String>>,
}

impl VcdWriter {
    pub fn new(model: &FlatModel, names: &[String]) -> VcdWriter {
        let signals: Vec<_> = names
            .iter()
            .filter_map(|n| model.signal(n).map(|b| (n.clone(), b.to_vec())))
            .enumerate()
            .map(|(i, (n, b))| (n, b, vcd_id(i)))
            .collect();
        let last = vec![None; signals.len()];
        VcdWriter {
            signals,
            body: String::new(),
            last,
        }
    }

    pub fn sample(&mut self, st: &SimState) {
        let mut header = false;
        for (k, (_, bits, id)) in self.signals.iter().enumerate() {
            let s: String = bits.iter().rev().map(|b| st.values[b.index()].to_string()).collect();
            if self.last[k].as_deref() == Some(s.as_str()) {
                continue;
            }
            if !header {
                writeln!(self.body, "#{}", st.cycle).unwrap();
                header = true;
            }
            if bits.len() == 1 {
                writeln!(self.body, "{s}{id}").unwrap();
            } else {
                writeln!(self.body, "b{s} {id}").unwrap();
            }
            self.last[k] = Some(s);
        }
    }

    pub fn finish(&self) -> String {
        let mut s = String::from("$timescale 1ns $end\n$scope module top $end\n");
        for (n, bits, id) in &self.signals {
            writeln!(s, "$var wire {} {id} {n} $end", bits.len()).unwrap();
        }
        s.push_str("$upscope $end\n$enddefinitions $end\n");
        s.push_str(&self.body);
        s
    }
}

fn vcd_id(mut i: usize) -> String {
    let mut s = String::new();
    loop {
        s.push((b'!' + (i % 94) as u8) as char);
        i /= 94;
        if i == 0 {
            return s;
        }
    }
}
