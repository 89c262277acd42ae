// SPDX-License-Identifier: Apache-2.0

//! Counterexample traces and their replay on the three-valued simulator.

use std::fmt::Write as _;

use crate::frontend::{PropKind, PropertyAst};
use crate::logic::Tri;
use crate::netlist::{FlatModel, NetId};
use crate::sim::{SimState, Simulator, VcdWriter};

/// A stimulus that drives a property to failure in its final cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub property: String,
    pub kind: PropKind,
    /// Per cycle, one value per bit of [`Simulator::input_bits`].
    pub inputs: Vec<Vec<bool>>,
    /// Chosen power-on values of flip-flops without an initializer.
    pub init: Vec<(NetId, bool)>,
    /// Per cycle, `(net, value, known)` of every cut register bit.
    pub cut: Vec<Vec<(NetId, bool, bool)>>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    /// Property value in every cycle.
    pub values: Vec<Tri>,
    /// The property evaluates to 0 in the last cycle.
    pub violated: bool,
    pub states: Vec<SimState>,
}

/// Property value in a settled state. For `xprop` properties `known(...)`
/// is computed from the three-valued state; user properties are evaluated
/// over the (fully known) values.
pub fn eval_property(model: &FlatModel, st: &SimState, prop: &PropertyAst) -> Tri {
    let mut alg = Tri::X;
    prop.expr.lower(&mut alg, &mut |s, known| {
        let bits = model.signal(&s.name).unwrap_or(&[]);
        s.select(bits)
            .iter()
            .map(|b| {
                let v = st.values[b.index()];
                if known {
                    Tri::from_bool(v.is_known())
                } else {
                    v
                }
            })
            .collect()
    })
}

/// Re-simulates `trace` on `model` (the model the check ran on, after
/// blackboxing). X-valued power-on state is kept for `xprop` properties and
/// concretized from the trace for user properties.
pub fn replay(model: &FlatModel, trace: &Trace, prop: &PropertyAst) -> Replay {
    let sim = Simulator::new(model);
    let user = prop.kind == PropKind::User;
    let mut st = sim.initial_state_with(|n, init| {
        if user && init == Tri::X {
            trace
                .init
                .iter()
                .find(|(m, _)| *m == n)
                .map_or(Tri::Zero, |&(_, v)| Tri::from_bool(v))
        } else {
            init
        }
    });
    let mut values = Vec::new();
    let mut states = Vec::new();
    for (t, ins) in trace.inputs.iter().enumerate() {
        for &(n, v, k) in trace.cut.get(t).map_or(&[][..], Vec::as_slice) {
            st.values[n.index()] = if k || user { Tri::from_bool(v) } else { Tri::X };
        }
        let ins: Vec<Tri> = ins.iter().map(|&b| Tri::from_bool(b)).collect();
        sim.eval(&mut st, &ins);
        values.push(eval_property(model, &st, prop));
        states.push(st.clone());
        sim.clock(&mut st);
    }
    let violated = values.last() == Some(&Tri::Zero);
    Replay {
        values,
        violated,
        states,
    }
}

/// Human-readable listing: every input port and property signal per cycle.
pub fn format_trace(model: &FlatModel, trace: &Trace, prop: &PropertyAst) -> String {
    let r = replay(model, trace, prop);
    let mut out = String::new();
    writeln!(
        out,
        "# trace {} ({}) length {}",
        trace.property,
        match trace.kind {
            PropKind::User => "user",
            PropKind::Xprop => "xprop",
        },
        trace.len()
    )
    .unwrap();
    let mut names: Vec<String> = model.inputs.iter().map(|p| p.name.clone()).collect();
    let mut sigs = Vec::new();
    prop.expr.signals(&mut sigs);
    for s in sigs {
        if !names.contains(&s.name) {
            names.push(s.name);
        }
    }
    for (t, st) in r.states.iter().enumerate() {
        write!(out, "{t}:").unwrap();
        for n in &names {
            let bits = model.signal(n).unwrap_or(&[]);
            let v: String = bits.iter().rev().map(|b| st.values[b.index()].to_string()).collect();
            write!(out, " {n}={v}").unwrap();
        }
        writeln!(out, " | {}={}", trace.property, r.values[t]).unwrap();
    }
    out
}

/// VCD of the replayed trace over the property's signals and all inputs.
pub fn trace_vcd(model: &FlatModel, trace: &Trace, prop: &PropertyAst) -> String {
    let r = replay(model, trace, prop);
    let mut names: Vec<String> = model.inputs.iter().map(|p| p.name.clone()).collect();
    let mut sigs = Vec::new();
    prop.expr.signals(&mut sigs);
    names.extend(sigs.into_iter().map(|s| s.name));
    names.sort();
    names.dedup();
    let mut vcd = VcdWriter::new(model, &names);
    for st in &r.states {
        vcd.sample(st);
    }
    vcd.finish()
}
