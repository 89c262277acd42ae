// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sfv_core::netlist::{elaborate, Design, FlatModel, GateKind, Instance, IpNetlist, Library, NetId, NetlistBuilder};

pub struct GenOpts {
    pub max_state_bits: usize,
    pub max_gates: usize,
    pub with_reset: bool,
}

/// Random sequential module `m` with inputs `i` (and maybe `rst`),
/// registers `r0..`, and one output `o`.
pub fn random_module(rng: &mut ChaCha8Rng, o: &GenOpts) -> IpNetlist {
    let mut b = NetlistBuilder::new("m");
    let mut pool: Vec<NetId> = Vec::new();
    let rst = if o.with_reset && rng.gen_bool(0.5) {
        Some(b.input("rst", 1).unwrap()[0])
    } else {
        None
    };
    let iw = rng.gen_range(1..=3);
    pool.extend(b.input("i", iw).unwrap());
    let mut regs = Vec::new();
    let mut bits = 0;
    while bits < o.max_state_bits {
        let w = rng.gen_range(1..=3).min(o.max_state_bits - bits);
        let init = rng.gen_bool(0.6).then(|| rng.gen_range(0..1u64 << w));
        let name = format!("r{}", regs.len());
        let q = b.reg(&name, w, init, false).unwrap();
        pool.extend(q.iter().copied());
        regs.push(q);
        bits += w;
        if rng.gen_bool(0.25) {
            break;
        }
    }
    let ng = rng.gen_range(3..=o.max_gates.max(3));
    let wires = b.wire("w", ng).unwrap();
    for &w in &wires {
        let pick = |rng: &mut ChaCha8Rng, pool: &Vec<NetId>| *pool.choose(rng).unwrap();
        match rng.gen_range(0..12) {
            0 => b.constant(w, rng.gen_bool(0.5)),
            1 | 2 => {
                let a = pick(rng, &pool);
                b.gate(GateKind::Not, w, &[a]);
            }
            3 | 4 => {
                let ins = [pick(rng, &pool), pick(rng, &pool), pick(rng, &pool)];
                b.gate(GateKind::Mux, w, &ins);
            }
            k => {
                let g = [GateKind::And, GateKind::Or, GateKind::Xor][k % 3];
                let ins = [pick(rng, &pool), pick(rng, &pool)];
                b.gate(g, w, &ins);
            }
        }
        pool.push(w);
    }
    // favour recent gates as flip-flop data
    let late = &wires[wires.len() / 2..];
    for q in &regs {
        for &qb in q {
            let d = if rng.gen_bool(0.7) { *late.choose(rng).unwrap() } else { *pool.choose(rng).unwrap() };
            let en = rng.gen_bool(0.3).then(|| *pool.choose(rng).unwrap());
            let rs = rst.filter(|_| rng.gen_bool(0.6)).map(|r| (r, rng.gen_bool(0.5)));
            b.dff_bit(qb, d, en, rs).unwrap();
        }
    }
    let out = b.output("o", 1).unwrap()[0];
    let last = *wires.last().unwrap();
    b.gate(GateKind::And, out, &[last, last]);
    b.finish().unwrap()
}

pub fn flatten_single(m: IpNetlist) -> FlatModel {
    let d = Design {
        name: "t".into(),
        instances: vec![Instance {
            name: "u".into(),
            module: m.name.clone(),
        }],
        ..Default::default()
    };
    let lib: Library = [(m.name.clone(), m)].into_iter().collect();
    elaborate(&d, &lib).unwrap()
}

/// Independent three-valued evaluator: `None` is X.
pub struct RefEval {
    order: Vec<usize>,
}

pub type V = Option<bool>;

impl RefEval {
    pub fn new(m: &FlatModel) -> RefEval {
        // DFS topological order over combinational nodes
        let mut drv = vec![usize::MAX; m.nets.len()];
        for (i, n) in m.nodes.iter().enumerate() {
            drv[n.output.index()] = i;
        }
        let mut state = vec![0u8; m.nodes.len()];
        let mut order = Vec::new();
        for root in 0..m.nodes.len() {
            if m.nodes[root].is_dff() || state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some((i, k)) = stack.pop() {
                let n = &m.nodes[i];
                if k < n.inputs.len() {
                    stack.push((i, k + 1));
                    let d = drv[n.inputs[k].index()];
                    if d != usize::MAX && !m.nodes[d].is_dff() && state[d] == 0 {
                        state[d] = 1;
                        stack.push((d, 0));
                    }
                } else {
                    state[i] = 2;
                    order.push(i);
                }
            }
        }
        RefEval { order }
    }

    pub fn eval(&self, m: &FlatModel, vals: &mut [V]) {
        use sfv_core::netlist::NodeKind;
        for &i in &self.order {
            let n = &m.nodes[i];
            let x = |k: usize| vals[n.inputs[k].index()];
            let v = match n.kind {
                NodeKind::Const(c) => Some(c),
                NodeKind::Gate(GateKind::Not) => x(0).map(|a| !a),
                NodeKind::Gate(GateKind::And) => match (x(0), x(1)) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                },
                NodeKind::Gate(GateKind::Or) => match (x(0), x(1)) {
                    (Some(true), _) | (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                },
                NodeKind::Gate(GateKind::Xor) => match (x(0), x(1)) {
                    (Some(a), Some(b)) => Some(a ^ b),
                    _ => None,
                },
                NodeKind::Gate(GateKind::Mux) => match x(0) {
                    Some(false) => x(1),
                    Some(true) => x(2),
                    None if x(1) == x(2) && x(1).is_some() => x(1),
                    None => None,
                },
                NodeKind::Dff(_) => continue,
            };
            vals[n.output.index()] = v;
        }
    }

    /// Next value of every DFF (in `m.dffs` order).
    pub fn next_state(&self, m: &FlatModel, vals: &[V]) -> Vec<V> {
        use sfv_core::netlist::NodeKind;
        m.dffs
            .iter()
            .map(|&i| {
                let n = &m.nodes[i];
                let NodeKind::Dff(c) = n.kind else { unreachable!() };
                let mux = |s: V, a: V, b: V| match s {
                    Some(false) => a,
                    Some(true) => b,
                    None if a == b && a.is_some() => a,
                    None => None,
                };
                let q = vals[n.output.index()];
                let d = vals[n.inputs[0].index()];
                let held = c.enable.map_or(d, |e| mux(vals[e.index()], q, d));
                c.reset.map_or(held, |(r, rv)| mux(vals[r.index()], held, Some(rv)))
            })
            .collect()
    }
}
pub mod oracles;

pub mod corpus {
    use std::path::PathBuf;

    use sfv_core::flow::{FlowConfig, FlowMode, InputPaths};

    pub fn dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
    }

    pub fn paths() -> InputPaths {
        let d = dir();
        InputPaths {
            design: d.join("gateway.dsn"),
            esw: Some(d.join("boot.esw")),
            props: Some(d.join("user.prop")),
            ..Default::default()
        }
    }

    /// The shipped budgets: 5 s per IP, 8 s per subsystem, seed 1.
    pub fn config(mode: FlowMode) -> FlowConfig {
        FlowConfig {
            ip_limit: 5.0,
            sub_limit: 8.0,
            seed: 1,
            mode,
            ..FlowConfig::default()
        }
    }
}
