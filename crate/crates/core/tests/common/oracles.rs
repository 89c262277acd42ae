// SPDX-License-Identifier: Apache-2.0

//! Reference checks shared by the oracle tests and the acceptance run.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfv_core::bmc::{check, replay, xprop_encode, BmcConfig, BudgetSpec, Constraint, PropertyOutcome};
use sfv_core::frontend::{parse_expr, PropKind, PropertyAst};
use sfv_core::logic::Tri;
use sfv_core::netlist::{elaborate, Design, Driver, FlatModel, GateKind, Instance, Library, NetId, NetlistBuilder, NodeKind};
use sfv_core::sim::Simulator;
use sfv_core::sra::cor;

use super::{flatten_single, random_module, GenOpts, RefEval, V};

const R: usize = 1;
const SETTLE: usize = 4;

pub enum Prop {
    /// `reg != c`
    Ne(String, u64),
    /// `known(reg)`
    Known(String),
}

pub struct Cut {
    pub reg: String,
    pub pinned: Option<u64>,
}

pub fn cfg(bound: usize) -> BmcConfig {
    BmcConfig {
        bound,
        reset_cycles: R,
        settle: SETTLE,
        seed: 7,
        parallel: false,
        budget: BudgetSpec::Effort(1 << 50),
        dump_cnf: None,
    }
}

/// Earliest failing cycle within `bound`, by enumerating all reachable
/// states (three-valued for `known`, every concretization otherwise).
pub fn oracle(m: &FlatModel, prop: &Prop, cut: Option<&Cut>, bound: usize) -> Option<usize> {
    let ev = RefEval::new(m);
    let three = matches!(prop, Prop::Known(_));
    let has_reset = m.reset_inputs().next().is_some();
    let first = if three { R + SETTLE } else if has_reset { R } else { 0 };
    let dff_q: Vec<_> = m.dffs.iter().map(|&i| m.nodes[i].output).collect();
    let cut_bits: Vec<(usize, Option<bool>)> = cut
        .map(|c| {
            let reg = m.register(&c.reg).unwrap();
            reg.bits
                .iter()
                .enumerate()
                .map(|(k, b)| (dff_q.iter().position(|q| q == b).unwrap(), c.pinned.map(|v| v >> k & 1 == 1)))
                .collect()
        })
        .unwrap_or_default();
    let choices = |known: Option<bool>| -> Vec<V> {
        match known {
            Some(v) => vec![Some(v)],
            None if three => vec![Some(false), Some(true), None],
            None => vec![Some(false), Some(true)],
        }
    };
    let expand = |states: Vec<Vec<V>>, slots: &[(usize, Option<bool>)]| -> HashSet<Vec<V>> {
        let mut cur: HashSet<Vec<V>> = states.into_iter().collect();
        for &(k, pin) in slots {
            let mut nxt = HashSet::new();
            for s in &cur {
                for v in choices(pin) {
                    let mut s2 = s.clone();
                    s2[k] = v;
                    nxt.insert(s2);
                }
            }
            cur = nxt;
        }
        cur
    };
    let init: Vec<V> = m
        .dffs
        .iter()
        .map(|&i| match m.nodes[i].kind {
            NodeKind::Dff(c) => match c.init {
                Tri::X => None,
                t => Some(t == Tri::One),
            },
            _ => unreachable!(),
        })
        .collect();
    let xslots: Vec<(usize, Option<bool>)> = if three {
        vec![]
    } else {
        init.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(k, _)| (k, None)).collect()
    };
    let mut states = expand(vec![init], &xslots);
    let ibits: Vec<_> = m.inputs.iter().flat_map(|p| p.bits.iter().copied()).collect();
    let is_rst: Vec<bool> = m
        .inputs
        .iter()
        .flat_map(|p| std::iter::repeat_n(FlatModel::is_reset_input(&p.name), p.bits.len()))
        .collect();
    let free: Vec<usize> = (0..ibits.len()).filter(|&k| !is_rst[k]).collect();
    for t in 0..bound {
        states = expand(states.into_iter().collect(), &cut_bits);
        let mut next = HashSet::new();
        for s in &states {
            for combo in 0..1u64 << free.len() {
                let mut vals: Vec<V> = vec![None; m.nets.len()];
                for (k, q) in dff_q.iter().enumerate() {
                    vals[q.index()] = s[k];
                }
                for (k, b) in ibits.iter().enumerate() {
                    vals[b.index()] = Some(if is_rst[k] {
                        t < R
                    } else {
                        combo >> free.iter().position(|&f| f == k).unwrap() & 1 == 1
                    });
                }
                ev.eval(m, &mut vals);
                if t >= first {
                    let bad = match prop {
                        Prop::Ne(r, c) => {
                            let bits = &m.register(r).unwrap().bits;
                            bits.iter().enumerate().all(|(k, b)| vals[b.index()] == Some(c >> k & 1 == 1))
                        }
                        Prop::Known(r) => m.register(r).unwrap().bits.iter().any(|b| vals[b.index()].is_none()),
                    };
                    if bad {
                        return Some(t);
                    }
                }
                next.insert(ev.next_state(m, &vals));
            }
        }
        states = next;
    }
    None
}

/// Outcome of one random case: a verdict tag, or what went wrong.
pub struct CaseResult {
    pub tag: &'static str,
    /// Counterexamples produced, and how many replayed.
    pub traces: usize,
    pub replayed: usize,
}

/// Random model and property for `seed`.
pub fn random_case(seed: u64) -> (ChaCha8Rng, FlatModel, usize, Prop, PropertyAst) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_state_bits = rng.gen_range(2..=14);
    let module = random_module(
        &mut rng,
        &GenOpts {
            max_state_bits,
            max_gates: 30,
            with_reset: true,
        },
    );
    let m = flatten_single(module);
    let bound = rng.gen_range(2..=10);
    let regs: Vec<String> = m.registers.iter().map(|r| r.name.clone()).collect();
    let reg = regs[rng.gen_range(0..regs.len())].clone();
    let width = m.register(&reg).unwrap().bits.len();
    let (prop, ast) = if rng.gen_bool(0.5) {
        let c = rng.gen_range(0..1u64 << width);
        let e = parse_expr(&format!("{reg} != {c}"), 1, 1).unwrap();
        (Prop::Ne(reg.clone(), c), PropertyAst::new("p", PropKind::User, e))
    } else {
        let e = parse_expr(&format!("known({reg})"), 1, 1).unwrap();
        (Prop::Known(reg.clone()), PropertyAst::new("p", PropKind::Xprop, e))
    };
    (rng, m, bound, prop, ast)
}

pub fn run_case(seed: u64, with_cut: bool) -> Result<CaseResult, String> {
    let (mut rng, m, bound, prop, ast) = random_case(seed);
    let regs: Vec<String> = m.registers.iter().map(|r| r.name.clone()).collect();
    let cut = with_cut.then(|| {
        let r = regs[rng.gen_range(0..regs.len())].clone();
        let w = m.register(&r).unwrap().bits.len();
        Cut {
            pinned: rng.gen_bool(0.5).then(|| rng.gen_range(0..1u64 << w)),
            reg: r,
        }
    });
    let mut cons = Vec::new();
    if let Some(c) = &cut {
        cons.push(Constraint::Stopat(c.reg.clone()));
        if let Some(v) = c.pinned {
            cons.push(Constraint::Assume {
                register: c.reg.clone(),
                value: v,
            });
        }
    }
    let expect = oracle(&m, &prop, cut.as_ref(), bound);
    let st = check(&m, std::slice::from_ref(&ast), &cons, &cfg(bound)).map_err(|e| e.to_string())?;
    let mut res = CaseResult {
        tag: "",
        traces: 0,
        replayed: 0,
    };
    let out = &st.results[0].outcome;
    let first = match prop {
        Prop::Known(_) => R + SETTLE,
        _ => 0,
    };
    match (expect, out) {
        (Some(t), PropertyOutcome::Fail(tr)) => {
            res.traces += 1;
            let r = replay(&st.model, tr, &ast);
            if !r.violated {
                return Err(format!("seed {seed}: replay does not reproduce {:?}", r.values));
            }
            res.replayed += 1;
            if tr.len() != t + 1 {
                return Err(format!("seed {seed}: trace of {} cycles, oracle fails at cycle {t}", tr.len()));
            }
        }
        (None, PropertyOutcome::Pass(k)) => {
            if *k != bound {
                return Err(format!("seed {seed}: passed {k} frames of {bound}"));
            }
        }
        (None, PropertyOutcome::Undetermined(_)) if first >= bound => {}
        (e, o) => return Err(format!("seed {seed}: oracle {e:?}, bmc {}", o.label())),
    }
    let kind = if matches!(prop, Prop::Known(_)) { "x" } else { "u" };
    res.tag = match (kind, out.label()) {
        ("x", "FAIL") => "xfail",
        ("x", _) => "xother",
        (_, "FAIL") => "ufail",
        _ => "uother",
    };
    Ok(res)
}

/// Stopping any single register never turns a failing property into a
/// passing one: a stopat-only PASS implies an unconstrained PASS. Returns
/// the number of stopat PASS verdicts checked.
pub fn stopat_soundness(seed: u64) -> Result<usize, String> {
    let (_, m, bound, _, ast) = random_case(seed);
    let free = check(&m, std::slice::from_ref(&ast), &[], &cfg(bound)).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for r in &m.registers {
        let cons = [Constraint::Stopat(r.name.clone())];
        let st = check(&m, std::slice::from_ref(&ast), &cons, &cfg(bound)).map_err(|e| e.to_string())?;
        if let PropertyOutcome::Pass(_) = st.results[0].outcome {
            checked += 1;
            if free.results[0].outcome != PropertyOutcome::Pass(bound) {
                return Err(format!(
                    "seed {seed}: stopat {} passes, unconstrained {}",
                    r.name,
                    free.results[0].outcome.label()
                ));
            }
        }
    }
    Ok(checked)
}

/// Every kind of verdict must actually occur in the sample.
pub fn mixed(tags: &[&str]) -> Result<(), String> {
    for k in ["xfail", "xother", "ufail", "uother"] {
        if !tags.contains(&k) {
            return Err(format!("no {k} case in {tags:?}"));
        }
    }
    Ok(())
}


pub fn flat(lib: Library, module: &str) -> FlatModel {
    let d = Design {
        name: "t".into(),
        instances: vec![Instance {
            name: "u".into(),
            module: module.into(),
        }],
        ..Default::default()
    };
    elaborate(&d, &lib).unwrap()
}

/// reg1 -> g1 -> A ; A -> g2 .. g8 -> out1        (1 path, 9 elements)
/// reg2 -> 3 disjoint chains of 4, 4, 5 gates     (3 paths, 13 elements)
pub const TWO_REGS: &str = "\
.module two_regs
.input i 2
.output out1 1
.output y 3
.reg reg1 1 init=0
.reg reg2 1 init=0
.reg A 1 init=0
.wire c 7
.wire g1 1
.wire p 4
.wire q 4
.wire r 5
.gate NOT g1 reg1
.dff A g1
.gate NOT c[0] A
.gate NOT c[1] c[0]
.gate NOT c[2] c[1]
.gate NOT c[3] c[2]
.gate NOT c[4] c[3]
.gate NOT c[5] c[4]
.gate NOT out1 c[5]
.gate NOT p[0] reg2
.gate NOT p[1] p[0]
.gate NOT p[2] p[1]
.gate NOT y[0] p[2]
.gate NOT q[0] reg2
.gate NOT q[1] q[0]
.gate NOT q[2] q[1]
.gate NOT y[1] q[2]
.gate NOT r[0] reg2
.gate NOT r[1] r[0]
.gate NOT r[2] r[1]
.gate NOT r[3] r[2]
.gate NOT y[2] r[3]
.dff reg1 i[0]
.dff reg2 i[1]
.endmodule
";

/// Random single-layer DAG hanging off register `r`; some nodes drive
/// outputs, some drive flip-flops of register `s`.
pub fn random_dag(rng: &mut ChaCha8Rng) -> FlatModel {
    let mut b = NetlistBuilder::new("dag");
    let rw = rng.gen_range(1..=2);
    let i = b.input("i", 2).unwrap();
    let r = b.reg("r", rw, Some(0), true).unwrap();
    let nout = rng.gen_range(1..=3);
    let sw = rng.gen_range(1..=3);
    // at most 50 nodes in all: register bits, gates, output buffers
    let nodes = rng.gen_range(1..=50 - rw - nout - sw);
    let w = b.wire("w", nodes).unwrap();
    let mut pool: Vec<NetId> = r.clone();
    pool.extend(&i);
    for &o in &w {
        let pick = |rng: &mut ChaCha8Rng| *pool.choose(rng).unwrap();
        match rng.gen_range(0..4) {
            0 => {
                let a = pick(rng);
                b.gate(GateKind::Not, o, &[a]);
            }
            1 => {
                let ins = [pick(rng), pick(rng), pick(rng)];
                b.gate(GateKind::Mux, o, &ins);
            }
            k => {
                let ins = [pick(rng), pick(rng)];
                b.gate([GateKind::And, GateKind::Xor][k - 2], o, &ins);
            }
        }
        pool.push(o);
    }
    let outs = b.output("o", nout).unwrap();
    for &o in &outs {
        let a = *w.choose(rng).unwrap();
        b.gate(GateKind::Not, o, &[a]);
    }
    let s = b.reg("s", sw, Some(0), true).unwrap();
    for &q in &s {
        let d = *pool.choose(rng).unwrap();
        let en = rng.gen_bool(0.3).then(|| *pool.choose(rng).unwrap());
        b.dff_bit(q, d, en, None).unwrap();
    }
    for &q in &r {
        b.dff_bit(q, i[0], None, None).unwrap();
    }
    let m = b.finish().unwrap();
    flat([(m.name.clone(), m)].into_iter().collect(), "dag")
}

/// Every walk from a bit of `reg` along combinational fan-out edges (one
/// edge per input slot) that ends at an output or a foreign flip-flop pin.
pub fn brute_paths(m: &FlatModel, reg: &str) -> u128 {
    let bits = &m.register(reg).unwrap().bits;
    let own: BTreeSet<usize> = bits
        .iter()
        .filter_map(|b| match m.driver[b.index()] {
            Driver::Node(i) => Some(i),
            _ => None,
        })
        .collect();
    let outs = m.output_mask();
    fn walk(m: &FlatModel, net: NetId, own: &BTreeSet<usize>, outs: &[bool]) -> u128 {
        let mut n = outs[net.index()] as u128;
        for (i, node) in m.nodes.iter().enumerate() {
            let slots = node.fanin().filter(|f| *f == net).count() as u128;
            if slots == 0 {
                continue;
            }
            if node.is_dff() {
                if !own.contains(&i) {
                    n += slots;
                }
            } else {
                n += slots * walk(m, node.output, own, outs);
            }
        }
        n
    }
    bits.iter().map(|&b| walk(m, b, &own, &outs)).sum()
}

pub fn brute_elements(m: &FlatModel, reg: &str) -> usize {
    let bits = &m.register(reg).unwrap().bits;
    let mut seen = BTreeSet::new();
    let mut frontier: Vec<NetId> = bits.clone();
    let own: BTreeSet<NetId> = bits.iter().copied().collect();
    while let Some(net) = frontier.pop() {
        for (i, node) in m.nodes.iter().enumerate() {
            if node.fanin().any(|f| f == net) && !own.contains(&node.output) && seen.insert(i) {
                frontier.push(node.output);
            }
        }
    }
    seen.len()
}

/// DP path and element counts against enumeration on one random DAG.
pub fn dag_case(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_dag(&mut rng);
    if m.nodes.len() > 50 {
        return Err(format!("seed {seed}: {} nodes", m.nodes.len()));
    }
    for reg in ["u.r", "u.s"] {
        let c = cor(&m, reg).map_err(|e| e.to_string())?;
        let (p, e) = (brute_paths(&m, reg), brute_elements(&m, reg));
        if c.paths != p || c.elements as usize != e || c.score != 100 * c.paths + c.elements {
            return Err(format!(
                "seed {seed} {reg}: dp {}/{} vs enumeration {p}/{e}",
                c.paths, c.elements
            ));
        }
    }
    Ok(())
}

fn to_v(t: Tri) -> V {
    match t {
        Tri::Zero => Some(false),
        Tri::One => Some(true),
        Tri::X => None,
    }
}

/// Steps `m` for `cycles` random input vectors (reset asserted in the
/// first) and compares three-valued simulation, the independent evaluator
/// and the dual-rail model net for net.
pub fn dual_rail_agrees(m: &FlatModel, rng: &mut ChaCha8Rng, cycles: usize, seed: u64) -> Result<(), String> {
    let dr = xprop_encode(m);
    let sim = Simulator::new(m);
    let dsim = Simulator::new(&dr.model);
    let ev = RefEval::new(m);
    let mut st = sim.initial_state();
    // X power-on values get an arbitrary value on the value rail
    let mut ds = dsim.initial_state_with(|_, init| match init {
        Tri::X => Tri::from_bool(rng.gen_bool(0.5)),
        t => t,
    });
    let mut refv: Vec<V> = st.values.iter().map(|&t| to_v(t)).collect();
    for cycle in 0..cycles {
        let ins: Vec<Tri> = sim
            .input_bits()
            .iter()
            .map(|_| if cycle < 1 { Tri::One } else { Tri::from_bool(rng.gen_bool(0.5)) })
            .collect();
        sim.eval(&mut st, &ins);
        dsim.eval(&mut ds, &ins);
        for (k, b) in sim.input_bits().iter().enumerate() {
            refv[b.index()] = to_v(ins[k]);
        }
        ev.eval(m, &mut refv);
        #[allow(clippy::needless_range_loop)]
        for n in 0..m.nets.len() {
            let t = st.values[n];
            if to_v(t) != refv[n] {
                return Err(format!("seed {seed} cycle {cycle}: simulator and evaluator differ on {}", m.nets[n]));
            }
            let k = ds.values[dr.known[n].index()];
            let v = ds.values[dr.value[n].index()];
            if k != Tri::from_bool(t.is_known()) || (t.is_known() && v != t) {
                return Err(format!("seed {seed} cycle {cycle}: dual rail of {} differs", m.nets[n]));
            }
        }
        let next = ev.next_state(m, &refv);
        for (k, &i) in m.dffs.iter().enumerate() {
            refv[m.nodes[i].output.index()] = next[k];
        }
        sim.clock(&mut st);
        dsim.clock(&mut ds);
    }
    Ok(())
}
