// SPDX-License-Identifier: Apache-2.0

//! Lazy time-frame expansion of a two-valued [`FlatModel`] into an
//! incremental solver. Only the cone of influence of requested nets is
//! encoded; constants are folded and AND/XOR/MUX nodes are hashed.

use std::collections::HashMap;

use sfv_sat::{Cnf, Lit, Solver};

use crate::frontend::BitAlg;
use crate::logic::Tri;
use crate::netlist::{Driver, FlatModel, GateKind, NetId, NodeKind};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    And(Lit, Lit),
    Xor(Lit, Lit),
    Mux(Lit, Lit, Lit),
}

pub struct Unroller<'m> {
    m: &'m FlatModel,
    pub solver: Solver,
    frames: Vec<Vec<Option<Lit>>>,
    tru: Lit,
    /// Nets replaced by a fresh variable in every frame.
    cut: Vec<bool>,
    /// Nets of reset inputs.
    reset: Vec<bool>,
    reset_cycles: usize,
    hash: HashMap<Key, Lit>,
    record: Option<Cnf>,
}

impl<'m> Unroller<'m> {
    pub fn new(m: &'m FlatModel, seed: u64, reset_cycles: usize, record: bool) -> Unroller<'m> {
        let mut reset = vec![false; m.nets.len()];
        for p in m.reset_inputs() {
            for b in &p.bits {
                reset[b.index()] = true;
            }
        }
        let mut u = Unroller {
            m,
            solver: Solver::new(seed),
            frames: Vec::new(),
            tru: Lit::from_dimacs(1),
            cut: vec![false; m.nets.len()],
            reset,
            reset_cycles,
            hash: HashMap::new(),
            record: record.then(Cnf::default),
        };
        u.tru = u.fresh();
        u.clause(&[u.tru]);
        u
    }

    pub fn model(&self) -> &'m FlatModel {
        self.m
    }

    pub fn set_cut(&mut self, n: NetId) {
        self.cut[n.index()] = true;
    }

    pub fn is_cut(&self, n: NetId) -> bool {
        self.cut[n.index()]
    }

    pub fn has_reset(&self) -> bool {
        self.reset.iter().any(|&r| r)
    }

    pub fn constant(&self, v: bool) -> Lit {
        if v {
            self.tru
        } else {
            !self.tru
        }
    }

    /// The constant value of `l`, if folding decided it.
    pub fn const_value(&self, l: Lit) -> Option<bool> {
        if l == self.tru {
            Some(true)
        } else if l == !self.tru {
            Some(false)
        } else {
            None
        }
    }

    pub fn recorded(&self) -> Option<&Cnf> {
        self.record.as_ref()
    }

    pub fn fresh(&mut self) -> Lit {
        self.solver.new_var().pos()
    }

    pub fn clause(&mut self, c: &[Lit]) {
        if let Some(r) = self.record.as_mut() {
            let d: Vec<i32> = c.iter().map(|l| l.to_dimacs()).collect();
            r.add_clause(&d);
        }
        self.solver.add_clause(c);
    }

    /// Already-encoded literal of `n` at frame `t`.
    pub fn encoded(&self, t: usize, n: NetId) -> Option<Lit> {
        self.frames.get(t).and_then(|f| f[n.index()])
    }

    fn set(&mut self, t: usize, n: NetId, l: Lit) {
        while self.frames.len() <= t {
            self.frames.push(vec![None; self.m.nets.len()]);
        }
        self.frames[t][n.index()] = Some(l);
    }

    fn deps(&self, t: usize, n: NetId, out: &mut Vec<(usize, NetId)>) {
        if self.cut[n.index()] {
            return;
        }
        let Driver::Node(i) = self.m.driver[n.index()] else { return };
        let node = &self.m.nodes[i];
        match node.kind {
            NodeKind::Gate(_) => out.extend(node.inputs.iter().map(|&x| (t, x))),
            NodeKind::Const(_) => {}
            NodeKind::Dff(c) => {
                if t > 0 {
                    out.push((t - 1, node.inputs[0]));
                    if let Some(e) = c.enable {
                        out.push((t - 1, e));
                        out.push((t - 1, n));
                    }
                    out.extend(c.reset.map(|(r, _)| (t - 1, r)));
                }
            }
        }
    }

    /// Literal for net `n` at frame `t`, encoding its cone on demand.
    pub fn lit(&mut self, t: usize, n: NetId) -> Lit {
        if let Some(l) = self.encoded(t, n) {
            return l;
        }
        let mut stack = vec![(t, n)];
        let mut deps = Vec::new();
        while let Some(&(t, n)) = stack.last() {
            if self.encoded(t, n).is_some() {
                stack.pop();
                continue;
            }
            deps.clear();
            self.deps(t, n, &mut deps);
            let before = stack.len();
            stack.extend(deps.iter().filter(|&&(dt, dn)| self.encoded(dt, dn).is_none()));
            if stack.len() == before {
                let l = self.encode(t, n);
                self.set(t, n, l);
                stack.pop();
            }
        }
        self.encoded(t, n).unwrap()
    }

    fn encode(&mut self, t: usize, n: NetId) -> Lit {
        if self.cut[n.index()] {
            return self.fresh();
        }
        let node = match self.m.driver[n.index()] {
            Driver::Input(_) if self.reset[n.index()] => return self.constant(t < self.reset_cycles),
            Driver::Input(_) | Driver::None => return self.fresh(),
            Driver::Node(i) => &self.m.nodes[i],
        };
        let get = |u: &Self, t: usize, x: NetId| u.encoded(t, x).expect("dependency encoded first");
        match node.kind {
            NodeKind::Const(b) => self.constant(b),
            NodeKind::Gate(g) => {
                let a = get(self, t, node.inputs[0]);
                match g {
                    GateKind::Not => !a,
                    GateKind::And => {
                        let b = get(self, t, node.inputs[1]);
                        self.and(a, b)
                    }
                    GateKind::Or => {
                        let b = get(self, t, node.inputs[1]);
                        self.or(a, b)
                    }
                    GateKind::Xor => {
                        let b = get(self, t, node.inputs[1]);
                        self.xor(a, b)
                    }
                    GateKind::Mux => {
                        let x = get(self, t, node.inputs[1]);
                        let y = get(self, t, node.inputs[2]);
                        self.mux(a, x, y)
                    }
                }
            }
            NodeKind::Dff(c) => {
                if t == 0 {
                    return match c.init {
                        Tri::X => self.fresh(),
                        v => self.constant(v == Tri::One),
                    };
                }
                let d = get(self, t - 1, node.inputs[0]);
                let mut next = match c.enable {
                    Some(e) => {
                        let q = get(self, t - 1, n);
                        let e = get(self, t - 1, e);
                        self.mux(e, q, d)
                    }
                    None => d,
                };
                if let Some((r, rv)) = c.reset {
                    let r = get(self, t - 1, r);
                    let k = self.constant(rv);
                    next = self.mux(r, next, k);
                }
                next
            }
        }
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let f = !self.tru;
        if a == f || b == f || a == !b {
            return f;
        }
        if a == self.tru || a == b {
            return b;
        }
        if b == self.tru {
            return a;
        }
        let key = Key::And(a.min(b), a.max(b));
        if let Some(&o) = self.hash.get(&key) {
            return o;
        }
        let o = self.fresh();
        self.clause(&[!o, a]);
        self.clause(&[!o, b]);
        self.clause(&[o, !a, !b]);
        self.hash.insert(key, o);
        o
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        if let Some(v) = self.const_value(a) {
            return if v { !b } else { b };
        }
        if let Some(v) = self.const_value(b) {
            return if v { !a } else { a };
        }
        if a == b {
            return !self.tru;
        }
        if a == !b {
            return self.tru;
        }
        // normalise polarity so that xor(a,b), xor(!a,b) share a node
        let flip = a.is_neg() != b.is_neg();
        let (x, y) = (if a.is_neg() { !a } else { a }, if b.is_neg() { !b } else { b });
        let key = Key::Xor(x.min(y), x.max(y));
        let o = match self.hash.get(&key) {
            Some(&o) => o,
            None => {
                let o = self.fresh();
                self.clause(&[!o, x, y]);
                self.clause(&[!o, !x, !y]);
                self.clause(&[o, !x, y]);
                self.clause(&[o, x, !y]);
                self.hash.insert(key, o);
                o
            }
        };
        if flip {
            !o
        } else {
            o
        }
    }

    /// `s ? b : a`
    pub fn mux(&mut self, s: Lit, a: Lit, b: Lit) -> Lit {
        if let Some(v) = self.const_value(s) {
            return if v { b } else { a };
        }
        if a == b {
            return a;
        }
        if let Some(v) = self.const_value(a) {
            // s ? b : 0  /  s ? b : 1
            return if v { self.or(!s, b) } else { self.and(s, b) };
        }
        if let Some(v) = self.const_value(b) {
            return if v { self.or(s, a) } else { self.and(!s, a) };
        }
        let key = Key::Mux(s, a, b);
        if let Some(&o) = self.hash.get(&key) {
            return o;
        }
        let o = self.fresh();
        self.clause(&[!s, !b, o]);
        self.clause(&[!s, b, !o]);
        self.clause(&[s, !a, o]);
        self.clause(&[s, a, !o]);
        self.clause(&[!a, !b, o]);
        self.clause(&[a, b, !o]);
        self.hash.insert(key, o);
        o
    }
}

/// Boolean algebra over solver literals, for lowering property expressions.
pub struct LitAlg<'u, 'm>(pub &'u mut Unroller<'m>);

impl BitAlg for LitAlg<'_, '_> {
    type B = Lit;
    fn lit(&mut self, v: bool) -> Lit {
        self.0.constant(v)
    }
    fn not(&mut self, a: &Lit) -> Lit {
        !*a
    }
    fn and(&mut self, a: &Lit, b: &Lit) -> Lit {
        self.0.and(*a, *b)
    }
    fn or(&mut self, a: &Lit, b: &Lit) -> Lit {
        self.0.or(*a, *b)
    }
    fn xor(&mut self, a: &Lit, b: &Lit) -> Lit {
        self.0.xor(*a, *b)
    }
}
