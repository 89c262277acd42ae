// SPDX-License-Identifier: Apache-2.0

//! Fanout cones of registers.
//!
//! The cone of register `r` is every node reachable from `r`'s outputs,
//! crossing flip-flops of other registers. Path counting only looks at the
//! first combinational layer: a path starts at a bit of `r` and ends at a
//! primary output or at a flip-flop input (data, enable or reset) of some
//! other register. `r`'s own flip-flops are never part of its cone.

use std::collections::BTreeSet;

use super::{FlatModel, NetlistError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub register: String,
    /// All reached node indices.
    pub elements: BTreeSet<usize>,
    /// Combinational nodes of the first layer, in evaluation order.
    pub layer: Vec<usize>,
    /// Distinct paths through the first layer.
    pub paths: u128,
    /// Sum over paths of the nodes on each path, plus the unique nodes
    /// beyond the first layer (the multiplicity reading of "elements").
    pub path_elements: u128,
}

/// Reusable per-model tables for cone queries.
pub struct ConeIndex<'a> {
    model: &'a FlatModel,
    fanout: Vec<Vec<usize>>,
    is_output: Vec<bool>,
    topo_pos: Vec<usize>,
}

impl<'a> ConeIndex<'a> {
    pub fn new(model: &'a FlatModel) -> ConeIndex<'a> {
        let mut topo_pos = vec![usize::MAX; model.nodes.len()];
        for (i, &n) in model.topo.iter().enumerate() {
            topo_pos[n] = i;
        }
        ConeIndex {
            model,
            fanout: model.fanout(),
            is_output: model.output_mask(),
            topo_pos,
        }
    }

    pub fn model(&self) -> &'a FlatModel {
        self.model
    }

    pub fn cone(&self, register: &str) -> Result<Cone, NetlistError> {
        let m = self.model;
        let reg = m
            .register(register)
            .ok_or_else(|| NetlistError::UnknownRegister(register.to_string()))?;
        let own: BTreeSet<usize> = reg
            .bits
            .iter()
            .filter_map(|b| match m.driver[b.index()] {
                super::Driver::Node(i) => Some(i),
                _ => None,
            })
            .collect();

        // first layer: combinational nodes reachable without crossing a DFF
        let mut in_layer = vec![false; m.nodes.len()];
        let mut stack: Vec<usize> = reg.bits.iter().map(|b| b.index()).collect();
        let mut seen_net = vec![false; m.nets.len()];
        for &n in &stack {
            seen_net[n] = true;
        }
        while let Some(net) = stack.pop() {
            for &node in &self.fanout[net] {
                if m.nodes[node].is_dff() || in_layer[node] {
                    continue;
                }
                in_layer[node] = true;
                let o = m.nodes[node].output.index();
                if !seen_net[o] {
                    seen_net[o] = true;
                    stack.push(o);
                }
            }
        }
        let mut layer: Vec<usize> = (0..m.nodes.len()).filter(|&i| in_layer[i]).collect();
        layer.sort_by_key(|&i| self.topo_pos[i]);

        // per-net (paths, summed path length) towards sinks, reverse topo
        let mut cnt = vec![0u128; m.nets.len()];
        let mut len = vec![0u128; m.nets.len()];
        let visit = |net: usize, cnt: &mut Vec<u128>, len: &mut Vec<u128>| {
            let mut c = self.is_output[net] as u128;
            let mut l = 0u128;
            for &node in &self.fanout[net] {
                let nd = &m.nodes[node];
                if nd.is_dff() {
                    if own.contains(&node) {
                        continue;
                    }
                    // one path per read port (data, enable, reset)
                    let k = nd.fanin().filter(|f| f.index() == net).count() as u128;
                    c = c.saturating_add(k);
                    l = l.saturating_add(k);
                } else {
                    let o = nd.output.index();
                    let k = nd.inputs.iter().filter(|f| f.index() == net).count() as u128;
                    c = c.saturating_add(cnt[o].saturating_mul(k));
                    l = l.saturating_add(len[o].saturating_add(cnt[o]).saturating_mul(k));
                }
            }
            cnt[net] = c;
            len[net] = l;
        };
        for &node in layer.iter().rev() {
            visit(m.nodes[node].output.index(), &mut cnt, &mut len);
        }
        let mut paths = 0u128;
        let mut path_elements = 0u128;
        for b in &reg.bits {
            visit(b.index(), &mut cnt, &mut len);
            paths = paths.saturating_add(cnt[b.index()]);
            path_elements = path_elements.saturating_add(len[b.index()]);
        }

        // full cone across DFF boundaries
        let mut elements = BTreeSet::new();
        let mut seen_net = vec![false; m.nets.len()];
        let mut stack: Vec<usize> = reg.bits.iter().map(|b| b.index()).collect();
        for &n in &stack {
            seen_net[n] = true;
        }
        while let Some(net) = stack.pop() {
            for &node in &self.fanout[net] {
                if own.contains(&node) || !elements.insert(node) {
                    continue;
                }
                let o = m.nodes[node].output.index();
                if !seen_net[o] {
                    seen_net[o] = true;
                    stack.push(o);
                }
            }
        }
        // beyond-first-layer nodes count once in the multiplicity reading
        let first_layer_dffs: BTreeSet<usize> = reg
            .bits
            .iter()
            .map(|b| b.index())
            .chain(layer.iter().map(|&n| m.nodes[n].output.index()))
            .flat_map(|net| self.fanout[net].iter().copied())
            .filter(|&n| m.nodes[n].is_dff() && !own.contains(&n))
            .collect();
        let beyond = elements
            .iter()
            .filter(|n| !in_layer[**n] && !first_layer_dffs.contains(n))
            .count() as u128;
        path_elements = path_elements.saturating_add(beyond);

        Ok(Cone {
            register: register.to_string(),
            elements,
            layer,
            paths,
            path_elements,
        })
    }
}

pub fn fanout_cone(model: &FlatModel, register: &str) -> Result<Cone, NetlistError> {
    ConeIndex::new(model).cone(register)
}
