// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Direction, IpNetlist, NetlistError};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PortRef {
    pub instance: String,
    pub port: String,
}

impl PortRef {
    pub fn new(instance: &str, port: &str) -> PortRef {
        PortRef {
            instance: instance.to_string(),
            port: port.to_string(),
        }
    }

    /// Parses `inst.port`.
    pub fn parse(s: &str) -> Option<PortRef> {
        let (i, p) = s.split_once('.')?;
        if i.is_empty() || p.is_empty() {
            return None;
        }
        Some(PortRef::new(i, p))
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.port)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    pub name: String,
    pub module: String,
}

/// A flat list of module instances plus their wiring. The bus table maps
/// addresses to software-visible registers (`inst.reg`).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Design {
    pub name: String,
    pub instances: Vec<Instance>,
    pub connections: Vec<(PortRef, PortRef)>,
    pub tops: Vec<(String, PortRef)>,
    pub bus: Vec<(u32, String)>,
}

pub type Library = BTreeMap<String, IpNetlist>;

impl Design {
    pub fn instance(&self, name: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.name == name)
    }

    /// Sub-design over the given instances. Connections to dropped
    /// instances become unbound ports.
    pub fn restrict(&self, keep: &[String]) -> Design {
        let keep: BTreeSet<&str> = keep.iter().map(String::as_str).collect();
        let kept = |p: &PortRef| keep.contains(p.instance.as_str());
        Design {
            name: self.name.clone(),
            instances: self
                .instances
                .iter()
                .filter(|i| keep.contains(i.name.as_str()))
                .cloned()
                .collect(),
            connections: self
                .connections
                .iter()
                .filter(|(a, b)| kept(a) && kept(b))
                .cloned()
                .collect(),
            tops: self.tops.iter().filter(|(_, p)| kept(p)).cloned().collect(),
            bus: self
                .bus
                .iter()
                .filter(|(_, r)| {
                    r.split_once('.')
                        .map(|(i, _)| keep.contains(i))
                        .unwrap_or(false)
                })
                .cloned()
                .collect(),
        }
    }

    /// Checks instance modules, port names, widths and directions.
    pub fn check(&self, library: &Library) -> Result<(), NetlistError> {
        let mut seen = BTreeSet::new();
        for inst in &self.instances {
            if !seen.insert(&inst.name) {
                return Err(NetlistError::Duplicate(inst.name.clone()));
            }
            if !library.contains_key(&inst.module) {
                return Err(NetlistError::UnknownModule(inst.module.clone()));
            }
        }
        for (a, b) in &self.connections {
            let pa = self.port(library, a)?;
            let pb = self.port(library, b)?;
            if pa.width() != pb.width() {
                return Err(NetlistError::WidthMismatch {
                    left: a.to_string(),
                    lw: pa.width(),
                    right: b.to_string(),
                    rw: pb.width(),
                });
            }
            if pa.dir == pb.dir {
                return Err(NetlistError::InvalidConnection(format!(
                    "{a} and {b} are both {}",
                    if pa.dir == Direction::In { "inputs" } else { "outputs" }
                )));
            }
        }
        let mut top_width: BTreeMap<&str, (usize, Direction)> = BTreeMap::new();
        for (name, p) in &self.tops {
            let port = self.port(library, p)?;
            if let Some(&(w, d)) = top_width.get(name.as_str()) {
                if w != port.width() {
                    return Err(NetlistError::WidthMismatch {
                        left: name.clone(),
                        lw: w,
                        right: p.to_string(),
                        rw: port.width(),
                    });
                }
                if d == Direction::Out || port.dir == Direction::Out {
                    return Err(NetlistError::InvalidConnection(format!(
                        "top-level output `{name}` bound more than once"
                    )));
                }
            }
            top_width.insert(name, (port.width(), port.dir));
        }
        let mut addrs = BTreeSet::new();
        let mut regs = BTreeSet::new();
        for (addr, reg) in &self.bus {
            if !addrs.insert(*addr) {
                return Err(NetlistError::Duplicate(format!("{addr:#x}")));
            }
            if !regs.insert(reg) {
                return Err(NetlistError::Duplicate(reg.clone()));
            }
            let (i, r) = reg
                .split_once('.')
                .ok_or_else(|| NetlistError::UnknownRegister(reg.clone()))?;
            let inst = self
                .instance(i)
                .ok_or_else(|| NetlistError::UnknownRegister(reg.clone()))?;
            match library[&inst.module].register(r) {
                Some(d) if d.software_visible && d.width() <= 32 => {}
                _ => return Err(NetlistError::UnknownRegister(reg.clone())),
            }
        }
        Ok(())
    }

    fn port<'a>(&self, library: &'a Library, p: &PortRef) -> Result<&'a super::Port, NetlistError> {
        let inst = self
            .instance(&p.instance)
            .ok_or_else(|| NetlistError::UnknownInstance(p.instance.clone()))?;
        let module = library
            .get(&inst.module)
            .ok_or_else(|| NetlistError::UnknownModule(inst.module.clone()))?;
        module
            .port(&p.port)
            .ok_or_else(|| NetlistError::UnknownPort(p.to_string()))
    }

    /// Connectivity score per instance: bit width of every port that is
    /// bound to another instance (each port counted once).
    pub fn connectivity(&self, library: &Library) -> BTreeMap<String, usize> {
        let mut bound: BTreeSet<&PortRef> = BTreeSet::new();
        for (a, b) in &self.connections {
            bound.insert(a);
            bound.insert(b);
        }
        let mut score: BTreeMap<String, usize> =
            self.instances.iter().map(|i| (i.name.clone(), 0)).collect();
        for p in bound {
            if let Ok(port) = self.port(library, p) {
                *score.entry(p.instance.clone()).or_default() += port.width();
            }
        }
        score
    }
}

/// Distinct module names, sorted.
pub fn list_unique_ips(design: &Design) -> Vec<String> {
    let set: BTreeSet<&String> = design.instances.iter().map(|i| &i.module).collect();
    set.into_iter().cloned().collect()
}

/// Instances by descending connectivity, ties by name.
pub fn rank_ips_by_connection(design: &Design, library: &Library) -> Vec<String> {
    let score = design.connectivity(library);
    let mut v: Vec<(String, usize)> = score.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.into_iter().map(|(n, _)| n).collect()
}
