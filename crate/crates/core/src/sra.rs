// SPDX-License-Identifier: Apache-2.0

//! Static register assignment: rank software-mapped registers by their
//! cone of relevance (COR) and hand out cumulative prefixes of the ranking.
//!
//! COR = `path_weight` × paths + `element_weight` × elements, 100 and 1 by
//! default. A register that reaches more outputs through more distinct
//! paths constrains more of the design when pinned.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::netlist::{ConeIndex, FlatModel, NetlistError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SraError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("iteration {requested} needs more than the {available} ranked registers")]
    ExhaustedRegisters { requested: usize, available: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorWeights {
    pub path: u128,
    pub element: u128,
    /// Count elements once per path they lie on instead of once.
    pub multiplicity: bool,
}

impl Default for CorWeights {
    fn default() -> Self {
        CorWeights {
            path: 100,
            element: 1,
            multiplicity: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorScore {
    pub register: String,
    pub paths: u128,
    pub elements: u128,
    pub score: u128,
}

pub fn cor(model: &FlatModel, register: &str) -> Result<CorScore, NetlistError> {
    cor_in(&ConeIndex::new(model), register, &CorWeights::default())
}

pub fn cor_in(index: &ConeIndex<'_>, register: &str, w: &CorWeights) -> Result<CorScore, NetlistError> {
    let c = index.cone(register)?;
    let elements = if w.multiplicity {
        c.path_elements
    } else {
        c.elements.len() as u128
    };
    Ok(CorScore {
        register: register.to_string(),
        paths: c.paths,
        elements,
        score: w
            .path
            .saturating_mul(c.paths)
            .saturating_add(w.element.saturating_mul(elements)),
    })
}

/// Registers ordered by descending score, ties by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RankedRegisters {
    pub scores: Vec<CorScore>,
}

impl RankedRegisters {
    pub fn names(&self) -> Vec<String> {
        self.scores.iter().map(|s| s.register.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn table(&self) -> String {
        let w = self
            .scores
            .iter()
            .map(|s| s.register.len())
            .max()
            .unwrap_or(0)
            .max("register".len());
        let mut s = format!("{:<w$}  {:>8}  {:>8}  {:>8}\n", "register", "paths", "elements", "COR");
        for c in &self.scores {
            writeln!(s, "{:<w$}  {:>8}  {:>8}  {:>8}", c.register, c.paths, c.elements, c.score).unwrap();
        }
        s
    }
}

/// Ranks the given registers of `model` (the DUV) by COR.
pub fn do_sra(
    model: &FlatModel,
    registers: &[String],
    w: &CorWeights,
    parallel: bool,
) -> Result<RankedRegisters, NetlistError> {
    let index = ConeIndex::new(model);
    let scores: Result<Vec<CorScore>, NetlistError> =
        crate::par::map(registers, parallel, |r| cor_in(&index, r, w)).into_iter().collect();
    let mut scores = scores?;
    scores.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.register.cmp(&b.register)));
    Ok(RankedRegisters { scores })
}

/// The software-mapped registers present in `model`.
pub fn mapped_registers(model: &FlatModel) -> Vec<String> {
    model
        .registers
        .iter()
        .filter(|r| r.software_visible && r.address.is_some())
        .map(|r| r.name.clone())
        .collect()
}

/// Constrained set for iteration `n` (1-based): the `n` best registers.
pub fn combine_regs(ranked: &[String], n: usize) -> Result<Vec<String>, SraError> {
    if n == 0 || n > ranked.len() {
        return Err(SraError::ExhaustedRegisters {
            requested: n,
            available: ranked.len(),
        });
    }
    Ok(ranked[..n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_is_a_growing_prefix() {
        let r: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(combine_regs(&r, 1).unwrap(), ["a"]);
        assert_eq!(combine_regs(&r, 3).unwrap(), r);
        assert_eq!(
            combine_regs(&r, 4),
            Err(SraError::ExhaustedRegisters {
                requested: 4,
                available: 3
            })
        );
        assert!(combine_regs(&r, 0).is_err());
    }
}
