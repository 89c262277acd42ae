// SPDX-License-Identifier: Apache-2.0

//! Semiformal verification engine: netlist IR, file formats, a three-valued
//! simulator, a SAT-based bounded model checker, register ranking and the
//! phased build-and-prove flow.

pub mod logic;
pub mod netlist;
pub mod frontend;
pub mod sim;
pub mod bmc;
pub mod par;
pub mod sra;
pub mod flow;
pub mod report;
