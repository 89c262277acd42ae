// SPDX-License-Identifier: Apache-2.0

//! COR scoring against brute-force path enumeration, and the two-register
//! example topology (one long chain vs. three parallel chains).

mod common;

use common::oracles::{dag_case, flat, TWO_REGS};
use sfv_core::frontend::parse_library;
use sfv_core::netlist::Library;
use sfv_core::sra::{cor, do_sra, CorWeights};

#[test]
fn two_register_example() {
    let lib: Library = parse_library(TWO_REGS).unwrap().into_iter().map(|m| (m.name.clone(), m)).collect();
    let m = flat(lib, "two_regs");
    let t = std::time::Instant::now();
    let r1 = cor(&m, "u.reg1").unwrap();
    let r2 = cor(&m, "u.reg2").unwrap();
    assert_eq!((r1.paths, r1.elements, r1.score), (1, 9, 109));
    assert_eq!((r2.paths, r2.elements, r2.score), (3, 13, 313));
    let ranked = do_sra(&m, &["u.reg1".into(), "u.reg2".into()], &CorWeights::default(), false).unwrap();
    assert_eq!(ranked.names(), ["u.reg2", "u.reg1"]);
    assert!(t.elapsed().as_millis() < 50);
    // both readings of "elements" agree here
    let mult = CorWeights {
        multiplicity: true,
        ..Default::default()
    };
    let ranked = do_sra(&m, &["u.reg1".into(), "u.reg2".into()], &mult, false).unwrap();
    assert_eq!(ranked.scores[0].score, 313);
    assert_eq!(ranked.scores[1].score, 109);
}

#[test]
fn path_counts_match_enumeration() {
    let t = std::time::Instant::now();
    for seed in 0..200 {
        dag_case(seed).unwrap();
    }
    assert!(t.elapsed().as_secs() < 10);
}
