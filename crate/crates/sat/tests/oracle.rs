// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfv_sat::{export_dimacs, import_dimacs, solve, Budget, Cnf, SolveOutcome};

/// Exhaustive truth-table check.
fn enumerate(cnf: &Cnf, assumptions: &[i32]) -> bool {
    let n = cnf.num_vars;
    let mut model = vec![false; n];
    for bits in 0u64..(1u64 << n) {
        for (i, m) in model.iter_mut().enumerate() {
            *m = bits >> i & 1 == 1;
        }
        let assumed = assumptions.iter().all(|&a| {
            let v = model[a.unsigned_abs() as usize - 1];
            if a > 0 {
                v
            } else {
                !v
            }
        });
        if assumed && cnf.evaluate(&model) {
            return true;
        }
    }
    false
}

fn random_3sat(rng: &mut ChaCha8Rng, vars: usize, ratio: f64) -> Cnf {
    let m = (vars as f64 * ratio).round() as usize;
    let mut cnf = Cnf::new(vars);
    for _ in 0..m {
        let mut clause = Vec::with_capacity(3);
        while clause.len() < 3 {
            let v = rng.gen_range(1..=vars as i32);
            if clause.iter().any(|&l: &i32| l.abs() == v) {
                continue;
            }
            clause.push(if rng.gen_bool(0.5) { v } else { -v });
        }
        cnf.add_clause(&clause);
    }
    cnf
}

#[test]
fn random_3sat_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(426);
    let mut sat = 0;
    for i in 0..100 {
        let vars = 8 + i % 13; // 8..=20
        let cnf = random_3sat(&mut rng, vars, 4.26);
        let expected = enumerate(&cnf, &[]);
        let got = solve(&cnf, &[], Budget::unlimited(), 7);
        match &got {
            SolveOutcome::Sat(m) => assert!(cnf.evaluate(m)),
            SolveOutcome::Unsat => {}
            SolveOutcome::Timeout { .. } => panic!("timeout on instance {i}"),
        }
        assert_eq!(got.is_sat(), expected, "instance {i}");
        sat += expected as usize;
    }
    // the phase transition should give a healthy mix
    assert!(sat > 10 && sat < 90, "{sat} satisfiable");
}

#[test]
fn assumptions_agree_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..60 {
        let cnf = random_3sat(&mut rng, 12, 3.5);
        let assumptions: Vec<i32> = (0..3)
            .map(|_| {
                let v = rng.gen_range(1..=12);
                if rng.gen_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let got = solve(&cnf, &assumptions, Budget::unlimited(), 0);
        assert_eq!(got.is_sat(), enumerate(&cnf, &assumptions));
        if let SolveOutcome::Sat(m) = got {
            for a in assumptions {
                assert_eq!(m[a.unsigned_abs() as usize - 1], a > 0);
            }
        }
    }
}

#[test]
fn fixed_seed_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cnf = random_3sat(&mut rng, 60, 4.0);
    let a = solve(&cnf, &[], Budget::unlimited(), 11);
    let b = solve(&cnf, &[], Budget::unlimited(), 11);
    assert_eq!(a, b);
}

#[test]
fn incremental_solver_keeps_learning_sound() {
    use sfv_sat::{Lit, Solver, Status};
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let full = random_3sat(&mut rng, 14, 4.5);
        let mut s = Solver::new(0);
        let mut prefix = Cnf::new(14);
        for (k, c) in full.clauses.iter().enumerate() {
            let lits: Vec<Lit> = c.iter().map(|&d| Lit::from_dimacs(d)).collect();
            s.add_clause(&lits);
            prefix.add_clause(c);
            if k % 9 == 0 {
                let st = s.solve_with(&[], Budget::unlimited());
                assert_eq!(st == Status::Sat, enumerate(&prefix, &[]));
                if st == Status::Sat {
                    let mut m = s.model().to_vec();
                    m.resize(14, false);
                    assert!(prefix.evaluate(&m));
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn dimacs_round_trip(clauses in prop::collection::vec(
        prop::collection::vec((1i32..30, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v }), 1..6),
        0..40,
    )) {
        let mut cnf = Cnf::new(30);
        for c in &clauses {
            cnf.add_clause(c);
        }
        let back = import_dimacs(&export_dimacs(&cnf)).unwrap();
        prop_assert_eq!(back, cnf);
    }
}
