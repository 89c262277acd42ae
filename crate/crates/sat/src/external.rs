// SPDX-License-Identifier: Apache-2.0

//! Shelling out to an external DIMACS solver (minisat/kissat/cadical style
//! output). SAT answers are re-checked against the formula before being
//! accepted.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use thiserror::Error;

use crate::cnf::{export_dimacs, Cnf, SolveOutcome};

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("failed to run `{program}`: {source}")]
    Spawn {
        program: String,
        source: std::io::Error,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver output had no `s` status line")]
    NoStatus,
    #[error("solver claimed SAT but its model falsifies the formula")]
    BadModel,
}

/// Runs `program args... FILE` on `cnf` with the assumptions added as unit
/// clauses. Exit codes are ignored; the `s` line decides the answer.
pub fn solve_external(
    program: &str,
    args: &[String],
    cnf: &Cnf,
    assumptions: &[i32],
) -> Result<SolveOutcome, ExternalError> {
    let started = Instant::now();
    let mut full = cnf.clone();
    for &a in assumptions {
        full.add_clause(&[a]);
    }
    let mut file = tempfile::NamedTempFile::new()?;
    file.write_all(export_dimacs(&full).as_bytes())?;
    file.flush()?;
    let output = Command::new(program)
        .args(args)
        .arg(file.path())
        .output()
        .map_err(|source| ExternalError::Spawn {
            program: program.to_string(),
            source,
        })?;
    let text = String::from_utf8_lossy(&output.stdout);
    parse_competition_output(&text, &full).map(|o| match o {
        SolveOutcome::Timeout { effort, .. } => SolveOutcome::Timeout {
            elapsed: started.elapsed(),
            effort,
        },
        other => other,
    })
}

/// Parses SAT-competition style output (`s ...` / `v ...` lines).
pub fn parse_competition_output(text: &str, cnf: &Cnf) -> Result<SolveOutcome, ExternalError> {
    let mut status = None;
    let mut model = vec![false; cnf.num_vars];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("v ") {
            for tok in rest.split_whitespace() {
                if let Ok(l) = tok.parse::<i32>() {
                    if l != 0 && (l.unsigned_abs() as usize) <= cnf.num_vars {
                        model[l.unsigned_abs() as usize - 1] = l > 0;
                    }
                }
            }
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => {
            if cnf.evaluate(&model) {
                Ok(SolveOutcome::Sat(model))
            } else {
                Err(ExternalError::BadModel)
            }
        }
        Some("UNSATISFIABLE") => Ok(SolveOutcome::Unsat),
        Some(_) => Ok(SolveOutcome::Timeout {
            elapsed: Default::default(),
            effort: 0,
        }),
        None => Err(ExternalError::NoStatus),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_verifies_models() {
        let mut cnf = Cnf::new(2);
        cnf.add_clause(&[1, 2]);
        cnf.add_clause(&[-1]);
        let ok = parse_competition_output("c x\ns SATISFIABLE\nv -1 2 0\n", &cnf).unwrap();
        assert_eq!(ok, SolveOutcome::Sat(vec![false, true]));
        assert!(matches!(
            parse_competition_output("s SATISFIABLE\nv 1 -2 0\n", &cnf),
            Err(ExternalError::BadModel)
        ));
        assert_eq!(
            parse_competition_output("s UNSATISFIABLE\n", &cnf).unwrap(),
            SolveOutcome::Unsat
        );
        assert!(matches!(
            parse_competition_output("", &cnf),
            Err(ExternalError::NoStatus)
        ));
    }

    #[test]
    fn missing_program_is_reported() {
        let cnf = Cnf::new(1);
        let err = solve_external("/nonexistent/solver", &[], &cnf, &[]).unwrap_err();
        assert!(matches!(err, ExternalError::Spawn { .. }));
    }
}
