// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::lit::Lit;
use crate::solver::{Budget, Solver, Status};

/// A formula in conjunctive normal form, literals in DIMACS convention.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("literal {lit} out of range 1..={num_vars}")]
    LiteralOutOfRange { lit: i32, num_vars: usize },
    #[error("literal 0 inside a clause")]
    ZeroLiteral,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Cnf {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    /// Appends a clause, widening the variable range if needed.
    pub fn add_clause(&mut self, clause: &[i32]) {
        for &l in clause {
            self.num_vars = self.num_vars.max(l.unsigned_abs() as usize);
        }
        self.clauses.push(clause.to_vec());
    }

    pub fn validate(&self) -> Result<(), CnfError> {
        for c in &self.clauses {
            for &l in c {
                if l == 0 {
                    return Err(CnfError::ZeroLiteral);
                }
                if l.unsigned_abs() as usize > self.num_vars {
                    return Err(CnfError::LiteralOutOfRange {
                        lit: l,
                        num_vars: self.num_vars,
                    });
                }
            }
        }
        Ok(())
    }

    /// True iff `model` (indexed by variable, 0-based) satisfies every clause.
    pub fn evaluate(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = model[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Satisfying assignment, one entry per variable (variable `i+1` at index `i`).
    Sat(Vec<bool>),
    Unsat,
    Timeout { elapsed: Duration, effort: u64 },
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }
}

/// One-shot solve of `cnf` under DIMACS-literal `assumptions`.
pub fn solve(cnf: &Cnf, assumptions: &[i32], budget: Budget, seed: u64) -> SolveOutcome {
    let started = Instant::now();
    let mut s = Solver::new(seed);
    s.reserve_vars(cnf.num_vars);
    for c in &cnf.clauses {
        let lits: Vec<Lit> = c.iter().map(|&d| Lit::from_dimacs(d)).collect();
        if !s.add_clause(&lits) {
            return SolveOutcome::Unsat;
        }
    }
    let assumptions: Vec<Lit> = assumptions.iter().map(|&d| Lit::from_dimacs(d)).collect();
    match s.solve_with(&assumptions, budget) {
        Status::Sat => {
            let mut model = s.model().to_vec();
            model.resize(cnf.num_vars, false);
            assert!(cnf.evaluate(&model), "solver returned a non-model");
            SolveOutcome::Sat(model)
        }
        Status::Unsat => SolveOutcome::Unsat,
        Status::Timeout => SolveOutcome::Timeout {
            elapsed: started.elapsed(),
            effort: s.stats().ticks,
        },
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> DimacsError {
    DimacsError::Syntax {
        line,
        msg: msg.into(),
    }
}

pub fn export_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len()).unwrap();
    for c in &cnf.clauses {
        for l in c {
            write!(out, "{} ", l).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn import_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut cnf = Cnf::default();
    let mut current: Vec<i32> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(syntax(lineno, "duplicate header"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(syntax(lineno, "expected `p cnf VARS CLAUSES`"));
            }
            let v = parts[2]
                .parse::<usize>()
                .map_err(|_| syntax(lineno, "bad variable count"))?;
            let c = parts[3]
                .parse::<usize>()
                .map_err(|_| syntax(lineno, "bad clause count"))?;
            header = Some((v, c));
            cnf.num_vars = v;
            continue;
        }
        let Some((nv, _)) = header else {
            return Err(syntax(lineno, "clause before header"));
        };
        for tok in line.split_whitespace() {
            let l: i32 = tok
                .parse()
                .map_err(|_| syntax(lineno, format!("bad literal `{tok}`")))?;
            if l == 0 {
                cnf.clauses.push(std::mem::take(&mut current));
            } else {
                if l.unsigned_abs() as usize > nv {
                    return Err(syntax(lineno, format!("literal {l} exceeds {nv} variables")));
                }
                current.push(l);
            }
        }
    }
    let Some((_, nc)) = header else {
        return Err(syntax(0, "missing header"));
    };
    if !current.is_empty() {
        cnf.clauses.push(current);
    }
    if cnf.clauses.len() != nc {
        return Err(syntax(
            0,
            format!("header declares {nc} clauses, found {}", cnf.clauses.len()),
        ));
    }
    Ok(cnf)
}
