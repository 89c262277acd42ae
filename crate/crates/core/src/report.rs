// SPDX-License-Identifier: Apache-2.0

//! Verification report: one row per architecture (IP or subsystem), as a
//! text table or deterministic JSON.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bmc::{PropertyOutcome, PropertyResult, EFFORT_PER_SECOND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlowResult {
    FormalComplete,
    SemiformalComplete,
    SemiformalFail,
    /// Formal-only mode stopped at the first incomplete subsystem.
    FormalIncomplete,
}

impl FlowResult {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowResult::FormalComplete => "FORMAL_COMPLETE",
            FlowResult::SemiformalComplete => "SEMIFORMAL_COMPLETE",
            FlowResult::SemiformalFail => "SEMIFORMAL_FAIL",
            FlowResult::FormalIncomplete => "FORMAL_INCOMPLETE",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            FlowResult::FormalComplete | FlowResult::SemiformalComplete => 0,
            FlowResult::SemiformalFail | FlowResult::FormalIncomplete => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Formal,
    Semiformal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowStatus {
    Finished,
    Timeout,
    Blackboxed,
    SemiformalFail,
    NotReached,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Finished => "Finished",
            RowStatus::Timeout => "Timeout",
            RowStatus::Blackboxed => "Black-boxed",
            RowStatus::SemiformalFail => "Semiformal fail",
            RowStatus::NotReached => "Not reached",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyRecord {
    pub name: String,
    pub outcome: &'static str,
    /// Frames proven (PASS/UNDETERMINED) or trace length (FAIL).
    pub depth: usize,
    /// For FAIL: the trace replays on the simulator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replayed: Option<bool>,
}

/// One semiformal iteration: the registers pinned and what it resolved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Iteration {
    pub iteration: usize,
    pub constrained: Vec<String>,
    pub tally: Tally,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub undetermined: usize,
    pub vacuous: usize,
    pub total: usize,
}

impl Tally {
    pub fn resolved(&self) -> usize {
        self.pass + self.fail
    }

    fn add(&mut self, o: &Tally) {
        self.pass += o.pass;
        self.fail += o.fail;
        self.undetermined += o.undetermined;
        self.vacuous += o.vacuous;
        self.total += o.total;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    pub instances: Vec<String>,
    pub engine: Engine,
    pub result: RowStatus,
    /// Nominal seconds of solver effort over all runs for this row.
    pub elapsed: f64,
    pub iterations: usize,
    /// Registers constrained in the last semiformal iteration.
    pub constrained: Vec<String>,
    pub tally: Tally,
    pub properties: Vec<PropertyRecord>,
    pub history: Vec<Iteration>,
}

impl ReportRow {
    pub fn new(name: &str, instances: &[String]) -> ReportRow {
        ReportRow {
            name: name.to_string(),
            instances: instances.to_vec(),
            engine: Engine::Formal,
            result: RowStatus::NotReached,
            elapsed: 0.0,
            iterations: 0,
            constrained: Vec::new(),
            tally: Tally::default(),
            properties: Vec::new(),
            history: Vec::new(),
        }
    }

    pub fn add_effort(&mut self, ticks: u64) {
        self.elapsed += ticks as f64 / EFFORT_PER_SECOND as f64;
    }

    /// Replaces the property records with the results of a run.
    pub fn set_results(&mut self, results: &[PropertyResult], replayed: &dyn Fn(&PropertyResult) -> Option<bool>) {
        self.properties = results
            .iter()
            .map(|r| PropertyRecord {
                name: r.name.clone(),
                outcome: r.outcome.label(),
                depth: match &r.outcome {
                    PropertyOutcome::Fail(t) => t.len(),
                    _ => r.frames,
                },
                replayed: replayed(r),
            })
            .collect();
        self.retally();
    }

    /// Marks every property with a fixed outcome label.
    pub fn set_all(&mut self, names: &[String], outcome: &'static str) {
        self.properties = names
            .iter()
            .map(|n| PropertyRecord {
                name: n.clone(),
                outcome,
                depth: 0,
                replayed: None,
            })
            .collect();
        self.retally();
    }

    fn retally(&mut self) {
        let mut t = Tally::default();
        for p in &self.properties {
            match p.outcome {
                "PASS" => t.pass += 1,
                "FAIL" => t.fail += 1,
                "VACUOUS" => t.vacuous += 1,
                _ => t.undetermined += 1,
            }
            t.total += 1;
        }
        self.tally = t;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifReport {
    pub design: String,
    pub result: FlowResult,
    pub rows: Vec<ReportRow>,
    pub totals: Tally,
    /// Resolved (pass + fail) properties over all properties.
    pub coverage: f64,
    /// Set when there was nothing to check.
    pub no_obligations: bool,
    pub warnings: Vec<String>,
    pub config: serde_json::Value,
}

impl VerifReport {
    pub fn new(
        design: &str,
        result: FlowResult,
        rows: Vec<ReportRow>,
        warnings: Vec<String>,
        config: serde_json::Value,
    ) -> VerifReport {
        let mut totals = Tally::default();
        for r in &rows {
            totals.add(&r.tally);
        }
        let coverage = if totals.total == 0 {
            1.0
        } else {
            totals.resolved() as f64 / totals.total as f64
        };
        VerifReport {
            design: design.to_string(),
            result,
            rows,
            no_obligations: totals.total == 0,
            totals,
            coverage,
            warnings,
            config,
        }
    }

    pub fn row(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "design {}: {}", self.design, self.result.as_str()).unwrap();
        let nw = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(12);
        writeln!(
            s,
            "{:<nw$}  {:<10}  {:<16}  {:>20}  {:>5}  {:>4}  {:>5}  {:>5}",
            "architecture", "engine", "result", "time", "pass", "fail", "undet", "vac"
        )
        .unwrap();
        for r in &self.rows {
            let engine = match r.engine {
                Engine::Formal => "formal",
                Engine::Semiformal => "semiformal",
            };
            let time = if r.result == RowStatus::NotReached {
                "-".to_string()
            } else if r.iterations > 0 && r.engine == Engine::Semiformal {
                format!("{:.2}s ({} iter)", r.elapsed, r.iterations)
            } else {
                format!("{:.2}s", r.elapsed)
            };
            writeln!(
                s,
                "{:<nw$}  {:<10}  {:<16}  {:>20}  {:>5}  {:>4}  {:>5}  {:>5}",
                r.name,
                engine,
                r.result.as_str(),
                time,
                r.tally.pass,
                r.tally.fail,
                r.tally.undetermined,
                r.tally.vacuous
            )
            .unwrap();
        }
        for r in self.rows.iter().filter(|r| !r.history.is_empty()) {
            writeln!(s, "{}:", r.name).unwrap();
            for it in &r.history {
                writeln!(
                    s,
                    "  iter {:>2}  pass {:>3}  fail {:>3}  undet {:>3}  [{}]",
                    it.iteration,
                    it.tally.pass,
                    it.tally.fail,
                    it.tally.undetermined,
                    it.constrained.join(", ")
                )
                .unwrap();
            }
        }
        let t = &self.totals;
        writeln!(
            s,
            "coverage {:.1}% ({} of {} properties resolved, {} undetermined, {} vacuous){}",
            self.coverage * 100.0,
            t.resolved(),
            t.total,
            t.undetermined,
            t.vacuous,
            if self.no_obligations { " [no obligations]" } else { "" }
        )
        .unwrap();
        for w in &self.warnings {
            writeln!(s, "warning: {w}").unwrap();
        }
        s
    }
}
