// SPDX-License-Identifier: Apache-2.0

//! The five-phase build-and-prove flow.
//!
//! 1. preprocessing: elaboration, IP ranking, register map, property groups;
//! 2. BMC of every IP on its own;
//! 3. semiformal BMC of the IPs that did not finish: simulate the software
//!    until it touches a ranked register, then pin the best registers to the
//!    simulated values, one more register per iteration;
//! 4. BMC of growing subsystems in connectivity order;
//! 5. the semiformal loop of phase 3 applied to the remaining subsystems.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use serde::Serialize;
use thiserror::Error;

use crate::bmc::{
    self, create_assumes, create_stopats, format_trace, replay, trace_vcd, BmcConfig, BmcError, BmcStatus,
    BudgetSpec, Constraint, PropertyOutcome, PropertyResult,
};
use crate::frontend::{
    divide_props, gen_xprops, parse_design, parse_esw, parse_library, parse_props, parse_regmap, EswScript,
    ParseError, PropGroup, PropertyAst, RegisterMap,
};
use crate::netlist::{elaborate, list_unique_ips, rank_ips_by_connection, Design, FlatModel, Library, NetlistError};
use crate::report::{Engine, Iteration, FlowResult, ReportRow, RowStatus, VerifReport};
use crate::sim::{collect_sim_values, set_pois, RunOutcome, Simulator};
use crate::sra::{combine_regs, do_sra, mapped_registers, CorWeights, SraError};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Bmc(#[from] BmcError),
    #[error(transparent)]
    Sra(#[from] SraError),
    #[error("{}:{source}", path.display())]
    Input { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMode {
    Full,
    /// Phases 2 and 4 only.
    FormalOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowConfig {
    /// Per BMC invocation on one IP, in seconds.
    pub ip_limit: f64,
    /// Per BMC invocation on a subsystem, in seconds.
    pub sub_limit: f64,
    pub blackbox_failing: bool,
    pub bound: usize,
    pub reset_cycles: usize,
    pub settle: usize,
    pub weights: CorWeights,
    pub seed: u64,
    pub parallel: bool,
    pub mode: FlowMode,
    /// Measure limits in wall-clock time instead of nominal solver effort.
    pub wall_clock: bool,
    /// Add an X-propagation property for every register.
    pub xprops: bool,
    /// Last phase to run (1..=5).
    pub last_phase: u8,
    #[serde(skip)]
    pub dump_cnf: Option<PathBuf>,
    #[serde(skip)]
    pub dump_trace: Option<PathBuf>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            ip_limit: 3600.0,
            sub_limit: 5400.0,
            blackbox_failing: true,
            bound: 20,
            reset_cycles: 1,
            settle: 4,
            weights: CorWeights::default(),
            seed: 0,
            parallel: true,
            mode: FlowMode::Full,
            wall_clock: false,
            xprops: true,
            last_phase: 5,
            dump_cnf: None,
            dump_trace: None,
        }
    }
}

pub struct FlowInputs {
    pub design: Design,
    pub library: Library,
    pub regmap: RegisterMap,
    pub script: EswScript,
    pub props: Vec<PropertyAst>,
}

/// Where the flow inputs live. Unset files default to siblings of the
/// design file (`<design>.map`) or to nothing.
#[derive(Clone, Debug, Default)]
pub struct InputPaths {
    pub design: PathBuf,
    pub netlist_dir: Option<PathBuf>,
    pub regmap: Option<PathBuf>,
    pub esw: Option<PathBuf>,
    pub props: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, FlowError> {
    std::fs::read_to_string(path).map_err(|source| FlowError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, FlowError> {
    f(&read(path)?).map_err(|source| FlowError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads the design, one `<module>.net` per instantiated module, and the
/// optional register map, script and properties.
pub fn load_inputs(paths: &InputPaths) -> Result<FlowInputs, FlowError> {
    let design = parse(&paths.design, parse_design)?;
    let dir = paths
        .design
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let nl_dir = paths.netlist_dir.clone().unwrap_or_else(|| dir.clone());
    let mut library = Library::new();
    for m in list_unique_ips(&design) {
        let path = nl_dir.join(format!("{m}.net"));
        for nl in parse(&path, parse_library)? {
            library.insert(nl.name.clone(), nl);
        }
    }
    let regmap = match &paths.regmap {
        Some(p) => parse(p, parse_regmap)?,
        None => {
            let p = dir.join(format!("{}.map", design.name));
            if p.exists() {
                parse(&p, parse_regmap)?
            } else {
                RegisterMap::default()
            }
        }
    };
    let script = match &paths.esw {
        Some(p) => parse(p, parse_esw)?,
        None => EswScript {
            stmts: Vec::new(),
            lines: Vec::new(),
        },
    };
    let props = match &paths.props {
        Some(p) => parse(p, parse_props)?,
        None => Vec::new(),
    };
    Ok(FlowInputs {
        design,
        library,
        regmap,
        script,
        props,
    })
}

/// Output of phase 1.
pub struct Prepared {
    pub design: Design,
    pub library: Library,
    pub regmap: RegisterMap,
    pub script: EswScript,
    /// Distinct modules, each with the instances checked for it.
    pub unique_ips: Vec<(String, Vec<String>)>,
    /// Instances by connectivity.
    pub ranked_ips: Vec<String>,
    pub groups: Vec<PropGroup>,
    pub model: FlatModel,
    pub warnings: Vec<String>,
}

impl Prepared {
    pub fn group(&self, name: &str) -> &PropGroup {
        self.groups.iter().find(|g| g.name == name).expect("every architecture has a group")
    }

    /// Elaborated model of a set of instances (bus decoder included).
    pub fn model_of(&self, instances: &[String]) -> Result<FlatModel, FlowError> {
        Ok(elaborate(&self.design.restrict(instances), &self.library)?)
    }
}

pub fn phase1_preprocess(inp: FlowInputs, cfg: &FlowConfig) -> Result<Prepared, FlowError> {
    let FlowInputs {
        mut design,
        library,
        regmap,
        script,
        mut props,
    } = inp;
    design.check(&library)?;
    regmap.check(&design, &library)?;
    regmap.apply(&mut design);
    let model = elaborate(&design, &library)?;
    let ranked_ips = rank_ips_by_connection(&design, &library);
    let unique_ips: Vec<(String, Vec<String>)> = {
        let mut v: Vec<(String, Vec<String>)> = list_unique_ips(&design)
            .into_iter()
            .map(|m| {
                let insts = design
                    .instances
                    .iter()
                    .filter(|i| i.module == m)
                    .map(|i| i.name.clone())
                    .collect();
                (m, insts)
            })
            .collect();
        let pos = |i: &String| ranked_ips.iter().position(|r| r == i).unwrap_or(usize::MAX);
        v.sort_by_key(|(_, insts)| insts.iter().map(pos).min());
        v
    };
    if cfg.xprops {
        let have: BTreeSet<String> = props.iter().map(|p| p.name.clone()).collect();
        props.extend(gen_xprops(&model).into_iter().filter(|p| !have.contains(&p.name)));
    }
    for p in &props {
        p.check(&model)?;
    }
    let groups = divide_props(&props, &design, &ranked_ips)?;
    let mut warnings = Vec::new();
    for (k, st) in script.stmts.iter().enumerate() {
        if let Some(a) = st.address() {
            if regmap.register_at(a).is_none() {
                let msg = format!(
                    "esw line {}: access to unmapped address {a:#x}",
                    script.lines.get(k).copied().unwrap_or(0)
                );
                warn!("{msg}");
                warnings.push(msg);
            }
        }
    }
    info!(
        "phase 1: {} IPs, ranking [{}], {} properties",
        unique_ips.len(),
        ranked_ips.join(", "),
        props.len()
    );
    Ok(Prepared {
        design,
        library,
        regmap,
        script,
        unique_ips,
        ranked_ips,
        groups,
        model,
        warnings,
    })
}

struct Runner<'a> {
    cfg: &'a FlowConfig,
    runs: usize,
}

impl Runner<'_> {
    fn budget(&self, secs: f64) -> BudgetSpec {
        if self.cfg.wall_clock {
            BudgetSpec::Wall(Duration::from_secs_f64(secs.max(0.0)))
        } else {
            BudgetSpec::seconds(secs)
        }
    }

    fn bmc(
        &mut self,
        tag: &str,
        model: &FlatModel,
        props: &[PropertyAst],
        cons: &[Constraint],
        secs: f64,
    ) -> Result<BmcStatus, FlowError> {
        self.runs += 1;
        let run_tag = format!("{:02}-{tag}", self.runs);
        let cfg = BmcConfig {
            bound: self.cfg.bound,
            reset_cycles: self.cfg.reset_cycles,
            settle: self.cfg.settle,
            seed: self.cfg.seed,
            parallel: self.cfg.parallel,
            budget: self.budget(secs),
            dump_cnf: self.cfg.dump_cnf.as_ref().map(|d| d.join(&run_tag)),
        };
        let st = bmc::check(model, props, cons, &cfg)?;
        info!(
            "{tag}: {} pass, {} fail, {} undetermined, {} vacuous",
            st.count("PASS"),
            st.count("FAIL"),
            st.results.iter().filter(|r| r.outcome.is_undetermined()).count(),
            st.count("VACUOUS")
        );
        if let Some(dir) = &self.cfg.dump_trace {
            let dir = dir.join(&run_tag);
            for r in &st.results {
                if let PropertyOutcome::Fail(t) = &r.outcome {
                    let p = props.iter().find(|p| p.name == r.name).unwrap();
                    std::fs::create_dir_all(&dir).map_err(|source| FlowError::Io {
                        path: dir.clone(),
                        source,
                    })?;
                    for (ext, text) in [("trace", format_trace(&st.model, t, p)), ("vcd", trace_vcd(&st.model, t, p))] {
                        let path = dir.join(format!("{}.{ext}", r.name));
                        std::fs::write(&path, text).map_err(|source| FlowError::Io { path, source })?;
                    }
                }
            }
        }
        Ok(st)
    }
}

fn record(row: &mut ReportRow, st: &BmcStatus, props: &[PropertyAst]) {
    row.add_effort(st.effort);
    let check = |r: &PropertyResult| match &r.outcome {
        PropertyOutcome::Fail(t) => {
            let p = props.iter().find(|p| p.name == r.name)?;
            let ok = replay(&st.model, t, p).violated;
            if !ok {
                warn!("{}: counterexample does not replay", r.name);
            }
            Some(ok)
        }
        _ => None,
    };
    row.set_results(&st.results, &check);
}

fn names(props: &[PropertyAst]) -> Vec<String> {
    props.iter().map(|p| p.name.clone()).collect()
}

fn blackbox_constraints(instances: &[String], blackboxed: &BTreeSet<String>) -> Vec<Constraint> {
    instances
        .iter()
        .filter(|i| blackboxed.contains(*i))
        .map(|i| Constraint::Blackbox(i.clone()))
        .collect()
}

/// One semiformal attempt at an architecture: simulate to the first point
/// of interest, then constrain growing register sets until the check
/// completes or the registers run out. Returns the constrained set on
/// success.
#[allow(clippy::too_many_arguments)]
fn semiformal(
    run: &mut Runner<'_>,
    prep: &Prepared,
    sim_state: &mut crate::sim::SimState,
    row: &mut ReportRow,
    model: &FlatModel,
    props: &[PropertyAst],
    base: &[Constraint],
    carry: &[String],
    secs: f64,
) -> Result<Option<Vec<String>>, FlowError> {
    let bb = bmc::apply_blackboxes(model, base)?;
    let ranked = do_sra(&bb, &mapped_registers(&bb), &run.cfg.weights, run.cfg.parallel)?.names();
    let carried: Vec<String> = ranked.iter().filter(|r| carry.contains(r)).cloned().collect();
    let fresh: Vec<String> = ranked.iter().filter(|r| !carry.contains(r)).cloned().collect();
    info!("{}: ranked registers [{}]", row.name, ranked.join(", "));
    row.engine = Engine::Semiformal;
    if ranked.is_empty() {
        return Ok(None);
    }
    let pois = set_pois(&prep.regmap, &ranked, &prep.script);
    let mut sim = Simulator::new(&prep.model);
    match sim.run_until_poi(sim_state, &prep.script, &prep.regmap, &pois) {
        RunOutcome::Triggered(p) => info!("{}: PoI {} at cycle {}", row.name, p.register, sim_state.cycle),
        RunOutcome::ScriptEnded => info!("{}: script ended at cycle {}", row.name, sim_state.cycle),
    }
    let values = collect_sim_values(&prep.model, sim_state, &ranked);
    let iterations = fresh.len().max(1);
    for n in 1..=iterations {
        let mut set = carried.clone();
        if !fresh.is_empty() {
            set.extend(combine_regs(&fresh, n)?);
        }
        let mut captured = values.clone();
        captured.values.retain(|r, _| set.contains(r));
        let stopats = create_stopats(&bb, &set)?;
        let assumes = create_assumes(&captured, &stopats)?;
        debug_assert!(assumes.iter().all(|a| match a {
            Constraint::Assume { register, value } => values.values.get(register) == Some(value),
            _ => false,
        }));
        let mut cons = base.to_vec();
        cons.extend(stopats);
        cons.extend(assumes);
        let st = run.bmc(&format!("{}-it{n}", row.name), model, props, &cons, secs)?;
        record(row, &st, props);
        row.iterations = n;
        row.constrained = set.clone();
        row.history.push(Iteration {
            iteration: n,
            constrained: set.clone(),
            tally: row.tally.clone(),
        });
        if st.complete() {
            return Ok(Some(set));
        }
    }
    Ok(None)
}

/// Runs the flow and builds the report.
pub fn run_flow(inp: FlowInputs, cfg: &FlowConfig) -> Result<VerifReport, FlowError> {
    let prep = phase1_preprocess(inp, cfg)?;
    run_prepared(&prep, cfg)
}

pub fn run_prepared(prep: &Prepared, cfg: &FlowConfig) -> Result<VerifReport, FlowError> {
    let mut run = Runner { cfg, runs: 0 };
    let mut ip_rows: Vec<ReportRow> = prep
        .unique_ips
        .iter()
        .map(|(m, insts)| {
            let mut r = ReportRow::new(m, insts);
            r.set_all(&names(&prep.group(m).props), "UNDETERMINED");
            r
        })
        .collect();
    let n = prep.ranked_ips.len();
    let mut sub_rows: Vec<ReportRow> = (1..n)
        .map(|k| {
            let g = prep.group(&format!("subsystem-{k}"));
            let mut r = ReportRow::new(&g.name, g.instances());
            r.set_all(&names(&g.props), "UNDETERMINED");
            r
        })
        .collect();
    let config = serde_json::to_value(cfg).expect("config serializes");
    let finish = |result, mut ip_rows: Vec<ReportRow>, sub_rows: Vec<ReportRow>| {
        ip_rows.sort_by(|a, b| a.name.cmp(&b.name));
        ip_rows.extend(sub_rows);
        let r = VerifReport::new(&prep.design.name, result, ip_rows, prep.warnings.clone(), config.clone());
        info!("flow result {}", r.result.as_str());
        Ok(r)
    };

    // phase 2
    let mut marked = Vec::new();
    if cfg.last_phase >= 2 {
        for (k, (m, insts)) in prep.unique_ips.iter().enumerate() {
            let props = &prep.group(m).props;
            let model = prep.model_of(insts)?;
            let st = run.bmc(m, &model, props, &[], cfg.ip_limit)?;
            let row = &mut ip_rows[k];
            record(row, &st, props);
            row.engine = Engine::Formal;
            row.iterations = 1;
            if st.complete() {
                row.result = RowStatus::Finished;
            } else {
                row.result = RowStatus::Timeout;
                marked.push(k);
            }
        }
    }

    // phase 3
    let mut blackboxed: BTreeSet<String> = BTreeSet::new();
    let mut carryover: Vec<String> = Vec::new();
    if cfg.mode == FlowMode::Full && cfg.last_phase >= 3 && !marked.is_empty() {
        let mut st = Simulator::new(&prep.model).initial_state();
        for &k in &marked {
            let (m, insts) = &prep.unique_ips[k];
            let props = &prep.group(m).props;
            let model = prep.model_of(insts)?;
            let row = &mut ip_rows[k];
            row.iterations = 0;
            match semiformal(&mut run, prep, &mut st, row, &model, props, &[], &[], cfg.ip_limit)? {
                Some(set) => {
                    row.result = RowStatus::Finished;
                    carryover.extend(set);
                }
                None if cfg.blackbox_failing => {
                    row.result = RowStatus::Blackboxed;
                    row.set_all(&names(props), "VACUOUS");
                    blackboxed.extend(insts.iter().cloned());
                }
                None => {
                    row.result = RowStatus::SemiformalFail;
                    return finish(FlowResult::SemiformalFail, ip_rows, sub_rows);
                }
            }
        }
    }
    if cfg.last_phase < 4 || n < 2 {
        let result = if ip_rows.iter().any(|r| r.result == RowStatus::Timeout || r.result == RowStatus::NotReached) {
            FlowResult::FormalIncomplete
        } else if ip_rows.iter().any(|r| r.engine == Engine::Semiformal) {
            FlowResult::SemiformalComplete
        } else {
            FlowResult::FormalComplete
        };
        return finish(result, ip_rows, sub_rows);
    }

    // phase 4
    let mut switch_at = None;
    for k in 1..n {
        let row = &mut sub_rows[k - 1];
        let insts = row.instances.clone();
        let props = &prep.group(&row.name).props;
        let model = prep.model_of(&insts)?;
        let cons = blackbox_constraints(&insts, &blackboxed);
        let st = run.bmc(&row.name, &model, props, &cons, cfg.sub_limit)?;
        record(row, &st, props);
        row.engine = Engine::Formal;
        row.iterations = 1;
        if st.complete() {
            row.result = RowStatus::Finished;
        } else {
            row.result = RowStatus::Timeout;
            switch_at = Some(k);
            break;
        }
    }
    let Some(start) = switch_at else {
        return finish(FlowResult::FormalComplete, ip_rows, sub_rows);
    };
    if cfg.mode == FlowMode::FormalOnly || cfg.last_phase < 5 {
        return finish(FlowResult::FormalIncomplete, ip_rows, sub_rows);
    }

    // phase 5
    for k in start..n {
        let row = &mut sub_rows[k - 1];
        let insts = row.instances.clone();
        let props = &prep.group(&row.name).props;
        let model = prep.model_of(&insts)?;
        let cons = blackbox_constraints(&insts, &blackboxed);
        // the script restarts for every subsystem
        let mut st = Simulator::new(&prep.model).initial_state();
        row.iterations = 0;
        match semiformal(&mut run, prep, &mut st, row, &model, props, &cons, &carryover, cfg.sub_limit)? {
            Some(_) => row.result = RowStatus::Finished,
            None => {
                row.result = RowStatus::SemiformalFail;
                return finish(FlowResult::SemiformalFail, ip_rows, sub_rows);
            }
        }
    }
    finish(FlowResult::SemiformalComplete, ip_rows, sub_rows)
}
