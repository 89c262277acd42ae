// SPDX-License-Identifier: Apache-2.0

//! `sfv`: command-line driver for the semiformal flow.
//!
//! Exit status: 0 when the flow completes (formally or semiformally), 2 when
//! it does not, 3 on usage or input errors.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use sfv_core::bmc::{self, format_trace, replay, trace_vcd, BmcConfig, BudgetSpec, PropertyOutcome};
use sfv_core::flow::{
    load_inputs, phase1_preprocess, run_prepared, FlowConfig, FlowError, FlowMode, InputPaths,
};
use sfv_core::frontend::{gen_xprops, parse_library, parse_regmap, write_props, PropGroupKind};
use sfv_core::netlist::{elaborate, Design, Instance, Library};
use sfv_core::sim::{Simulator, VcdWriter};
use sfv_core::sra::{do_sra, mapped_registers, CorWeights};

const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "sfv", version, about = "Semiformal build-and-prove verification of SoC designs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the whole five-phase flow.
    Run(RunArgs),
    /// Run the flow up to and including phase N (1 prints the preprocessing summary).
    Phase {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        n: u8,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rank the software-mapped registers of an IP or design by cone of relevance.
    SraRank(SraArgs),
    /// Bounded model check of a design (or some of its instances).
    Bmc(BmcArgs),
    /// Simulate the ESW script on the full design.
    Sim(SimArgs),
    /// Print one X-propagation property per register.
    GenXprop(XpropArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Design file (`.design`, `.instance`, `.connect`, `.top`).
    #[arg(long)]
    design: PathBuf,
    /// Directory holding `<module>.net` [default: the design's directory]
    #[arg(long)]
    netlist_dir: Option<PathBuf>,
    /// Register map [default: `<design name>.map` next to the design, if present]
    #[arg(long)]
    regmap: Option<PathBuf>,
    /// Embedded-software transaction script.
    #[arg(long)]
    esw: Option<PathBuf>,
    /// Property file.
    #[arg(long)]
    props: Option<PathBuf>,
}

impl InputArgs {
    fn paths(&self) -> InputPaths {
        InputPaths {
            design: self.design.clone(),
            netlist_dir: self.netlist_dir.clone(),
            regmap: self.regmap.clone(),
            esw: self.esw.clone(),
            props: self.props.clone(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the CNF of every BMC run below this directory.
    #[arg(long)]
    dump_cnf: Option<PathBuf>,
    /// Write counterexamples (`.trace` and `.vcd`) below this directory.
    #[arg(long)]
    dump_trace: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// BMC bound (frames).
    #[arg(long, default_value_t = 20)]
    bound: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel property checks.
    #[arg(long)]
    jobs: Option<usize>,
    /// Interpret limits as wall-clock seconds instead of nominal solver effort
    /// (faster to hit, but not reproducible).
    #[arg(long)]
    wall_clock: bool,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Seconds per BMC run on a single IP.
    #[arg(long, default_value_t = 3600.0)]
    ip_limit: f64,
    /// Seconds per BMC run on a subsystem.
    #[arg(long, default_value_t = 5400.0)]
    sub_limit: f64,
    /// Blackbox IPs whose register list runs out instead of failing the flow.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    blackbox_failing: bool,
    /// Skip the semiformal phases (3 and 5).
    #[arg(long)]
    formal_only: bool,
    /// Do not add the generated X-propagation properties.
    #[arg(long)]
    no_xprops: bool,
    /// Count cone elements once per path (instead of once).
    #[arg(long)]
    multiplicity: bool,
}

#[derive(Args)]
struct SraArgs {
    /// A single IP netlist; its instance name is taken from the register map.
    #[arg(long, conflicts_with = "design", required_unless_present = "design")]
    ip: Option<PathBuf>,
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long)]
    netlist_dir: Option<PathBuf>,
    #[arg(long)]
    regmap: Option<PathBuf>,
    #[arg(long)]
    multiplicity: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct BmcArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Instances to keep (comma separated) [default: all]
    #[arg(long, value_delimiter = ',')]
    scope: Vec<String>,
    /// Seconds of solver effort for the whole check.
    #[arg(long, default_value_t = 3600.0)]
    limit: f64,
    /// Also check the generated X-propagation properties.
    #[arg(long)]
    xprops: bool,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Idle cycles after the script.
    #[arg(long, default_value_t = 0)]
    cycles: u32,
    /// Write a VCD of all registers here.
    #[arg(long)]
    dump_trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct XpropArgs {
    #[arg(long, conflicts_with = "design", required_unless_present = "design")]
    ip: Option<PathBuf>,
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long)]
    netlist_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error the user can fix: exit 3.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: Result<T, FlowError>) -> Result<T> {
    r.map_err(|e| InputError(e.into()).into())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn check_limit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(InputError(anyhow::anyhow!("--{name} must be a positive number of seconds")).into());
    }
    Ok(())
}

fn parallel(e: &EngineArgs) -> bool {
    if let Some(j) = e.jobs {
        sfv_core::par::set_jobs(j);
        j > 1
    } else {
        true
    }
}

fn flow_config(a: &RunArgs, last_phase: u8) -> Result<FlowConfig> {
    check_limit("ip-limit", a.ip_limit)?;
    check_limit("sub-limit", a.sub_limit)?;
    Ok(FlowConfig {
        ip_limit: a.ip_limit,
        sub_limit: a.sub_limit,
        blackbox_failing: a.blackbox_failing,
        bound: a.engine.bound,
        weights: CorWeights {
            multiplicity: a.multiplicity,
            ..CorWeights::default()
        },
        seed: a.engine.seed,
        parallel: parallel(&a.engine),
        mode: if a.formal_only { FlowMode::FormalOnly } else { FlowMode::Full },
        wall_clock: a.engine.wall_clock,
        xprops: !a.no_xprops,
        last_phase,
        dump_cnf: a.out.dump_cnf.clone(),
        dump_trace: a.out.dump_trace.clone(),
        ..FlowConfig::default()
    })
}

fn cmd_run(a: &RunArgs, last_phase: u8) -> Result<u8> {
    let cfg = flow_config(a, last_phase)?;
    let inputs = input(load_inputs(&a.inputs.paths()))?;
    let prep = input(phase1_preprocess(inputs, &cfg))?;
    if last_phase == 1 {
        let groups: Vec<_> = prep
            .groups
            .iter()
            .map(|g| {
                json!({
                    "name": g.name,
                    "kind": match &g.kind { PropGroupKind::Ip { .. } => "ip", PropGroupKind::Subsystem { .. } => "subsystem" },
                    "instances": g.instances(),
                    "properties": g.props.iter().map(|p| p.name.clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let summary = json!({
            "design": prep.design.name,
            "unique_ips": prep.unique_ips.iter().map(|(m, _)| m.clone()).collect::<Vec<_>>(),
            "ranked_ips": prep.ranked_ips,
            "groups": groups,
            "warnings": prep.warnings,
        });
        let text = match a.out.format {
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&summary)?),
            Format::Text => {
                let mut s = format!("design {}\n", prep.design.name);
                s += &format!("unique IPs: {}\n", summary["unique_ips"].as_array().unwrap().len());
                s += &format!("ranking: {}\n", prep.ranked_ips.join(" "));
                for g in &prep.groups {
                    s += &format!("{} [{}]: {} properties\n", g.name, g.instances().join(" "), g.props.len());
                }
                for w in &prep.warnings {
                    s += &format!("warning: {w}\n");
                }
                s
            }
        };
        emit(&a.out.out, &text)?;
        return Ok(0);
    }
    let report = input(run_prepared(&prep, &cfg))?;
    let text = match a.out.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    emit(&a.out.out, &text)?;
    Ok(report.result.exit_code())
}

/// Library and a one-instance design for a lone netlist file; the instance
/// is named after the register map entries that fit the module.
fn single_ip(path: &Path, regmap: Option<&sfv_core::frontend::RegisterMap>) -> Result<(Design, Library)> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(anyhow::anyhow!("{}: {e}", path.display())))?;
    let mods = parse_library(&text).map_err(|e| InputError(anyhow::anyhow!("{}:{e}", path.display())))?;
    let Some(top) = mods.last().map(|m| m.name.clone()) else {
        return Err(InputError(anyhow::anyhow!("{}: no module", path.display())).into());
    };
    let library: Library = mods.into_iter().map(|m| (m.name.clone(), m)).collect();
    let nl = &library[&top];
    let mut names: Vec<&str> = regmap
        .map(|m| {
            m.registers()
                .filter_map(|r| r.split_once('.'))
                .filter(|(_, reg)| nl.register(reg).is_some_and(|d| d.software_visible))
                .map(|(inst, _)| inst)
                .collect()
        })
        .unwrap_or_default();
    names.sort_unstable();
    names.dedup();
    let inst = match names.as_slice() {
        [one] => one.to_string(),
        [] => format!("{top}0"),
        many => bail!(InputError(anyhow::anyhow!(
            "register map fits several instances of `{top}`: {}",
            many.join(", ")
        ))),
    };
    let design = Design {
        name: top.clone(),
        instances: vec![Instance {
            module: top,
            name: inst,
        }],
        ..Default::default()
    };
    Ok((design, library))
}

fn read_regmap(p: &Option<PathBuf>) -> Result<Option<sfv_core::frontend::RegisterMap>> {
    let Some(p) = p else { return Ok(None) };
    let text = std::fs::read_to_string(p).map_err(|e| InputError(anyhow::anyhow!("{}: {e}", p.display())))?;
    let m = parse_regmap(&text).map_err(|e| InputError(anyhow::anyhow!("{}:{e}", p.display())))?;
    Ok(Some(m))
}

fn cmd_sra(a: &SraArgs) -> Result<u8> {
    let (mut design, library, regmap) = match (&a.ip, &a.design) {
        (Some(ip), _) => {
            let rm = read_regmap(&a.regmap)?;
            let (d, l) = single_ip(ip, rm.as_ref())?;
            // keep only entries of this instance
            let rm = rm.map(|mut m| {
                let prefix = format!("{}.", d.instances[0].name);
                m.entries.retain(|e| e.register.starts_with(&prefix));
                m
            });
            (d, l, rm)
        }
        (None, Some(dp)) => {
            let inp = input(load_inputs(&InputPaths {
                design: dp.clone(),
                netlist_dir: a.netlist_dir.clone(),
                regmap: a.regmap.clone(),
                ..Default::default()
            }))?;
            (inp.design, inp.library, Some(inp.regmap))
        }
        (None, None) => unreachable!("clap requires one"),
    };
    if let Some(m) = &regmap {
        m.check(&design, &library).map_err(|e| InputError(anyhow::anyhow!("register map: {e}")))?;
        m.apply(&mut design);
    }
    let model = elaborate(&design, &library).map_err(|e| InputError(e.into()))?;
    let regs: Vec<String> = if regmap.as_ref().is_some_and(|m| !m.entries.is_empty()) {
        mapped_registers(&model)
    } else {
        model
            .registers
            .iter()
            .filter(|r| r.software_visible)
            .map(|r| r.name.clone())
            .collect()
    };
    let w = CorWeights {
        multiplicity: a.multiplicity,
        ..CorWeights::default()
    };
    let ranked = do_sra(&model, &regs, &w, true)?;
    let text = match a.format {
        Format::Text => ranked.table(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&ranked)?),
    };
    emit(&a.out, &text)?;
    Ok(0)
}

fn cmd_bmc(a: &BmcArgs) -> Result<u8> {
    check_limit("limit", a.limit)?;
    let inp = input(load_inputs(&a.inputs.paths()))?;
    let mut design = inp.design;
    design.check(&inp.library).map_err(|e| InputError(e.into()))?;
    inp.regmap
        .check(&design, &inp.library)
        .map_err(|e| InputError(anyhow::anyhow!("register map: {e}")))?;
    inp.regmap.apply(&mut design);
    if !a.scope.is_empty() {
        for s in &a.scope {
            if design.instance(s).is_none() {
                bail!(InputError(anyhow::anyhow!("unknown instance `{s}` in --scope")));
            }
        }
        design = design.restrict(&a.scope);
    }
    let model = elaborate(&design, &inp.library).map_err(|e| InputError(e.into()))?;
    let mut props = inp.props;
    if !a.scope.is_empty() {
        // properties reaching outside the scope belong to a larger architecture
        props.retain(|p| {
            let inside = p.scope.iter().all(|i| a.scope.contains(i));
            if !inside {
                log::info!("property `{}` is outside --scope, skipped", p.name);
            }
            inside
        });
    }
    if a.xprops {
        props.extend(gen_xprops(&model));
    }
    for p in &props {
        p.check(&model).map_err(|e| InputError(anyhow::anyhow!("property `{}`: {e}", p.name)))?;
    }
    let cfg = BmcConfig {
        bound: a.engine.bound,
        seed: a.engine.seed,
        parallel: parallel(&a.engine),
        budget: if a.engine.wall_clock {
            BudgetSpec::Wall(std::time::Duration::from_secs_f64(a.limit))
        } else {
            BudgetSpec::seconds(a.limit)
        },
        dump_cnf: a.out.dump_cnf.clone(),
        ..BmcConfig::default()
    };
    let st = bmc::check(&model, &props, &[], &cfg)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for r in &st.results {
        let p = props.iter().find(|p| p.name == r.name).expect("result of a checked property");
        let (depth, replayed) = match &r.outcome {
            PropertyOutcome::Pass(k) => (Some(*k), None),
            PropertyOutcome::Fail(t) => {
                if let Some(dir) = &a.out.dump_trace {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join(format!("{}.trace", r.name)), format_trace(&st.model, t, p))?;
                    std::fs::write(dir.join(format!("{}.vcd", r.name)), trace_vcd(&st.model, t, p))?;
                }
                (Some(t.len()), Some(replay(&st.model, t, p).violated))
            }
            _ => (None, None),
        };
        text += &format!(
            "{:<24} {:<12} {}\n",
            r.name,
            r.outcome.label(),
            match (&r.outcome, depth) {
                (PropertyOutcome::Fail(_), Some(d)) => format!("trace of {d} cycles"),
                (_, Some(d)) => format!("bound {d}"),
                _ => String::new(),
            }
        );
        if let PropertyOutcome::Fail(t) = &r.outcome {
            text += &format_trace(&st.model, t, p);
        }
        rows.push(json!({
            "name": r.name,
            "outcome": r.outcome.label(),
            "depth": depth,
            "replayed": replayed,
            "effort": r.effort,
        }));
    }
    let out = match a.out.format {
        Format::Text => text,
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "design": design.name,
                "bound": a.engine.bound,
                "seed": a.engine.seed,
                "properties": rows,
            }))?
        ),
    };
    emit(&a.out.out, &out)?;
    let ok = st.results.iter().all(|r| matches!(r.outcome, PropertyOutcome::Pass(_) | PropertyOutcome::Vacuous));
    Ok(if ok { 0 } else { 2 })
}

fn cmd_sim(a: &SimArgs) -> Result<u8> {
    let inp = input(load_inputs(&a.inputs.paths()))?;
    let mut design = inp.design;
    design.check(&inp.library).map_err(|e| InputError(e.into()))?;
    inp.regmap
        .check(&design, &inp.library)
        .map_err(|e| InputError(anyhow::anyhow!("register map: {e}")))?;
    inp.regmap.apply(&mut design);
    let model = elaborate(&design, &inp.library).map_err(|e| InputError(e.into()))?;
    let mut sim = Simulator::new(&model);
    let mut st = sim.initial_state();
    let names: Vec<String> = model.registers.iter().map(|r| r.name.clone()).collect();
    let mut vcd = VcdWriter::new(&model, &names);
    vcd.sample(&st);
    while sim.exec(&mut st, &inp.script, &inp.regmap) {
        vcd.sample(&st);
    }
    let idle = sim.idle_inputs();
    for _ in 0..a.cycles {
        sim.step(&mut st, &idle);
        vcd.sample(&st);
    }
    if let Some(p) = &a.dump_trace {
        std::fs::write(p, vcd.finish()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let values = sfv_core::sim::collect_sim_values(&model, &st, &names);
    let text = match a.format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "cycle": st.cycle,
                "registers": names.iter().map(|n| (n.clone(), values.values.get(n).map(|v| format!("{v:#x}")).unwrap_or_else(|| "x".into()).into())).collect::<serde_json::Map<_, _>>(),
                "warnings": sim.warnings,
            }))?
        ),
        Format::Text => {
            let mut s = format!("cycle {}\n", st.cycle);
            for n in &names {
                match values.values.get(n) {
                    Some(v) => s += &format!("{n} = {v:#x}\n"),
                    None => s += &format!("{n} = x\n"),
                }
            }
            for w in &sim.warnings {
                s += &format!("warning: {w}\n");
            }
            s
        }
    };
    emit(&a.out, &text)?;
    Ok(0)
}

fn cmd_xprop(a: &XpropArgs) -> Result<u8> {
    let (design, library) = match (&a.ip, &a.design) {
        (Some(ip), _) => single_ip(ip, None)?,
        (None, Some(dp)) => {
            let inp = input(load_inputs(&InputPaths {
                design: dp.clone(),
                netlist_dir: a.netlist_dir.clone(),
                ..Default::default()
            }))?;
            (inp.design, inp.library)
        }
        (None, None) => unreachable!("clap requires one"),
    };
    let model = elaborate(&design, &library).map_err(|e| InputError(e.into()))?;
    emit(&a.out, &write_props(&gen_xprops(&model)))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let r = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a, 5),
        Cmd::Phase { n, run } => cmd_run(run, *n),
        Cmd::SraRank(a) => cmd_sra(a),
        Cmd::Bmc(a) => cmd_bmc(a),
        Cmd::Sim(a) => cmd_sim(a),
        Cmd::GenXprop(a) => cmd_xprop(a),
    };
    match r {
        Ok(code) => {
            info!("exit {code}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
