// SPDX-License-Identifier: Apache-2.0

//! End-to-end flow on the shipped corpus and on a few tiny designs.

mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use common::corpus;
use sfv_core::flow::{load_inputs, phase1_preprocess, run_flow, FlowConfig, FlowInputs, FlowMode};
use sfv_core::frontend::{
    parse_design, parse_esw, parse_library, parse_netlist, parse_props, parse_regmap, write_design, write_esw,
    write_netlist, write_props, write_regmap,
};
use sfv_core::report::{Engine, FlowResult, RowStatus, VerifReport};

fn full() -> &'static VerifReport {
    static R: OnceLock<VerifReport> = OnceLock::new();
    R.get_or_init(|| run_flow(load_inputs(&corpus::paths()).unwrap(), &corpus::config(FlowMode::Full)).unwrap())
}

#[test]
fn corpus_files_round_trip() {
    let d = corpus::dir();
    let read = |n: &str| std::fs::read_to_string(d.join(n)).unwrap();
    for m in ["cpu", "ram", "can", "ethmac"] {
        let nl = parse_netlist(&read(&format!("{m}.net"))).unwrap();
        assert_eq!(parse_netlist(&write_netlist(&nl)).unwrap(), nl, "{m}");
    }
    let des = parse_design(&read("gateway.dsn")).unwrap();
    assert_eq!(parse_design(&write_design(&des)).unwrap(), des);
    let map = parse_regmap(&read("gateway.map")).unwrap();
    assert_eq!(parse_regmap(&write_regmap(&map)).unwrap(), map);
    let esw = parse_esw(&read("boot.esw")).unwrap();
    assert_eq!(parse_esw(&write_esw(&esw)).unwrap().stmts, esw.stmts);
    let props = parse_props(&read("user.prop")).unwrap();
    assert_eq!(parse_props(&write_props(&props)).unwrap(), props);
}

#[test]
fn preprocessing() {
    let prep = phase1_preprocess(load_inputs(&corpus::paths()).unwrap(), &FlowConfig::default()).unwrap();
    let ips: Vec<&str> = prep.unique_ips.iter().map(|(m, _)| m.as_str()).collect();
    assert_eq!(ips, ["cpu", "ram", "can", "ethmac"]);
    assert_eq!(prep.ranked_ips, ["cpu0", "ram0", "can0", "ethmac0"]);
    let names: Vec<&str> = prep.groups.iter().map(|g| g.name.as_str()).collect();
    assert_eq!(
        names,
        ["can", "cpu", "ethmac", "ram", "subsystem-1", "subsystem-2", "subsystem-3"]
    );
    assert!(prep.group("can").props.iter().any(|p| p.name == "can_check"));
    // an ESW access outside the map is reported, not fatal
    assert_eq!(prep.warnings.len(), 1);
    assert!(prep.warnings[0].contains("0x4000"));
}

#[test]
fn corpus_pattern() {
    let r = full();
    let row = |n: &str| r.row(n).unwrap();
    assert_eq!(r.result, FlowResult::SemiformalFail);
    assert_eq!((row("ram").engine, row("ram").result), (Engine::Formal, RowStatus::Finished));
    for (ip, n) in [("can", 2), ("ethmac", 3)] {
        assert_eq!(row(ip).result, RowStatus::Finished, "{ip}");
        assert_eq!((row(ip).engine, row(ip).iterations), (Engine::Semiformal, n), "{ip}");
    }
    assert_eq!((row("cpu").result, row("cpu").iterations), (RowStatus::Blackboxed, 5));
    assert_eq!(row("cpu").tally.vacuous, row("cpu").tally.total);
    assert_eq!((row("subsystem-1").result, row("subsystem-1").iterations), (RowStatus::Finished, 1));
    assert_eq!((row("subsystem-2").result, row("subsystem-2").iterations), (RowStatus::Finished, 1));
    assert_eq!(row("subsystem-2").engine, Engine::Semiformal);
    let s3 = row("subsystem-3");
    assert_eq!((s3.result, s3.iterations), (RowStatus::SemiformalFail, 5));
    assert!(s3.tally.undetermined > 0);
    // subsystem-3 starts from everything that was pinned in phase 3
    let first = &s3.history[0].constrained;
    for r in ["can0.MODE", "can0.COMMAND", "ethmac0.MODER", "ethmac0.MIICOMMAND", "ethmac0.CTRLMODER"] {
        assert!(first.contains(&r.to_string()), "{r} not carried over");
    }
    assert_eq!(first.len(), 6);
    // the ram scratch register never leaves X; its counterexample replays
    let x = row("ram").properties.iter().find(|p| p.name == "xprop.ram0.scratch").unwrap();
    assert_eq!((x.outcome, x.replayed), ("FAIL", Some(true)));
}

#[test]
fn obligations_are_conserved() {
    let r = full();
    let prep = phase1_preprocess(load_inputs(&corpus::paths()).unwrap(), &FlowConfig::default()).unwrap();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for row in &r.rows {
        let t = &row.tally;
        assert_eq!(t.pass + t.fail + t.undetermined + t.vacuous, t.total, "{}", row.name);
        assert_eq!(t.total, prep.group(&row.name).props.len(), "{}", row.name);
        for p in &row.properties {
            *seen.entry(p.name.as_str()).or_default() += 1;
        }
    }
    assert!(seen.values().all(|&n| n == 1));
    let total: usize = prep.groups.iter().map(|g| g.props.len()).sum();
    assert_eq!(seen.len(), total);
    assert_eq!(r.totals.total, total);
    assert!((0.0..=1.0).contains(&r.coverage));
}

#[test]
fn subsystems_grow_in_ranking_order() {
    let r = full();
    let subs: Vec<_> = r.rows.iter().filter(|r| r.name.starts_with("subsystem-")).collect();
    let ranked = ["cpu0", "ram0", "can0", "ethmac0"];
    for (k, s) in subs.iter().enumerate() {
        assert_eq!(s.instances, ranked[..k + 2]);
    }
}

#[test]
fn formal_only_finishes_less() {
    let r = run_flow(load_inputs(&corpus::paths()).unwrap(), &corpus::config(FlowMode::FormalOnly)).unwrap();
    assert_eq!(r.result, FlowResult::FormalIncomplete);
    let finished: Vec<&str> = r
        .rows
        .iter()
        .filter(|r| r.result == RowStatus::Finished)
        .map(|r| r.name.as_str())
        .collect();
    assert_eq!(finished, ["ram"]);
    assert!(r.rows.iter().all(|r| r.engine == Engine::Formal));
    assert_eq!(r.row("subsystem-1").unwrap().result, RowStatus::Timeout);
}

#[test]
fn failing_ip_without_blackboxing_fails_the_flow() {
    let cfg = FlowConfig {
        blackbox_failing: false,
        ..corpus::config(FlowMode::Full)
    };
    let r = run_flow(load_inputs(&corpus::paths()).unwrap(), &cfg).unwrap();
    assert_eq!(r.result, FlowResult::SemiformalFail);
    assert_eq!(r.result.exit_code(), 2);
    let cpu = r.row("cpu").unwrap();
    assert_eq!((cpu.result, cpu.iterations), (RowStatus::SemiformalFail, 5));
    // cpu ranks first, so nothing after it ran
    assert_eq!(r.row("subsystem-1").unwrap().result, RowStatus::NotReached);
}

#[test]
fn dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = FlowConfig {
        dump_cnf: Some(dir.path().join("cnf")),
        dump_trace: Some(dir.path().join("trace")),
        last_phase: 2,
        ..corpus::config(FlowMode::Full)
    };
    let r = run_flow(load_inputs(&corpus::paths()).unwrap(), &cfg).unwrap();
    assert_eq!(r.result, FlowResult::FormalIncomplete);
    let files = |sub: &str| -> Vec<String> {
        walk(&dir.path().join(sub))
            .into_iter()
            .map(|p| p.strip_prefix(dir.path()).unwrap().display().to_string())
            .collect()
    };
    let traces = files("trace");
    assert!(traces.iter().any(|f| f.ends_with("xprop.ram0.scratch.trace")), "{traces:?}");
    assert!(traces.iter().any(|f| f.ends_with("xprop.ram0.scratch.vcd")));
    let cnf = files("cnf");
    assert!(cnf.iter().any(|f| f.ends_with(".cnf")));
    let one = walk(&dir.path().join("cnf")).into_iter().find(|p| p.extension().is_some_and(|e| e == "cnf")).unwrap();
    let text = std::fs::read_to_string(one).unwrap();
    assert!(text.starts_with("c property "));
    assert!(text.lines().any(|l| l.starts_with("p cnf ")));
}

fn walk(d: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(d).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

const TINY: &str = "\
.module blk
.input rst 1
.input din 4
.output dout 4
.reg state 4 init=0
.dff state din rst=rst rstval=0
.gate NOT dout state
.endmodule
";

fn tiny(instances: &[&str], props: &str) -> FlowInputs {
    let mut d = String::from(".design tiny\n");
    for i in instances {
        d += &format!(".instance blk {i}\n.top rst {i}.rst\n");
    }
    for w in instances.windows(2) {
        d += &format!(".connect {}.dout {}.din\n", w[0], w[1]);
    }
    FlowInputs {
        design: parse_design(&d).unwrap(),
        library: parse_library(TINY).unwrap().into_iter().map(|m| (m.name.clone(), m)).collect(),
        regmap: parse_regmap("").unwrap(),
        script: parse_esw("reset 1\n").unwrap(),
        props: parse_props(props).unwrap(),
    }
}

#[test]
fn trivial_designs_complete_formally() {
    let cfg = FlowConfig {
        ip_limit: 1.0,
        sub_limit: 1.0,
        ..FlowConfig::default()
    };
    let r = run_flow(tiny(&["a"], "prop p : a.state <= 15\n"), &cfg).unwrap();
    assert_eq!(r.result, FlowResult::FormalComplete);
    assert_eq!(r.coverage, 1.0);
    let r = run_flow(
        tiny(&["a", "b"], "prop ab : (a.dout | b.state) <= 15\nprop b0 : b.state <= 15\n"),
        &cfg,
    );
    let r = r.unwrap();
    assert_eq!(r.result, FlowResult::FormalComplete);
    assert_eq!(r.rows.len(), 2);
    assert!(r.rows.iter().all(|r| r.result == RowStatus::Finished && r.engine == Engine::Formal));
}

#[test]
fn no_obligations() {
    let cfg = FlowConfig {
        xprops: false,
        ..FlowConfig::default()
    };
    let r = run_flow(tiny(&["a", "b"], ""), &cfg).unwrap();
    assert_eq!(r.result, FlowResult::FormalComplete);
    assert!(r.no_obligations);
    assert_eq!(r.coverage, 1.0);
    assert!(r.to_text().contains("[no obligations]"));
}
