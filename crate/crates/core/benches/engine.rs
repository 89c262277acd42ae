// SPDX-License-Identifier: Apache-2.0

//! Parallel vs. sequential cores on the shipped corpus: register ranking over
//! the whole design, and one bounded check of an IP's property group.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sfv_core::bmc::{check, BmcConfig};
use sfv_core::flow::{load_inputs, phase1_preprocess, FlowConfig, InputPaths, Prepared};
use sfv_core::sra::{do_sra, mapped_registers, CorWeights};

fn prepared() -> Prepared {
    let d = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let paths = InputPaths {
        design: d.join("gateway.dsn"),
        esw: Some(d.join("boot.esw")),
        props: Some(d.join("user.prop")),
        ..Default::default()
    };
    phase1_preprocess(load_inputs(&paths).unwrap(), &FlowConfig::default()).unwrap()
}

fn sra(c: &mut Criterion) {
    let prep = prepared();
    let regs = mapped_registers(&prep.model);
    let mut g = c.benchmark_group("sra");
    for parallel in [false, true] {
        g.bench_with_input(BenchmarkId::new("do_sra", parallel), &parallel, |b, &p| {
            b.iter(|| do_sra(&prep.model, &regs, &CorWeights::default(), p).unwrap())
        });
    }
    g.finish();
}

fn bmc(c: &mut Criterion) {
    let prep = prepared();
    let group = prep.group("can");
    let model = prep.model_of(group.instances()).unwrap();
    let mut g = c.benchmark_group("bmc");
    g.sample_size(10);
    for parallel in [false, true] {
        let cfg = BmcConfig {
            bound: 10,
            parallel,
            ..BmcConfig::default()
        };
        g.bench_with_input(BenchmarkId::new("check_can", parallel), &cfg, |b, cfg| {
            b.iter(|| check(&model, &group.props, &[], cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sra, bmc);
criterion_main!(benches);
