// SPDX-License-Identifier: Apache-2.0

//! Bounded model checking with X-propagation.
//!
//! The model is dual-rail encoded and unrolled lazily, one incremental
//! solver per property. Each frame is checked under a single assumption;
//! proven frames are then blocked permanently, so a check that runs out of
//! budget keeps its progress and can be resumed with a new slice.

mod dualrail;
mod trace;
mod unroll;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use log::{debug, info};
use sfv_sat::{export_dimacs, Budget, Lit, Status};
use thiserror::Error;

pub use dualrail::{xprop_encode, DualRail};
pub use trace::{eval_property, format_trace, replay, trace_vcd, Replay, Trace};
pub use unroll::{LitAlg, Unroller};

use crate::frontend::{Expr, ParseError, PropKind, PropertyAst, SigRef};
use crate::logic::Tri;
use crate::netlist::{blackbox, FlatModel, NetId, NetlistError, NodeKind};
use crate::sim::{CapturedValues, Simulator};

/// Signal name, bit range and rail (known or value) of a property operand.
type SigKey = (String, Option<(usize, usize)>, bool);

/// Nominal solver effort per second of budget: budgets given in seconds are
/// converted at this rate so that results do not depend on machine speed.
pub const EFFORT_PER_SECOND: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    /// Cut the register: its value is free in every cycle.
    Stopat(String),
    /// Pin a cut register to a value in every cycle.
    Assume { register: String, value: u64 },
    /// Remove an instance; its outputs become free inputs.
    Blackbox(String),
}

#[derive(Debug, Error)]
pub enum BmcError {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("assume on `{0}` has no matching stopat")]
    MissingStopat(String),
    #[error("value {value:#x} does not fit register `{register}`")]
    ValueOverflow { register: String, value: u64 },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Property(#[from] ParseError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub fn create_stopats(model: &FlatModel, registers: &[String]) -> Result<Vec<Constraint>, BmcError> {
    registers
        .iter()
        .map(|r| {
            model
                .register(r)
                .map(|_| Constraint::Stopat(r.clone()))
                .ok_or_else(|| BmcError::UnknownRegister(r.clone()))
        })
        .collect()
}

/// One assume per captured value; every value needs a stopat.
pub fn create_assumes(values: &CapturedValues, stopats: &[Constraint]) -> Result<Vec<Constraint>, BmcError> {
    let cut: BTreeSet<&str> = stopats
        .iter()
        .filter_map(|c| match c {
            Constraint::Stopat(r) => Some(r.as_str()),
            _ => None,
        })
        .collect();
    values
        .values
        .iter()
        .map(|(r, &v)| {
            if cut.contains(r.as_str()) {
                Ok(Constraint::Assume {
                    register: r.clone(),
                    value: v,
                })
            } else {
                Err(BmcError::MissingStopat(r.clone()))
            }
        })
        .collect()
}

/// Applies the blackbox constraints of `constraints` to `model`.
pub fn apply_blackboxes(model: &FlatModel, constraints: &[Constraint]) -> Result<FlatModel, BmcError> {
    let mut m = model.clone();
    for c in constraints {
        if let Constraint::Blackbox(i) = c {
            if m.instance_index(i).is_none() {
                return Err(BmcError::UnknownInstance(i.clone()));
            }
            m = blackbox(&m, i)?;
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetSpec {
    /// Total solver effort in ticks (deterministic).
    Effort(u64),
    /// Total wall-clock time.
    Wall(Duration),
}

impl BudgetSpec {
    pub fn seconds(s: f64) -> BudgetSpec {
        BudgetSpec::Effort((s.max(0.0) * EFFORT_PER_SECOND as f64) as u64)
    }

    fn split(self, n: usize) -> BudgetSpec {
        let n = n.max(1);
        match self {
            BudgetSpec::Effort(e) => BudgetSpec::Effort(e / n as u64),
            BudgetSpec::Wall(d) => BudgetSpec::Wall(d / n as u32),
        }
    }

    fn too_small(self) -> bool {
        match self {
            BudgetSpec::Effort(e) => e < 1_000,
            BudgetSpec::Wall(d) => d < Duration::from_millis(1),
        }
    }

    fn minus(self, used_effort: u64, used_wall: Duration) -> BudgetSpec {
        match self {
            BudgetSpec::Effort(e) => BudgetSpec::Effort(e.saturating_sub(used_effort)),
            BudgetSpec::Wall(d) => BudgetSpec::Wall(d.saturating_sub(used_wall)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BmcConfig {
    pub bound: usize,
    /// Cycles the reset inputs are held high at the start.
    pub reset_cycles: usize,
    /// Cycles after reset before X-propagation properties are checked.
    pub settle: usize,
    pub seed: u64,
    pub parallel: bool,
    pub budget: BudgetSpec,
    /// Directory for per-property DIMACS dumps.
    pub dump_cnf: Option<PathBuf>,
}

impl Default for BmcConfig {
    fn default() -> Self {
        BmcConfig {
            bound: 20,
            reset_cycles: 1,
            settle: 4,
            seed: 0,
            parallel: true,
            budget: BudgetSpec::seconds(5.0),
            dump_cnf: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UndeterminedReason {
    Timeout,
    /// The bound leaves no cycle in which the property is checked.
    Bound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyOutcome {
    Pass(usize),
    Fail(Trace),
    Undetermined(UndeterminedReason),
    /// The property reads a blackboxed instance.
    Vacuous,
}

impl PropertyOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            PropertyOutcome::Pass(_) => "PASS",
            PropertyOutcome::Fail(_) => "FAIL",
            PropertyOutcome::Undetermined(_) => "UNDETERMINED",
            PropertyOutcome::Vacuous => "VACUOUS",
        }
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, PropertyOutcome::Undetermined(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: String,
    pub kind: PropKind,
    pub outcome: PropertyOutcome,
    /// Solver ticks spent.
    pub effort: u64,
    /// Frames proven safe.
    pub frames: usize,
}

#[derive(Clone, Debug)]
pub struct BmcStatus {
    pub results: Vec<PropertyResult>,
    pub effort: u64,
    pub wall: Duration,
    /// The model the properties were checked on (after blackboxing).
    pub model: FlatModel,
}

impl BmcStatus {
    /// No property was left undetermined.
    pub fn complete(&self) -> bool {
        self.results.iter().all(|r| !r.outcome.is_undetermined())
    }

    pub fn result(&self, name: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn count(&self, label: &str) -> usize {
        self.results.iter().filter(|r| r.outcome.label() == label).count()
    }
}

/// Everything shared by the per-property checks.
struct Ctx<'a> {
    model: &'a FlatModel,
    dual: DualRail,
    /// Original register bits that are cut.
    cut_bits: Vec<NetId>,
    /// `(original bit, value)` pinned by assumes.
    pinned: Vec<(NetId, bool)>,
    cfg: &'a BmcConfig,
}

fn sig_uses(e: &Expr, out: &mut Vec<(SigRef, bool)>) {
    match e {
        Expr::Sig(s) => out.push((s.clone(), false)),
        Expr::Known(s) => out.push((s.clone(), true)),
        Expr::Const(_) => {}
        Expr::Not(a) => sig_uses(a, out),
        Expr::Bin(_, a, b) => {
            sig_uses(a, out);
            sig_uses(b, out);
        }
    }
}

struct PropCheck<'a> {
    u: Unroller<'a>,
    next: usize,
    first: usize,
    assumed: usize,
    /// Cached failure literal of the frame being worked on.
    bad: Option<(usize, Lit)>,
}

impl<'a> PropCheck<'a> {
    fn new(ctx: &'a Ctx<'a>, prop: &PropertyAst, seed: u64) -> PropCheck<'a> {
        let cfg = ctx.cfg;
        let mut u = Unroller::new(&ctx.dual.model, seed, cfg.reset_cycles, cfg.dump_cnf.is_some());
        for &b in &ctx.cut_bits {
            u.set_cut(ctx.dual.value[b.index()]);
            u.set_cut(ctx.dual.known[b.index()]);
        }
        let first = match prop.kind {
            PropKind::User if u.has_reset() => cfg.reset_cycles,
            PropKind::User => 0,
            PropKind::Xprop => cfg.reset_cycles + cfg.settle,
        };
        PropCheck {
            u,
            next: first,
            first,
            assumed: 0,
            bad: None,
        }
    }

    fn assume_upto(&mut self, ctx: &Ctx<'_>, t: usize) {
        while self.assumed <= t {
            let f = self.assumed;
            for &(b, v) in &ctx.pinned {
                let lv = self.u.lit(f, ctx.dual.value[b.index()]);
                let lk = self.u.lit(f, ctx.dual.known[b.index()]);
                self.u.clause(&[if v { lv } else { !lv }]);
                self.u.clause(&[lk]);
            }
            self.assumed += 1;
        }
    }

    fn bad_lit(&mut self, ctx: &Ctx<'_>, prop: &PropertyAst, t: usize) -> Lit {
        if let Some((bt, l)) = self.bad {
            if bt == t {
                return l;
            }
        }
        self.assume_upto(ctx, t);
        let mut uses = Vec::new();
        sig_uses(&prop.expr, &mut uses);
        let mut bits: BTreeMap<SigKey, Vec<Lit>> = BTreeMap::new();
        for (s, known) in uses {
            let key = (s.name.clone(), s.range, known);
            if bits.contains_key(&key) {
                continue;
            }
            let nets = s.select(ctx.model.signal(&s.name).unwrap_or(&[]));
            let rail = if known { &ctx.dual.known } else { &ctx.dual.value };
            let lits = nets.iter().map(|n| self.u.lit(t, rail[n.index()])).collect();
            bits.insert(key, lits);
        }
        let mut alg = LitAlg(&mut self.u);
        let ok = prop
            .expr
            .lower(&mut alg, &mut |s, known| bits[&(s.name.clone(), s.range, known)].clone());
        self.bad = Some((t, !ok));
        !ok
    }

    fn trace(&self, ctx: &Ctx<'_>, prop: &PropertyAst, t: usize) -> Trace {
        let val = |tt: usize, n: NetId, dflt: bool| {
            self.u
                .encoded(tt, n)
                .map_or(dflt, |l| self.u.solver.model_value(l))
        };
        let sim = Simulator::new(ctx.model);
        let reset: BTreeSet<NetId> = ctx.model.reset_inputs().flat_map(|p| p.bits.iter().copied()).collect();
        let inputs = (0..=t)
            .map(|tt| {
                sim.input_bits()
                    .iter()
                    .map(|&b| {
                        let dflt = reset.contains(&b) && tt < ctx.cfg.reset_cycles;
                        val(tt, ctx.dual.value[b.index()], dflt)
                    })
                    .collect()
            })
            .collect();
        let init = ctx
            .model
            .dffs
            .iter()
            .filter_map(|&i| {
                let n = &ctx.model.nodes[i];
                match n.kind {
                    NodeKind::Dff(c) if c.init == Tri::X => {
                        Some((n.output, val(0, ctx.dual.value[n.output.index()], false)))
                    }
                    _ => None,
                }
            })
            .collect();
        let cut = (0..=t)
            .map(|tt| {
                ctx.cut_bits
                    .iter()
                    .map(|&b| {
                        (
                            b,
                            val(tt, ctx.dual.value[b.index()], false),
                            val(tt, ctx.dual.known[b.index()], true),
                        )
                    })
                    .collect()
            })
            .collect();
        Trace {
            property: prop.name.clone(),
            kind: prop.kind,
            inputs,
            init,
            cut,
        }
    }
}

struct Job<'a> {
    prop: &'a PropertyAst,
    seed: u64,
    check: Option<PropCheck<'a>>,
    outcome: Option<PropertyOutcome>,
    effort: u64,
    wall: Duration,
    slice: BudgetSpec,
    last_effort: u64,
    last_wall: Duration,
}

impl<'a> Job<'a> {
    /// Works on the property until it is decided or the slice is spent.
    fn run(&mut self, ctx: &'a Ctx<'a>) {
        self.last_effort = 0;
        self.last_wall = Duration::ZERO;
        if self.outcome.is_some() {
            return;
        }
        let start = Instant::now();
        let pc = self.check.get_or_insert_with(|| PropCheck::new(ctx, self.prop, self.seed));
        let t0 = pc.u.solver.stats().ticks;
        let bound = ctx.cfg.bound;
        let mut outcome = None;
        while pc.next < bound {
            let t = pc.next;
            let bad = pc.bad_lit(ctx, self.prop, t);
            let used = pc.u.solver.stats().ticks - t0;
            let budget = match self.slice {
                BudgetSpec::Effort(e) => Budget::effort(e.saturating_sub(used)),
                BudgetSpec::Wall(d) => Budget::wall(d.saturating_sub(start.elapsed())),
            };
            if budget.effort == Some(0) || budget.wall == Some(Duration::ZERO) {
                break;
            }
            match pc.u.solver.solve_with(&[bad], budget) {
                Status::Sat => {
                    outcome = Some(PropertyOutcome::Fail(pc.trace(ctx, self.prop, t)));
                    break;
                }
                Status::Unsat => {
                    pc.u.clause(&[!bad]);
                    pc.next += 1;
                    debug!("{}: frame {t} safe", self.prop.name);
                }
                Status::Timeout => break,
            }
        }
        if outcome.is_none() && pc.next >= bound {
            outcome = Some(if pc.first >= bound {
                PropertyOutcome::Undetermined(UndeterminedReason::Bound)
            } else {
                PropertyOutcome::Pass(bound)
            });
        }
        self.last_effort = pc.u.solver.stats().ticks - t0;
        self.last_wall = start.elapsed();
        self.effort += self.last_effort;
        self.wall += self.last_wall;
        self.outcome = outcome;
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Checks `props` on `model` under `constraints` within the configured
/// budget. The budget is first split evenly; whatever decided properties
/// leave over is redistributed to the undecided ones until it runs out.
pub fn check(
    model: &FlatModel,
    props: &[PropertyAst],
    constraints: &[Constraint],
    cfg: &BmcConfig,
) -> Result<BmcStatus, BmcError> {
    let started = Instant::now();
    let model = apply_blackboxes(model, constraints)?;
    let mut cut_bits = Vec::new();
    let mut cut_regs = BTreeSet::new();
    for c in constraints {
        if let Constraint::Stopat(r) = c {
            let reg = model.register(r).ok_or_else(|| BmcError::UnknownRegister(r.clone()))?;
            if cut_regs.insert(r.as_str()) {
                cut_bits.extend(reg.bits.iter().copied());
            }
        }
    }
    let mut pinned = Vec::new();
    for c in constraints {
        if let Constraint::Assume { register, value } = c {
            if !cut_regs.contains(register.as_str()) {
                return Err(BmcError::MissingStopat(register.clone()));
            }
            let reg = model.register(register).unwrap();
            if reg.bits.len() < 64 && value >> reg.bits.len() != 0 {
                return Err(BmcError::ValueOverflow {
                    register: register.clone(),
                    value: *value,
                });
            }
            for (i, &b) in reg.bits.iter().enumerate() {
                pinned.push((b, i < 64 && value >> i & 1 == 1));
            }
        }
    }
    let blackboxed: BTreeSet<&str> = model
        .instances
        .iter()
        .filter(|i| i.blackboxed)
        .map(|i| i.name.as_str())
        .collect();
    for p in props {
        if !p.scope.iter().any(|s| blackboxed.contains(s.as_str())) {
            p.check(&model)?;
        }
    }
    let ctx = Ctx {
        model: &model,
        dual: xprop_encode(&model),
        cut_bits,
        pinned,
        cfg,
    };
    let mut jobs: Vec<Job> = props
        .iter()
        .enumerate()
        .map(|(i, p)| Job {
            prop: p,
            seed: cfg.seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            check: None,
            outcome: p
                .scope
                .iter()
                .any(|s| blackboxed.contains(s.as_str()))
                .then_some(PropertyOutcome::Vacuous),
            effort: 0,
            wall: Duration::ZERO,
            slice: cfg.budget,
            last_effort: 0,
            last_wall: Duration::ZERO,
        })
        .collect();

    let mut pool = cfg.budget;
    loop {
        let open = jobs.iter().filter(|j| j.outcome.is_none()).count();
        if open == 0 {
            break;
        }
        let share = pool.split(open);
        if share.too_small() {
            break;
        }
        for j in &mut jobs {
            j.slice = share;
        }
        let c = &ctx;
        crate::par::for_each_mut(&mut jobs, cfg.parallel, |j| j.run(c));
        let e: u64 = jobs.iter().map(|j| j.last_effort).sum();
        let w: Duration = jobs.iter().map(|j| j.last_wall).sum();
        if e == 0 && w.is_zero() {
            break;
        }
        pool = pool.minus(e, w);
    }

    if let Some(dir) = &cfg.dump_cnf {
        std::fs::create_dir_all(dir).map_err(|source| BmcError::Io {
            path: dir.clone(),
            source,
        })?;
        for j in &jobs {
            let Some(cnf) = j.check.as_ref().and_then(|c| c.u.recorded()) else { continue };
            let mut text = format!("c property {}\n", j.prop.name);
            if let Some((t, l)) = j.check.as_ref().and_then(|c| c.bad) {
                text.push_str(&format!("c frame {t} failure literal {}\n", l.to_dimacs()));
            }
            text.push_str(&export_dimacs(cnf));
            let path = dir.join(format!("{}.cnf", sanitize(&j.prop.name)));
            std::fs::write(&path, text).map_err(|source| BmcError::Io { path, source })?;
        }
    }

    let results: Vec<PropertyResult> = jobs
        .into_iter()
        .map(|j| PropertyResult {
            name: j.prop.name.clone(),
            kind: j.prop.kind,
            frames: j.check.as_ref().map_or(0, |c| c.next.saturating_sub(c.first)),
            outcome: j
                .outcome
                .unwrap_or(PropertyOutcome::Undetermined(UndeterminedReason::Timeout)),
            effort: j.effort,
        })
        .collect();
    let effort = results.iter().map(|r| r.effort).sum();
    info!(
        "bmc: {} properties, {} pass, {} fail, {} undetermined, {} vacuous, {effort} ticks",
        results.len(),
        results.iter().filter(|r| r.outcome.label() == "PASS").count(),
        results.iter().filter(|r| r.outcome.label() == "FAIL").count(),
        results.iter().filter(|r| r.outcome.is_undetermined()).count(),
        results.iter().filter(|r| r.outcome.label() == "VACUOUS").count(),
    );
    drop(ctx);
    Ok(BmcStatus {
        results,
        effort,
        wall: started.elapsed(),
        model,
    })
}
