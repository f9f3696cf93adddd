//! Time-slot simulation: sample the exogenous state, ask the policy, apply the
//! battery dynamics, check invariants, and reduce the result to metrics.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    bound_constants, settle, BoundConstants, Control, Decision, Mode, ModelError, ScenarioInputs,
    SlotOutcome, SlotState, SystemParams,
};
use crate::policies::{Policy, PolicyKind};
use crate::solver::RootFindConfig;
use crate::stochastic::{sample_slot, ProcessConfig, SlotSources};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("invariant violated by {policy} at slot {t}: {what}")]
    Invariant { policy: PolicyKind, t: u64, what: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot reduce an empty trace")]
    EmptyTrace,
    #[error("invalid run setup: {0}")]
    Setup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub state: SlotState,
    pub decision: Decision,
    pub outcome: SlotOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub policy: PolicyKind,
    pub params_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: RunMeta,
    pub records: Vec<SlotRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Stable FNV-1a digest over the bit patterns of every parameter.
pub fn params_digest(params: &SystemParams) -> String {
    let fields = [
        params.rho,
        params.task_bits,
        params.cycles_per_byte,
        params.workload,
        params.tau,
        params.tau_d,
        params.phi,
        params.kappa,
        params.f_max,
        params.p_max,
        params.omega,
        params.sigma,
        params.h_mean,
        params.eh_max,
        params.e_min,
        params.e_max,
        params.v,
        params.theta,
    ];
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in fields.iter().flat_map(|x| x.to_bits().to_le_bytes()) {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

fn check_slot(
    kind: PolicyKind,
    params: &SystemParams,
    state: &SlotState,
    decision: &Decision,
    outcome: &SlotOutcome,
) -> Result<(), EngineError> {
    let fail = |what: String| Err(EngineError::Invariant { policy: kind, t: state.t, what });
    if !state.task && decision.mode != Mode::Drop {
        return fail(format!("{:?} chosen with no task", decision.mode));
    }
    if outcome.energy_used > state.b {
        return fail(format!("energy causality: drew {} J from {} J", outcome.energy_used, state.b));
    }
    if !(decision.e >= 0.0 && decision.e <= state.e_h) {
        return fail(format!("harvested {} J of {} J available", decision.e, state.e_h));
    }
    if decision.mode != Mode::Drop && outcome.delay > params.tau_d {
        return fail(format!("deadline: delay {} s exceeds {} s", outcome.delay, params.tau_d));
    }
    if outcome.energy_used > params.e_max {
        return fail(format!("discharge limit: drew {} J > E_max", outcome.energy_used));
    }
    if !(0.0..=params.phi).contains(&outcome.cost) {
        return fail(format!("cost {} outside [0, phi]", outcome.cost));
    }
    if kind == PolicyKind::Lodco {
        let ceiling = params.theta + params.eh_max;
        if !(outcome.b_next >= 0.0 && outcome.b_next <= ceiling) {
            return fail(format!("battery {} J outside [0, {ceiling}]", outcome.b_next));
        }
        let expected_harvest = if state.b <= params.theta { state.e_h } else { 0.0 };
        if decision.e != expected_harvest {
            return fail(format!("harvested {} J, threshold rule gives {expected_harvest} J", decision.e));
        }
        let used = outcome.energy_used;
        if used != 0.0 && !(params.e_min..=params.e_max).contains(&used) {
            return fail(format!("battery output {used} J outside {{0}} U [E_min, E_max]"));
        }
    }
    Ok(())
}

/// Drives one run, handing every checked slot to `sink`.
pub fn simulate<F: FnMut(&SlotRecord)>(
    policy: &Policy,
    params: &SystemParams,
    slots: u64,
    seed: u64,
    mut sink: F,
) -> Result<(), EngineError> {
    if slots == 0 {
        return Err(EngineError::Setup("a run needs at least one slot".into()));
    }
    params.validate()?;
    let process = ProcessConfig::from(params);
    let mut sources = SlotSources::from_seed(seed);
    let mut battery = 0.0;
    for t in 0..slots {
        let draw = sample_slot(&mut sources, &process);
        let state = SlotState { t, task: draw.task, h: draw.h, e_h: draw.e_h, b: battery };
        let decision = policy.decide(&state, params);
        let outcome = settle(&state, &decision, params)?;
        check_slot(policy.kind, params, &state, &decision, &outcome)?;
        sink(&SlotRecord { state, decision, outcome });
        battery = outcome.b_next;
    }
    Ok(())
}

/// Full trace of one run starting from an empty battery.
pub fn run(kind: PolicyKind, params: &SystemParams, slots: u64, seed: u64) -> Result<Trace, EngineError> {
    run_with(&Policy::from(kind), params, slots, seed)
}

pub fn run_with(policy: &Policy, params: &SystemParams, slots: u64, seed: u64) -> Result<Trace, EngineError> {
    let mut records = Vec::with_capacity(slots as usize);
    simulate(policy, params, slots, seed, |r| records.push(*r))?;
    Ok(Trace {
        meta: RunMeta { seed, policy: policy.kind, params_digest: params_digest(params) },
        records,
    })
}

/// Additive accumulators behind [`RunMetrics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSums {
    pub slots: u64,
    pub cost: f64,
    pub requested: u64,
    pub mobile: u64,
    pub server: u64,
    pub dropped: u64,
    /// Total completion time of executed tasks.
    pub completion: f64,
    pub battery_min: f64,
    pub battery_max: f64,
}

impl Default for MetricSums {
    fn default() -> Self {
        Self {
            slots: 0,
            cost: 0.0,
            requested: 0,
            mobile: 0,
            server: 0,
            dropped: 0,
            completion: 0.0,
            battery_min: f64::INFINITY,
            battery_max: f64::NEG_INFINITY,
        }
    }
}

impl MetricSums {
    pub fn push(&mut self, record: &SlotRecord) {
        self.slots += 1;
        self.cost += record.outcome.cost;
        self.battery_min = self.battery_min.min(record.state.b);
        self.battery_max = self.battery_max.max(record.state.b);
        if record.state.task {
            self.requested += 1;
            match record.decision.mode {
                Mode::Mobile => self.mobile += 1,
                Mode::Server => self.server += 1,
                Mode::Drop => self.dropped += 1,
            }
            if record.decision.mode != Mode::Drop {
                self.completion += record.outcome.delay;
            }
        }
    }

    pub fn merge(&mut self, other: &MetricSums) {
        self.slots += other.slots;
        self.cost += other.cost;
        self.requested += other.requested;
        self.mobile += other.mobile;
        self.server += other.server;
        self.dropped += other.dropped;
        self.completion += other.completion;
        self.battery_min = self.battery_min.min(other.battery_min);
        self.battery_max = self.battery_max.max(other.battery_max);
    }

    pub fn executed(&self) -> u64 {
        self.mobile + self.server
    }

    pub fn finish(&self, running_avg_cost: Vec<f64>) -> RunMetrics {
        let requested = self.requested as f64;
        let executed = self.executed();
        RunMetrics {
            slots: self.slots,
            requested: self.requested,
            executed,
            dropped: self.dropped,
            avg_cost: self.cost / self.slots as f64,
            avg_completion: (executed > 0).then(|| self.completion / executed as f64),
            drop_ratio: (self.requested > 0).then(|| self.dropped as f64 / requested),
            mode_shares: (self.requested > 0).then(|| ModeShares {
                mobile: self.mobile as f64 / requested,
                server: self.server as f64 / requested,
                drop: self.dropped as f64 / requested,
            }),
            battery_min: self.battery_min,
            battery_max: self.battery_max,
            running_avg_cost,
        }
    }
}

/// Fractions of requested tasks by mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeShares {
    pub mobile: f64,
    pub server: f64,
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub slots: u64,
    pub requested: u64,
    pub executed: u64,
    pub dropped: u64,
    /// Mean execution cost over all slots (s).
    pub avg_cost: f64,
    /// Mean completion time of executed tasks; absent when none ran.
    pub avg_completion: Option<f64>,
    /// Dropped over requested; absent when nothing was requested.
    pub drop_ratio: Option<f64>,
    pub mode_shares: Option<ModeShares>,
    pub battery_min: f64,
    pub battery_max: f64,
    /// Running average of the cost up to each slot; empty for streamed runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub running_avg_cost: Vec<f64>,
}

pub fn sums(records: &[SlotRecord]) -> MetricSums {
    let mut s = MetricSums::default();
    records.iter().for_each(|r| s.push(r));
    s
}

pub fn reduce(trace: &Trace) -> Result<RunMetrics, EngineError> {
    reduce_with_warmup(trace, 0)
}

/// Metrics over the slots after the first `warmup`.
pub fn reduce_with_warmup(trace: &Trace, warmup: u64) -> Result<RunMetrics, EngineError> {
    let tail = trace.records.get(warmup as usize..).unwrap_or(&[]);
    if tail.is_empty() {
        return Err(EngineError::EmptyTrace);
    }
    let mut total = 0.0;
    let running = tail
        .iter()
        .enumerate()
        .map(|(i, r)| {
            total += r.outcome.cost;
            total / (i + 1) as f64
        })
        .collect();
    Ok(sums(tail).finish(running))
}

/// Metrics of one run without materialising the trace.
pub fn run_metrics(
    policy: &Policy,
    params: &SystemParams,
    slots: u64,
    seed: u64,
    warmup: u64,
) -> Result<RunMetrics, EngineError> {
    if warmup >= slots {
        return Err(EngineError::Setup(format!("warm-up {warmup} leaves no slots out of {slots}")));
    }
    let mut s = MetricSums::default();
    simulate(policy, params, slots, seed, |r| {
        if r.state.t >= warmup {
            s.push(r);
        }
    })?;
    Ok(s.finish(Vec::new()))
}

/// Scenario quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    V,
    EMin,
    Rho,
    PH,
    TauD,
    D,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::V, Axis::EMin, Axis::Rho, Axis::PH, Axis::TauD, Axis::D];

    pub fn name(self) -> &'static str {
        match self {
            Axis::V => "v",
            Axis::EMin => "e_min",
            Axis::Rho => "rho",
            Axis::PH => "p_h",
            Axis::TauD => "tau_d",
            Axis::D => "d",
        }
    }

    pub fn apply(self, inputs: &mut ScenarioInputs, value: f64) {
        match self {
            Axis::V => {
                inputs.control = Control::V(value);
                inputs.theta = None;
            }
            Axis::EMin => {
                inputs.e_min = value;
                inputs.theta = None;
            }
            Axis::Rho => inputs.rho = value,
            Axis::PH => inputs.p_h = value,
            Axis::TauD => inputs.tau_d = value,
            Axis::D => inputs.distance = value,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            format!("unknown sweep axis `{s}` (expected one of v, e_min, rho, p_h, tau_d, d)")
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValues {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub policies: Vec<PolicyKind>,
    pub base: ScenarioInputs,
    pub axis: Option<AxisValues>,
    /// Second axis crossed with the first (e.g. two arrival rates per figure).
    pub series: Option<AxisValues>,
    pub slots: u64,
    pub seeds: Vec<u64>,
    pub warmup: u64,
    /// Worker threads; 0 picks the machine default.
    pub workers: usize,
    pub root: RootFindConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub metrics: RunMetrics,
}

/// Seed-aggregated statistics of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub avg_cost_mean: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub avg_cost_std: f64,
    pub avg_completion: Option<f64>,
    pub drop_ratio: Option<f64>,
    pub mode_shares: Option<ModeShares>,
    pub battery_min: f64,
    pub battery_max: f64,
    pub battery_max_mean: f64,
}

impl CellSummary {
    pub fn from_runs(runs: &[SeedRun]) -> Self {
        let n = runs.len() as f64;
        let costs: Vec<f64> = runs.iter().map(|r| r.metrics.avg_cost).collect();
        let mean = costs.iter().sum::<f64>() / n;
        let std = if runs.len() > 1 {
            (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let requested: u64 = runs.iter().map(|r| r.metrics.requested).sum();
        let executed: u64 = runs.iter().map(|r| r.metrics.executed).sum();
        let dropped: u64 = runs.iter().map(|r| r.metrics.dropped).sum();
        let completion: f64 = runs
            .iter()
            .filter_map(|r| r.metrics.avg_completion.map(|c| c * r.metrics.executed as f64))
            .sum();
        let shares = |f: fn(&ModeShares) -> f64| {
            runs.iter()
                .filter_map(|r| r.metrics.mode_shares.as_ref().map(|s| f(s) * r.metrics.requested as f64))
                .sum::<f64>()
                / requested as f64
        };
        Self {
            avg_cost_mean: mean,
            avg_cost_std: std,
            avg_completion: (executed > 0).then(|| completion / executed as f64),
            drop_ratio: (requested > 0).then(|| dropped as f64 / requested as f64),
            mode_shares: (requested > 0).then(|| ModeShares {
                mobile: shares(|s| s.mobile),
                server: shares(|s| s.server),
                drop: shares(|s| s.drop),
            }),
            battery_min: runs.iter().map(|r| r.metrics.battery_min).fold(f64::INFINITY, f64::min),
            battery_max: runs.iter().map(|r| r.metrics.battery_max).fold(f64::NEG_INFINITY, f64::max),
            battery_max_mean: runs.iter().map(|r| r.metrics.battery_max).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub policy: PolicyKind,
    pub axis_value: Option<f64>,
    pub series_value: Option<f64>,
    pub params: SystemParams,
    pub bounds: BoundConstants,
    pub summary: CellSummary,
    pub runs: Vec<SeedRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: Option<Axis>,
    pub series_axis: Option<Axis>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn cell(&self, policy: PolicyKind, axis_value: Option<f64>, series_value: Option<f64>) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.policy == policy && c.axis_value == axis_value && c.series_value == series_value)
    }
}

/// (policy, axis value, series value, parameters) of one sweep cell.
pub type PlannedCell = (PolicyKind, Option<f64>, Option<f64>, SystemParams);

/// Parameters of every cell of a sweep, validated before anything runs.
pub fn plan_cells(spec: &SweepSpec) -> Result<Vec<PlannedCell>, EngineError> {
    if spec.policies.is_empty() || spec.seeds.is_empty() {
        return Err(EngineError::Setup("a sweep needs at least one policy and one seed".into()));
    }
    if spec.warmup >= spec.slots {
        return Err(EngineError::Setup(format!(
            "warm-up {} leaves no slots out of {}",
            spec.warmup, spec.slots
        )));
    }
    let values = |a: &Option<AxisValues>| -> Vec<Option<f64>> {
        match a {
            Some(av) => av.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    };
    let mut cells = Vec::new();
    for &policy in &spec.policies {
        for series_value in values(&spec.series) {
            for axis_value in values(&spec.axis) {
                let mut inputs = spec.base;
                if let (Some(s), Some(v)) = (&spec.series, series_value) {
                    s.axis.apply(&mut inputs, v);
                }
                if let (Some(a), Some(v)) = (&spec.axis, axis_value) {
                    a.axis.apply(&mut inputs, v);
                }
                cells.push((policy, axis_value, series_value, inputs.to_params()?));
            }
        }
    }
    Ok(cells)
}

/// Runs the Cartesian product of policies, axis values and seeds.
///
/// Cells come back in (policy, series value, axis value) order and runs within a
/// cell in seed order, independent of the worker count.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable, EngineError> {
    let cells = plan_cells(spec)?;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| spec.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let execute = || {
        jobs.par_iter()
            .map(|&(c, seed)| {
                let (kind, _, _, params) = &cells[c];
                let policy = Policy { kind: *kind, root: spec.root };
                run_metrics(&policy, params, spec.slots, seed, spec.warmup).map(|m| SeedRun { seed, metrics: m })
            })
            .collect::<Result<Vec<_>, _>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| EngineError::Setup(e.to_string()))?;
    let mut results = pool.install(execute)?.into_iter();

    let per_cell = spec.seeds.len();
    let cells = cells
        .into_iter()
        .map(|(policy, axis_value, series_value, params)| {
            let runs: Vec<SeedRun> = results.by_ref().take(per_cell).collect();
            SweepCell {
                policy,
                axis_value,
                series_value,
                params,
                bounds: bound_constants(&params),
                summary: CellSummary::from_runs(&runs),
                runs,
            }
        })
        .collect();
    Ok(SweepTable {
        axis: spec.axis.as_ref().map(|a| a.axis),
        series_axis: spec.series.as_ref().map(|a| a.axis),
        cells,
    })
}
