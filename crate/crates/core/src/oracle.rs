//! Brute-force reference for the per-slot controller.
//!
//! [`grid_decide`] minimises the execution objective by scanning uniform grids
//! of CPU frequencies and transmit powers. Its feasible ranges come from float
//! bisection on the constraint predicates themselves, so nothing here reuses
//! the closed forms or root finder of [`crate::solver`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    mobile_delay_energy, server_delay_energy, Decision, DelayEnergy, Mode, SlotState, SystemParams,
};
use crate::solver::{self, RootFindConfig};
use crate::stochastic::{sample_slot, ProcessConfig, RandomSource, SlotSources, BATTERY_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points on the feasible frequency range, end points included.
    pub n_f: usize,
    /// Points on the feasible power range, end points included.
    pub n_p: usize,
}

impl GridSpec {
    pub fn uniform(n: usize) -> Self {
        Self { n_f: n, n_p: n }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n_f < 2 || self.n_p < 2 {
            return Err(OracleError::Grid(*self));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("grid needs at least two points per axis, got n_f = {}, n_p = {}", .0.n_f, .0.n_p)]
    Grid(GridSpec),
    #[error("certification needs at least one state")]
    NoStates,
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Smallest float in `(lo, hi]` with `ok` true, given `ok(hi)` and a monotone
/// false-then-true predicate.
fn first_true<F: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, ok: F) -> f64 {
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Largest float in `[lo, hi)` with `ok` true, given `ok(lo)` and a monotone
/// true-then-false predicate.
fn last_true<F: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, ok: F) -> f64 {
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return lo;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Feasible `[lower, upper]` of an action in `(0, cap]` whose delay falls and
/// whose energy rises with the action.
fn feasible_range<F: Fn(f64) -> Option<DelayEnergy>>(cap: f64, params: &SystemParams, eval: F) -> Option<(f64, f64)> {
    let low_ok = |a: f64| eval(a).is_some_and(|de| de.delay <= params.tau_d && de.energy >= params.e_min);
    let high_ok = |a: f64| eval(a).is_some_and(|de| de.energy <= params.e_max);
    if !low_ok(cap) {
        return None;
    }
    let lower = first_true(0.0, cap, low_ok);
    if !high_ok(lower) {
        return None;
    }
    let upper = if high_ok(cap) { cap } else { last_true(lower, cap, high_ok) };
    Some((lower, upper))
}

pub fn oracle_mobile_range(params: &SystemParams) -> Option<(f64, f64)> {
    feasible_range(params.f_max, params, |f| mobile_delay_energy(f, params).ok())
}

pub fn oracle_server_range(h: f64, params: &SystemParams) -> Option<(f64, f64)> {
    if !(h > 0.0 && h.is_finite()) {
        return None;
    }
    feasible_range(params.p_max, params, |p| server_delay_energy(h, p, params).ok().flatten())
}

fn grid_point(lower: f64, upper: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        upper
    } else {
        lower + (upper - lower) * (i as f64 / (n - 1) as f64)
    }
}

fn scan<F: Fn(f64) -> Option<DelayEnergy>>(
    range: Option<(f64, f64)>,
    n: usize,
    b_tilde: f64,
    params: &SystemParams,
    eval: F,
) -> Option<(f64, f64)> {
    let (lower, upper) = range?;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n {
        let a = grid_point(lower, upper, i, n);
        let Some(de) = eval(a) else { continue };
        if de.delay > params.tau_d || de.energy < params.e_min || de.energy > params.e_max {
            continue;
        }
        // -B~ E + V delay
        let j = -b_tilde * de.energy + params.v * de.delay;
        if best.is_none_or(|(_, bj)| j < bj) {
            best = Some((a, j));
        }
    }
    best
}

/// Grid minimiser of the per-slot objective and its value.
///
/// The harvest is chosen from `{0, e_h}` by the sign of the queue; the returned
/// objective covers the execution part only, as
/// [`solver::SlotEvaluation::objective`] does.
pub fn grid_decide(state: &SlotState, params: &SystemParams, spec: &GridSpec) -> (Decision, f64) {
    let b_tilde = params.virtual_queue(state.b);
    let e = if b_tilde * state.e_h <= 0.0 { state.e_h } else { 0.0 };
    if !state.task {
        return (Decision::drop(e), 0.0);
    }
    let n_f = spec.n_f.max(2);
    let n_p = spec.n_p.max(2);
    let mobile = scan(oracle_mobile_range(params), n_f, b_tilde, params, |f| {
        mobile_delay_energy(f, params).ok()
    });
    let server = scan(oracle_server_range(state.h, params), n_p, b_tilde, params, |p| {
        server_delay_energy(state.h, p, params).ok().flatten()
    });
    let mut best = (Decision::drop(e), params.v * params.phi);
    let candidates = [
        server.map(|(p, j)| (Decision::server(p, e), j)),
        mobile.map(|(f, j)| (Decision::mobile(f, e), j)),
    ];
    // reverse priority so that a later equal candidate (the earlier mode) wins
    for (d, j) in candidates.into_iter().flatten() {
        if j <= best.1 {
            best = (d, j);
        }
    }
    best
}

/// Relative difference scaled by `max(|a|, |b|, V phi)`.
pub fn relative_gap(solver: f64, oracle: f64, params: &SystemParams) -> f64 {
    let scale = solver.abs().max(oracle.abs()).max(params.v * params.phi);
    (solver - oracle).abs() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateComparison {
    pub state: SlotState,
    pub solver_mode: Mode,
    pub oracle_mode: Mode,
    pub solver_objective: f64,
    pub oracle_objective: f64,
    /// `(oracle - solver) / scale`; negative when the grid beat the solver.
    pub signed_gap: f64,
}

impl StateComparison {
    pub fn gap(&self) -> f64 {
        self.signed_gap.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub seed: u64,
    pub n_states: usize,
    pub grid: GridSpec,
    pub threshold: f64,
    pub max_gap: f64,
    pub mean_gap: f64,
    /// Most negative signed gap: how far the grid ever got below the solver.
    pub min_signed_gap: f64,
    pub mode_agreements: usize,
    /// Differing modes whose objectives are within the threshold.
    pub explained_ties: usize,
    /// States with a gap above the threshold, in sampling order.
    pub failures: Vec<StateComparison>,
    pub passed: bool,
}

/// Default relative threshold of [`certify`].
pub const CERTIFY_THRESHOLD: f64 = 1e-3;

/// Sampled test states: channel, harvest and arrivals from the slot sources, the
/// battery uniform on `[0, theta + eh_max]`.
pub fn sample_states(params: &SystemParams, n_states: usize, seed: u64) -> Vec<SlotState> {
    let process = ProcessConfig::from(params);
    let mut sources = SlotSources::from_seed(seed);
    let mut battery = RandomSource::new(seed, BATTERY_STREAM);
    (0..n_states as u64)
        .map(|t| {
            let draw = sample_slot(&mut sources, &process);
            let b = battery.uniform(0.0, params.theta + params.eh_max);
            SlotState { t, task: draw.task, h: draw.h, e_h: draw.e_h, b }
        })
        .collect()
}

pub fn compare_state(
    state: &SlotState,
    params: &SystemParams,
    spec: &GridSpec,
    cfg: &RootFindConfig,
) -> StateComparison {
    let eval = solver::evaluate_slot(state, params, cfg);
    let (od, oj) = grid_decide(state, params, spec);
    let scale = eval.objective.abs().max(oj.abs()).max(params.v * params.phi);
    StateComparison {
        state: *state,
        solver_mode: eval.decision.mode,
        oracle_mode: od.mode,
        solver_objective: eval.objective,
        oracle_objective: oj,
        signed_gap: (oj - eval.objective) / scale,
    }
}

pub fn certify(params: &SystemParams, n_states: usize, seed: u64, spec: &GridSpec) -> Result<CertificationReport, OracleError> {
    certify_with(params, n_states, seed, spec, CERTIFY_THRESHOLD, &RootFindConfig::default())
}

pub fn certify_with(
    params: &SystemParams,
    n_states: usize,
    seed: u64,
    spec: &GridSpec,
    threshold: f64,
    cfg: &RootFindConfig,
) -> Result<CertificationReport, OracleError> {
    if n_states == 0 {
        return Err(OracleError::NoStates);
    }
    spec.validate()?;
    params.validate()?;
    let states = sample_states(params, n_states, seed);
    let rows: Vec<StateComparison> = states.par_iter().map(|s| compare_state(s, params, spec, cfg)).collect();

    let max_gap = rows.iter().map(StateComparison::gap).fold(0.0, f64::max);
    let mean_gap = rows.iter().map(StateComparison::gap).sum::<f64>() / rows.len() as f64;
    let min_signed_gap = rows.iter().map(|r| r.signed_gap).fold(f64::INFINITY, f64::min);
    let mode_agreements = rows.iter().filter(|r| r.solver_mode == r.oracle_mode).count();
    let explained_ties = rows
        .iter()
        .filter(|r| r.solver_mode != r.oracle_mode && r.gap() <= threshold)
        .count();
    let failures: Vec<StateComparison> = rows.into_iter().filter(|r| r.gap() > threshold).collect();
    Ok(CertificationReport {
        seed,
        n_states,
        grid: *spec,
        threshold,
        max_gap,
        mean_gap,
        min_signed_gap,
        mode_agreements,
        explained_ties,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> SystemParams {
        SystemParams::baseline()
    }

    #[test]
    fn predicate_bisection_is_tight() {
        let x = first_true(0.0, 10.0, |x| x >= 3.0);
        assert_eq!(x, 3.0);
        let y = last_true(0.0, 10.0, |x| x * x <= 2.0);
        assert!(y * y <= 2.0 && y.next_up() * y.next_up() > 2.0);
    }

    #[test]
    fn ranges_agree_with_solver_intervals() {
        let p = defaults();
        let (lo, hi) = oracle_mobile_range(&p).unwrap();
        let iv = solver::mobile_interval(&p).unwrap();
        assert!((lo - iv.lower).abs() <= 4.0 * f64::EPSILON * lo);
        assert_eq!(hi, iv.upper);
        for h in [2e-12, 1.6e-11, 1e-10] {
            let (lo, hi) = oracle_server_range(h, &p).unwrap();
            let iv = solver::server_interval(h, &p, &RootFindConfig::default()).unwrap();
            assert!((lo - iv.lower).abs() / lo < 1e-9, "h = {h}");
            assert!((hi - iv.upper).abs() / hi < 1e-9, "h = {h}");
        }
    }

    #[test]
    fn infeasible_modes_drop_at_v_phi() {
        let p = defaults().with_control(1.6e-4, 2e-4);
        // deep fade kills offloading, E_min kills local execution
        let s = SlotState { t: 0, task: true, h: 1e-16, e_h: 0.0, b: 0.01 };
        let (d, j) = grid_decide(&s, &p, &GridSpec::uniform(100));
        assert_eq!(d.mode, Mode::Drop);
        assert_eq!(j, p.v * p.phi);
    }

    #[test]
    fn no_task_is_free() {
        let p = defaults();
        let s = SlotState { t: 0, task: false, h: 1e-11, e_h: 1e-5, b: 0.0 };
        let (d, j) = grid_decide(&s, &p, &GridSpec::uniform(10));
        assert_eq!(d, Decision::drop(1e-5));
        assert_eq!(j, 0.0);
    }

    #[test]
    fn boundary_optimum_is_reproduced_exactly() {
        // B~ >= 0: the local optimum is the upper end point, which every grid contains
        let p = defaults();
        let s = SlotState { t: 0, task: true, h: 1e-14, e_h: 0.0, b: p.theta + 1e-6 };
        let c = compare_state(&s, &p, &GridSpec::uniform(7), &RootFindConfig::default());
        assert_eq!(c.solver_mode, Mode::Mobile);
        assert_eq!(c.oracle_mode, Mode::Mobile);
        assert_eq!(c.signed_gap, 0.0);
    }

    #[test]
    fn fine_grid_matches_solver_and_refines() {
        let p = defaults();
        // interior offloading optimum
        let s = SlotState { t: 0, task: true, h: 5e-12, e_h: 0.0, b: 0.012 };
        let cfg = RootFindConfig::default();
        // nested grids: 1000, 2000 and 4000 intervals
        let gaps: Vec<f64> = [1_001, 2_001, 4_001]
            .iter()
            .map(|&n| compare_state(&s, &p, &GridSpec::uniform(n), &cfg).signed_gap)
            .collect();
        assert!(gaps.iter().all(|&g| g >= -1e-12), "{gaps:?}");
        assert!(gaps[2] <= gaps[0], "{gaps:?}");
        let fine = compare_state(&s, &p, &GridSpec::uniform(1_000_000), &cfg);
        assert!(fine.gap() < 1e-4, "{fine:?}");
    }

    #[test]
    fn certify_is_deterministic() {
        let p = defaults();
        let a = certify(&p, 200, 5, &GridSpec::uniform(2_000)).unwrap();
        let b = certify(&p, 200, 5, &GridSpec::uniform(2_000)).unwrap();
        assert_eq!(a, b);
        assert!(a.passed, "{a:?}");
        assert!(a.min_signed_gap >= -1e-9);
    }

    #[test]
    fn certify_rejects_bad_inputs() {
        let p = defaults();
        assert_eq!(certify(&p, 0, 1, &GridSpec::uniform(10)), Err(OracleError::NoStates));
        assert!(matches!(certify(&p, 1, 1, &GridSpec { n_f: 1, n_p: 5 }), Err(OracleError::Grid(_))));
    }

    #[test]
    fn sampled_batteries_cover_the_band() {
        let p = defaults();
        let states = sample_states(&p, 5000, 2);
        let hi = p.theta + p.eh_max;
        assert!(states.iter().all(|s| (0.0..=hi).contains(&s.b)));
        let mean = states.iter().map(|s| s.b).sum::<f64>() / 5000.0;
        assert!((mean - hi / 2.0).abs() / hi < 0.02);
    }
}
