use std::f64::consts::LN_2;

use crate::model::{offload_energy_floor, SystemParams};

use super::root::{bisect, monotone_root, RootError, RootFindConfig, Side};
use super::{nudge_up, Interval, ModeEvaluation};

fn rate(h: f64, p: f64, params: &SystemParams) -> f64 {
    params.omega * (h * p / params.sigma).ln_1p() / LN_2
}

/// Battery draw `p L / r(h, p)` of offloading at power `p`.
pub fn offload_energy(h: f64, p: f64, params: &SystemParams) -> f64 {
    p * (params.task_bits / rate(h, p, params))
}

/// Minimum power delivering L bits within the deadline:
/// `(2^(L / (omega tau_d)) - 1) sigma / h`, rounded up so the deadline holds.
pub fn deadline_power(h: f64, params: &SystemParams) -> f64 {
    let spectral = params.task_bits / (params.omega * params.tau_d);
    let p = (spectral * LN_2).exp_m1() * params.sigma / h;
    nudge_up(p, |p| params.task_bits / rate(h, p, params) <= params.tau_d)
}

/// Power at which the offloading energy equals `energy`.
///
/// Requires `energy` above [`offload_energy_floor`]; `Side::Below` yields a
/// power whose energy does not exceed `energy`, `Side::Above` one whose energy
/// is at least `energy`.
pub fn power_for_energy(
    h: f64,
    energy: f64,
    side: Side,
    params: &SystemParams,
    cfg: &RootFindConfig,
) -> Result<f64, RootError> {
    // normalised target k = E omega h / (sigma L) solves x / log2(1 + x) = k with x = h p / sigma
    let k = energy * params.omega * h / (params.sigma * params.task_bits);
    let guess = (k.max(1.0)) * params.sigma / h;
    let g = |p: f64| offload_energy(h, p, params);
    debug_assert!(
        g(0.5 * guess) < g(guess) && g(guess) < g(2.0 * guess),
        "offloading energy must increase with power"
    );
    monotone_root(g, energy, guess, side, cfg)
}

/// `-B~ log2(1 + h p / sigma) - h (V - B~ p) / ((sigma + h p) ln 2)`: numerator of
/// the derivative of the offloading objective.
pub fn xi(h: f64, p: f64, b_tilde: f64, params: &SystemParams) -> f64 {
    -b_tilde * (h * p / params.sigma).ln_1p() / LN_2
        - h * (params.v - b_tilde * p) / ((params.sigma + h * p) * LN_2)
}

/// `(-B~ p + V) L / r(h, p)`.
pub fn server_objective(h: f64, p: f64, b_tilde: f64, params: &SystemParams) -> f64 {
    (-b_tilde * p + params.v) * params.task_bits / rate(h, p, params)
}

fn settle_root(result: Result<f64, RootError>) -> Option<f64> {
    match result {
        Ok(p) => Some(p),
        Err(RootError::NoConvergence { best, .. }) => Some(best),
        Err(RootError::NoBracket { .. }) => None,
    }
}

/// Feasible transmit powers for channel `h`: deadline, output-energy window and
/// power cap. `None` when the window is empty (including deep fades where even
/// a vanishing power costs more than E_max).
pub fn server_interval(h: f64, params: &SystemParams, cfg: &RootFindConfig) -> Option<Interval> {
    let floor = offload_energy_floor(h, params);
    if floor >= params.e_max {
        return None;
    }
    let p_deadline = deadline_power(h, params);
    let lower = if floor < params.e_min {
        let p_e_min = settle_root(power_for_energy(h, params.e_min, Side::Above, params, cfg))?;
        p_deadline.max(p_e_min)
    } else {
        p_deadline
    };
    let p_e_max = settle_root(power_for_energy(h, params.e_max, Side::Below, params, cfg))?;
    let upper = params.p_max.min(p_e_max);
    (upper > 0.0 && lower <= upper).then_some(Interval { lower, upper })
}

/// Optimal offloading power for the current queue backlog and channel.
pub fn solve_server(
    b_tilde: f64,
    h: f64,
    params: &SystemParams,
    cfg: &RootFindConfig,
) -> ModeEvaluation {
    if !(h > 0.0 && h.is_finite()) {
        return ModeEvaluation::infeasible();
    }
    let Some(interval) = server_interval(h, params, cfg) else {
        return ModeEvaluation::infeasible();
    };
    let p = if b_tilde >= 0.0 {
        interval.upper
    } else if xi(h, interval.upper, b_tilde, params) <= 0.0 {
        // stationary point at or beyond the cap
        interval.upper
    } else if xi(h, interval.lower, b_tilde, params) >= 0.0 {
        interval.lower
    } else {
        let root = bisect(
            |p| xi(h, p, b_tilde, params),
            0.0,
            interval.lower,
            interval.upper,
            Side::Nearest,
            cfg,
        );
        match root {
            Ok(p) => p,
            Err(RootError::NoConvergence { best, .. }) => best,
            Err(RootError::NoBracket { .. }) => unreachable!("bisect never reports a bracket error"),
        }
    };
    let r = rate(h, p, params);
    let delay = params.task_bits / r;
    let energy = p * delay;
    if !(delay <= params.tau_d && energy >= params.e_min && energy <= params.e_max) {
        return ModeEvaluation::infeasible();
    }
    ModeEvaluation {
        feasible: true,
        objective: server_objective(h, p, b_tilde, params),
        action: p,
        delay,
        energy,
        interval: Some(interval),
    }
}
