use serde::{Deserialize, Serialize};

use super::SystemParams;

/// Constants of the worst-case gap between the online controller and the
/// optimal long-run cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Drift bound `((E_H^max)^2 + E~_max^2) / 2` (J^2).
    pub c: f64,
    /// Loss from the E_min tightening (s).
    pub nu: f64,
    /// `nu + C / V` (s).
    pub gap: f64,
    /// Channel threshold below which offloading cannot meet the deadline with E_min.
    pub eta: f64,
    /// `kappa W^3 tau_d^-2`: least local energy meeting the deadline (J).
    pub e_min_deadline: f64,
    /// Local delay when spending exactly E_min (s).
    pub tau_at_e_min: f64,
}

/// CDF of an exponential channel gain with the given mean.
pub fn exponential_cdf(x: f64, mean: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x / mean).exp_m1()
    }
}

pub fn bound_constants(params: &SystemParams) -> BoundConstants {
    let e_tilde = params.e_tilde_max();
    let c = 0.5 * (params.eh_max * params.eh_max + e_tilde * e_tilde);

    let tau_d = params.tau_d;
    let w = params.workload;
    let eta = (2f64.powf(params.task_bits / (tau_d * params.omega)) - 1.0) * params.sigma * tau_d
        / params.e_min;
    let e_min_deadline = params.kappa * w.powi(3) / (tau_d * tau_d);
    let tau_at_e_min = params.kappa.sqrt() * w.powf(1.5) / params.e_min.sqrt();

    // exp(-eta/h_mean) evaluated directly keeps precision once it underflows 1 - F
    let tail = (-eta / params.h_mean).exp();
    let local_term = if params.e_min >= e_min_deadline {
        params.phi - tau_at_e_min
    } else {
        0.0
    };
    let nu = params.rho * (params.phi * tail + local_term);

    BoundConstants {
        c,
        nu,
        gap: nu + c / params.v,
        eta,
        e_min_deadline,
        tau_at_e_min,
    }
}
