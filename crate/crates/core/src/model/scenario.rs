use serde::{Deserialize, Serialize};

use super::{derive_workload, ModelError, SystemParams};

/// How the drift-plus-penalty weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// V given directly (J^2/s).
    V(f64),
    /// Battery capacity C_B (J); V is the largest value whose battery bound
    /// `theta + E_H^max` fits in C_B.
    BatteryCapacity(f64),
}

/// Physical inputs from which [`SystemParams`] is derived.
///
/// This is the level at which experiments are described: distance and mean
/// harvesting power rather than mean gain and per-slot harvest bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    pub rho: f64,
    pub task_bits: f64,
    pub cycles_per_byte: f64,
    pub tau: f64,
    pub tau_d: f64,
    pub phi: f64,
    pub kappa: f64,
    pub f_max: f64,
    pub p_max: f64,
    pub omega: f64,
    pub sigma: f64,
    /// Path-loss constant, linear scale.
    pub g0: f64,
    /// Device-server distance (m).
    pub distance: f64,
    /// Mean harvesting power (W).
    pub p_h: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub control: Control,
    /// Explicit perturbation; `None` means the lower bound.
    pub theta: Option<f64>,
}

impl Default for ScenarioInputs {
    fn default() -> Self {
        Self {
            rho: 0.6,
            task_bits: 1000.0,
            cycles_per_byte: 5900.0,
            tau: 2e-3,
            tau_d: 2e-3,
            phi: 2e-3,
            kappa: 1e-28,
            f_max: 1.5e9,
            p_max: 1.0,
            omega: 1e6,
            sigma: 1e-13,
            g0: 1e-4,
            distance: 50.0,
            p_h: 12e-3,
            e_min: 0.02e-3,
            e_max: 2e-3,
            control: Control::V(1.6e-4),
            theta: None,
        }
    }
}

/// `E_H^max = 2 P_H tau` so that a uniform harvest on `[0, E_H^max]` averages `P_H tau`.
pub fn eh_max_from_power(p_h: f64, tau: f64) -> f64 {
    2.0 * p_h * tau
}

/// Mean channel gain `g0 d^-4`.
pub fn mean_gain(g0: f64, distance: f64) -> f64 {
    g0 * distance.powi(-4)
}

/// `V = (C_B - E_H^max - E~_max) E_min / phi`; requires `C_B > E~_max + E_H^max`.
pub fn v_from_capacity(
    capacity: f64,
    eh_max: f64,
    e_tilde_max: f64,
    e_min: f64,
    phi: f64,
) -> Result<f64, ModelError> {
    let headroom = capacity - eh_max - e_tilde_max;
    if !(headroom > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "battery_capacity",
            reason: format!(
                "C_B = {capacity} must exceed E~_max + E_H^max = {}",
                e_tilde_max + eh_max
            ),
        });
    }
    Ok(headroom * e_min / phi)
}

impl ScenarioInputs {
    pub fn to_params(&self) -> Result<SystemParams, ModelError> {
        for (name, value) in [("g0", self.g0), ("distance", self.distance)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if !(self.p_h >= 0.0 && self.p_h.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "p_h",
                reason: format!("must be non-negative, got {}", self.p_h),
            });
        }
        let workload = derive_workload(self.task_bits, self.cycles_per_byte)?;
        let mut params = SystemParams {
            rho: self.rho,
            task_bits: self.task_bits,
            cycles_per_byte: self.cycles_per_byte,
            workload,
            tau: self.tau,
            tau_d: self.tau_d,
            phi: self.phi,
            kappa: self.kappa,
            f_max: self.f_max,
            p_max: self.p_max,
            omega: self.omega,
            sigma: self.sigma,
            h_mean: mean_gain(self.g0, self.distance),
            eh_max: eh_max_from_power(self.p_h, self.tau),
            e_min: self.e_min,
            e_max: self.e_max,
            v: 1.0,
            theta: 0.0,
        };
        params.v = match self.control {
            Control::V(v) => v,
            Control::BatteryCapacity(c_b) => v_from_capacity(
                c_b,
                params.eh_max,
                params.e_tilde_max(),
                params.e_min,
                params.phi,
            )?,
        };
        params.theta = self.theta.unwrap_or_else(|| params.theta_min());
        params.validate()?;
        Ok(params)
    }
}
