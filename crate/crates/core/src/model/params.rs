use serde::{Deserialize, Serialize};

use super::ModelError;

/// Physical and control constants of one device/server pair.
///
/// All quantities are SI. `workload` is derived from `task_bits` and
/// `cycles_per_byte` and `theta` is normally the perturbation lower bound, so
/// build instances through [`SystemParams::baseline`] or
/// [`super::ScenarioInputs::to_params`] and adjust with the `with_*` helpers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Task arrival probability per slot.
    pub rho: f64,
    /// Task input size in bits.
    pub task_bits: f64,
    /// Workload coefficient in CPU cycles per input byte.
    pub cycles_per_byte: f64,
    /// CPU cycles needed for one task.
    pub workload: f64,
    /// Slot length (s).
    pub tau: f64,
    /// Execution deadline (s).
    pub tau_d: f64,
    /// Drop penalty (s).
    pub phi: f64,
    /// Effective switched capacitance.
    pub kappa: f64,
    /// Maximum CPU-cycle frequency (Hz).
    pub f_max: f64,
    /// Maximum transmit power (W).
    pub p_max: f64,
    /// Bandwidth (Hz).
    pub omega: f64,
    /// Receiver noise power (W).
    pub sigma: f64,
    /// Mean channel power gain.
    pub h_mean: f64,
    /// Maximum harvestable energy per slot (J).
    pub eh_max: f64,
    /// Lower bound on non-zero battery output per slot (J).
    pub e_min: f64,
    /// Upper bound on battery output per slot (J).
    pub e_max: f64,
    /// Drift-plus-penalty weight (J^2/s).
    pub v: f64,
    /// Battery set-point of the virtual energy queue (J).
    pub theta: f64,
}

/// `ceil(L / 8) * X`: cycles for a task of `task_bits` bits at `cycles_per_byte`.
pub fn derive_workload(task_bits: f64, cycles_per_byte: f64) -> Result<f64, ModelError> {
    if !(task_bits > 0.0 && task_bits.is_finite()) {
        return Err(ModelError::InvalidParameter {
            name: "task_bits",
            reason: format!("must be positive and finite, got {task_bits}"),
        });
    }
    if !(cycles_per_byte > 0.0 && cycles_per_byte.is_finite()) {
        return Err(ModelError::InvalidParameter {
            name: "cycles_per_byte",
            reason: format!("must be positive and finite, got {cycles_per_byte}"),
        });
    }
    Ok((task_bits / 8.0).ceil() * cycles_per_byte)
}

impl SystemParams {
    /// Operating point used throughout the evaluation: 1000-bit tasks at 5900
    /// cycles/byte, d = 50 m, P_H = 12 mW, rho = 0.6, V = 1.6e-4, E_min = 0.02 mJ.
    pub fn baseline() -> Self {
        super::ScenarioInputs::default()
            .to_params()
            .expect("built-in defaults are valid")
    }

    /// `min{max{kappa W f_max^2, p_max tau}, E_max}`: the largest energy any
    /// feasible per-slot decision can draw.
    pub fn e_tilde_max(&self) -> f64 {
        let local = self.kappa * self.workload * self.f_max * self.f_max;
        let radio = self.p_max * self.tau;
        local.max(radio).min(self.e_max)
    }

    /// Smallest admissible perturbation: `E~_max + V phi / E_min`.
    pub fn theta_min(&self) -> f64 {
        self.e_tilde_max() + self.v * self.phi / self.e_min
    }

    /// Virtual energy queue `B - theta`.
    pub fn virtual_queue(&self, battery: f64) -> f64 {
        battery - self.theta
    }

    /// Replace V and E_min and reset theta to its lower bound.
    pub fn with_control(mut self, v: f64, e_min: f64) -> Self {
        self.v = v;
        self.e_min = e_min;
        self.theta = self.theta_min();
        self
    }

    pub fn with_theta_min(mut self) -> Self {
        self.theta = self.theta_min();
        self
    }

    /// Checks every invariant; callers run this once before simulating.
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("task_bits", self.task_bits),
            ("cycles_per_byte", self.cycles_per_byte),
            ("workload", self.workload),
            ("tau", self.tau),
            ("tau_d", self.tau_d),
            ("phi", self.phi),
            ("kappa", self.kappa),
            ("f_max", self.f_max),
            ("p_max", self.p_max),
            ("omega", self.omega),
            ("sigma", self.sigma),
            ("h_mean", self.h_mean),
            ("e_min", self.e_min),
            ("e_max", self.e_max),
            ("v", self.v),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(invalid("rho", format!("must lie in [0, 1], got {}", self.rho)));
        }
        if !(self.eh_max >= 0.0 && self.eh_max.is_finite()) {
            return Err(invalid("eh_max", format!("must be non-negative, got {}", self.eh_max)));
        }
        let w = derive_workload(self.task_bits, self.cycles_per_byte)?;
        if w != self.workload {
            return Err(invalid(
                "workload",
                format!("expected ceil(L/8)*X = {w}, got {}", self.workload),
            ));
        }
        if self.tau_d > self.tau {
            return Err(invalid(
                "tau_d",
                format!("deadline {} exceeds slot length {}", self.tau_d, self.tau),
            ));
        }
        if self.tau_d > self.phi {
            return Err(invalid(
                "phi",
                format!("drop penalty {} is below the deadline {}", self.phi, self.tau_d),
            ));
        }
        if self.e_min > self.e_max {
            return Err(invalid(
                "e_min",
                format!("E_min {} exceeds E_max {}", self.e_min, self.e_max),
            ));
        }
        let floor = self.theta_min();
        if !(self.theta.is_finite() && self.theta >= floor) {
            return Err(invalid(
                "theta",
                format!("must be at least E~_max + V*phi/E_min = {floor}, got {}", self.theta),
            ));
        }
        Ok(())
    }
}

fn invalid(name: &'static str, reason: String) -> ModelError {
    ModelError::InvalidParameter { name, reason }
}
