use serde::{Deserialize, Serialize};

use super::{ModelError, SystemParams};

/// Causal information available at the start of slot `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotState {
    pub t: u64,
    /// Whether a task was requested this slot.
    pub task: bool,
    /// Channel power gain.
    pub h: f64,
    /// Harvestable energy arriving this slot (J).
    pub e_h: f64,
    /// Battery level at the start of the slot (J).
    pub b: f64,
}

impl SlotState {
    pub fn zeta(&self) -> u8 {
        u8::from(self.task)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Mobile,
    Server,
    Drop,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Mobile => "mobile",
            Mode::Server => "server",
            Mode::Drop => "drop",
        }
    }
}

/// Per-slot control: execution mode, CPU frequency, transmit power and harvest.
///
/// `f` is non-zero only for [`Mode::Mobile`], `p` only for [`Mode::Server`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub mode: Mode,
    pub f: f64,
    pub p: f64,
    pub e: f64,
}

impl Decision {
    pub fn drop(e: f64) -> Self {
        Self { mode: Mode::Drop, f: 0.0, p: 0.0, e }
    }

    pub fn mobile(f: f64, e: f64) -> Self {
        Self { mode: Mode::Mobile, f, p: 0.0, e }
    }

    pub fn server(p: f64, e: f64) -> Self {
        Self { mode: Mode::Server, f: 0.0, p, e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayEnergy {
    pub delay: f64,
    pub energy: f64,
}

impl DelayEnergy {
    pub const IDLE: DelayEnergy = DelayEnergy { delay: 0.0, energy: 0.0 };
}

/// Realised result of applying a decision to a slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub cost: f64,
    pub delay: f64,
    pub energy_used: f64,
    pub energy_harvested: f64,
    pub b_next: f64,
}

/// Shannon rate `omega log2(1 + h p / sigma)` in bits/s.
pub fn rate(h: f64, p: f64, params: &SystemParams) -> Result<f64, ModelError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ModelError::InvalidChannel(h));
    }
    if !(p >= 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "p",
            reason: format!("transmit power must be non-negative, got {p}"),
        });
    }
    Ok(params.omega * (h * p / params.sigma).ln_1p() / std::f64::consts::LN_2)
}

/// Local execution at a constant frequency `f`: `(W / f, kappa W f^2)`.
pub fn mobile_delay_energy(f: f64, params: &SystemParams) -> Result<DelayEnergy, ModelError> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(ModelError::InvalidParameter {
            name: "f",
            reason: format!("CPU frequency must be positive, got {f}"),
        });
    }
    Ok(DelayEnergy {
        delay: params.workload / f,
        energy: params.kappa * params.workload * f * f,
    })
}

/// Offloading at power `p`: `(L / r, p L / r)`. `Ok(None)` marks a zero rate
/// (the transfer never completes).
pub fn server_delay_energy(
    h: f64,
    p: f64,
    params: &SystemParams,
) -> Result<Option<DelayEnergy>, ModelError> {
    let r = rate(h, p, params)?;
    if r <= 0.0 {
        return Ok(None);
    }
    let delay = params.task_bits / r;
    Ok(Some(DelayEnergy { delay, energy: p * delay }))
}

/// Delay and battery draw of a decision, excluding harvesting.
pub fn decision_delay_energy(
    state: &SlotState,
    decision: &Decision,
    params: &SystemParams,
) -> Result<DelayEnergy, ModelError> {
    match decision.mode {
        Mode::Drop => Ok(DelayEnergy::IDLE),
        Mode::Mobile => mobile_delay_energy(decision.f, params),
        Mode::Server => {
            server_delay_energy(state.h, decision.p, params)?.ok_or(ModelError::InfiniteDelay)
        }
    }
}

/// Execution cost of one slot: the delay of an executed task, `phi` for a
/// dropped task, zero when nothing was requested.
pub fn slot_cost(state: &SlotState, decision: &Decision, params: &SystemParams) -> f64 {
    if !state.task {
        return 0.0;
    }
    match decision.mode {
        Mode::Drop => params.phi,
        Mode::Mobile => params.workload / decision.f,
        Mode::Server => match rate(state.h, decision.p, params) {
            Ok(r) if r > 0.0 => params.task_bits / r,
            _ => f64::INFINITY,
        },
    }
}

/// Applies `decision` to `state`: cost, draw, harvest and the next battery level.
pub fn settle(
    state: &SlotState,
    decision: &Decision,
    params: &SystemParams,
) -> Result<SlotOutcome, ModelError> {
    let de = decision_delay_energy(state, decision, params)?;
    let cost = slot_cost(state, decision, params);
    let delay = if state.task { de.delay } else { 0.0 };
    Ok(SlotOutcome {
        cost,
        delay,
        energy_used: de.energy,
        energy_harvested: decision.e,
        b_next: state.b - de.energy + decision.e,
    })
}

/// `sigma L ln2 / (omega h)`: the infimum of the offloading energy as p -> 0.
pub fn offload_energy_floor(h: f64, params: &SystemParams) -> f64 {
    params.sigma * params.task_bits * std::f64::consts::LN_2 / (params.omega * h)
}
