//! System model: parameters, per-slot physics, execution cost and the
//! constants of the performance bound.

mod bounds;
mod params;
mod physics;
mod scenario;

pub use bounds::{bound_constants, exponential_cdf, BoundConstants};
pub use params::{derive_workload, SystemParams};
pub use physics::{
    decision_delay_energy, mobile_delay_energy, offload_energy_floor, rate, server_delay_energy,
    settle, slot_cost, Decision, DelayEnergy, Mode, SlotOutcome, SlotState,
};
pub use scenario::{eh_max_from_power, mean_gain, v_from_capacity, Control, ScenarioInputs};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("channel gain must be positive and finite, got {0}")]
    InvalidChannel(f64),
    #[error("transmission rate is zero; the task can never be delivered")]
    InfiniteDelay,
}
