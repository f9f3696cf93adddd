//! Online computation offloading for an energy-harvesting mobile device.
//!
//! Each slot a task may arrive; the device runs it locally with a chosen CPU
//! frequency, offloads it with a chosen transmit power, or drops it, while a
//! harvesting battery has to stay within its limits. The crate contains the
//! system model, the per-slot controller, greedy baselines, a slot simulator
//! with metrics and sweeps, a brute-force checker for the controller and the
//! `lodco` command-line layer.

// `!(x > 0.0)` style checks are there to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engine;
pub mod oracle;
pub mod model;
pub mod policies;
pub mod solver;
pub mod stochastic;

pub use engine::{run, sweep, EngineError, RunMetrics, SweepSpec, SweepTable, Trace};
pub use model::{Decision, Mode, ScenarioInputs, SlotState, SystemParams};
pub use policies::{Policy, PolicyKind};
