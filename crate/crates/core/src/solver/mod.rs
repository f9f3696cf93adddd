//! Per-slot drift-plus-penalty optimisation.
//!
//! Each slot the controller minimises
//! `B~ (e - E) + V (delay + phi 1{dropped})` over the harvest `e` and the
//! execution decision, where `B~ = B - theta`. Harvesting separates into a
//! threshold rule; the execution part compares the best local frequency, the
//! best offloading power and dropping.

mod mobile;
pub mod root;
mod server;

use serde::{Deserialize, Serialize};

use crate::model::{Decision, Mode, SlotState, SystemParams};

pub use mobile::{mobile_interval, mobile_objective, mobile_stationary_point, solve_mobile};
pub use root::{monotone_root, RootError, RootFindConfig, Side};
pub use server::{
    deadline_power, offload_energy, power_for_energy, server_interval, server_objective,
    solve_server, xi,
};

/// Relative width within which two objectives count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

/// Best action within one execution mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEvaluation {
    pub feasible: bool,
    /// Per-slot objective; `+inf` when infeasible.
    pub objective: f64,
    /// Frequency (Hz) or power (W).
    pub action: f64,
    pub delay: f64,
    pub energy: f64,
    /// Feasible action range the optimum was taken from.
    pub interval: Option<Interval>,
}

impl ModeEvaluation {
    pub fn infeasible() -> Self {
        Self {
            feasible: false,
            objective: f64::INFINITY,
            action: 0.0,
            delay: 0.0,
            energy: 0.0,
            interval: None,
        }
    }
}

/// Harvest everything when the battery is at or below the set-point, nothing otherwise.
pub fn optimal_harvest(b_tilde: f64, e_h: f64) -> f64 {
    if b_tilde <= 0.0 {
        e_h
    } else {
        0.0
    }
}

/// Full per-slot evaluation: both mode optima, the drop value and the winner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotEvaluation {
    pub mobile: ModeEvaluation,
    pub server: ModeEvaluation,
    pub drop_objective: f64,
    pub decision: Decision,
    /// Objective of the execution part at `decision` (harvest term excluded).
    pub objective: f64,
}

/// Whether `candidate` beats `incumbent` by more than the tie tolerance.
pub fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    let scale = candidate.abs().max(incumbent.abs());
    candidate < incumbent - TIE_TOLERANCE * scale
}

pub fn evaluate_slot(state: &SlotState, params: &SystemParams, cfg: &RootFindConfig) -> SlotEvaluation {
    let b_tilde = params.virtual_queue(state.b);
    let e = optimal_harvest(b_tilde, state.e_h);
    if !state.task {
        return SlotEvaluation {
            mobile: ModeEvaluation::infeasible(),
            server: ModeEvaluation::infeasible(),
            drop_objective: 0.0,
            decision: Decision::drop(e),
            objective: 0.0,
        };
    }
    let mobile = solve_mobile(b_tilde, params);
    let server = solve_server(b_tilde, state.h, params, cfg);
    let drop_objective = params.v * params.phi;

    // Mobile before Server before Drop on ties
    let mut best = (Mode::Drop, f64::INFINITY, 0.0);
    for (mode, eval) in [(Mode::Mobile, &mobile), (Mode::Server, &server)] {
        if eval.feasible && (best.1.is_infinite() || strictly_better(eval.objective, best.1)) {
            best = (mode, eval.objective, eval.action);
        }
    }
    if best.1.is_infinite() || strictly_better(drop_objective, best.1) {
        best = (Mode::Drop, drop_objective, 0.0);
    }
    let decision = match best.0 {
        Mode::Mobile => Decision::mobile(best.2, e),
        Mode::Server => Decision::server(best.2, e),
        Mode::Drop => Decision::drop(e),
    };
    SlotEvaluation { mobile, server, drop_objective, decision, objective: best.1 }
}

/// The online controller's decision for one slot.
pub fn decide(state: &SlotState, params: &SystemParams) -> Decision {
    decide_with(state, params, &RootFindConfig::default())
}

pub fn decide_with(state: &SlotState, params: &SystemParams, cfg: &RootFindConfig) -> Decision {
    evaluate_slot(state, params, cfg).decision
}

const NUDGE_STEPS: usize = 16;

/// Smallest float at or above `x` satisfying `ok`, searching a few ulps.
pub(crate) fn nudge_up<F: Fn(f64) -> bool>(mut x: f64, ok: F) -> f64 {
    for _ in 0..NUDGE_STEPS {
        if ok(x) {
            return x;
        }
        x = x.next_up();
    }
    x
}

/// Largest float at or below `x` satisfying `ok`, searching a few ulps.
pub(crate) fn nudge_down<F: Fn(f64) -> bool>(mut x: f64, ok: F) -> f64 {
    for _ in 0..NUDGE_STEPS {
        if ok(x) {
            return x;
        }
        x = x.next_down();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harvest_rule() {
        assert_eq!(optimal_harvest(-0.001, 4e-5), 4e-5);
        assert_eq!(optimal_harvest(0.001, 4e-5), 0.0);
        assert_eq!(optimal_harvest(0.0, 4e-5), 4e-5);
    }

    #[test]
    fn no_task_drops_and_harvests() {
        let p = SystemParams::baseline();
        let s = SlotState { t: 0, task: false, h: p.h_mean, e_h: 3e-5, b: 0.0 };
        let d = decide(&s, &p);
        assert_eq!(d, Decision::drop(3e-5));
    }

    #[test]
    fn low_battery_drops() {
        let p = SystemParams::baseline();
        for b in [0.0, 1e-4, 1e-3, 1.9e-3] {
            let s = SlotState { t: 0, task: true, h: 5.0 * p.h_mean, e_h: 0.0, b };
            assert_eq!(decide(&s, &p).mode, Mode::Drop, "B = {b}");
        }
    }

    #[test]
    fn near_set_point_executes() {
        let p = SystemParams::baseline();
        let s = SlotState { t: 0, task: true, h: p.h_mean, e_h: 0.0, b: p.theta };
        assert_ne!(decide(&s, &p).mode, Mode::Drop);
    }

    #[test]
    fn ties_prefer_earlier_mode() {
        assert!(!strictly_better(1.0, 1.0 + 1e-14));
        assert!(strictly_better(1.0, 1.0 + 1e-9));
    }

    #[test]
    fn nudges_move_by_ulps() {
        let x = 1.0f64;
        assert_eq!(nudge_up(x, |y| y > 1.0), 1.0f64.next_up());
        assert_eq!(nudge_down(x, |y| y < 1.0), 1.0f64.next_down());
        assert_eq!(nudge_up(x, |_| true), x);
    }
}
