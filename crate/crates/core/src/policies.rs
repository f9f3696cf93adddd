//! Decision rules behind one interface: the online controller and three
//! greedy baselines that spend up to `min{B, E_max}` on the current task.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{offload_energy_floor, Decision, SlotState, SystemParams};
use crate::solver::{self, nudge_down, power_for_energy, RootError, RootFindConfig, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "lodco")]
    Lodco,
    #[serde(rename = "mobile-gd")]
    MobileGd,
    #[serde(rename = "server-gd")]
    ServerGd,
    #[serde(rename = "dynamic-gd")]
    DynamicGd,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Lodco, PolicyKind::MobileGd, PolicyKind::ServerGd, PolicyKind::DynamicGd];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lodco => "lodco",
            PolicyKind::MobileGd => "mobile-gd",
            PolicyKind::ServerGd => "server-gd",
            PolicyKind::DynamicGd => "dynamic-gd",
        }
    }

    pub fn is_greedy(self) -> bool {
        self != PolicyKind::Lodco
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown policy `{0}` (expected one of lodco, mobile-gd, server-gd, dynamic-gd)")]
pub struct UnknownPolicy(pub String);

impl FromStr for PolicyKind {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownPolicy(s.to_owned()))
    }
}

/// A policy together with the root-finder settings it uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policy {
    pub kind: PolicyKind,
    pub root: RootFindConfig,
}

impl From<PolicyKind> for Policy {
    fn from(kind: PolicyKind) -> Self {
        Self { kind, root: RootFindConfig::default() }
    }
}

impl Policy {
    pub fn decide(&self, state: &SlotState, params: &SystemParams) -> Decision {
        match self.kind {
            PolicyKind::Lodco => solver::decide_with(state, params, &self.root),
            greedy => greedy_decide(greedy, state, params, &self.root),
        }
    }
}

pub fn policy_decide(kind: PolicyKind, state: &SlotState, params: &SystemParams) -> Decision {
    Policy::from(kind).decide(state, params)
}

/// Candidate action of a greedy baseline: `(action, delay)`.
type GreedyCandidate = Option<(f64, f64)>;

/// Highest frequency affordable with `budget`, if it meets the deadline.
pub fn greedy_mobile(budget: f64, params: &SystemParams) -> GreedyCandidate {
    if budget <= 0.0 {
        return None;
    }
    let kw = params.kappa * params.workload;
    let affordable = nudge_down((budget / kw).sqrt(), |f| kw * f * f <= budget);
    let f = params.f_max.min(affordable);
    let delay = params.workload / f;
    (f > 0.0 && delay <= params.tau_d).then_some((f, delay))
}

/// Highest power affordable with `budget`, if it meets the deadline.
pub fn greedy_server(
    h: f64,
    budget: f64,
    params: &SystemParams,
    cfg: &RootFindConfig,
) -> GreedyCandidate {
    if budget <= 0.0 || offload_energy_floor(h, params) >= budget {
        return None;
    }
    let p_budget = match power_for_energy(h, budget, Side::Below, params, cfg) {
        Ok(p) => p,
        Err(RootError::NoConvergence { best, .. }) => best,
        Err(RootError::NoBracket { .. }) => return None,
    };
    let p = params.p_max.min(p_budget);
    let de = crate::model::server_delay_energy(h, p, params).ok().flatten()?;
    (de.delay <= params.tau_d && de.energy <= budget).then_some((p, de.delay))
}

/// Feasible mode with the smaller delay; equal delays go to local execution.
fn choose_faster(local: GreedyCandidate, remote: GreedyCandidate, e: f64) -> Decision {
    match (local, remote) {
        (Some((f, dl)), Some((p, ds))) => {
            if ds < dl {
                Decision::server(p, e)
            } else {
                Decision::mobile(f, e)
            }
        }
        (Some((f, _)), None) => Decision::mobile(f, e),
        (None, Some((p, _))) => Decision::server(p, e),
        (None, None) => Decision::drop(e),
    }
}

fn greedy_decide(
    kind: PolicyKind,
    state: &SlotState,
    params: &SystemParams,
    cfg: &RootFindConfig,
) -> Decision {
    let e = state.e_h;
    if !state.task {
        return Decision::drop(e);
    }
    let budget = state.b.min(params.e_max);
    let local = || greedy_mobile(budget, params);
    let remote = || greedy_server(state.h, budget, params, cfg);
    match kind {
        PolicyKind::MobileGd => local().map_or(Decision::drop(e), |(f, _)| Decision::mobile(f, e)),
        PolicyKind::ServerGd => remote().map_or(Decision::drop(e), |(p, _)| Decision::server(p, e)),
        PolicyKind::DynamicGd => choose_faster(local(), remote(), e),
        PolicyKind::Lodco => unreachable!("handled by the solver"),
    }
}
