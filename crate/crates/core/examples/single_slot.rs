//! One per-slot decision at a few battery levels.

use lodco::model::{SlotState, SystemParams};
use lodco::solver::{evaluate_slot, RootFindConfig};

fn main() {
    let params = SystemParams::baseline();
    let cfg = RootFindConfig::default();
    println!("theta = {:.4e} J, E~_max = {:.4e} J", params.theta, params.e_tilde_max());
    println!("{:>10} {:>8} {:>12} {:>12} {:>12} {:>12}", "B (mJ)", "mode", "f (GHz)", "p (W)", "J_mobile", "J_server");
    for b in [0.0, 0.5e-3, 2e-3, 6e-3, 12e-3, 17.9e-3] {
        let state = SlotState { t: 0, task: true, h: params.h_mean, e_h: 1e-5, b };
        let ev = evaluate_slot(&state, &params, &cfg);
        println!(
            "{:>10.3} {:>8} {:>12.4} {:>12.4e} {:>12.4e} {:>12.4e}",
            b * 1e3,
            format!("{:?}", ev.decision.mode),
            ev.decision.f / 1e9,
            ev.decision.p,
            ev.mobile.objective,
            ev.server.objective,
        );
    }
}
