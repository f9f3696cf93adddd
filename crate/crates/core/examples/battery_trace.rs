//! Battery trajectory of one LODCO run, sampled every 1000 slots.

use lodco::engine;
use lodco::{PolicyKind, SystemParams};

fn main() -> Result<(), lodco::EngineError> {
    let params = SystemParams::baseline();
    let trace = engine::run(PolicyKind::Lodco, &params, 20_000, 7)?;
    println!("{:>8} {:>12} {:>14}", "slot", "B (mJ)", "running cost");
    let mut cost = 0.0;
    for r in &trace.records {
        cost += r.outcome.cost;
        if r.state.t % 1000 == 0 {
            println!("{:>8} {:>12.4} {:>14.4e}", r.state.t, r.state.b * 1e3, cost / (r.state.t + 1) as f64);
        }
    }
    let m = engine::reduce(&trace)?;
    println!("battery stays within [{:.4}, {:.4}] mJ, set point plus E_H^max = {:.4} mJ",
        m.battery_min * 1e3, m.battery_max * 1e3, (params.theta + params.eh_max) * 1e3);
    Ok(())
}
