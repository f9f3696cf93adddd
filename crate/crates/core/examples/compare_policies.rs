//! The online controller against the three greedy baselines at default settings.

use lodco::engine::run_metrics;
use lodco::{Policy, PolicyKind, SystemParams};

fn main() -> Result<(), lodco::EngineError> {
    let params = SystemParams::baseline();
    let slots = 50_000;
    let mut rows = Vec::new();
    for kind in PolicyKind::ALL {
        rows.push((kind, run_metrics(&Policy::from(kind), &params, slots, 1, 0)?));
    }
    let lodco_cost = rows[0].1.avg_cost;
    println!("{:>11} {:>12} {:>10} {:>8}", "policy", "avg cost", "drops", "gain");
    for (kind, m) in &rows {
        let gain = 1.0 - lodco_cost / m.avg_cost;
        println!("{:>11} {:>12.4e} {:>9.2}% {:>7.1}%",
            kind.name(), m.avg_cost, 100.0 * m.drop_ratio.unwrap_or(0.0), 100.0 * gain);
    }
    Ok(())
}
