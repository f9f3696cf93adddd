//! Sweep the control weight V over several seeds in parallel.

use lodco::engine::{sweep, Axis, AxisValues, SweepSpec};
use lodco::model::ScenarioInputs;
use lodco::solver::RootFindConfig;
use lodco::PolicyKind;

fn main() -> Result<(), lodco::EngineError> {
    let spec = SweepSpec {
        policies: vec![PolicyKind::Lodco],
        base: ScenarioInputs::default(),
        axis: Some(AxisValues { axis: Axis::V, values: vec![5e-5, 1e-4, 1.6e-4, 3e-4, 6e-4] }),
        series: None,
        slots: 30_000,
        seeds: vec![1, 2, 3],
        // skip the initial charge so larger set points are not penalised
        warmup: 10_000,
        workers: 0,
        root: RootFindConfig::default(),
    };
    let table = sweep(&spec)?;
    println!("{:>10} {:>12} {:>10} {:>12} {:>12}", "V", "avg cost", "std", "max B (mJ)", "worst gap");
    for cell in &table.cells {
        let s = &cell.summary;
        println!("{:>10.2e} {:>12.4e} {:>10.2e} {:>12.4} {:>12.4e}",
            cell.params.v, s.avg_cost_mean, s.avg_cost_std, s.battery_max * 1e3, cell.bounds.gap);
    }
    Ok(())
}
