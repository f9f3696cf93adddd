//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! when any criterion fails.

use std::time::Instant;

use lodco::cli;
use lodco::engine::{self, Axis, AxisValues, CellSummary, SweepSpec, SweepTable};
use lodco::model::{bound_constants, ScenarioInputs, SystemParams};
use lodco::oracle::{self, GridSpec};
use lodco::policies::{Policy, PolicyKind};
use lodco::solver::{self, RootFindConfig};
use lodco::stochastic::{RandomSource, CHANNEL_STREAM};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

fn sweep_over(
    policies: &[PolicyKind],
    base: ScenarioInputs,
    axis: Option<(Axis, Vec<f64>)>,
    slots: u64,
    n_seeds: u64,
) -> SweepTable {
    let spec = SweepSpec {
        policies: policies.to_vec(),
        base,
        axis: axis.map(|(axis, values)| AxisValues { axis, values }),
        series: None,
        slots,
        seeds: seeds(n_seeds),
        warmup: 0,
        workers: 0,
        root: RootFindConfig::default(),
    };
    engine::sweep(&spec).expect("sweep runs without invariant breaches")
}

fn summary(table: &SweepTable, policy: PolicyKind, axis_value: Option<f64>) -> &CellSummary {
    &table.cell(policy, axis_value, None).expect("cell present").summary
}

fn standard_error(s: &CellSummary, n: u64) -> f64 {
    s.avg_cost_std / (n as f64).sqrt()
}

/// Least-squares slope, intercept and R^2.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

fn inputs_with(f: impl FnOnce(&mut ScenarioInputs)) -> ScenarioInputs {
    let mut s = ScenarioInputs::default();
    f(&mut s);
    s
}

fn per_slot_optimality() -> Outcome {
    let params = SystemParams::baseline();
    let start = Instant::now();
    let report = oracle::certify(&params, 10_000, 1, &GridSpec::uniform(100_000)).expect("certify runs");
    let secs = start.elapsed().as_secs_f64();
    outcome(
        report.passed && report.max_gap <= 1e-3,
        format!(
            "10^4 states, 10^5-point grids: max gap {:.2e}, {} mode agreements, {} explained ties, {:.1} s",
            report.max_gap, report.mode_agreements, report.explained_ties, secs
        ),
    )
}

/// Runs LODCO streaming and counts slots whose battery leaves `[0, theta + eh_max]`.
fn lodco_battery_bound_check() -> Outcome {
    let mut runs: Vec<(ScenarioInputs, u64, Vec<u64>)> = vec![(ScenarioInputs::default(), 100_000, seeds(10))];
    for v in [1.6e-4, 6e-4] {
        for e_min in [0.02e-3, 0.2e-3] {
            runs.push((
                inputs_with(|s| {
                    s.control = lodco::model::Control::V(v);
                    s.e_min = e_min;
                }),
                50_000,
                seeds(2),
            ));
        }
    }
    runs.push((inputs_with(|s| s.distance = 80.0), 50_000, seeds(2)));
    runs.push((inputs_with(|s| s.tau_d = 0.4e-3), 50_000, seeds(2)));
    runs.push((inputs_with(|s| s.rho = 0.9), 50_000, seeds(2)));
    runs.push((inputs_with(|s| s.p_h = 2e-3), 50_000, seeds(2)));

    let policy = Policy::from(PolicyKind::Lodco);
    let (mut slots, mut violations) = (0u64, 0u64);
    for (inputs, t, seed_list) in runs {
        let params = inputs.to_params().expect("valid scenario");
        let ceiling = params.theta + params.eh_max;
        for seed in seed_list {
            engine::simulate(&policy, &params, t, seed, |r| {
                slots += 1;
                for b in [r.state.b, r.outcome.b_next] {
                    if !(b >= 0.0 && b <= ceiling) {
                        violations += 1;
                    }
                }
            })
            .expect("engine invariants hold");
        }
    }
    outcome(
        slots >= 1_000_000 && violations == 0,
        format!("{slots} LODCO slots checked, {violations} violations"),
    )
}

fn causality_check() -> Outcome {
    let scenarios = [
        ScenarioInputs::default(),
        inputs_with(|s| s.tau_d = 0.4e-3),
        inputs_with(|s| s.distance = 80.0),
        inputs_with(|s| s.rho = 0.9),
        inputs_with(|s| s.p_h = 2e-3),
        inputs_with(|s| s.e_min = 0.2e-3),
    ];
    let (mut slots, mut violations) = (0u64, 0u64);
    for inputs in scenarios {
        let params = inputs.to_params().expect("valid scenario");
        for kind in PolicyKind::ALL {
            for seed in seeds(2) {
                engine::simulate(&Policy::from(kind), &params, 50_000, seed, |r| {
                    slots += 1;
                    if r.outcome.energy_used > r.state.b {
                        violations += 1;
                    }
                })
                .expect("engine invariants hold");
            }
        }
    }
    outcome(violations == 0, format!("{slots} slots over 4 policies and 6 scenarios, {violations} violations"))
}

fn monotonicity_check() -> Outcome {
    let params = SystemParams::baseline();
    let cfg = RootFindConfig::default();
    let lo = -params.theta;
    let hi = params.eh_max;
    let grid: Vec<f64> = (0..200).map(|i| lo + (hi - lo) * f64::from(i) / 199.0).collect();

    let count_inversions = |seq: &[f64]| seq.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();

    let f: Vec<f64> = grid
        .iter()
        .map(|&b| solver::solve_mobile(b, &params))
        .filter(|m| m.feasible)
        .map(|m| m.action)
        .collect();
    let f_inversions = count_inversions(&f);
    let f_distinct = f.windows(2).filter(|w| w[1] != w[0]).count();

    let mut channel = RandomSource::new(7, CHANNEL_STREAM);
    let (mut p_inversions, mut p_pairs, mut p_distinct) = (0, 0, 0);
    for _ in 0..50 {
        let h = channel.exponential(params.h_mean);
        let p: Vec<f64> = grid
            .iter()
            .map(|&b| solver::solve_server(b, h, &params, &cfg))
            .filter(|s| s.feasible)
            .map(|s| s.action)
            .collect();
        p_inversions += count_inversions(&p);
        p_pairs += p.len().saturating_sub(1);
        p_distinct += p.windows(2).filter(|w| w[1] != w[0]).count();
    }
    outcome(
        f_inversions == 0 && p_inversions == 0 && f.len() == 200,
        format!(
            "f*: {f_inversions} inversions over {} points ({f_distinct} increases); p*: {p_inversions} inversions over {p_pairs} pairs ({p_distinct} increases)",
            f.len()
        ),
    )
}

const V_GRID: [f64; 7] = cli::presets::V_GRID;

fn v_sweep() -> SweepTable {
    let base = inputs_with(|s| {
        s.rho = 0.6;
        s.e_min = 0.02e-3;
    });
    sweep_over(&[PolicyKind::Lodco], base, Some((Axis::V, V_GRID.to_vec())), 50_000, 10)
}

fn cost_trend_in_v(table: &SweepTable, secs: f64) -> Outcome {
    let cells: Vec<&CellSummary> = V_GRID.iter().map(|&v| summary(table, PolicyKind::Lodco, Some(v))).collect();
    let mut rises = Vec::new();
    for (i, w) in cells.windows(2).enumerate() {
        let noise = (standard_error(w[0], 10).powi(2) + standard_error(w[1], 10).powi(2)).sqrt();
        if w[1].avg_cost_mean > w[0].avg_cost_mean + noise {
            rises.push(format!("V {:e}->{:e}: +{:.2e}", V_GRID[i], V_GRID[i + 1], w[1].avg_cost_mean - w[0].avg_cost_mean));
        }
    }
    let inv_v: Vec<f64> = V_GRID.iter().map(|v| 1.0 / v).collect();
    let costs: Vec<f64> = cells.iter().map(|c| c.avg_cost_mean).collect();
    let (slope, _, _) = linear_fit(&inv_v, &costs);
    let costs_text: Vec<String> = costs.iter().map(|c| format!("{c:.4e}")).collect();
    outcome(
        rises.is_empty() && slope > 0.0,
        format!(
            "costs [{}], slope vs 1/V {slope:.3e}, rises beyond 1 sigma: [{}], {secs:.1} s",
            costs_text.join(", "),
            rises.join("; ")
        ),
    )
}

fn battery_growth_in_v(table: &SweepTable) -> Outcome {
    let maxima: Vec<f64> = V_GRID
        .iter()
        .map(|&v| summary(table, PolicyKind::Lodco, Some(v)).battery_max_mean)
        .collect();
    let (slope, intercept, r2) = linear_fit(&V_GRID, &maxima);
    outcome(r2 >= 0.99, format!("max battery = {intercept:.3e} + {slope:.2} V, R^2 = {r2:.6}"))
}

fn quoted_gains() -> Outcome {
    let table = sweep_over(&PolicyKind::ALL, ScenarioInputs::default(), None, 100_000, 10);
    let lodco = summary(&table, PolicyKind::Lodco, None).avg_cost_mean;
    let targets = [(PolicyKind::MobileGd, 74.4), (PolicyKind::ServerGd, 51.8), (PolicyKind::DynamicGd, 46.3)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, target) in targets {
        let gain = 100.0 * (1.0 - lodco / summary(&table, kind, None).avg_cost_mean);
        ok &= (gain - target).abs() <= 10.0;
        parts.push(format!("{kind} {gain:.1}% (target {target}%)"));
    }
    outcome(ok, parts.join(", "))
}

fn drop_ratio_in_rho() -> Outcome {
    let rhos = vec![0.2, 0.4, 0.6, 0.8];
    let table = sweep_over(&PolicyKind::ALL, ScenarioInputs::default(), Some((Axis::Rho, rhos.clone())), 50_000, 10);
    let drops = |kind| -> Vec<f64> {
        rhos.iter()
            .map(|&r| summary(&table, kind, Some(r)).drop_ratio.expect("tasks were requested"))
            .collect()
    };
    let lodco = drops(PolicyKind::Lodco);
    let mut ok = lodco.iter().all(|&d| d < 0.02);
    let mut parts = vec![format!("lodco max {:.2}%", 100.0 * lodco.iter().cloned().fold(0.0, f64::max))];
    for kind in [PolicyKind::MobileGd, PolicyKind::ServerGd, PolicyKind::DynamicGd] {
        let d = drops(kind);
        let increasing = d.windows(2).all(|w| w[1] > w[0]);
        ok &= increasing;
        let text: Vec<String> = d.iter().map(|x| format!("{:.1}%", 100.0 * x)).collect();
        parts.push(format!("{kind} [{}]{}", text.join(" "), if increasing { "" } else { " not increasing" }));
    }
    outcome(ok, parts.join(", "))
}

fn tight_deadline_regime() -> Outcome {
    let deadlines = vec![0.2e-3, 0.4e-3];
    let table = sweep_over(
        &[PolicyKind::MobileGd, PolicyKind::ServerGd, PolicyKind::DynamicGd],
        ScenarioInputs::default(),
        Some((Axis::TauD, deadlines.clone())),
        50_000,
        10,
    );
    let mut ok = true;
    let mut parts = Vec::new();
    for &tau_d in &deadlines {
        let cell = table.cell(PolicyKind::MobileGd, Some(tau_d), None).expect("cell");
        // analytic: W / tau_d exceeds f_max, so no local execution can meet the deadline
        let infeasible = cell.params.workload / tau_d > cell.params.f_max;
        let all_dropped = cell.runs.iter().all(|r| r.metrics.drop_ratio == Some(1.0));
        let cost_exact = cell.runs.iter().all(|r| {
            let expected = cell.params.phi * r.metrics.requested as f64 / r.metrics.slots as f64;
            (r.metrics.avg_cost - expected).abs() <= 1e-12 * expected
        });
        let s = summary(&table, PolicyKind::ServerGd, Some(tau_d));
        let d = summary(&table, PolicyKind::DynamicGd, Some(tau_d));
        let noise = (standard_error(s, 10).powi(2) + standard_error(d, 10).powi(2)).sqrt();
        let cost_gap = (s.avg_cost_mean - d.avg_cost_mean).abs();
        let drop_gap = (s.drop_ratio.unwrap_or(0.0) - d.drop_ratio.unwrap_or(0.0)).abs();
        let coincide = cost_gap <= noise && drop_gap <= 1e-3;
        ok &= infeasible && all_dropped && cost_exact && coincide;
        parts.push(format!(
            "tau_d {:.1} ms: mobile-gd drop {:.0}%, cost = phi*rho_hat {cost_exact}, server/dynamic cost gap {cost_gap:.1e} (noise {noise:.1e})",
            tau_d * 1e3,
            100.0 * cell.summary.drop_ratio.unwrap_or(0.0)
        ));
    }
    outcome(ok, parts.join("; "))
}

fn far_server_regime() -> Outcome {
    let table = sweep_over(&PolicyKind::ALL, ScenarioInputs::default(), Some((Axis::D, vec![80.0])), 50_000, 10);
    let cost = |k| summary(&table, k, Some(80.0)).avg_cost_mean;
    let mobile = cost(PolicyKind::MobileGd);
    let lodco_gain = 100.0 * (1.0 - cost(PolicyKind::Lodco) / mobile);
    let dynamic_gain = 100.0 * (1.0 - cost(PolicyKind::DynamicGd) / mobile);
    outcome(
        lodco_gain > 40.0 && dynamic_gain < 10.0,
        format!("d = 80 m: lodco gain {lodco_gain:.1}% (needs > 40%), dynamic-gd gain {dynamic_gain:.1}% (needs < 10%)"),
    )
}

fn nu_limit() -> Outcome {
    let values: Vec<f64> = [2e-5, 2e-6, 2e-7, 2e-8]
        .iter()
        .map(|&e_min| bound_constants(&SystemParams::baseline().with_control(1.6e-4, e_min)).nu)
        .collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let vanishing = values[3] < 1e-12 * values[0];
    let text: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    outcome(decreasing && vanishing, format!("nu = [{}]", text.join(", ")))
}

fn run_cli(args: &[&str]) -> u8 {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["lodco"];
    full.extend_from_slice(args);
    cli::main_with(full, &mut out, &mut err)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let base = dir.path();
    let invocations: Vec<(String, Vec<String>)> = vec![
        ("run.json".into(), vec!["run".into(), "--slots".into(), "20000".into(), "--seeds".into(), "3".into()]),
        ("run.csv".into(), vec!["run".into(), "--slots".into(), "5000".into(), "--seeds".into(), "2".into(), "--format".into(), "csv".into()]),
        (
            "sweep.csv".into(),
            vec!["sweep".into(), "--axis".into(), "d".into(), "--values".into(), "40,80".into(), "--slots".into(), "5000".into(), "--seeds".into(), "2".into(), "--format".into(), "csv".into()],
        ),
        ("fig2.csv".into(), vec!["preset".into(), "fig2".into(), "--slots".into(), "3000".into(), "--seeds".into(), "2".into(), "--format".into(), "csv".into()]),
        ("certify.json".into(), vec!["certify".into(), "--states".into(), "300".into(), "--grid".into(), "2000".into()]),
    ];
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (name, args) in &invocations {
        let mut contents = Vec::new();
        for round in 0..2 {
            // same paths both rounds, since the JSON echoes the output path
            let round_dir = base.join("out");
            if round > 0 {
                std::fs::remove_dir_all(&round_dir).expect("clear previous round");
            }
            std::fs::create_dir_all(&round_dir).expect("output dir");
            let output = round_dir.join(name);
            let traces = round_dir.join(format!("{name}.traces"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            let out_s = output.to_string_lossy().into_owned();
            let tr_s = traces.to_string_lossy().into_owned();
            full.extend(["--output", &out_s]);
            if name == "run.csv" {
                full.extend(["--trace", &tr_s]);
            }
            let code = run_cli(&full);
            if code != 0 {
                mismatches.push(format!("{name} exited with {code}"));
            }
            let mut files = vec![output.clone()];
            if name == "fig2.csv" {
                files.push(cli::emit::sibling_path(&output, "series.csv"));
            }
            if traces.is_dir() {
                let mut t: Vec<_> = std::fs::read_dir(&traces).expect("trace dir").map(|e| e.expect("entry").path()).collect();
                t.sort();
                files.extend(t);
            }
            let bytes: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(f).unwrap_or_default()))
                .collect();
            contents.push(bytes);
        }
        compared += contents[0].len();
        if contents[0] != contents[1] || contents[0].iter().any(|(_, b)| b.is_empty()) {
            mismatches.push(format!("{name} differs between invocations"));
        }
    }
    outcome(mismatches.is_empty(), format!("{compared} output files compared byte for byte; {}", if mismatches.is_empty() { "all identical".to_owned() } else { mismatches.join("; ") }))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |n: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let o = f();
        println!("{} [{n:>2}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    record(1, "per-slot optimality against the grid oracle", &mut per_slot_optimality);
    record(2, "LODCO battery stays within [0, theta + E_H^max]", &mut lodco_battery_bound_check);
    record(3, "energy causality for every policy", &mut causality_check);
    record(4, "f* and p* non-decreasing in the virtual queue", &mut monotonicity_check);
    let start = Instant::now();
    let table = v_sweep();
    let secs = start.elapsed().as_secs_f64();
    record(5, "LODCO cost non-increasing in V", &mut || cost_trend_in_v(&table, secs));
    record(6, "max battery affine in V", &mut || battery_growth_in_v(&table));
    record(7, "cost reductions against the greedy baselines", &mut quoted_gains);
    record(8, "LODCO drop ratio below 2%, greedy drop ratios rise with rho", &mut drop_ratio_in_rho);
    record(9, "tight-deadline regime", &mut tight_deadline_regime);
    record(10, "far-server regime", &mut far_server_regime);
    record(11, "nu(E_min) decreases toward zero", &mut nu_limit);
    record(12, "byte-identical outputs on repeat", &mut determinism);

    let failed: Vec<String> = results.iter().filter(|r| !r.2.passed).map(|r| r.0.to_string()).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
