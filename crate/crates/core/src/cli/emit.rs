//! CSV and JSON writers for traces, sweep metrics and certification reports.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{Axis, CellSummary, SeedRun, SweepCell, SweepTable, Trace};
use crate::model::{BoundConstants, SystemParams};
use crate::oracle::CertificationReport;
use crate::policies::PolicyKind;

use super::config::ExperimentConfig;

/// Version of the metrics document and the trace column layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_HEADER: [&str; 11] = ["t", "zeta", "h", "e_h", "b", "mode", "f", "p", "e", "cost", "delay"];

pub const METRICS_HEADER: [&str; 24] = [
    "policy",
    "axis",
    "axis_value",
    "series_axis",
    "series_value",
    "seed",
    "slots",
    "requested",
    "executed",
    "dropped",
    "avg_cost",
    "avg_cost_std",
    "avg_completion",
    "drop_ratio",
    "share_mobile",
    "share_server",
    "share_drop",
    "battery_min",
    "battery_max",
    "v",
    "theta",
    "bound_c",
    "bound_nu",
    "bound_gap",
];

pub const SERIES_HEADER: [&str; 8] =
    ["policy", "axis_value", "series_value", "seed", "t", "battery", "running_avg_cost", "v"];

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: u64,
    /// Battery level at the start of slot `t` (J).
    pub battery: f64,
    pub running_avg_cost: f64,
}

/// Every `stride`-th slot of a trace, plus the last one.
pub fn series_points(trace: &Trace, stride: u64) -> Vec<SeriesPoint> {
    let stride = stride.max(1) as usize;
    let mut total = 0.0;
    let last = trace.records.len().saturating_sub(1);
    let mut out = Vec::new();
    for (i, r) in trace.records.iter().enumerate() {
        total += r.outcome.cost;
        if i % stride == 0 || i == last {
            out.push(SeriesPoint { t: r.state.t, battery: r.state.b, running_avg_cost: total / (i + 1) as f64 });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutput {
    pub policy: PolicyKind,
    pub axis_value: Option<f64>,
    pub series_value: Option<f64>,
    pub params: SystemParams,
    /// Optimality-gap constants; present for the controller's cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundConstants>,
    pub summary: CellSummary,
    pub runs: Vec<SeedRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub axis: Option<Axis>,
    pub series_axis: Option<Axis>,
    pub cells: Vec<CellOutput>,
}

impl MetricsDocument {
    pub fn new(config: &ExperimentConfig, table: SweepTable) -> Self {
        let cells = table.cells.into_iter().map(CellOutput::from).collect();
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            axis: table.axis,
            series_axis: table.series_axis,
            cells,
        }
    }
}

impl From<SweepCell> for CellOutput {
    fn from(c: SweepCell) -> Self {
        Self {
            policy: c.policy,
            axis_value: c.axis_value,
            series_value: c.series_value,
            params: c.params,
            bounds: (c.policy == PolicyKind::Lodco).then_some(c.bounds),
            summary: c.summary,
            runs: c.runs,
            series: None,
        }
    }
}

pub fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises to JSON");
    s.push('\n');
    s
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

fn name_or_empty(a: Option<Axis>) -> &'static str {
    a.map(Axis::name).unwrap_or("")
}

/// Per-seed rows of each cell followed by a `mean` row, in cell order.
pub fn metrics_csv(doc: &MetricsDocument) -> String {
    let mut w = csv_writer();
    w.write_record(METRICS_HEADER).expect("in-memory CSV");
    for cell in &doc.cells {
        let bounds = |f: fn(&BoundConstants) -> f64| fmt_opt(cell.bounds.as_ref().map(f));
        let tail = [
            fmt_float(cell.params.v),
            fmt_float(cell.params.theta),
            bounds(|b| b.c),
            bounds(|b| b.nu),
            bounds(|b| b.gap),
        ];
        let head = [
            cell.policy.name().to_owned(),
            name_or_empty(doc.axis).to_owned(),
            fmt_opt(cell.axis_value),
            name_or_empty(doc.series_axis).to_owned(),
            fmt_opt(cell.series_value),
        ];
        for run in &cell.runs {
            let m = &run.metrics;
            let shares = |f: fn(&crate::engine::ModeShares) -> f64| fmt_opt(m.mode_shares.as_ref().map(f));
            let row = [
                run.seed.to_string(),
                m.slots.to_string(),
                m.requested.to_string(),
                m.executed.to_string(),
                m.dropped.to_string(),
                fmt_float(m.avg_cost),
                String::new(),
                fmt_opt(m.avg_completion),
                fmt_opt(m.drop_ratio),
                shares(|s| s.mobile),
                shares(|s| s.server),
                shares(|s| s.drop),
                fmt_float(m.battery_min),
                fmt_float(m.battery_max),
            ];
            w.write_record(head.iter().chain(row.iter()).chain(tail.iter())).expect("in-memory CSV");
        }
        let s = &cell.summary;
        let total = |f: fn(&SeedRun) -> u64| cell.runs.iter().map(f).sum::<u64>().to_string();
        let shares = |f: fn(&crate::engine::ModeShares) -> f64| fmt_opt(s.mode_shares.as_ref().map(f));
        let row = [
            "mean".to_owned(),
            total(|r| r.metrics.slots),
            total(|r| r.metrics.requested),
            total(|r| r.metrics.executed),
            total(|r| r.metrics.dropped),
            fmt_float(s.avg_cost_mean),
            fmt_float(s.avg_cost_std),
            fmt_opt(s.avg_completion),
            fmt_opt(s.drop_ratio),
            shares(|s| s.mobile),
            shares(|s| s.server),
            shares(|s| s.drop),
            fmt_float(s.battery_min),
            fmt_float(s.battery_max),
        ];
        w.write_record(head.iter().chain(row.iter()).chain(tail.iter())).expect("in-memory CSV");
    }
    csv_finish(w)
}

pub fn series_csv(doc: &MetricsDocument) -> String {
    let mut w = csv_writer();
    w.write_record(SERIES_HEADER).expect("in-memory CSV");
    for cell in &doc.cells {
        let Some(points) = &cell.series else { continue };
        let seed = cell.runs.first().map(|r| r.seed).unwrap_or_default().to_string();
        for pt in points {
            w.write_record([
                cell.policy.name().to_owned(),
                fmt_opt(cell.axis_value),
                fmt_opt(cell.series_value),
                seed.clone(),
                pt.t.to_string(),
                fmt_float(pt.battery),
                fmt_float(pt.running_avg_cost),
                fmt_float(cell.params.v),
            ])
            .expect("in-memory CSV");
        }
    }
    csv_finish(w)
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut w = csv_writer();
    w.write_record(TRACE_HEADER).expect("in-memory CSV");
    for r in &trace.records {
        w.write_record([
            r.state.t.to_string(),
            r.state.zeta().to_string(),
            fmt_float(r.state.h),
            fmt_float(r.state.e_h),
            fmt_float(r.state.b),
            r.decision.mode.as_str().to_owned(),
            fmt_float(r.decision.f),
            fmt_float(r.decision.p),
            fmt_float(r.decision.e),
            fmt_float(r.outcome.cost),
            fmt_float(r.outcome.delay),
        ])
        .expect("in-memory CSV");
    }
    csv_finish(w)
}

pub const CERTIFY_HEADER: [&str; 12] = [
    "seed",
    "n_states",
    "n_f",
    "n_p",
    "threshold",
    "max_gap",
    "mean_gap",
    "min_signed_gap",
    "mode_agreements",
    "explained_ties",
    "failures",
    "passed",
];

pub fn certify_csv(report: &CertificationReport) -> String {
    let mut w = csv_writer();
    w.write_record(CERTIFY_HEADER).expect("in-memory CSV");
    w.write_record([
        report.seed.to_string(),
        report.n_states.to_string(),
        report.grid.n_f.to_string(),
        report.grid.n_p.to_string(),
        fmt_float(report.threshold),
        fmt_float(report.max_gap),
        fmt_float(report.mean_gap),
        fmt_float(report.min_signed_gap),
        report.mode_agreements.to_string(),
        report.explained_ties.to_string(),
        report.failures.len().to_string(),
        report.passed.to_string(),
    ])
    .expect("in-memory CSV");
    csv_finish(w)
}

/// Companion file next to `path`: `out/m.csv` becomes `out/m.series.csv`.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// File name of one run's trace inside the trace directory.
pub fn trace_file_name(cell: &CellOutput, axis: Option<Axis>, series_axis: Option<Axis>, seed: u64) -> String {
    let mut name = cell.policy.name().to_owned();
    for (a, v) in [(axis, cell.axis_value), (series_axis, cell.series_value)] {
        if let (Some(a), Some(v)) = (a, v) {
            name.push_str(&format!("_{}-{v}", a.name()));
        }
    }
    format!("{name}_seed{seed}.csv")
}

/// Fails early when `path` cannot be created or written.
pub fn check_writable_file(path: &Path) -> io::Result<()> {
    if path.is_dir() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("{} is a directory", path.display())));
    }
    OpenOptions::new().create(true).append(true).open(path).map(|_| ())
}

pub fn check_writable_dir(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".lodco-write-check");
    fs::write(&probe, b"")?;
    fs::remove_file(probe)
}

pub fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;

    #[test]
    fn three_slot_trace_has_four_lines() {
        let t = run(PolicyKind::Lodco, &SystemParams::baseline(), 3, 1).unwrap();
        let csv = trace_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], TRACE_HEADER.join(","));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-28, 2.588_834_764_831_844e-3, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(0.002), "2.0000000000000000e-3");
    }

    #[test]
    fn series_keeps_stride_and_last() {
        let t = run(PolicyKind::Lodco, &SystemParams::baseline(), 101, 1).unwrap();
        let pts = series_points(&t, 25);
        let ts: Vec<u64> = pts.iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![0, 25, 50, 75, 100]);
        let pts = series_points(&t, 40);
        assert_eq!(pts.last().unwrap().t, 100);
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling_path(Path::new("out/m.csv"), "series.csv"), PathBuf::from("out/m.series.csv"));
        assert_eq!(sibling_path(Path::new("m"), "series.csv"), PathBuf::from("m.series.csv"));
    }

    #[test]
    fn unwritable_targets_fail() {
        let dir = tempfile::tempdir().unwrap();
        assert!(check_writable_file(dir.path()).is_err());
        assert!(check_writable_file(&dir.path().join("missing/x.json")).is_err());
        assert!(check_writable_file(&dir.path().join("x.json")).is_ok());
        assert!(check_writable_dir(&dir.path().join("traces/a")).is_ok());
    }
}
