//! Experiment configuration: TOML file, dotted-key overrides, validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{plan_cells, Axis, AxisValues, SweepSpec};
use crate::model::{Control, ModelError, ScenarioInputs, SystemParams};
use crate::policies::PolicyKind;
use crate::solver::RootFindConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("bad override `{0}` (expected key=value, e.g. system.rho=0.4)")]
    Override(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { field: field.into(), reason: reason.into() }
    }
}

/// Physical and control inputs, written the way experiments describe them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub rho: f64,
    /// Task input size L (bits).
    pub task_bits: f64,
    /// CPU cycles per byte X.
    pub cycles_per_byte: f64,
    pub tau: f64,
    pub tau_d: f64,
    pub phi: f64,
    pub kappa: f64,
    pub f_max: f64,
    pub p_max: f64,
    pub omega: f64,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0_linear: Option<f64>,
    /// Distance to the server (m).
    pub distance: f64,
    /// Mean harvesting power (W).
    pub p_h: f64,
    pub e_min: f64,
    pub e_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// Battery capacity C_B (J), converted to V.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub battery_capacity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

pub const DEFAULT_V: f64 = 1.6e-4;
pub const DEFAULT_G0_DB: f64 = -40.0;

impl Default for SystemSection {
    fn default() -> Self {
        let d = ScenarioInputs::default();
        Self {
            rho: d.rho,
            task_bits: d.task_bits,
            cycles_per_byte: d.cycles_per_byte,
            tau: d.tau,
            tau_d: d.tau_d,
            phi: d.phi,
            kappa: d.kappa,
            f_max: d.f_max,
            p_max: d.p_max,
            omega: d.omega,
            sigma: d.sigma,
            g0_db: None,
            g0_linear: None,
            distance: d.distance,
            p_h: d.p_h,
            e_min: d.e_min,
            e_max: d.e_max,
            v: None,
            battery_capacity: None,
            theta: None,
        }
    }
}

impl SystemSection {
    pub fn g0(&self) -> Result<f64, ConfigError> {
        match (self.g0_db, self.g0_linear) {
            (Some(_), Some(_)) => Err(ConfigError::invalid("system.g0_db", "give g0_db or g0_linear, not both")),
            (Some(db), None) => Ok(10f64.powf(db / 10.0)),
            (None, Some(lin)) => Ok(lin),
            (None, None) => Ok(10f64.powf(DEFAULT_G0_DB / 10.0)),
        }
    }

    pub fn control(&self) -> Result<Control, ConfigError> {
        match (self.v, self.battery_capacity) {
            (Some(_), Some(_)) => {
                Err(ConfigError::invalid("system.v", "give v or battery_capacity, not both"))
            }
            (Some(v), None) => Ok(Control::V(v)),
            (None, Some(c)) => Ok(Control::BatteryCapacity(c)),
            (None, None) => Ok(Control::V(DEFAULT_V)),
        }
    }

    pub fn to_inputs(&self) -> Result<ScenarioInputs, ConfigError> {
        Ok(ScenarioInputs {
            rho: self.rho,
            task_bits: self.task_bits,
            cycles_per_byte: self.cycles_per_byte,
            tau: self.tau,
            tau_d: self.tau_d,
            phi: self.phi,
            kappa: self.kappa,
            f_max: self.f_max,
            p_max: self.p_max,
            omega: self.omega,
            sigma: self.sigma,
            g0: self.g0()?,
            distance: self.distance,
            p_h: self.p_h,
            e_min: self.e_min,
            e_max: self.e_max,
            control: self.control()?,
            theta: self.theta,
        })
    }

    /// Config key responsible for a derived-parameter error.
    fn field_for(&self, name: &str) -> String {
        let key = match name {
            "h_mean" => "distance",
            "eh_max" => "p_h",
            "workload" => "cycles_per_byte",
            "g0" if self.g0_linear.is_some() => "g0_linear",
            "g0" => "g0_db",
            "v" if self.battery_capacity.is_some() => "battery_capacity",
            other => other,
        };
        format!("system.{key}")
    }

    pub fn model_error(&self, err: ModelError) -> ConfigError {
        match err {
            ModelError::InvalidParameter { name, reason } => ConfigError::invalid(self.field_for(name), reason),
            other => ConfigError::invalid("system", other.to_string()),
        }
    }

    pub fn to_params(&self) -> Result<SystemParams, ConfigError> {
        self.to_inputs()?.to_params().map_err(|e| self.model_error(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub slots: u64,
    /// Number of seeds per cell.
    pub seeds: u64,
    /// First seed; cells use `seed, seed + 1, ...`.
    pub seed: u64,
    pub warmup: u64,
    /// Worker threads, 0 for the machine default.
    pub workers: usize,
    pub policies: Vec<PolicyKind>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            slots: 50_000,
            seeds: 10,
            seed: 1,
            warmup: 0,
            workers: 0,
            policies: PolicyKind::ALL.to_vec(),
        }
    }
}

impl RunSection {
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Metrics file; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Directory for per-run slot traces.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_dir: Option<PathBuf>,
    /// Record battery level and running-average cost of each cell's first seed
    /// every this many slots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_stride: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub run: RunSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
    pub solver: RootFindConfig,
}

fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>().map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Parses the right-hand side of an override as a TOML value, falling back to
/// a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

/// Applies `section.key=value` to a parsed document.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(assignment.to_owned()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(assignment.to_owned()));
    }
    let (leaf, parents) = path.split_last().expect("split yields at least one part");
    let mut table = doc;
    for part in parents {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::invalid(key.trim(), format!("`{part}` is not a section")))?;
    }
    table.insert(leaf.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML text with overrides applied on top, then validates.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc = parse_table(text)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: ExperimentConfig = doc.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::from_toml_with(text, &[])
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.to_owned(), reason: e.to_string() })?;
        Self::from_toml_with(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// Applies overrides to an already constructed config (e.g. a preset).
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, ConfigError> {
        if overrides.is_empty() {
            self.validate()?;
            return Ok(self.clone());
        }
        Self::from_toml_with(&self.to_toml(), overrides)
    }

    pub fn params(&self) -> Result<SystemParams, ConfigError> {
        self.system.to_params()
    }

    /// Engine sweep description; no axis means a plain multi-seed run.
    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let (axis, series) = match &self.sweep {
            None => (None, None),
            Some(s) => (
                Some(AxisValues { axis: s.axis, values: s.values.clone() }),
                s.series_axis.map(|a| AxisValues { axis: a, values: s.series_values.clone() }),
            ),
        };
        Ok(SweepSpec {
            policies: self.run.policies.clone(),
            base: self.system.to_inputs()?,
            axis,
            series,
            slots: self.run.slots,
            seeds: self.run.seed_list(),
            warmup: self.run.warmup,
            workers: self.run.workers,
            root: self.solver,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system.to_params()?;
        if self.run.slots == 0 {
            return Err(ConfigError::invalid("run.slots", "must be at least 1"));
        }
        if self.run.seeds == 0 {
            return Err(ConfigError::invalid("run.seeds", "must be at least 1"));
        }
        if self.run.warmup >= self.run.slots {
            return Err(ConfigError::invalid(
                "run.warmup",
                format!("warm-up {} leaves no slots out of {}", self.run.warmup, self.run.slots),
            ));
        }
        if self.run.policies.is_empty() {
            return Err(ConfigError::invalid("run.policies", "list at least one policy"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(ConfigError::invalid("sweep.values", "list at least one value"));
            }
            if s.series_axis.is_some() == s.series_values.is_empty() {
                return Err(ConfigError::invalid(
                    "sweep.series_values",
                    "series_axis and series_values go together",
                ));
            }
            if s.series_axis == Some(s.axis) {
                return Err(ConfigError::invalid("sweep.series_axis", "must differ from sweep.axis"));
            }
        }
        if self.output.series_stride == Some(0) {
            return Err(ConfigError::invalid("output.series_stride", "must be at least 1"));
        }
        self.solver
            .validate()
            .map_err(|reason| ConfigError::invalid("solver", reason))?;
        let spec = self.sweep_spec()?;
        plan_cells(&spec).map_err(|e| match e {
            crate::engine::EngineError::Model(m) => ConfigError::invalid(
                "sweep.values",
                format!("a sweep cell is invalid: {}", self.system.model_error(m)),
            ),
            other => ConfigError::invalid("sweep", other.to_string()),
        })?;
        Ok(())
    }
}
