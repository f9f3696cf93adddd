//! Named experiment configurations, one per evaluation figure.

use std::fmt;
use std::str::FromStr;

use crate::engine::Axis;
use crate::policies::PolicyKind;

use super::config::{ExperimentConfig, SweepSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Battery level and running-average cost over time for (V, E_min) pairs.
    Fig2,
    /// Cost and battery requirement against V.
    Fig3,
    /// Performance against the task arrival probability.
    Fig4,
    /// Performance against the harvesting power.
    Fig5,
    /// Performance against the execution deadline.
    Fig6,
    /// Performance against the device-server distance.
    Fig7,
}

pub const V_GRID: [f64; 7] = [2e-5, 5e-5, 1e-4, 1.6e-4, 3e-4, 6e-4, 1e-3];
pub const E_MIN_GRID: [f64; 2] = [0.02e-3, 0.2e-3];
pub const RHO_SERIES: [f64; 2] = [0.4, 0.6];
pub const SERIES_STRIDE: u64 = 50;

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.system.rho = 0.6;
        cfg.system.e_min = 0.02e-3;
        cfg.system.v = Some(1.6e-4);
        let rho_series = |axis: Axis, values: Vec<f64>| SweepSection {
            axis,
            values,
            series_axis: Some(Axis::Rho),
            series_values: RHO_SERIES.to_vec(),
        };
        let (sweep, policies) = match self {
            Preset::Fig2 => {
                cfg.output.series_stride = Some(SERIES_STRIDE);
                (
                    SweepSection {
                        axis: Axis::V,
                        values: vec![1.6e-4, 6e-4],
                        series_axis: Some(Axis::EMin),
                        series_values: E_MIN_GRID.to_vec(),
                    },
                    vec![PolicyKind::Lodco],
                )
            }
            Preset::Fig3 => (
                SweepSection { axis: Axis::V, values: V_GRID.to_vec(), series_axis: None, series_values: vec![] },
                vec![PolicyKind::Lodco],
            ),
            Preset::Fig4 => (
                SweepSection {
                    axis: Axis::Rho,
                    values: (1..=9).map(|i| f64::from(i) / 10.0).collect(),
                    series_axis: None,
                    series_values: vec![],
                },
                PolicyKind::ALL.to_vec(),
            ),
            Preset::Fig5 => (
                rho_series(Axis::PH, (1..=10).map(|i| f64::from(2 * i) * 1e-3).collect()),
                PolicyKind::ALL.to_vec(),
            ),
            Preset::Fig6 => (
                rho_series(Axis::TauD, (1..=10).map(|i| f64::from(2 * i) * 1e-4).collect()),
                PolicyKind::ALL.to_vec(),
            ),
            Preset::Fig7 => (
                rho_series(Axis::D, vec![30.0, 40.0, 50.0, 60.0, 70.0, 80.0]),
                PolicyKind::ALL.to_vec(),
            ),
        };
        cfg.sweep = Some(sweep);
        cfg.run.policies = policies;
        cfg
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown preset `{0}` (valid: fig2, fig3, fig4, fig5, fig6, fig7)")]
pub struct UnknownPreset(pub String);

impl FromStr for Preset {
    type Err = UnknownPreset;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownPreset(s.to_owned()))
    }
}
