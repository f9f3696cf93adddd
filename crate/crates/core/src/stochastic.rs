//! Seeded generators for task arrivals, channel gains and harvestable energy.
//!
//! Every process owns a ChaCha12 stream keyed by `(seed, stream id)`, so a
//! trace depends only on the seed and is identical on every platform. Each
//! stream yields exactly one draw per slot regardless of the parameters,
//! which keeps the three processes aligned when one of them is changed.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::model::SystemParams;

pub const ARRIVAL_STREAM: u64 = 0;
pub const CHANNEL_STREAM: u64 = 1;
pub const HARVEST_STREAM: u64 = 2;
/// Used by the optimality certifier for battery levels.
pub const BATTERY_STREAM: u64 = 3;

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

/// One reproducible pseudorandom stream.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_MINUS_53
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_unit() < p
    }

    /// Exponential by inversion of a single open-interval uniform; always > 0.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * self.next_open_unit().ln()
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_unit()
    }
}

/// Parameters of the three i.i.d. exogenous processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub rho: f64,
    pub h_mean: f64,
    pub eh_max: f64,
}

impl From<&SystemParams> for ProcessConfig {
    fn from(p: &SystemParams) -> Self {
        Self { rho: p.rho, h_mean: p.h_mean, eh_max: p.eh_max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExogenousDraw {
    pub task: bool,
    pub h: f64,
    pub e_h: f64,
}

/// The three per-process streams of one run.
#[derive(Debug, Clone)]
pub struct SlotSources {
    pub arrivals: RandomSource,
    pub channel: RandomSource,
    pub harvest: RandomSource,
}

impl SlotSources {
    pub fn from_seed(seed: u64) -> Self {
        Self::from_seeds(seed, seed, seed)
    }

    /// Independent seeds per process; streams are still distinct per process.
    pub fn from_seeds(arrivals: u64, channel: u64, harvest: u64) -> Self {
        Self {
            arrivals: RandomSource::new(arrivals, ARRIVAL_STREAM),
            channel: RandomSource::new(channel, CHANNEL_STREAM),
            harvest: RandomSource::new(harvest, HARVEST_STREAM),
        }
    }
}

pub fn sample_slot(sources: &mut SlotSources, cfg: &ProcessConfig) -> ExogenousDraw {
    ExogenousDraw {
        task: sources.arrivals.bernoulli(cfg.rho),
        h: sources.channel.exponential(cfg.h_mean),
        e_h: sources.harvest.uniform(0.0, cfg.eh_max),
    }
}
