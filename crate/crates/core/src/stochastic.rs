//! Seasonal/regular demand generation and Poisson lead times.
//!
//! Every random draw comes from a counter-addressed ChaCha substream keyed by
//! `(purpose, entity, step)`, so a value depends only on the seed and its key,
//! never on the order in which other values were queried.

use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandKind {
    Seasonal,
    Regular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Perturbation {
    None,
    Gaussian { std_dev: f64 },
    Uniform { low: f64, high: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandSpec {
    pub kind: DemandKind,
    pub sin_min: f64,
    pub sin_max: f64,
    pub clip_min: f64,
    pub clip_max: f64,
    pub peaks: u32,
    pub perturbation: Perturbation,
    pub regular_mean: f64,
}

impl DemandSpec {
    pub fn seasonal(perturbation: Perturbation) -> Self {
        DemandSpec {
            kind: DemandKind::Seasonal,
            sin_min: 100.0,
            sin_max: 300.0,
            clip_min: 0.0,
            clip_max: 400.0,
            peaks: 2,
            perturbation,
            regular_mean: 200.0,
        }
    }

    pub fn regular(perturbation: Perturbation) -> Self {
        DemandSpec { kind: DemandKind::Regular, ..Self::seasonal(perturbation) }
    }

    pub fn is_valid(&self) -> bool {
        let ordered = self.clip_min <= self.sin_min
            && self.sin_min <= self.sin_max
            && self.sin_max <= self.clip_max;
        let pert = match self.perturbation {
            Perturbation::None => true,
            Perturbation::Gaussian { std_dev } => std_dev >= 0.0,
            Perturbation::Uniform { low, high } => low <= high,
        };
        ordered && pert && self.peaks >= 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadTimeKind {
    Constant,
    Stochastic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadTimeSpec {
    pub kind: LeadTimeKind,
    pub average: u32,
    pub maximum: u32,
}

impl LeadTimeSpec {
    pub const fn constant() -> Self {
        LeadTimeSpec { kind: LeadTimeKind::Constant, average: 2, maximum: 4 }
    }

    pub const fn stochastic() -> Self {
        LeadTimeSpec { kind: LeadTimeKind::Stochastic, average: 2, maximum: 4 }
    }

    pub fn is_valid(&self) -> bool {
        1 <= self.average && self.average <= self.maximum
    }
}

/// What a substream is used for. Part of the substream key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Demand = 1,
    ProductionLead = 2,
    TransportLead = 3,
    Episode = 4,
    Policy = 5,
    Bootstrap = 6,
    Tuning = 7,
}

/// Seed holder that hands out independent, reproducible substreams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
}

impl RngStream {
    pub const fn new(seed: u64) -> Self {
        RngStream { seed }
    }

    /// Generator for the `(purpose, entity, step)` substream. Entities must be
    /// below 2^24 and steps below 2^32.
    pub fn substream(&self, purpose: Purpose, entity: u64, step: u64) -> ChaCha8Rng {
        debug_assert!(entity < (1 << 24) && step < (1 << 32));
        let key = ((purpose as u64) << 56) | ((entity & 0xff_ffff) << 32) | (step & 0xffff_ffff);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(key);
        rng
    }

    /// Derived 64-bit seed, e.g. for the episodes of an evaluation plan.
    pub fn derive_seed(&self, purpose: Purpose, entity: u64, step: u64) -> u64 {
        self.substream(purpose, entity, step).random()
    }
}

/// Seasonal curve `min + (max - min)/2 * (1 + sin(2 z t pi / h))`.
pub fn sinusoid(spec: &DemandSpec, t: usize, horizon: usize) -> f64 {
    let phase = 2.0 * spec.peaks as f64 * t as f64 * PI / horizon as f64;
    spec.sin_min + (spec.sin_max - spec.sin_min) / 2.0 * (1.0 + libm::sin(phase))
}

fn clip(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Unperturbed expected demand, used as the planning forecast.
pub fn forecast_demand(spec: &DemandSpec, t: usize, horizon: usize) -> f64 {
    let base = match spec.kind {
        DemandKind::Seasonal => sinusoid(spec, t, horizon),
        DemandKind::Regular => spec.regular_mean,
    };
    clip(base, spec.clip_min, spec.clip_max)
}

/// Demand of retailer slot `retailer` at step `t`.
pub fn sample_demand(
    spec: &DemandSpec,
    retailer: usize,
    t: usize,
    horizon: usize,
    rng: &RngStream,
) -> f64 {
    let base = match spec.kind {
        DemandKind::Seasonal => sinusoid(spec, t, horizon),
        DemandKind::Regular => spec.regular_mean,
    };
    let noise = match spec.perturbation {
        Perturbation::None => 0.0,
        Perturbation::Gaussian { std_dev } => {
            let z: f64 = rng.substream(Purpose::Demand, retailer as u64, t as u64).sample(StandardNormal);
            std_dev * z
        }
        Perturbation::Uniform { low, high } => {
            let u: f64 = rng.substream(Purpose::Demand, retailer as u64, t as u64).random();
            low + (high - low) * u
        }
    };
    clip(base + noise, spec.clip_min, spec.clip_max)
}

/// Poisson sample by sequential search on the CDF.
pub fn poisson_inversion(lambda: f64, u: f64) -> u32 {
    let mut k = 0u32;
    let mut p = libm::exp(-lambda);
    let mut cdf = p;
    // The cap guards against u within rounding of 1 when lambda is small.
    while u > cdf && k < 1000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    k
}

/// Which pipeline a lead time belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeadEntity {
    /// Production at the supplier with this supplier index.
    Production(usize),
    /// Transport over the link with this link index.
    Transport(usize),
}

/// Lead time for a dispatch at step `t`: the average when constant, otherwise
/// `min(Poisson(average - 1) + 1, maximum)`.
pub fn sample_lead_time(spec: &LeadTimeSpec, entity: LeadEntity, t: usize, rng: &RngStream) -> u32 {
    match spec.kind {
        LeadTimeKind::Constant => spec.average,
        LeadTimeKind::Stochastic => {
            let (purpose, id) = match entity {
                LeadEntity::Production(s) => (Purpose::ProductionLead, s),
                LeadEntity::Transport(l) => (Purpose::TransportLead, l),
            };
            let u: f64 = rng.substream(purpose, id as u64, t as u64).random();
            let k = poisson_inversion(f64::from(spec.average - 1), u);
            (k + 1).min(spec.maximum)
        }
    }
}
