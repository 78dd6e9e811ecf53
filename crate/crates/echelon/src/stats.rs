//! Bootstrap intervals and gain arithmetic.

use echelon_core::stochastic::{Purpose, RngStream};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ITERATIONS: usize = 10_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Quantile of sorted data with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Pivotal bootstrap interval for the mean of `samples`.
pub fn bootstrap_ci(samples: &[f64], iterations: usize, confidence: f64, seed: u64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::Stats(format!("need at least 2 samples, got {}", samples.len())));
    }
    if iterations == 0 || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Stats("iterations must be positive and confidence in (0, 1)".into()));
    }
    let m = mean(samples);
    if samples.iter().all(|&x| x == samples[0]) {
        return Ok((m, m));
    }
    let mut rng = RngStream::new(seed).substream(Purpose::Bootstrap, 0, 0);
    let n = samples.len();
    let mut means: Vec<f64> = (0..iterations)
        .map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    let q_lo = quantile(&means, alpha / 2.0);
    let q_hi = quantile(&means, 1.0 - alpha / 2.0);
    Ok((2.0 * m - q_hi, 2.0 * m - q_lo))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    /// LP mean minus PPO mean; positive when PPO is cheaper.
    pub value: f64,
    pub pct: f64,
}

pub fn gain(lp_mean: f64, ppo_mean: f64) -> Gain {
    let value = lp_mean - ppo_mean;
    Gain { value, pct: 100.0 * value / lp_mean }
}

/// Rounds to one decimal, as gains are reported.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}
