use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Running mean and variance with parallel batch merging.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningMeanStd {
    pub mean: f64,
    pub var: f64,
    pub count: f64,
}

impl Default for RunningMeanStd {
    fn default() -> Self {
        RunningMeanStd { mean: 0.0, var: 1.0, count: 1e-4 }
    }
}

impl RunningMeanStd {
    pub fn update(&mut self, xs: &[f64]) {
        if xs.is_empty() {
            return;
        }
        let n = xs.len() as f64;
        let bm = xs.iter().sum::<f64>() / n;
        let bv = xs.iter().map(|x| (x - bm) * (x - bm)).sum::<f64>() / n;
        let delta = bm - self.mean;
        let tot = self.count + n;
        let m2 = self.var * self.count + bv * n + delta * delta * self.count * n / tot;
        self.mean += delta * n / tot;
        self.var = m2 / tot;
        self.count = tot;
    }
}

/// Scales rewards by the running standard deviation of the discounted return.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardNormalizer {
    pub gamma: f64,
    pub clip: f64,
    pub eps: f64,
    pub stats: RunningMeanStd,
    /// Discounted return accumulator per actor.
    pub returns: Vec<f64>,
}

impl RewardNormalizer {
    pub fn new(n_actors: usize, gamma: f64) -> Self {
        RewardNormalizer { gamma, clip: 10.0, eps: 1e-8, stats: RunningMeanStd::default(), returns: vec![0.0; n_actors] }
    }

    /// Scale using the current statistics, without updating them.
    pub fn scale(&self, r: f64) -> f64 {
        (r / libm::sqrt(self.stats.var + self.eps)).clamp(-self.clip, self.clip)
    }

    /// Normalizes one reward per actor, then folds them into the statistics.
    /// Accumulators reset where `dones` is set.
    pub fn normalize(&mut self, rewards: &[f64], dones: &[bool]) -> Vec<f64> {
        let out = rewards.iter().map(|&r| self.scale(r)).collect();
        for (ret, &r) in self.returns.iter_mut().zip(rewards) {
            *ret = *ret * self.gamma + r;
        }
        self.stats.update(&self.returns);
        for (ret, &d) in self.returns.iter_mut().zip(dones) {
            if d {
                *ret = 0.0;
            }
        }
        out
    }
}
