//! Side-by-side comparison of the LP and PPO agents against the lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::stats::{bootstrap_ci, gain, DEFAULT_CONFIDENCE, DEFAULT_ITERATIONS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: String,
    pub bound_mean: f64,
    pub bound_std: f64,
    pub lp_mean: f64,
    pub lp_std: f64,
    pub ppo_mean: f64,
    pub ppo_std: f64,
    pub gain: f64,
    pub gain_pct: f64,
    pub lp_ci_low: f64,
    pub lp_ci_high: f64,
    pub ppo_ci_low: f64,
    pub ppo_ci_high: f64,
}

/// Builds the comparison row. `bounds[i]` belongs to episode id `i`; both
/// reports must cover the same episodes.
pub fn compare_report(lp: &EvalReport, ppo: &EvalReport, bounds: &[f64], seed: u64) -> Result<ComparisonRow> {
    let set = lp.episode_set();
    if set != ppo.episode_set() || lp.scenario != ppo.scenario {
        return Err(Error::EpisodeSetMismatch);
    }
    if bounds.len() != set.len() || set.iter().enumerate().any(|(i, (id, _))| *id != i) {
        return Err(Error::EpisodeSetMismatch);
    }
    let (bound_mean, bound_std) = echelon_core::ppo::train::mean_std(bounds);
    let (lp_ci_low, lp_ci_high) = bootstrap_ci(&lp.costs(), DEFAULT_ITERATIONS, DEFAULT_CONFIDENCE, seed)?;
    let (ppo_ci_low, ppo_ci_high) = bootstrap_ci(&ppo.costs(), DEFAULT_ITERATIONS, DEFAULT_CONFIDENCE, seed)?;
    let g = gain(lp.mean, ppo.mean);
    Ok(ComparisonRow {
        scenario: lp.scenario.clone(),
        bound_mean,
        bound_std,
        lp_mean: lp.mean,
        lp_std: lp.std,
        ppo_mean: ppo.mean,
        ppo_std: ppo.std,
        gain: g.value,
        gain_pct: g.pct,
        lp_ci_low,
        lp_ci_high,
        ppo_ci_low,
        ppo_ci_high,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub episode_id: usize,
    pub seed: u64,
    pub bound: f64,
}
