//! Random-search hyperparameter tuning with median pruning.

use std::ops::ControlFlow;

use echelon_core::ppo::{train, Activation, PpoHyperparams, TrainConfig};
use echelon_core::stochastic::{Purpose, RngStream};
use echelon_core::ScenarioSpec;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const N_STEPS: [usize; 7] = [32, 64, 128, 256, 512, 1024, 2048];
pub const N_EPOCHS: [usize; 4] = [3, 5, 10, 20];
pub const BATCH_SIZE: [usize; 4] = [64, 128, 256, 512];
pub const CLIP_RANGE: [f64; 3] = [0.1, 0.2, 0.3];
pub const GAE_LAMBDA: [f64; 5] = [0.9, 0.92, 0.95, 0.98, 1.0];
pub const GAMMA: [f64; 6] = [0.95, 0.98, 0.99, 0.995, 0.999, 0.9999];
pub const HIDDEN: [usize; 3] = [64, 128, 256];
pub const LEARNING_RATE: (f64, f64) = (1e-5, 1e-2);
pub const MAX_GRAD_NORM: [f64; 9] = [0.3, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0, 5.0];

/// Draws one configuration; actor count and entropy weight stay fixed.
pub fn sample_hyperparams<R: Rng>(rng: &mut R) -> PpoHyperparams {
    let width = *HIDDEN.choose(rng).unwrap();
    let (lo, hi) = LEARNING_RATE;
    PpoHyperparams {
        n_steps: *N_STEPS.choose(rng).unwrap(),
        n_epochs: *N_EPOCHS.choose(rng).unwrap(),
        batch_size: *BATCH_SIZE.choose(rng).unwrap(),
        vf_coef: rng.random_range(0.0..=1.0),
        clip_range: *CLIP_RANGE.choose(rng).unwrap(),
        gae_lambda: *GAE_LAMBDA.choose(rng).unwrap(),
        gamma: *GAMMA.choose(rng).unwrap(),
        hidden: vec![width, width],
        learning_rate: (rng.random_range(lo.ln()..=hi.ln())).exp(),
        activation: if rng.random_bool(0.5) { Activation::Relu } else { Activation::Tanh },
        max_grad_norm: *MAX_GRAD_NORM.choose(rng).unwrap(),
        ..PpoHyperparams::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub trials: usize,
    pub steps_per_trial: u64,
    pub eval_every: u64,
    pub eval_episodes: usize,
    pub seed: u64,
    /// Completed or pruned trials needed before pruning starts.
    pub n_startup: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub hyper: PpoHyperparams,
    /// Best evaluation cost seen so far, per checkpoint.
    pub intermediate: Vec<f64>,
    pub best_cost: Option<f64>,
    pub pruned: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub best: PpoHyperparams,
    pub best_trial: Option<usize>,
    pub trials: Vec<TrialRecord>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Whether a trial at checkpoint `k` with running best `value` should stop.
pub fn should_prune(prior: &[TrialRecord], k: usize, value: f64, n_startup: usize) -> bool {
    let at_k: Vec<f64> = prior.iter().filter_map(|t| t.intermediate.get(k).copied()).collect();
    at_k.len() >= n_startup.max(1) && value > median(at_k)
}

/// Runs `cfg.trials` trials. The first uses the shipped defaults; the rest
/// are random draws from the search space. Each trial is scored by its best
/// evaluation cost; pruned and failed trials are never selected.
pub fn random_search_tune(
    scenario: &ScenarioSpec,
    cfg: &TuneConfig,
    mut on_trial: impl FnMut(&TrialRecord),
) -> TuneOutcome {
    let stream = RngStream::new(cfg.seed);
    let mut trials: Vec<TrialRecord> = Vec::with_capacity(cfg.trials);
    for i in 0..cfg.trials {
        let hyper = if i == 0 {
            PpoHyperparams::default()
        } else {
            sample_hyperparams(&mut stream.substream(Purpose::Tuning, 0, i as u64))
        };
        let tc = TrainConfig {
            seed: stream.derive_seed(Purpose::Tuning, 1, i as u64),
            total_steps: cfg.steps_per_trial,
            eval_every: cfg.eval_every,
            eval_episodes: cfg.eval_episodes,
        };
        let mut intermediate = Vec::new();
        let mut pruned = false;
        let result = train(scenario, hyper.clone(), &tc, |rec, _| {
            let best = intermediate.last().map_or(rec.mean_cost, |b: &f64| b.min(rec.mean_cost));
            intermediate.push(best);
            if should_prune(&trials, intermediate.len() - 1, best, cfg.n_startup) {
                pruned = true;
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        let (best_cost, failure) = match result {
            Ok(_) if pruned => (None, None),
            Ok(_) => (intermediate.last().copied(), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let rec = TrialRecord { index: i, hyper, intermediate, best_cost, pruned, failure };
        on_trial(&rec);
        trials.push(rec);
    }
    let best_trial = trials
        .iter()
        .filter_map(|t| t.best_cost.map(|c| (t.index, c)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    let best = best_trial.map_or_else(PpoHyperparams::default, |i| trials[i].hyper.clone());
    TuneOutcome { best, best_trial, trials }
}
