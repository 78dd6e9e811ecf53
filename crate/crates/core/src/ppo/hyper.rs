use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::mlp::Activation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpoHyperparams {
    /// Transitions per actor per rollout.
    pub n_steps: usize,
    pub n_epochs: usize,
    pub batch_size: usize,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub clip_range: f64,
    pub gae_lambda: f64,
    pub gamma: f64,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub activation: Activation,
    pub max_grad_norm: f64,
    pub n_actors: usize,
    pub log_std_init: f64,
    pub normalize_reward: bool,
}

impl Default for PpoHyperparams {
    fn default() -> Self {
        PpoHyperparams {
            n_steps: 1024,
            n_epochs: 20,
            batch_size: 64,
            vf_coef: 0.88331,
            ent_coef: 0.0,
            clip_range: 0.2,
            gae_lambda: 0.95,
            gamma: 0.999,
            hidden: vec![64, 64],
            learning_rate: 1e-4,
            activation: Activation::Tanh,
            max_grad_norm: 0.5,
            n_actors: 4,
            log_std_init: 0.0,
            normalize_reward: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid hyperparameter {name}: {reason}")]
pub struct HyperError {
    pub name: &'static str,
    pub reason: &'static str,
}

impl PpoHyperparams {
    pub fn validate(&self) -> Result<(), HyperError> {
        let fail = |name, reason| Err(HyperError { name, reason });
        if self.n_steps == 0 || self.n_actors == 0 || self.batch_size == 0 || self.n_epochs == 0 {
            return fail("n_steps/n_actors/batch_size/n_epochs", "must be positive");
        }
        if !(self.clip_range > 0.0) {
            return fail("clip_range", "must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail("gamma", "must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return fail("gae_lambda", "must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate", "must be positive");
        }
        if !(self.max_grad_norm > 0.0) {
            return fail("max_grad_norm", "must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return fail("hidden", "needs at least one non-empty layer");
        }
        if !(self.vf_coef >= 0.0 && self.ent_coef >= 0.0) {
            return fail("vf_coef/ent_coef", "must be non-negative");
        }
        Ok(())
    }

    /// Transitions gathered per rollout across all actors.
    pub fn rollout_len(&self) -> usize {
        self.n_steps * self.n_actors
    }
}
