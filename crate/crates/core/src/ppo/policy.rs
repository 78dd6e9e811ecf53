use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::hyper::PpoHyperparams;
use super::mlp::{Activation, Mlp, MlpCache};
use super::normalizer::RewardNormalizer;
use crate::agent::Policy;
use crate::codec::{normalize_observation, NormalizedAction, NormalizedObs, ObsScales};
use crate::sim::Observation;
use crate::stochastic::{Purpose, RngStream};

/// `0.5 * ln(2 pi)`.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Gaussian actor and value critic sharing one flat parameter vector:
/// actor weights, critic weights, then the log standard deviations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyNet {
    pub actor: Mlp,
    pub critic: Mlp,
    pub log_std_offset: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutput {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("policy parameters contain non-finite values")]
    Corrupted,
    #[error("policy expects {expected} inputs, got {found}")]
    Shape { expected: usize, found: usize },
}

impl PolicyNet {
    pub fn new(obs_dim: usize, act_dim: usize, hidden: &[usize], activation: Activation) -> Self {
        let sizes = |out: usize| {
            let mut s = vec![obs_dim];
            s.extend_from_slice(hidden);
            s.push(out);
            s
        };
        let actor = Mlp::new(sizes(act_dim), activation, 0);
        let critic = Mlp::new(sizes(1), activation, actor.num_params());
        let log_std_offset = actor.num_params() + critic.num_params();
        PolicyNet { actor, critic, log_std_offset }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.log_std_offset + self.act_dim()
    }

    /// Orthogonal weights (gain sqrt 2 on hidden layers, 0.01 on the mean
    /// head, 1 on the value head), zero biases, constant log-std.
    pub fn init<R: Rng>(&self, rng: &mut R, log_std_init: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.num_params()];
        let hidden = self.actor.sizes.len() - 2;
        let mut gains = vec![core::f64::consts::SQRT_2; hidden];
        gains.push(0.01);
        self.actor.init_orthogonal(&mut p, &gains, rng);
        *gains.last_mut().unwrap() = 1.0;
        self.critic.init_orthogonal(&mut p, &gains, rng);
        p[self.log_std_offset..].iter_mut().for_each(|v| *v = log_std_init);
        p
    }

    pub fn log_std<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.log_std_offset..]
    }

    pub fn forward_batch(&self, p: &[f64], x: &[f64], batch: usize) -> (MlpCache, MlpCache) {
        (self.actor.forward(p, x, batch), self.critic.forward(p, x, batch))
    }

    pub fn forward(&self, p: &[f64], obs: &[f64]) -> PolicyOutput {
        let (a, c) = self.forward_batch(p, obs, 1);
        PolicyOutput { mean: a.output().to_vec(), log_std: self.log_std(p).to_vec(), value: c.output()[0] }
    }
}

/// Diagonal Gaussian log-density.
pub fn gaussian_log_prob(a: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    a.iter()
        .zip(mean)
        .zip(log_std)
        .map(|((&x, &m), &ls)| {
            let z = (x - m) * libm::exp(-ls);
            -0.5 * z * z - ls - HALF_LN_2PI
        })
        .sum()
}

/// Draws `mean + exp(log_std) * z`; returns the raw draw and its log-density.
pub fn sample_action<R: Rng>(mean: &[f64], log_std: &[f64], rng: &mut R) -> (Vec<f64>, f64) {
    let a: Vec<f64> = mean
        .iter()
        .zip(log_std)
        .map(|(&m, &ls)| {
            let z: f64 = rng.sample(StandardNormal);
            m + libm::exp(ls) * z
        })
        .collect();
    let lp = gaussian_log_prob(&a, mean, log_std);
    (a, lp)
}

pub fn clip_action(a: &[f64]) -> NormalizedAction {
    NormalizedAction(a.iter().map(|v| v.clamp(-1.0, 1.0)).collect())
}

/// A trained or training agent with everything needed to resume or replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyBundle {
    pub net: PolicyNet,
    pub params: Vec<f64>,
    pub adam: Adam,
    pub normalizer: RewardNormalizer,
    pub hyper: PpoHyperparams,
    /// Observation maxima the network was trained with.
    pub obs_maxima: Vec<f64>,
    pub seed: u64,
    /// One sampling stream per actor, then the minibatch shuffling stream.
    pub rngs: Vec<ChaCha8Rng>,
    pub env_steps: u64,
    pub updates: u64,
}

impl PolicyBundle {
    pub fn new(scales: &ObsScales, act_dim: usize, hyper: PpoHyperparams, seed: u64) -> Self {
        let obs_dim = scales.maxima.len();
        let net = PolicyNet::new(obs_dim, act_dim, &hyper.hidden, hyper.activation);
        let streams = RngStream::new(seed);
        let mut init_rng = streams.substream(Purpose::Policy, 0xff_fffe, 0);
        let params = net.init(&mut init_rng, hyper.log_std_init);
        let rngs = (0..=hyper.n_actors).map(|i| streams.substream(Purpose::Policy, i as u64, 0)).collect();
        PolicyBundle {
            adam: Adam::new(net.num_params()),
            normalizer: RewardNormalizer::new(hyper.n_actors, hyper.gamma),
            net,
            params,
            hyper,
            obs_maxima: scales.maxima.clone(),
            seed,
            rngs,
            env_steps: 0,
            updates: 0,
        }
    }

    pub fn check_finite(&self) -> Result<(), PolicyError> {
        if self.params.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(PolicyError::Corrupted)
        }
    }

    pub fn scales(&self) -> ObsScales {
        ObsScales { maxima: self.obs_maxima.clone() }
    }

    pub fn forward(&self, obs: &NormalizedObs) -> Result<PolicyOutput, PolicyError> {
        if obs.0.len() != self.net.obs_dim() {
            return Err(PolicyError::Shape { expected: self.net.obs_dim(), found: obs.0.len() });
        }
        self.check_finite()?;
        Ok(self.net.forward(&self.params, &obs.0))
    }

    /// Mean action, clipped to the unit box.
    pub fn deterministic_action(&self, obs: &NormalizedObs) -> Result<NormalizedAction, PolicyError> {
        Ok(clip_action(&self.forward(obs)?.mean))
    }

    /// Stochastic action from the given stream: `(clipped action, raw draw, log-prob of the raw draw)`.
    pub fn sample<R: Rng>(&self, obs: &NormalizedObs, rng: &mut R) -> Result<(NormalizedAction, Vec<f64>, f64), PolicyError> {
        let out = self.forward(obs)?;
        let (raw, lp) = sample_action(&out.mean, &out.log_std, rng);
        Ok((clip_action(&raw), raw, lp))
    }
}

/// Deterministic PPO policy acting on physical observations.
pub struct PpoAgent<'a> {
    pub bundle: &'a PolicyBundle,
    scales: ObsScales,
}

impl<'a> PpoAgent<'a> {
    pub fn new(bundle: &'a PolicyBundle) -> Self {
        PpoAgent { scales: bundle.scales(), bundle }
    }
}

impl Policy for PpoAgent<'_> {
    fn act(&mut self, obs: &Observation) -> NormalizedAction {
        let x = normalize_observation(obs, &self.scales);
        let out = self.bundle.net.forward(&self.bundle.params, &x.0);
        clip_action(&out.mean)
    }
}
