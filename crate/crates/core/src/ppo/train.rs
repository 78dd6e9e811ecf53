//! Rollout collection, advantage estimation and minibatch updates.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gae::compute_gae;
use super::hyper::{HyperError, PpoHyperparams};
use super::loss::{ppo_loss, LossCoefs, LossStats, Minibatch};
use super::policy::{clip_action, sample_action, PolicyBundle, PpoAgent};
use crate::agent::{evaluate_costs, EpisodeResult};
use crate::codec::{normalize_observation, ObsScales};
use crate::scenario::ScenarioSpec;
use crate::sim::{SimError, Simulator};
use crate::stochastic::{Purpose, RngStream};

/// Entity id of the held-out evaluation episodes in the seed derivation.
const EVAL_ENTITY: u64 = 0x80_0000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub total_steps: u64,
    pub eval_every: u64,
    pub eval_episodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub env_steps: u64,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub is_best: bool,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub best: PolicyBundle,
    pub last: PolicyBundle,
    pub curve: Vec<EvalRecord>,
    pub last_stats: LossStats,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("total_steps {total} is below one rollout of {rollout} transitions")]
    TooFewSteps { total: u64, rollout: u64 },
    #[error("loss became non-finite after {env_steps} environment steps")]
    Diverged { env_steps: u64, last_good: Option<Box<PolicyBundle>> },
}

/// Seeds of the held-out episodes evaluated during training.
pub fn training_eval_seeds(seed: u64, n: usize) -> Vec<u64> {
    let s = RngStream::new(seed);
    (0..n).map(|k| s.derive_seed(Purpose::Episode, EVAL_ENTITY, k as u64)).collect()
}

fn actor_episode_seed(seed: u64, actor: usize, episode: u64) -> u64 {
    RngStream::new(seed).derive_seed(Purpose::Episode, actor as u64, episode)
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, libm::sqrt(v))
}

/// Deterministic episodes of `bundle` on `seeds`.
pub fn evaluate_policy(bundle: &PolicyBundle, scenario: &ScenarioSpec, seeds: &[u64]) -> Result<Vec<EpisodeResult>, SimError> {
    let (mut sim, _) = Simulator::new(scenario.clone(), seeds.first().copied().unwrap_or(0))?;
    evaluate_costs(&mut sim, &mut PpoAgent::new(bundle), seeds)
}

struct Rollout {
    obs: Vec<f64>,
    actions: Vec<f64>,
    log_probs: Vec<f64>,
    rewards: Vec<f64>,
    values: Vec<f64>,
    dones: Vec<bool>,
}

/// Trains a fresh agent. `on_eval` is called after every periodic
/// evaluation with the record and the bundle that was evaluated; returning
/// `ControlFlow::Break` ends training early.
pub fn train(
    scenario: &ScenarioSpec,
    hyper: PpoHyperparams,
    cfg: &TrainConfig,
    on_eval: impl FnMut(&EvalRecord, &PolicyBundle) -> ControlFlow<()>,
) -> Result<TrainOutcome, TrainError> {
    let scales = ObsScales::for_scenario(scenario);
    let bundle = PolicyBundle::new(&scales, scenario.chain.action_len(), hyper, cfg.seed);
    train_from(scenario, bundle, cfg, on_eval)
}

/// Continues training `bundle` until `cfg.total_steps` environment steps.
pub fn train_from(
    scenario: &ScenarioSpec,
    mut bundle: PolicyBundle,
    cfg: &TrainConfig,
    mut on_eval: impl FnMut(&EvalRecord, &PolicyBundle) -> ControlFlow<()>,
) -> Result<TrainOutcome, TrainError> {
    let hp = bundle.hyper.clone();
    hp.validate()?;
    let rollout = hp.rollout_len() as u64;
    if cfg.total_steps < rollout {
        return Err(TrainError::TooFewSteps { total: cfg.total_steps, rollout });
    }
    let n = hp.n_actors;
    let scales = bundle.scales();
    let obs_dim = scales.maxima.len();
    let act_dim = bundle.net.act_dim();
    let eval_seeds = training_eval_seeds(cfg.seed, cfg.eval_episodes);

    let mut sims = Vec::with_capacity(n);
    let mut obs = Vec::with_capacity(n);
    let mut episodes = vec![0u64; n];
    for a in 0..n {
        let (sim, o) = Simulator::new(scenario.clone(), actor_episode_seed(cfg.seed, a, 0))?;
        sims.push(sim);
        obs.push(normalize_observation(&o, &scales).0);
    }

    let mut curve = Vec::new();
    let mut best: Option<(f64, PolicyBundle)> = None;
    let mut next_eval = cfg.eval_every.max(1);
    let mut last_stats = LossStats::default();
    let coefs = LossCoefs {
        clip_range: hp.clip_range,
        vf_coef: hp.vf_coef,
        ent_coef: hp.ent_coef,
        normalize_advantage: true,
    };

    let mut stopped = false;
    while bundle.env_steps < cfg.total_steps {
        let remaining = (cfg.total_steps - bundle.env_steps) / n as u64;
        let steps = (hp.n_steps as u64).min(remaining.max(1)) as usize;
        let mut ro: Vec<Rollout> = (0..n)
            .map(|_| Rollout {
                obs: Vec::with_capacity(steps * obs_dim),
                actions: Vec::with_capacity(steps * act_dim),
                log_probs: Vec::with_capacity(steps),
                rewards: Vec::with_capacity(steps),
                values: Vec::with_capacity(steps),
                dones: Vec::with_capacity(steps),
            })
            .collect();

        for _ in 0..steps {
            let flat: Vec<f64> = obs.concat();
            let (actor, critic) = bundle.net.forward_batch(&bundle.params, &flat, n);
            let log_std = bundle.net.log_std(&bundle.params).to_vec();
            let mut raw_rewards = vec![0.0; n];
            let mut dones = vec![false; n];
            for a in 0..n {
                let mean = &actor.output()[a * act_dim..(a + 1) * act_dim];
                let (raw, lp) = sample_action(mean, &log_std, &mut bundle.rngs[a]);
                let (next, out) = sims[a].step(&clip_action(&raw))?;
                let r = &mut ro[a];
                r.obs.extend_from_slice(&obs[a]);
                r.actions.extend_from_slice(&raw);
                r.log_probs.push(lp);
                r.values.push(critic.output()[a]);
                r.dones.push(out.done);
                raw_rewards[a] = out.reward;
                dones[a] = out.done;
                obs[a] = if out.done {
                    episodes[a] += 1;
                    let o = sims[a].reset(actor_episode_seed(cfg.seed, a, episodes[a]));
                    normalize_observation(&o, &scales).0
                } else {
                    normalize_observation(&next, &scales).0
                };
            }
            let rewards = if hp.normalize_reward {
                bundle.normalizer.normalize(&raw_rewards, &dones)
            } else {
                raw_rewards
            };
            for a in 0..n {
                ro[a].rewards.push(rewards[a]);
            }
            bundle.env_steps += n as u64;

            while next_eval <= bundle.env_steps && next_eval <= cfg.total_steps {
                let costs: Vec<f64> =
                    evaluate_policy(&bundle, scenario, &eval_seeds)?.iter().map(|e| e.total_cost).collect();
                let (mean_cost, std_cost) = mean_std(&costs);
                let is_best = best.as_ref().is_none_or(|(b, _)| mean_cost < *b);
                if is_best {
                    best = Some((mean_cost, bundle.clone()));
                }
                let rec = EvalRecord { env_steps: next_eval, mean_cost, std_cost, is_best };
                curve.push(rec);
                next_eval += cfg.eval_every.max(1);
                if on_eval(&rec, &bundle).is_break() {
                    stopped = true;
                }
            }
            if stopped {
                break;
            }
        }
        if stopped {
            break;
        }

        // advantages per actor, bootstrapped from the current state
        let flat: Vec<f64> = obs.concat();
        let (_, critic) = bundle.net.forward_batch(&bundle.params, &flat, n);
        let mut advantages = Vec::with_capacity(steps * n);
        let mut returns = Vec::with_capacity(steps * n);
        for (a, r) in ro.iter().enumerate() {
            let (adv, ret) = compute_gae(&r.rewards, &r.values, &r.dones, critic.output()[a], hp.gamma, hp.gae_lambda)
                .expect("rollout arrays are aligned");
            advantages.extend(adv);
            returns.extend(ret);
        }
        let all_obs: Vec<f64> = ro.iter().flat_map(|r| r.obs.iter().copied()).collect();
        let all_actions: Vec<f64> = ro.iter().flat_map(|r| r.actions.iter().copied()).collect();
        let all_lp: Vec<f64> = ro.iter().flat_map(|r| r.log_probs.iter().copied()).collect();
        let total = returns.len();

        let snapshot = bundle.params.clone();
        let mut idx: Vec<usize> = (0..total).collect();
        let mut mb_obs = Vec::with_capacity(hp.batch_size * obs_dim);
        let mut mb_act = Vec::with_capacity(hp.batch_size * act_dim);
        let mut grads = vec![0.0; bundle.params.len()];
        for _ in 0..hp.n_epochs {
            shuffle(&mut idx, &mut bundle.rngs[n]);
            for chunk in idx.chunks(hp.batch_size) {
                mb_obs.clear();
                mb_act.clear();
                for &i in chunk {
                    mb_obs.extend_from_slice(&all_obs[i * obs_dim..(i + 1) * obs_dim]);
                    mb_act.extend_from_slice(&all_actions[i * act_dim..(i + 1) * act_dim]);
                }
                let lp: Vec<f64> = chunk.iter().map(|&i| all_lp[i]).collect();
                let adv: Vec<f64> = chunk.iter().map(|&i| advantages[i]).collect();
                let ret: Vec<f64> = chunk.iter().map(|&i| returns[i]).collect();
                let mb = Minibatch { obs: &mb_obs, actions: &mb_act, old_log_probs: &lp, advantages: &adv, returns: &ret };
                grads.iter_mut().for_each(|g| *g = 0.0);
                let stats = ppo_loss(&bundle.net, &bundle.params, &mb, &coefs, &mut grads);
                if !stats.loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                    bundle.params = snapshot;
                    return Err(TrainError::Diverged {
                        env_steps: bundle.env_steps,
                        last_good: best.map(|(_, b)| Box::new(b)),
                    });
                }
                bundle.adam.step(&mut bundle.params, &mut grads, hp.learning_rate, hp.max_grad_norm);
                last_stats = stats;
            }
        }
        bundle.updates += 1;
    }

    let best = best.map(|(_, b)| b).unwrap_or_else(|| bundle.clone());
    Ok(TrainOutcome { best, last: bundle, curve, last_stats })
}

fn shuffle<R: Rng>(v: &mut [usize], rng: &mut R) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}
