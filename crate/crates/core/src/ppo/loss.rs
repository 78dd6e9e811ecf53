use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::policy::{PolicyNet, HALF_LN_2PI};

/// Training samples in row-major layout.
#[derive(Clone, Copy, Debug)]
pub struct Minibatch<'a> {
    pub obs: &'a [f64],
    /// Raw (pre-clip) sampled actions.
    pub actions: &'a [f64],
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
}

impl Minibatch<'_> {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LossCoefs {
    pub clip_range: f64,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub normalize_advantage: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Per-sample clipped surrogate `min(r A, clip(r, 1-eps, 1+eps) A)` and its
/// derivative with respect to `r`.
pub fn clipped_surrogate(ratio: f64, adv: f64, eps: f64) -> (f64, f64) {
    let unclipped = ratio * adv;
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
    if unclipped <= clipped {
        (unclipped, adv)
    } else if (1.0 - eps..=1.0 + eps).contains(&ratio) {
        (clipped, adv)
    } else {
        (clipped, 0.0)
    }
}

/// Standardizes advantages (sample standard deviation); single samples are
/// left untouched.
pub fn standardize(adv: &[f64]) -> Vec<f64> {
    let n = adv.len();
    if n < 2 {
        return adv.to_vec();
    }
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = libm::sqrt(var);
    adv.iter().map(|a| (a - mean) / (sd + 1e-8)).collect()
}

/// Total loss `-L_clip + c1 L_vf - c2 H` of a minibatch; gradients are
/// accumulated into `grads`.
pub fn ppo_loss(net: &PolicyNet, params: &[f64], mb: &Minibatch, k: &LossCoefs, grads: &mut [f64]) -> LossStats {
    let b = mb.len();
    let na = net.act_dim();
    let nf = b as f64;
    let adv = if k.normalize_advantage { standardize(mb.advantages) } else { mb.advantages.to_vec() };
    let (actor, critic) = net.forward_batch(params, mb.obs, b);
    let mean = actor.output();
    let values = critic.output();
    let log_std = net.log_std(params);
    let inv_std: Vec<f64> = log_std.iter().map(|&l| libm::exp(-l)).collect();

    let mut d_mean = vec![0.0; b * na];
    let mut d_log_std = vec![0.0; na];
    let mut d_value = vec![0.0; b];
    let mut surrogate = 0.0;
    let mut value_loss = 0.0;
    let mut clipped = 0usize;
    let mut kl = 0.0;
    for s in 0..b {
        let a = &mb.actions[s * na..(s + 1) * na];
        let m = &mean[s * na..(s + 1) * na];
        let mut lp = 0.0;
        for j in 0..na {
            let z = (a[j] - m[j]) * inv_std[j];
            lp += -0.5 * z * z - log_std[j] - HALF_LN_2PI;
        }
        let log_ratio = lp - mb.old_log_probs[s];
        let ratio = libm::exp(log_ratio);
        let (sur, dsur_dratio) = clipped_surrogate(ratio, adv[s], k.clip_range);
        surrogate += sur;
        if (ratio - 1.0).abs() > k.clip_range {
            clipped += 1;
        }
        kl += (ratio - 1.0) - log_ratio;
        // d(-sur/B)/d(lp) = -(dsur/dratio) * ratio / B
        let g_lp = -dsur_dratio * ratio / nf;
        if g_lp != 0.0 {
            for j in 0..na {
                let z = (a[j] - m[j]) * inv_std[j];
                d_mean[s * na + j] += g_lp * z * inv_std[j];
                d_log_std[j] += g_lp * (z * z - 1.0);
            }
        }
        let err = values[s] - mb.returns[s];
        value_loss += err * err;
        d_value[s] = k.vf_coef * 2.0 * err / nf;
    }
    let entropy: f64 = log_std.iter().map(|l| l + 0.5 + HALF_LN_2PI).sum();
    for g in d_log_std.iter_mut() {
        *g -= k.ent_coef;
    }
    net.actor.backward(params, &actor, &d_mean, grads);
    net.critic.backward(params, &critic, &d_value, grads);
    for (g, d) in grads[net.log_std_offset..].iter_mut().zip(&d_log_std) {
        *g += d;
    }
    let policy_loss = -surrogate / nf;
    let value_loss = value_loss / nf;
    LossStats {
        loss: policy_loss + k.vf_coef * value_loss - k.ent_coef * entropy,
        policy_loss,
        value_loss,
        entropy,
        clip_fraction: clipped as f64 / nf,
        approx_kl: kl / nf,
    }
}
