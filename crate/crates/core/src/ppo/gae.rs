use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("rewards, values and dones must have equal lengths ({rewards}, {values}, {dones})")]
pub struct GaeError {
    pub rewards: usize,
    pub values: usize,
    pub dones: usize,
}

/// Generalized advantage estimates for one actor's trajectory segment.
///
/// `dones[t]` marks that the episode terminated after transition `t`, so no
/// value is bootstrapped across it. `last_value` is the value of the state
/// following the final transition (ignored if that transition is terminal).
/// Returns `(advantages, returns)` with `returns = advantages + values`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), GaeError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(GaeError { rewards: n, values: values.len(), dones: dones.len() });
    }
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { last_value };
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        acc = delta + gamma * lambda * live * acc;
        adv[t] = acc;
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, ret))
}
