//! Policies and whole-episode rollouts.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::codec::NormalizedAction;
use crate::sim::{CostBreakdown, Observation, SimError, Simulator, StepOutcome};

/// Anything that maps a physical observation to a normalized decision.
pub trait Policy {
    fn act(&mut self, obs: &Observation) -> NormalizedAction;
}

impl<F: FnMut(&Observation) -> NormalizedAction> Policy for F {
    fn act(&mut self, obs: &Observation) -> NormalizedAction {
        self(obs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub total_cost: f64,
    pub breakdown: CostBreakdown,
}

/// Runs the simulator's current episode from its present state to the end.
/// `on_step` sees every observation/outcome pair.
pub fn run_episode<P: Policy + ?Sized>(
    sim: &mut Simulator,
    policy: &mut P,
    obs: Observation,
    mut on_step: impl FnMut(&Observation, &StepOutcome),
) -> Result<EpisodeResult, SimError> {
    let mut obs = obs;
    while !sim.is_done() {
        let a = policy.act(&obs);
        let (next, out) = sim.step(&a)?;
        on_step(&obs, &out);
        obs = next;
    }
    let breakdown = sim.episode_cost();
    Ok(EpisodeResult { seed: sim.realization().seed, total_cost: breakdown.total(), breakdown })
}

/// Episode costs of `policy` over `seeds`, each from a fresh reset.
pub fn evaluate_costs<P: Policy + ?Sized>(
    sim: &mut Simulator,
    policy: &mut P,
    seeds: &[u64],
) -> Result<Vec<EpisodeResult>, SimError> {
    seeds
        .iter()
        .map(|&s| {
            let obs = sim.reset(s);
            run_episode(sim, policy, obs, |_, _| {})
        })
        .collect()
}
