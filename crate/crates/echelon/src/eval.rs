//! Final evaluation of agents on a fixed, shared set of episodes.

use echelon_core::lp::{LpAgent, LpAgentPlan};
use echelon_core::ppo::{PolicyBundle, PpoAgent};
use echelon_core::sim::COST_TYPES;
use echelon_core::stochastic::Purpose;
use echelon_core::{
    run_episode, CostBreakdown, EpisodeRealization, ObsScales, Policy, RngStream, ScenarioSpec, Simulator,
    StepOutcome,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Environment seeds of the final evaluation. Each yields
/// [`EvalPlan::episodes_per_seed`] episodes.
pub const EVAL_SEEDS: [u64; 10] = [
    1_001, 2_003, 3_007, 4_013, 5_021, 6_029, 7_039, 8_053, 9_067, 10_079,
];

/// Entity id of final-evaluation episodes in the seed derivation.
const FINAL_EVAL_ENTITY: u64 = 0x40_0000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPlan {
    pub seeds: Vec<u64>,
    pub episodes_per_seed: usize,
}

impl Default for EvalPlan {
    fn default() -> Self {
        EvalPlan { seeds: EVAL_SEEDS.to_vec(), episodes_per_seed: 10 }
    }
}

impl EvalPlan {
    pub fn num_episodes(&self) -> usize {
        self.seeds.len() * self.episodes_per_seed
    }

    /// Episode seeds in episode-id order.
    pub fn episode_seeds(&self) -> Vec<u64> {
        self.seeds
            .iter()
            .flat_map(|&s| {
                let rs = RngStream::new(s);
                (0..self.episodes_per_seed as u64).map(move |k| rs.derive_seed(Purpose::Episode, FINAL_EVAL_ENTITY, k))
            })
            .collect()
    }
}

/// SHA-256 over the demand and lead-time draws of an episode.
pub fn realization_digest(r: &EpisodeRealization) -> String {
    let mut h = Sha256::new();
    h.update((r.horizon as u64).to_le_bytes());
    for row in &r.demands {
        h.update((row.len() as u64).to_le_bytes());
        row.iter().for_each(|x| h.update(x.to_le_bytes()));
    }
    for row in r.production_leads.iter().chain(&r.transport_leads) {
        h.update((row.len() as u64).to_le_bytes());
        row.iter().for_each(|x| h.update(x.to_le_bytes()));
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy)]
pub enum AgentSpec<'a> {
    Ppo(&'a PolicyBundle),
    Lp(&'a LpAgentPlan),
}

impl AgentSpec<'_> {
    pub fn kind(&self) -> &'static str {
        match self {
            AgentSpec::Ppo(_) => "ppo",
            AgentSpec::Lp(_) => "lp",
        }
    }

    /// Checks that the agent was built for this scenario's chain.
    pub fn check(&self, s: &ScenarioSpec) -> Result<()> {
        let c = &s.chain;
        match self {
            AgentSpec::Ppo(b) => {
                if b.net.obs_dim() != c.observation_len() || b.net.act_dim() != c.action_len() {
                    return Err(Error::Mismatch(format!(
                        "network is {}x{}, chain needs {}x{}",
                        b.net.obs_dim(),
                        b.net.act_dim(),
                        c.observation_len(),
                        c.action_len()
                    )));
                }
                if b.obs_maxima != ObsScales::for_scenario(s).maxima {
                    return Err(Error::Mismatch("observation scales differ".into()));
                }
            }
            AgentSpec::Lp(p) => {
                if p.horizon != c.horizon || p.production.len() != c.num_suppliers() || p.shipments.len() != c.num_links() {
                    return Err(Error::Mismatch("plan shape differs from the chain".into()));
                }
            }
        }
        Ok(())
    }

    fn policy(&self, s: &ScenarioSpec) -> Box<dyn Policy + '_> {
        match *self {
            AgentSpec::Ppo(b) => Box::new(PpoAgent::new(b)),
            AgentSpec::Lp(p) => Box::new(LpAgent::new(p.clone(), s.chain.clone())),
        }
    }
}

/// Running mean and variance that can be merged across reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64;
        self.n = n;
    }

    /// Sample standard deviation; zero below two observations.
    pub fn std(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0).sqrt()
        }
    }
}

/// Chain-wide quantities of one step, aggregated over episodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepAggregate {
    pub stock: Moments,
    pub production: Moments,
    pub transport: Moments,
    pub unmet: Moments,
    pub demand: Moments,
}

impl StepAggregate {
    fn push(&mut self, o: &StepOutcome) {
        self.stock.push(o.nodes.iter().map(|f| f.stock_after).sum());
        self.production.push(o.nodes.iter().map(|f| f.produced).sum());
        self.transport.push(o.nodes.iter().map(|f| f.shipped).sum());
        self.unmet.push(o.unmet_units.iter().sum());
        self.demand.push(o.nodes.iter().map(|f| f.demand).sum());
    }

    fn merge(&mut self, o: &StepAggregate) {
        self.stock.merge(&o.stock);
        self.production.merge(&o.production);
        self.transport.merge(&o.transport);
        self.unmet.merge(&o.unmet);
        self.demand.merge(&o.demand);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode_id: usize,
    pub seed: u64,
    pub total_cost: f64,
    pub breakdown: CostBreakdown,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub agent: String,
    pub scenario: String,
    pub episodes: Vec<EpisodeRecord>,
    pub mean: f64,
    pub std: f64,
    pub breakdown_mean: CostBreakdown,
    /// `trace[t - 1]` aggregates step `t`.
    pub trace: Vec<StepAggregate>,
}

impl EvalReport {
    fn assemble(agent: String, scenario: String, episodes: Vec<EpisodeRecord>, trace: Vec<StepAggregate>) -> Self {
        let costs: Vec<f64> = episodes.iter().map(|e| e.total_cost).collect();
        let (mean, std) = echelon_core::ppo::train::mean_std(&costs);
        let sum = episodes.iter().fold(CostBreakdown::default(), |acc, e| acc + e.breakdown);
        let breakdown_mean = sum.scaled(1.0 / episodes.len().max(1) as f64);
        EvalReport { agent, scenario, episodes, mean, std, breakdown_mean, trace }
    }

    pub fn costs(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.total_cost).collect()
    }

    /// Episode digests in episode-id order, one per distinct episode id.
    pub fn episode_set(&self) -> Vec<(usize, String)> {
        let mut set: Vec<(usize, String)> = self.episodes.iter().map(|e| (e.episode_id, e.digest.clone())).collect();
        set.sort();
        set.dedup();
        set
    }

    /// Concatenates reports of several agents evaluated on the same episodes.
    pub fn pool(agent: &str, reports: &[EvalReport]) -> Result<EvalReport> {
        let first = reports.first().ok_or_else(|| Error::Stats("nothing to pool".into()))?;
        let mut episodes = Vec::new();
        let mut trace = vec![StepAggregate::default(); first.trace.len()];
        for r in reports {
            if r.episode_set() != first.episode_set() || r.trace.len() != trace.len() {
                return Err(Error::EpisodeSetMismatch);
            }
            episodes.extend(r.episodes.iter().cloned());
            trace.iter_mut().zip(&r.trace).for_each(|(a, b)| a.merge(b));
        }
        Ok(EvalReport::assemble(agent.into(), first.scenario.clone(), episodes, trace))
    }
}

/// Runs `agent` on every episode of `plan`.
pub fn evaluate_agent(agent: AgentSpec<'_>, name: &str, s: &ScenarioSpec, plan: &EvalPlan) -> Result<EvalReport> {
    agent.check(s)?;
    let h = s.chain.horizon;
    let runs: Vec<(EpisodeRecord, Vec<StepAggregate>)> = plan
        .episode_seeds()
        .into_par_iter()
        .enumerate()
        .map(|(id, seed)| {
            let (mut sim, obs) = Simulator::new(s.clone(), seed)?;
            let digest = realization_digest(sim.realization());
            let mut trace = vec![StepAggregate::default(); h];
            let mut policy = agent.policy(s);
            let res = run_episode(&mut sim, policy.as_mut(), obs, |_, out| trace[out.t - 1].push(out))?;
            let rec = EpisodeRecord { episode_id: id, seed, total_cost: res.total_cost, breakdown: res.breakdown, digest };
            Ok((rec, trace))
        })
        .collect::<Result<_>>()?;
    let mut trace = vec![StepAggregate::default(); h];
    let mut episodes = Vec::with_capacity(runs.len());
    for (rec, t) in runs {
        trace.iter_mut().zip(&t).for_each(|(a, b)| a.merge(b));
        episodes.push(rec);
    }
    Ok(EvalReport::assemble(name.into(), s.name.clone(), episodes, trace))
}

/// One line of the evaluation CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub episode_id: usize,
    pub agent: String,
    pub total_cost: f64,
    pub production: f64,
    pub processing: f64,
    pub transport: f64,
    pub stock: f64,
    pub excess_penalty: f64,
    pub unmet_penalty: f64,
}

pub fn evaluation_rows(r: &EvalReport) -> Vec<EvaluationRow> {
    debug_assert_eq!(COST_TYPES[0], "production");
    r.episodes
        .iter()
        .map(|e| {
            let b = e.breakdown;
            EvaluationRow {
                episode_id: e.episode_id,
                agent: r.agent.clone(),
                total_cost: e.total_cost,
                production: b.production,
                processing: b.processing,
                transport: b.transport,
                stock: b.stock,
                excess_penalty: b.excess_penalty,
                unmet_penalty: b.unmet_penalty,
            }
        })
        .collect()
}

/// One line of the per-step aggregate CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceAggregateRow {
    pub step: usize,
    pub agent: String,
    pub stock_mean: f64,
    pub stock_std: f64,
    pub production_mean: f64,
    pub production_std: f64,
    pub transport_mean: f64,
    pub transport_std: f64,
    pub unmet_mean: f64,
    pub unmet_std: f64,
    pub demand_mean: f64,
    pub demand_std: f64,
}

pub fn trace_aggregate_rows(r: &EvalReport) -> Vec<TraceAggregateRow> {
    r.trace
        .iter()
        .enumerate()
        .map(|(i, a)| TraceAggregateRow {
            step: i + 1,
            agent: r.agent.clone(),
            stock_mean: a.stock.mean,
            stock_std: a.stock.std(),
            production_mean: a.production.mean,
            production_std: a.production.std(),
            transport_mean: a.transport.mean,
            transport_std: a.transport.std(),
            unmet_mean: a.unmet.mean,
            unmet_std: a.unmet.std(),
            demand_mean: a.demand.mean,
            demand_std: a.demand.std(),
        })
        .collect()
}

/// One node-step of a single traced episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub node: String,
    pub stock: f64,
    pub arrived: f64,
    pub shipped: f64,
    pub produced: f64,
    pub demand: f64,
    pub unmet: f64,
    pub discarded: f64,
    pub production: f64,
    pub processing: f64,
    pub transport: f64,
    pub stock_cost: f64,
    pub excess_penalty: f64,
    pub unmet_penalty: f64,
    pub reward: f64,
}

/// Node-level trace of one episode; `reward` is the step's chain-wide reward.
pub fn trace_episode(agent: AgentSpec<'_>, s: &ScenarioSpec, seed: u64) -> Result<Vec<TraceRow>> {
    agent.check(s)?;
    let (mut sim, obs) = Simulator::new(s.clone(), seed)?;
    let names = &s.chain.node_names;
    let mut rows = Vec::new();
    let mut policy = agent.policy(s);
    run_episode(&mut sim, policy.as_mut(), obs, |_, out| {
        for (n, f) in out.nodes.iter().enumerate() {
            rows.push(TraceRow {
                step: out.t,
                node: names[n].clone(),
                stock: f.stock_after,
                arrived: f.arrived,
                shipped: f.shipped,
                produced: f.produced,
                demand: f.demand,
                unmet: f.unmet,
                discarded: f.discarded,
                production: f.cost.production,
                processing: f.cost.processing,
                transport: f.cost.transport,
                stock_cost: f.cost.stock,
                excess_penalty: f.cost.excess_penalty,
                unmet_penalty: f.cost.unmet_penalty,
                reward: out.reward,
            });
        }
    })?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandTraceRow {
    pub step: usize,
    pub retailer: String,
    pub demand: f64,
}

/// Realized demands of one episode, steps `1..=h`.
pub fn demand_trace(s: &ScenarioSpec, seed: u64) -> Vec<DemandTraceRow> {
    let r = EpisodeRealization::generate(s, seed);
    let names = &s.chain.node_names;
    let retailers: Vec<_> = s.chain.retailers().collect();
    let mut rows = Vec::with_capacity(s.chain.horizon * retailers.len());
    for t in 1..=s.chain.horizon {
        for (i, n) in retailers.iter().enumerate() {
            rows.push(DemandTraceRow { step: t, retailer: names[n.0].clone(), demand: r.demands[i][t] });
        }
    }
    rows
}
