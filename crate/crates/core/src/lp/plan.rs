use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{LpSolution, LpStatus};
use crate::agent::Policy;
use crate::chain::{ChainConfig, NodeId, ShipmentUnits};
use crate::codec::{cut_base, encode_plan, NormalizedAction};
use crate::sim::{ObsLayout, Observation, RawAction};

/// Open-loop schedule from an LP solution, indexed by dispatch step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpAgentPlan {
    pub horizon: usize,
    /// `production[s][t]`, `t = 1..=h` (index 0 unused).
    pub production: Vec<Vec<f64>>,
    /// `shipments[l][t]` in the chain's shipment units.
    pub shipments: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("cannot extract a plan from a {0:?} solution")]
    NotOptimal(LpStatus),
}

/// Reads the dispatch schedule out of an optimal solution.
pub fn extract_lp_agent(sol: &LpSolution, c: &ChainConfig) -> Result<LpAgentPlan, PlanError> {
    if sol.status != LpStatus::Optimal {
        return Err(PlanError::NotOptimal(sol.status));
    }
    let h = sol.map.horizon;
    // tiny negatives from the solver are treated as zero
    let get = |v: usize| sol.values[v].max(0.0);
    let production = (0..c.num_suppliers())
        .map(|s| (0..=h).map(|t| if t == 0 { 0.0 } else { get(sol.map.production(s, t)) }).collect())
        .collect();
    let shipments = (0..c.num_links())
        .map(|l| {
            let from = c.links[l].from.0;
            let scale = if c.is_factory[from] && c.shipment_units == ShipmentUnits::Raw {
                c.processing_ratio[from]
            } else {
                1.0
            };
            (0..=h).map(|t| if t == 0 { 0.0 } else { scale * get(sol.map.transport(l, t)) }).collect()
        })
        .collect();
    Ok(LpAgentPlan { horizon: h, production, shipments })
}

impl LpAgentPlan {
    /// Planned decision for dispatch step `t`.
    pub fn at(&self, t: usize) -> RawAction {
        RawAction {
            production: self.production.iter().map(|p| p.get(t).copied().unwrap_or(0.0)).collect(),
            shipments: self.shipments.iter().map(|s| s.get(t).copied().unwrap_or(0.0)).collect(),
        }
    }
}

/// Replays an [`LpAgentPlan`], truncating shipments proportionally when the
/// live stock cannot cover them.
#[derive(Clone, Debug)]
pub struct LpAgent {
    pub plan: LpAgentPlan,
    pub config: ChainConfig,
}

impl LpAgent {
    pub fn new(plan: LpAgentPlan, config: ChainConfig) -> Self {
        LpAgent { plan, config }
    }

    /// Stocks the decision will execute against: current stock plus next
    /// arrivals, less discard above capacity and demand served.
    pub fn projected_stocks(&self, obs: &Observation) -> Vec<f64> {
        let c = &self.config;
        let layout = ObsLayout::of(c);
        (0..c.num_nodes())
            .map(|n| {
                let landed = obs.0[layout.stock(n)] + obs.0[layout.arriving_next(n)];
                let kept = landed.min(c.stock_cap[n]);
                match c.retailer_slot(NodeId(n)) {
                    Some(r) => kept - obs.0[layout.demand(r)].min(kept),
                    None => kept,
                }
            })
            .collect()
    }

    /// Physical decision for the step following `obs`, made feasible.
    pub fn raw_action(&self, obs: &Observation, stocks: &[f64]) -> RawAction {
        let c = &self.config;
        let layout = ObsLayout::of(c);
        let t = c.horizon - obs.0[layout.remaining()] as usize + 1;
        let mut a = self.plan.at(t);
        for (s, p) in a.production.iter_mut().enumerate() {
            *p = p.min(c.production_cap[s]);
        }
        for n in c.shipping_nodes() {
            let out = c.outgoing(n);
            let base = cut_base(c, n, stocks[n.0]);
            let total: f64 = out.iter().map(|&l| a.shipments[l]).sum();
            if total > base {
                let k = if total > 0.0 { base / total } else { 0.0 };
                for &l in &out {
                    a.shipments[l] *= k;
                }
            }
        }
        a
    }
}

impl Policy for LpAgent {
    fn act(&mut self, obs: &Observation) -> NormalizedAction {
        let stocks = self.projected_stocks(obs);
        let raw = self.raw_action(obs, &stocks);
        encode_plan(&raw, &stocks, &self.config).unwrap_or_else(|_| NormalizedAction(vec![-1.0; self.config.action_len()]))
    }
}
