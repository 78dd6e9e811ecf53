//! Discrete-time supply-chain environment.
//!
//! One call to [`Simulator::step`] runs a full period: the clock advances,
//! due material lands in stock (excess above capacity is discarded),
//! retailers serve demand with lost sales, the decision is executed with
//! freshly realized lead times, holding cost is charged on what remains, and
//! the next period's demand is revealed.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, NodeId, ShipmentUnits};
use crate::codec::{decode_action, NormalizedAction};
use crate::scenario::{ScenarioError, ScenarioSpec};
use crate::stochastic::{sample_demand, sample_lead_time, LeadEntity, RngStream};

/// Cost category names in reporting order.
pub const COST_TYPES: [&str; 6] =
    ["production", "processing", "transport", "stock", "excess_penalty", "unmet_penalty"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub production: f64,
    pub processing: f64,
    pub transport: f64,
    pub stock: f64,
    pub excess_penalty: f64,
    pub unmet_penalty: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.to_array().iter().sum()
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.production,
            self.processing,
            self.transport,
            self.stock,
            self.excess_penalty,
            self.unmet_penalty,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        CostBreakdown {
            production: a[0],
            processing: a[1],
            transport: a[2],
            stock: a[3],
            excess_penalty: a[4],
            unmet_penalty: a[5],
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * k))
    }
}

impl Add for CostBreakdown {
    type Output = CostBreakdown;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.to_array(), rhs.to_array());
        Self::from_array(core::array::from_fn(|i| a[i] + b[i]))
    }
}

impl AddAssign for CostBreakdown {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Demands and lead times of one episode, fixed by its seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRealization {
    pub seed: u64,
    pub horizon: usize,
    /// `demands[r][t]` for retailer slot `r`, steps `0..=horizon + 1` (index 0 unused).
    pub demands: Vec<Vec<f64>>,
    /// `production_leads[s][t]` for a dispatch at step `t` (index 0 unused).
    pub production_leads: Vec<Vec<u32>>,
    /// `transport_leads[l][t]` for a dispatch at step `t` (index 0 unused).
    pub transport_leads: Vec<Vec<u32>>,
}

impl EpisodeRealization {
    pub fn generate(scenario: &ScenarioSpec, seed: u64) -> Self {
        let c = &scenario.chain;
        let h = c.horizon;
        let rng = RngStream::new(seed);
        let demands = (0..c.num_retailers())
            .map(|r| {
                (0..=h + 1)
                    .map(|t| if t == 0 { 0.0 } else { sample_demand(&scenario.demand, r, t, h, &rng) })
                    .collect()
            })
            .collect();
        let production_leads = (0..c.num_suppliers())
            .map(|s| {
                (0..=h)
                    .map(|t| sample_lead_time(&scenario.lead_time, LeadEntity::Production(s), t, &rng))
                    .collect()
            })
            .collect();
        let transport_leads = (0..c.num_links())
            .map(|l| {
                (0..=h)
                    .map(|t| sample_lead_time(&scenario.lead_time, LeadEntity::Transport(l), t, &rng))
                    .collect()
            })
            .collect();
        EpisodeRealization { seed, horizon: h, demands, production_leads, transport_leads }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupplyChainState {
    pub t: usize,
    pub horizon: usize,
    pub stocks: Vec<f64>,
    /// `production_pipeline[s][due]`: raw material due at supplier `s` on step `due`.
    pub production_pipeline: Vec<Vec<f64>>,
    /// `transport_pipeline[l][due]`: units due through link `l` on step `due`.
    pub transport_pipeline: Vec<Vec<f64>>,
    pub next_demands: Vec<f64>,
}

impl SupplyChainState {
    /// Units due at `node` on step `due`, over production or all incoming links.
    pub fn inbound_at(&self, config: &ChainConfig, node: NodeId, due: usize) -> f64 {
        if config.is_supplier(node) {
            self.production_pipeline[node.0].get(due).copied().unwrap_or(0.0)
        } else {
            config
                .incoming(node)
                .into_iter()
                .map(|l| self.transport_pipeline[l].get(due).copied().unwrap_or(0.0))
                .sum()
        }
    }

    fn inbound_after(&self, config: &ChainConfig, node: NodeId, after: usize) -> f64 {
        let tail = |v: &Vec<f64>| v.iter().skip(after + 1).sum::<f64>();
        if config.is_supplier(node) {
            tail(&self.production_pipeline[node.0])
        } else {
            config.incoming(node).into_iter().map(|l| tail(&self.transport_pipeline[l])).sum()
        }
    }
}

/// Physical-unit observation; see [`ObsLayout`] for the ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub Vec<f64>);

/// Index arithmetic for observation vectors: stocks, then (next, later)
/// inbound pairs per node, then next demands per retailer, then remaining steps.
#[derive(Clone, Copy, Debug)]
pub struct ObsLayout {
    pub nodes: usize,
    pub retailers: usize,
}

impl ObsLayout {
    pub fn of(config: &ChainConfig) -> Self {
        ObsLayout { nodes: config.num_nodes(), retailers: config.num_retailers() }
    }
    pub fn stock(&self, n: usize) -> usize {
        n
    }
    pub fn arriving_next(&self, n: usize) -> usize {
        self.nodes + 2 * n
    }
    pub fn arriving_later(&self, n: usize) -> usize {
        self.nodes + 2 * n + 1
    }
    pub fn demand(&self, r: usize) -> usize {
        3 * self.nodes + r
    }
    pub fn remaining(&self) -> usize {
        3 * self.nodes + self.retailers
    }
    pub fn len(&self) -> usize {
        self.remaining() + 1
    }
}

/// Decisions in physical units: production per supplier, then one shipment
/// per link in link order. Factory shipments follow the chain's
/// [`ShipmentUnits`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawAction {
    pub production: Vec<f64>,
    pub shipments: Vec<f64>,
}

impl RawAction {
    pub fn zeros(config: &ChainConfig) -> Self {
        RawAction { production: vec![0.0; config.num_suppliers()], shipments: vec![0.0; config.num_links()] }
    }
}

/// Material movements of one node during one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeFlows {
    pub stock_before: f64,
    pub arrived: f64,
    pub discarded: f64,
    pub demand: f64,
    pub demand_met: f64,
    pub unmet: f64,
    /// Units taken from stock by shipments (raw units at factories).
    pub consumed: f64,
    /// Units put into transport (product units).
    pub shipped: f64,
    pub produced: f64,
    pub stock_after: f64,
    pub cost: CostBreakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub t: usize,
    pub reward: f64,
    pub cost: CostBreakdown,
    pub unmet_units: Vec<f64>,
    pub discarded_units: Vec<f64>,
    pub nodes: Vec<NodeFlows>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("episode is over; call reset")]
    EpisodeOver,
    #[error("action violates {what} at {node}: {value} > {limit}")]
    ContractViolation { what: &'static str, node: NodeId, value: f64, limit: f64 },
    #[error("action has wrong shape: {0}")]
    Shape(&'static str),
    #[error("realization does not match the scenario horizon or topology")]
    RealizationMismatch,
}

/// State after arrivals and demand, before the decision executes.
#[derive(Clone, Debug)]
pub struct MidStep {
    pub t: usize,
    /// Stocks available to the decision.
    pub stocks: Vec<f64>,
    flows: Vec<NodeFlows>,
}

#[derive(Clone, Debug)]
pub struct Simulator {
    scenario: ScenarioSpec,
    realization: EpisodeRealization,
    state: SupplyChainState,
    total: CostBreakdown,
}

const FEAS_TOL: f64 = 1e-9;

impl Simulator {
    /// Validates the scenario and resets to the episode of `seed`.
    pub fn new(scenario: ScenarioSpec, seed: u64) -> Result<(Self, Observation), SimError> {
        scenario.validate()?;
        let realization = EpisodeRealization::generate(&scenario, seed);
        Self::with_realization(scenario, realization)
    }

    pub fn with_realization(
        scenario: ScenarioSpec,
        realization: EpisodeRealization,
    ) -> Result<(Self, Observation), SimError> {
        scenario.validate()?;
        let state = Self::initial_state(&scenario, &realization)?;
        let sim = Simulator { scenario, realization, state, total: CostBreakdown::default() };
        let obs = sim.build_observation();
        Ok((sim, obs))
    }

    fn initial_state(s: &ScenarioSpec, r: &EpisodeRealization) -> Result<SupplyChainState, SimError> {
        let c = &s.chain;
        let h = c.horizon;
        if r.horizon != h
            || r.demands.len() != c.num_retailers()
            || r.production_leads.len() != c.num_suppliers()
            || r.transport_leads.len() != c.num_links()
        {
            return Err(SimError::RealizationMismatch);
        }
        let span = h + s.lead_time.maximum as usize + 1;
        let mut production_pipeline = vec![vec![0.0; span]; c.num_suppliers()];
        for (sup, pipe) in production_pipeline.iter_mut().enumerate() {
            for (k, &q) in c.initial_production[sup].iter().enumerate() {
                pipe[k + 1] += q;
            }
        }
        let mut transport_pipeline = vec![vec![0.0; span]; c.num_links()];
        for (l, pipe) in transport_pipeline.iter_mut().enumerate() {
            for (k, &q) in c.initial_transport[l].iter().enumerate() {
                pipe[k + 1] += q;
            }
        }
        Ok(SupplyChainState {
            t: 0,
            horizon: h,
            stocks: c.initial_stock.clone(),
            production_pipeline,
            transport_pipeline,
            next_demands: r.demands.iter().map(|d| d[1]).collect(),
        })
    }

    /// Restarts with the episode of `seed`.
    pub fn reset(&mut self, seed: u64) -> Observation {
        self.realization = EpisodeRealization::generate(&self.scenario, seed);
        self.restart()
    }

    /// Restarts the current realization from `t = 0`.
    pub fn restart(&mut self) -> Observation {
        self.state = Self::initial_state(&self.scenario, &self.realization)
            .expect("realization was generated from this scenario");
        self.total = CostBreakdown::default();
        self.build_observation()
    }

    pub fn scenario(&self) -> &ScenarioSpec {
        &self.scenario
    }

    pub fn config(&self) -> &ChainConfig {
        &self.scenario.chain
    }

    pub fn state(&self) -> &SupplyChainState {
        &self.state
    }

    pub fn realization(&self) -> &EpisodeRealization {
        &self.realization
    }

    /// Accumulated cost since the last reset.
    pub fn episode_cost(&self) -> CostBreakdown {
        self.total
    }

    pub fn is_done(&self) -> bool {
        self.state.t >= self.state.horizon
    }

    pub fn build_observation(&self) -> Observation {
        build_observation(&self.scenario.chain, &self.state)
    }

    /// Advances the clock, lands due material and serves demand. Does not
    /// mutate the simulator.
    pub fn begin_step(&self) -> Result<MidStep, SimError> {
        if self.is_done() {
            return Err(SimError::EpisodeOver);
        }
        let c = &self.scenario.chain;
        let t = self.state.t + 1;
        let mut stocks = self.state.stocks.clone();
        let mut flows = vec![NodeFlows::default(); c.num_nodes()];
        for n in 0..c.num_nodes() {
            let node = NodeId(n);
            let f = &mut flows[n];
            f.stock_before = stocks[n];
            f.arrived = self.state.inbound_at(c, node, t);
            let landed = stocks[n] + f.arrived;
            f.discarded = (landed - c.stock_cap[n]).max(0.0);
            stocks[n] = landed - f.discarded;
            f.cost.excess_penalty = c.excess_penalty * f.discarded;
            if let Some(r) = c.retailer_slot(node) {
                f.demand = self.realization.demands[r][t];
                f.demand_met = f.demand.min(stocks[n]);
                f.unmet = f.demand - f.demand_met;
                stocks[n] -= f.demand_met;
                f.cost.unmet_penalty = c.unmet_penalty * f.unmet;
            }
        }
        Ok(MidStep { t, stocks, flows })
    }

    /// Runs one period with a normalized decision decoded against the live
    /// stocks at execution time.
    pub fn step(&mut self, action: &NormalizedAction) -> Result<(Observation, StepOutcome), SimError> {
        let mid = self.begin_step()?;
        let raw = decode_action(action, &mid.stocks, &self.scenario.chain)
            .map_err(|_| SimError::Shape("normalized action length"))?;
        Ok(self.commit(mid, &raw))
    }

    /// Runs one period with a physical-unit decision, which must be feasible
    /// against the stocks available after arrivals and demand.
    pub fn step_raw(&mut self, action: &RawAction) -> Result<(Observation, StepOutcome), SimError> {
        let mid = self.begin_step()?;
        check_raw_action(&self.scenario.chain, action, &mid.stocks)?;
        Ok(self.commit(mid, action))
    }

    fn commit(&mut self, mid: MidStep, action: &RawAction) -> (Observation, StepOutcome) {
        let c = &self.scenario.chain;
        let MidStep { t, mut stocks, mut flows } = mid;

        for (s, &qty) in action.production.iter().enumerate() {
            let lead = self.realization.production_leads[s][t] as usize;
            self.state.production_pipeline[s][t + lead] += qty;
            flows[s].produced = qty;
            flows[s].cost.production = c.production_cost[s] * qty;
        }
        for (l, &qty) in action.shipments.iter().enumerate() {
            let link = c.links[l];
            let src = link.from.0;
            let (consumed, product) = shipment_flow(c, link.from, qty);
            let lead = self.realization.transport_leads[l][t] as usize;
            self.state.transport_pipeline[l][t + lead] += product;
            flows[src].consumed += consumed;
            flows[src].shipped += product;
            flows[src].cost.transport += c.transport_cost * product;
            if c.is_factory[src] {
                flows[src].cost.processing += c.processing_cost[src] * consumed;
            }
        }
        let mut step_cost = CostBreakdown::default();
        for n in 0..c.num_nodes() {
            let f = &mut flows[n];
            let mut after = stocks[n] - f.consumed;
            if after < 0.0 {
                // rounding residue from decoded cuts
                debug_assert!(after > -FEAS_TOL * (1.0 + stocks[n]));
                after = 0.0;
            }
            stocks[n] = after;
            f.stock_after = after;
            f.cost.stock = c.stock_cost[n] * after;
            step_cost += f.cost;
        }

        self.state.t = t;
        self.state.stocks = stocks;
        self.state.next_demands = self.realization.demands.iter().map(|d| d[t + 1]).collect();
        self.total += step_cost;

        let done = self.is_done();
        let outcome = StepOutcome {
            t,
            reward: -step_cost.total(),
            cost: step_cost,
            unmet_units: c.retailers().map(|r| flows[r.0].unmet).collect(),
            discarded_units: flows.iter().map(|f| f.discarded).collect(),
            nodes: flows,
            done,
        };
        (self.build_observation(), outcome)
    }
}

/// (consumed from stock, product put into transport) for a shipment entry.
pub fn shipment_flow(c: &ChainConfig, from: NodeId, qty: f64) -> (f64, f64) {
    if c.is_factory[from.0] {
        let r = c.processing_ratio[from.0];
        match c.shipment_units {
            ShipmentUnits::Raw => (qty, qty / r),
            ShipmentUnits::Product => (qty * r, qty),
        }
    } else {
        (qty, qty)
    }
}

/// Checks a raw action against the stocks available at execution time.
pub fn check_raw_action(c: &ChainConfig, a: &RawAction, stocks: &[f64]) -> Result<(), SimError> {
    if a.production.len() != c.num_suppliers() || a.shipments.len() != c.num_links() {
        return Err(SimError::Shape("raw action length"));
    }
    let slack = |limit: f64| limit + FEAS_TOL * (1.0 + limit.abs());
    for (s, &p) in a.production.iter().enumerate() {
        let limit = c.production_cap[s];
        if !(p >= 0.0) || p > slack(limit) {
            return Err(SimError::ContractViolation { what: "production capacity", node: NodeId(s), value: p, limit });
        }
    }
    let mut consumed = vec![0.0; c.num_nodes()];
    for (l, &q) in a.shipments.iter().enumerate() {
        let from = c.links[l].from;
        if !(q >= 0.0) {
            return Err(SimError::ContractViolation { what: "non-negative shipment", node: from, value: q, limit: 0.0 });
        }
        consumed[from.0] += shipment_flow(c, from, q).0;
    }
    for n in c.shipping_nodes() {
        let limit = c.ship_base(n, stocks[n.0]);
        if consumed[n.0] > slack(limit) {
            let what = if c.is_factory[n.0] { "processing capacity or stock" } else { "available stock" };
            return Err(SimError::ContractViolation { what, node: n, value: consumed[n.0], limit });
        }
    }
    Ok(())
}

/// Assembles the physical-unit observation of `state`.
pub fn build_observation(c: &ChainConfig, state: &SupplyChainState) -> Observation {
    let layout = ObsLayout::of(c);
    let mut v = vec![0.0; layout.len()];
    let next = state.t + 1;
    for n in 0..c.num_nodes() {
        let node = NodeId(n);
        v[layout.stock(n)] = state.stocks[n];
        v[layout.arriving_next(n)] = state.inbound_at(c, node, next);
        v[layout.arriving_later(n)] = state.inbound_after(c, node, next);
    }
    for (r, &d) in state.next_demands.iter().enumerate() {
        v[layout.demand(r)] = d;
    }
    v[layout.remaining()] = (state.horizon - state.t) as f64;
    Observation(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin_scenario, default_chain};
    use approx::assert_abs_diff_eq;

    fn quiet_sim() -> Simulator {
        let mut s = builtin_scenario("rN0cl").unwrap();
        let c = &mut s.chain;
        c.initial_stock = vec![0.0; 8];
        c.initial_production = vec![vec![]; 8];
        c.initial_transport = vec![vec![]; 12];
        let mut r = EpisodeRealization::generate(&s, 0);
        for d in &mut r.demands {
            d.iter_mut().for_each(|x| *x = 0.0);
        }
        Simulator::with_realization(s, r).unwrap().0
    }

    #[test]
    fn reset_matches_initial_conditions() {
        let (_, obs) = Simulator::new(builtin_scenario("N20").unwrap(), 1).unwrap();
        let l = ObsLayout::of(&default_chain());
        assert_eq!(obs.0.len(), 27);
        for n in 0..8 {
            assert_eq!(obs.0[l.stock(n)], 800.0);
        }
        assert_eq!(obs.0[l.arriving_next(0)], 600.0);
        assert_eq!(obs.0[l.arriving_next(1)], 840.0);
        assert_eq!(obs.0[l.arriving_later(0)], 600.0);
        assert_eq!(obs.0[l.arriving_next(2)], 600.0);
        assert_eq!(obs.0[l.arriving_next(3)], 840.0);
        assert_eq!(obs.0[l.arriving_next(6)], 480.0);
        assert_eq!(obs.0[l.remaining()], 360.0);
    }

    #[test]
    fn zero_everything_costs_nothing() {
        let mut sim = quiet_sim();
        let (_, out) = sim.step_raw(&RawAction::zeros(sim.config())).unwrap();
        assert_eq!(out.reward, 0.0);
        assert_eq!(out.cost, CostBreakdown::default());
    }

    #[test]
    fn lost_sales_at_retailer() {
        let mut sim = quiet_sim();
        sim.state.stocks[6] = 100.0;
        sim.realization.demands[0][1] = 138.0;
        let (_, out) = sim.step_raw(&RawAction::zeros(sim.config())).unwrap();
        assert_eq!(out.unmet_units[0], 38.0);
        assert_eq!(out.cost.unmet_penalty, 8208.0);
        assert_eq!(sim.state().stocks[6], 0.0);
    }

    #[test]
    fn excess_is_discarded() {
        let mut sim = quiet_sim();
        sim.state.stocks[4] = 1500.0;
        sim.state.transport_pipeline[4][1] = 300.0; // F1 -> W1
        let (_, out) = sim.step_raw(&RawAction::zeros(sim.config())).unwrap();
        assert_eq!(out.discarded_units[4], 200.0);
        assert_eq!(out.cost.excess_penalty, 2000.0);
        assert_eq!(sim.state().stocks[4], 1600.0);
    }

    #[test]
    fn factory_ships_processed_product() {
        let mut sim = quiet_sim();
        sim.state.stocks[2] = 500.0;
        let mut a = RawAction::zeros(sim.config());
        a.shipments[4] = 220.0; // F1 -> W1, raw consumed
        let (_, out) = sim.step_raw(&a).unwrap();
        let f = out.nodes[2];
        assert_eq!(f.consumed, 220.0);
        assert_abs_diff_eq!(f.shipped, 220.0 / 3.0, epsilon = 1e-12);
        assert_eq!(out.cost.processing, 220.0 * 12.0);
        assert_abs_diff_eq!(out.cost.transport, 2.0 * 220.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sim.state().transport_pipeline[4][3], 73.333333333, epsilon = 1e-6);
        assert_eq!(sim.state().stocks[2], 280.0);
    }

    #[test]
    fn infeasible_raw_action_is_rejected_without_mutation() {
        let mut sim = quiet_sim();
        sim.state.stocks[4] = 10.0;
        let mut a = RawAction::zeros(sim.config());
        a.shipments[8] = 11.0;
        let before = sim.state().clone();
        assert!(matches!(sim.step_raw(&a), Err(SimError::ContractViolation { .. })));
        assert_eq!(sim.state(), &before);
        a.shipments[8] = 0.0;
        a.production[0] = 601.0;
        assert!(sim.step_raw(&a).is_err());
    }

    #[test]
    fn factory_cap_limits_raw_consumption() {
        let mut sim = quiet_sim();
        sim.state.stocks[2] = 5000.0;
        let mut a = RawAction::zeros(sim.config());
        a.shipments[4] = 500.0;
        a.shipments[5] = 341.0;
        assert!(sim.step_raw(&a).is_err());
        a.shipments[5] = 340.0;
        assert!(sim.step_raw(&a).is_ok());
    }

    #[test]
    fn observation_pipeline_summaries() {
        let mut sim = quiet_sim();
        sim.state.production_pipeline[1][1] = 330.0;
        sim.state.production_pipeline[1][2] = 60.0;
        sim.state.production_pipeline[1][3] = 45.0;
        sim.state.transport_pipeline[0][1] = 200.0;
        sim.state.transport_pipeline[2][1] = 80.0;
        sim.state.transport_pipeline[2][3] = 420.0;
        let obs = sim.build_observation();
        let l = ObsLayout::of(sim.config());
        assert_eq!(obs.0[l.arriving_next(1)], 330.0);
        assert_eq!(obs.0[l.arriving_later(1)], 105.0);
        assert_eq!(obs.0[l.arriving_next(2)], 280.0);
        assert_eq!(obs.0[l.arriving_later(2)], 420.0);
        assert_eq!(obs.0[l.arriving_next(5)], 0.0);
        assert_eq!(obs.0[l.arriving_later(5)], 0.0);
    }

    #[test]
    fn episode_has_exactly_horizon_steps() {
        let (mut sim, _) = Simulator::new(builtin_scenario("N20").unwrap(), 3).unwrap();
        let a = RawAction::zeros(sim.config());
        for t in 1..=360 {
            let (_, out) = sim.step_raw(&a).unwrap();
            assert_eq!(out.done, t == 360);
        }
        assert_eq!(sim.step_raw(&a), Err(SimError::EpisodeOver));
    }
}
