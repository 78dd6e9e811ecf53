//! Deterministic planning LP over one episode.
//!
//! The model mirrors the simulator's period cycle so that a plan replayed in
//! a matching deterministic environment costs exactly its objective value.
//! Quantities fixed at the start (initial stock and in-transit material) are
//! folded into right-hand sides and never charged.

mod plan;

pub use plan::{extract_lp_agent, LpAgent, LpAgentPlan, PlanError};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, NodeId};
use crate::scenario::ScenarioSpec;
use crate::sim::EpisodeRealization;
use crate::stochastic::forecast_demand;

/// Lead times used when building the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LeadTimes {
    /// One lead time for every dispatch.
    Constant(u32),
    /// Realized lead times, `production[s][t]` and `transport[l][t]` for
    /// dispatch steps `t = 1..=h` (index 0 unused).
    Realized { production: Vec<Vec<u32>>, transport: Vec<Vec<u32>> },
}

impl LeadTimes {
    fn production(&self, s: usize, t: usize) -> usize {
        match self {
            LeadTimes::Constant(l) => *l as usize,
            LeadTimes::Realized { production, .. } => production[s][t] as usize,
        }
    }
    fn transport(&self, l: usize, t: usize) -> usize {
        match self {
            LeadTimes::Constant(v) => *v as usize,
            LeadTimes::Realized { transport, .. } => transport[l][t] as usize,
        }
    }
}

/// Demands and lead times the LP plans against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicScenario {
    /// `demands[r][t]` for `t = 1..=h` (index 0 unused).
    pub demands: Vec<Vec<f64>>,
    pub lead_times: LeadTimes,
}

impl DeterministicScenario {
    /// Forecast demands with the average lead time.
    pub fn forecast(s: &ScenarioSpec) -> Self {
        let h = s.chain.horizon;
        let d: Vec<f64> = (0..=h).map(|t| if t == 0 { 0.0 } else { forecast_demand(&s.demand, t, h) }).collect();
        DeterministicScenario {
            demands: vec![d; s.chain.num_retailers()],
            lead_times: LeadTimes::Constant(s.lead_time.average),
        }
    }

    /// The true demands and lead times of an episode.
    pub fn realized(r: &EpisodeRealization) -> Self {
        DeterministicScenario {
            demands: r.demands.iter().map(|d| d[..=r.horizon].to_vec()).collect(),
            lead_times: LeadTimes::Realized {
                production: r.production_leads.clone(),
                transport: r.transport_leads.clone(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// Which decision a variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// End-of-step stock of a node at step `t`.
    Stock { node: usize, t: usize },
    /// Product shipped over a link, dispatched at step `t`.
    Transport { link: usize, t: usize },
    /// Raw material produced by a supplier, dispatched at step `t`.
    Production { supplier: usize, t: usize },
    /// Material discarded at a node on arrival at step `t`.
    Discard { node: usize, t: usize },
    /// Unmet demand of a retailer slot at step `t`.
    Unmet { retailer: usize, t: usize },
}

/// Offsets of the variable blocks, each indexed by entity then step `1..=h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    pub nodes: usize,
    pub links: usize,
    pub suppliers: usize,
    pub retailers: usize,
    pub horizon: usize,
}

impl VarMap {
    fn block(&self, k: usize) -> usize {
        let sizes = [self.nodes, self.links, self.suppliers, self.nodes, self.retailers];
        sizes[..k].iter().sum::<usize>() * self.horizon
    }
    pub fn stock(&self, n: usize, t: usize) -> usize {
        self.block(0) + n * self.horizon + t - 1
    }
    pub fn transport(&self, l: usize, t: usize) -> usize {
        self.block(1) + l * self.horizon + t - 1
    }
    pub fn production(&self, s: usize, t: usize) -> usize {
        self.block(2) + s * self.horizon + t - 1
    }
    pub fn discard(&self, n: usize, t: usize) -> usize {
        self.block(3) + n * self.horizon + t - 1
    }
    pub fn unmet(&self, r: usize, t: usize) -> usize {
        self.block(4) + r * self.horizon + t - 1
    }
    pub fn len(&self) -> usize {
        self.block(5)
    }
    pub fn kind(&self, v: usize) -> VarKind {
        let h = self.horizon;
        let mut k = 0;
        while v >= self.block(k + 1) {
            k += 1;
        }
        let off = v - self.block(k);
        let (e, t) = (off / h, off % h + 1);
        match k {
            0 => VarKind::Stock { node: e, t },
            1 => VarKind::Transport { link: e, t },
            2 => VarKind::Production { supplier: e, t },
            3 => VarKind::Discard { node: e, t },
            _ => VarKind::Unmet { retailer: e, t },
        }
    }
    pub fn name(&self, v: usize) -> String {
        use alloc::format;
        match self.kind(v) {
            VarKind::Stock { node, t } => format!("S_{t}_{node}"),
            VarKind::Transport { link, t } => format!("T_{t}_{link}"),
            VarKind::Production { supplier, t } => format!("P_{t}_{supplier}"),
            VarKind::Discard { node, t } => format!("De_{t}_{node}"),
            VarKind::Unmet { retailer, t } => format!("Dd_{t}_{retailer}"),
        }
    }
}

/// A minimization LP with bounded variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LpInstance {
    pub map: VarMap,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Arrival step of each dispatch variable (`usize::MAX` for others).
    pub arrival: Vec<usize>,
    /// Steps spanned by the time index, from 0 to `h + l_max`.
    pub index_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub map: VarMap,
    pub arrival: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("demands must cover steps 1..={horizon} for {retailers} retailers")]
    Demands { horizon: usize, retailers: usize },
    #[error("lead times must cover dispatch steps 1..={horizon}")]
    LeadTimes { horizon: usize },
    #[error("lead time {lead} outside 1..={max}")]
    LeadRange { lead: usize, max: usize },
}

/// Builds the planning LP for `det`.
pub fn build_lp(s: &ScenarioSpec, det: &DeterministicScenario) -> Result<LpInstance, BuildError> {
    let c = &s.chain;
    let h = c.horizon;
    let lmax = s.lead_time.maximum as usize;
    check_det(c, det, lmax)?;
    let map = VarMap {
        nodes: c.num_nodes(),
        links: c.num_links(),
        suppliers: c.num_suppliers(),
        retailers: c.num_retailers(),
        horizon: h,
    };
    let nv = map.len();
    let mut cost = vec![0.0; nv];
    let lower = vec![0.0; nv];
    let mut upper = vec![f64::INFINITY; nv];
    let mut arrival = vec![usize::MAX; nv];

    // arrivals[n][t]: dispatch variables landing at node n on step t
    let mut arrivals: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); h + 1]; c.num_nodes()];
    let mut fixed_in = vec![vec![0.0; h + 1]; c.num_nodes()];

    for sup in 0..c.num_suppliers() {
        for t in 1..=h {
            let v = map.production(sup, t);
            cost[v] = c.production_cost[sup];
            upper[v] = c.production_cap[sup];
            let due = t + det.lead_times.production(sup, t);
            arrival[v] = due;
            if due <= h {
                arrivals[sup][due].push(v);
            }
        }
        for (k, &q) in c.initial_production[sup].iter().enumerate() {
            if k + 1 <= h {
                fixed_in[sup][k + 1] += q;
            }
        }
    }
    for (l, link) in c.links.iter().enumerate() {
        let from = link.from.0;
        let per_unit = c.transport_cost
            + if c.is_factory[from] { c.processing_cost[from] * c.processing_ratio[from] } else { 0.0 };
        for t in 1..=h {
            let v = map.transport(l, t);
            cost[v] = per_unit;
            upper[v] = c.transport_cap[from];
            let due = t + det.lead_times.transport(l, t);
            arrival[v] = due;
            if due <= h {
                arrivals[link.to.0][due].push(v);
            }
        }
        for (k, &q) in c.initial_transport[l].iter().enumerate() {
            if k + 1 <= h {
                fixed_in[link.to.0][k + 1] += q;
            }
        }
    }

    let mut rows = Vec::new();
    for n in 0..c.num_nodes() {
        let node = NodeId(n);
        let slot = c.retailer_slot(node);
        let out = c.outgoing(node);
        let ratio = if c.is_factory[n] { c.processing_ratio[n] } else { 1.0 };
        for t in 1..=h {
            let s_t = map.stock(n, t);
            let e_t = map.discard(n, t);
            cost[s_t] = c.stock_cost[n];
            cost[e_t] = c.excess_penalty;
            let carried = if t == 1 { c.initial_stock[n] } else { 0.0 };
            let fixed = fixed_in[n][t] + carried;

            let mut bal = vec![(s_t, 1.0), (e_t, 1.0)];
            let mut cap = vec![(e_t, -1.0)];
            if t > 1 {
                bal.push((map.stock(n, t - 1), -1.0));
                cap.push((map.stock(n, t - 1), 1.0));
            }
            for &v in &arrivals[n][t] {
                bal.push((v, -1.0));
                cap.push((v, 1.0));
            }
            for &l in &out {
                bal.push((map.transport(l, t), ratio));
            }
            let mut demand = 0.0;
            if let Some(r) = slot {
                let u = map.unmet(r, t);
                cost[u] = c.unmet_penalty;
                demand = det.demands[r][t];
                upper[u] = demand;
                bal.push((u, -1.0));
            }
            rows.push(LpRow { name: alloc::format!("bal_{n}_{t}"), terms: bal, cmp: Cmp::Eq, rhs: fixed - demand });
            rows.push(LpRow {
                name: alloc::format!("cap_{n}_{t}"),
                terms: cap,
                cmp: Cmp::Le,
                rhs: c.stock_cap[n] - fixed,
            });
            if c.is_factory[n] {
                rows.push(LpRow {
                    name: alloc::format!("proc_{n}_{t}"),
                    terms: out.iter().map(|&l| (map.transport(l, t), ratio)).collect(),
                    cmp: Cmp::Le,
                    rhs: c.processing_cap[n],
                });
            }
        }
    }
    Ok(LpInstance { map, cost, lower, upper, rows, arrival, index_steps: h + lmax + 1 })
}

fn check_det(c: &ChainConfig, det: &DeterministicScenario, lmax: usize) -> Result<(), BuildError> {
    let h = c.horizon;
    if det.demands.len() != c.num_retailers() || det.demands.iter().any(|d| d.len() < h + 1) {
        return Err(BuildError::Demands { horizon: h, retailers: c.num_retailers() });
    }
    let check = |v: &Vec<Vec<u32>>, n: usize| -> Result<(), BuildError> {
        if v.len() != n || v.iter().any(|x| x.len() < h + 1) {
            return Err(BuildError::LeadTimes { horizon: h });
        }
        for x in v {
            for &l in &x[1..=h] {
                if l < 1 || l as usize > lmax {
                    return Err(BuildError::LeadRange { lead: l as usize, max: lmax });
                }
            }
        }
        Ok(())
    };
    match &det.lead_times {
        LeadTimes::Constant(l) => {
            if *l < 1 || *l as usize > lmax {
                return Err(BuildError::LeadRange { lead: *l as usize, max: lmax });
            }
        }
        LeadTimes::Realized { production, transport } => {
            check(production, c.num_suppliers())?;
            check(transport, c.num_links())?;
        }
    }
    Ok(())
}

impl LpInstance {
    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    /// Objective of a point.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of a point.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[i] - v).max(v - self.upper[i]);
        }
        for r in &self.rows {
            let lhs: f64 = r.terms.iter().map(|&(v, a)| a * x[v]).sum();
            let gap = match r.cmp {
                Cmp::Le => lhs - r.rhs,
                Cmp::Ge => r.rhs - lhs,
                Cmp::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

impl LpSolution {
    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// Raw material processed at factory `n` on step `t`.
    pub fn processed(&self, c: &ChainConfig, n: usize, t: usize) -> f64 {
        if !c.is_factory[n] {
            return 0.0;
        }
        let r = c.processing_ratio[n];
        c.outgoing(NodeId(n)).iter().map(|&l| r * self.values[self.map.transport(l, t)]).sum()
    }
}
