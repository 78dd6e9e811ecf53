//! Mapping between physical units and the agent's `[-1, 1]` space.
//!
//! Observations are divided by fixed maxima. Shipment decisions are read as
//! cuts in a node's stock: each successor's scaled output marks a cut, the
//! cuts are sorted, and each successor receives the slice between its cut and
//! the previous one. Any output vector therefore decodes to a feasible plan.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, NodeId, ShipmentUnits};
use crate::scenario::ScenarioSpec;
use crate::sim::{ObsLayout, Observation, RawAction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedObs(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAction(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("expected {expected} values, got {found}")]
    Length { expected: usize, found: usize },
    #[error("{what} at {node}: {value} exceeds {limit}")]
    Infeasible { what: &'static str, node: NodeId, value: f64, limit: f64 },
    #[error("negative quantity {value} at position {index}")]
    Negative { index: usize, value: f64 },
}

/// Per-entry maxima used to scale observations.
#[derive(Clone, Debug, PartialEq)]
pub struct ObsScales {
    pub maxima: Vec<f64>,
}

impl ObsScales {
    pub fn new(c: &ChainConfig, lead_max: u32, demand_max: f64) -> Self {
        let layout = ObsLayout::of(c);
        let later = f64::from(lead_max.saturating_sub(1));
        let mut m = vec![0.0; layout.len()];
        for n in 0..c.num_nodes() {
            let node = NodeId(n);
            m[layout.stock(n)] = c.stock_cap[n];
            let next = if c.is_supplier(node) {
                c.production_cap[n]
            } else {
                c.predecessors(node).iter().map(|p| c.stock_cap[p.0]).sum()
            };
            m[layout.arriving_next(n)] = next;
            m[layout.arriving_later(n)] = next * later;
        }
        for r in 0..c.num_retailers() {
            m[layout.demand(r)] = demand_max;
        }
        m[layout.remaining()] = c.horizon as f64;
        ObsScales { maxima: m }
    }

    pub fn for_scenario(s: &ScenarioSpec) -> Self {
        Self::new(&s.chain, s.lead_time.maximum, s.demand.clip_max)
    }
}

/// Scales `v` by maximum `m` into `[-1, 1]`. Values can exceed their maxima
/// when several dispatches land together, so the result is clipped.
pub fn normalize_value(v: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return -1.0;
    }
    (2.0 * (v / m) - 1.0).clamp(-1.0, 1.0)
}

pub fn normalize_observation(obs: &Observation, scales: &ObsScales) -> NormalizedObs {
    debug_assert_eq!(obs.0.len(), scales.maxima.len());
    NormalizedObs(obs.0.iter().zip(&scales.maxima).map(|(&v, &m)| normalize_value(v, m)).collect())
}

/// Cut base of `node` in shipment units.
pub fn cut_base(c: &ChainConfig, node: NodeId, stock: f64) -> f64 {
    let base = c.ship_base(node, stock.max(0.0));
    if c.is_factory[node.0] && c.shipment_units == ShipmentUnits::Product {
        base / c.processing_ratio[node.0]
    } else {
        base
    }
}

fn unit(a: f64) -> f64 {
    (a.clamp(-1.0, 1.0) + 1.0) / 2.0
}

/// Shipments from the sorted-cut reading of `cuts`; ties go to the lower index.
fn slices_from_cuts(cuts: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..cuts.len()).collect();
    order.sort_by(|&i, &j| cuts[i].total_cmp(&cuts[j]).then(i.cmp(&j)));
    let mut out = vec![0.0; cuts.len()];
    let mut prev = 0.0;
    for &k in &order {
        out[k] = cuts[k] - prev;
        prev = cuts[k];
    }
    out
}

/// Decodes a normalized action against the stocks available at execution.
/// Entries outside `[-1, 1]` are clipped first.
pub fn decode_action(a: &NormalizedAction, stocks: &[f64], c: &ChainConfig) -> Result<RawAction, CodecError> {
    if a.0.len() != c.action_len() {
        return Err(CodecError::Length { expected: c.action_len(), found: a.0.len() });
    }
    let ns = c.num_suppliers();
    let production = (0..ns).map(|s| unit(a.0[s]) * c.production_cap[s]).collect();
    let mut shipments = vec![0.0; c.num_links()];
    for n in c.shipping_nodes() {
        let out = c.outgoing(n);
        let base = cut_base(c, n, stocks[n.0]);
        let cuts: Vec<f64> = out.iter().map(|&l| unit(a.0[ns + l]) * base).collect();
        for (&l, q) in out.iter().zip(slices_from_cuts(&cuts)) {
            shipments[l] = q;
        }
    }
    Ok(RawAction { production, shipments })
}

/// Inverse of [`decode_action`] for a feasible plan.
pub fn encode_plan(q: &RawAction, stocks: &[f64], c: &ChainConfig) -> Result<NormalizedAction, CodecError> {
    let ns = c.num_suppliers();
    if q.production.len() != ns || q.shipments.len() != c.num_links() {
        return Err(CodecError::Length {
            expected: c.action_len(),
            found: q.production.len() + q.shipments.len(),
        });
    }
    let tol = |x: f64| x + 1e-9 * (1.0 + x.abs());
    let mut a = vec![-1.0; c.action_len()];
    for s in 0..ns {
        let p = q.production[s];
        if p < 0.0 {
            return Err(CodecError::Negative { index: s, value: p });
        }
        let cap = c.production_cap[s];
        if p > tol(cap) {
            return Err(CodecError::Infeasible { what: "production capacity", node: NodeId(s), value: p, limit: cap });
        }
        a[s] = to_signed(p, cap);
    }
    for n in c.shipping_nodes() {
        let out = c.outgoing(n);
        let base = cut_base(c, n, stocks[n.0]);
        let qs: Vec<f64> = out.iter().map(|&l| q.shipments[l]).collect();
        if let Some((i, &v)) = qs.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(CodecError::Negative { index: ns + out[i], value: v });
        }
        let total: f64 = qs.iter().sum();
        if total > tol(base) {
            let what = if c.is_factory[n.0] { "processing capacity or stock" } else { "available stock" };
            return Err(CodecError::Infeasible { what, node: n, value: total, limit: base });
        }
        let mut order: Vec<usize> = (0..qs.len()).collect();
        order.sort_by(|&i, &j| qs[i].total_cmp(&qs[j]).then(i.cmp(&j)));
        let mut cut = 0.0;
        for &k in &order {
            cut += qs[k];
            a[ns + out[k]] = to_signed(cut, base);
        }
    }
    Ok(NormalizedAction(a))
}

fn to_signed(v: f64, base: f64) -> f64 {
    if base <= 0.0 {
        -1.0
    } else {
        (2.0 * (v / base) - 1.0).clamp(-1.0, 1.0)
    }
}
