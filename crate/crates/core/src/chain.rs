//! Layered supply-chain topology, capacities, costs and initial conditions.
//!
//! Nodes are indexed echelon by echelon: the first echelon produces raw
//! material, the last echelon serves customer demand, and every node links to
//! every node of the following echelon.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Index of a node in canonical (echelon-major) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// A directed transport link between nodes of adjacent echelons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
}

/// How the shipment entries of a factory are denominated in a raw action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShipmentUnits {
    /// Factory shipment quantities are raw material consumed; the product sent
    /// is `raw / processing_ratio`.
    #[default]
    Raw,
    /// Factory shipment quantities are finished product; the raw consumed is
    /// `processing_ratio * product`.
    Product,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Number of nodes in each echelon, upstream first.
    pub echelon_layout: Vec<usize>,
    /// Human-readable node names in canonical order.
    pub node_names: Vec<String>,
    /// Explicit link list. Must equal the full adjacent-echelon connectivity.
    pub links: Vec<Link>,
    pub horizon: usize,
    pub is_factory: Vec<bool>,
    pub processing_ratio: Vec<f64>,

    pub stock_cost: Vec<f64>,
    /// Per-node; only meaningful at suppliers.
    pub production_cost: Vec<f64>,
    /// Per-node, per raw unit; only meaningful at factories.
    pub processing_cost: Vec<f64>,
    pub transport_cost: f64,
    pub excess_penalty: f64,
    pub unmet_penalty: f64,

    pub production_cap: Vec<f64>,
    pub processing_cap: Vec<f64>,
    pub stock_cap: Vec<f64>,
    pub transport_cap: Vec<f64>,

    pub initial_stock: Vec<f64>,
    /// `initial_production[n][k]` arrives at supplier `n` on step `k + 1`.
    pub initial_production: Vec<Vec<f64>>,
    /// `initial_transport[l][k]` arrives through link `l` on step `k + 1`.
    pub initial_transport: Vec<Vec<f64>>,

    #[serde(default)]
    pub shipment_units: ShipmentUnits,
}

/// A single broken structural invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyLayout,
    LengthMismatch { field: &'static str, expected: usize, found: usize },
    NegativeOrNonFinite { field: &'static str, index: usize, value: f64 },
    InitialStockExceedsCapacity { node: NodeId, stock: f64, capacity: f64 },
    NonAdjacentLink { link: Link },
    IncomingLinkAtSupplier { link: Link },
    OutgoingLinkAtRetailer { link: Link },
    MissingLink { from: NodeId, to: NodeId },
    DuplicateLink { link: Link },
    RatioAtNonFactory { node: NodeId, ratio: f64 },
    NonPositiveRatio { node: NodeId, ratio: f64 },
    ZeroHorizon,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyLayout => write!(f, "echelon layout needs at least two non-empty echelons"),
            Violation::LengthMismatch { field, expected, found } => {
                write!(f, "{field} has length {found}, expected {expected}")
            }
            Violation::NegativeOrNonFinite { field, index, value } => {
                write!(f, "{field}[{index}] = {value} is negative or not finite")
            }
            Violation::InitialStockExceedsCapacity { node, stock, capacity } => {
                write!(f, "initial stock exceeds capacity at {node}: {stock} > {capacity}")
            }
            Violation::NonAdjacentLink { link } => {
                write!(f, "non-adjacent echelon link {} -> {}", link.from, link.to)
            }
            Violation::IncomingLinkAtSupplier { link } => {
                write!(f, "supplier {} has an incoming link", link.to)
            }
            Violation::OutgoingLinkAtRetailer { link } => {
                write!(f, "retailer {} has an outgoing link", link.from)
            }
            Violation::MissingLink { from, to } => write!(f, "missing link {from} -> {to}"),
            Violation::DuplicateLink { link } => {
                write!(f, "duplicate link {} -> {}", link.from, link.to)
            }
            Violation::RatioAtNonFactory { node, ratio } => {
                write!(f, "processing ratio {ratio} at non-factory {node} must be 1")
            }
            Violation::NonPositiveRatio { node, ratio } => {
                write!(f, "processing ratio {ratio} at {node} must be positive")
            }
            Violation::ZeroHorizon => write!(f, "horizon must be at least one step"),
        }
    }
}

/// Outcome of [`validate_config`]: empty when the configuration is sound.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| format!("{v}")).collect()
    }
}

impl ChainConfig {
    /// Builds a layered chain with full adjacent-echelon connectivity and
    /// zeroed parameters. Callers fill in costs and capacities.
    pub fn layered(echelon_layout: &[usize], horizon: usize) -> Self {
        let q: usize = echelon_layout.iter().sum();
        let mut node_names = Vec::with_capacity(q);
        let last = echelon_layout.len().saturating_sub(1);
        for (e, &size) in echelon_layout.iter().enumerate() {
            let role = match e {
                0 => "supplier",
                _ if e == last => "retailer",
                1 => "factory",
                _ => "wholesaler",
            };
            for k in 0..size {
                node_names.push(format!("{role}{}", k + 1));
            }
        }
        let mut links = Vec::new();
        let mut start = 0;
        for w in echelon_layout.windows(2) {
            let next = start + w[0];
            for a in 0..w[0] {
                for b in 0..w[1] {
                    links.push(Link { from: NodeId(start + a), to: NodeId(next + b) });
                }
            }
            start = next;
        }
        let nl = links.len();
        ChainConfig {
            echelon_layout: echelon_layout.to_vec(),
            node_names,
            links,
            horizon,
            is_factory: vec![false; q],
            processing_ratio: vec![1.0; q],
            stock_cost: vec![0.0; q],
            production_cost: vec![0.0; q],
            processing_cost: vec![0.0; q],
            transport_cost: 0.0,
            excess_penalty: 0.0,
            unmet_penalty: 0.0,
            production_cap: vec![0.0; q],
            processing_cap: vec![0.0; q],
            stock_cap: vec![0.0; q],
            transport_cap: vec![0.0; q],
            initial_stock: vec![0.0; q],
            initial_production: vec![Vec::new(); q],
            initial_transport: vec![Vec::new(); nl],
            shipment_units: ShipmentUnits::Raw,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.echelon_layout.iter().sum()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn echelon_of(&self, node: NodeId) -> usize {
        let mut start = 0;
        for (e, &size) in self.echelon_layout.iter().enumerate() {
            if node.0 < start + size {
                return e;
            }
            start += size;
        }
        self.echelon_layout.len()
    }

    fn echelon_range(&self, e: usize) -> core::ops::Range<usize> {
        let start: usize = self.echelon_layout[..e].iter().sum();
        start..start + self.echelon_layout[e]
    }

    pub fn suppliers(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.echelon_range(0).map(NodeId)
    }

    pub fn retailers(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.echelon_range(self.echelon_layout.len() - 1).map(NodeId)
    }

    pub fn num_suppliers(&self) -> usize {
        self.echelon_layout[0]
    }

    pub fn num_retailers(&self) -> usize {
        *self.echelon_layout.last().unwrap_or(&0)
    }

    pub fn is_supplier(&self, node: NodeId) -> bool {
        self.echelon_of(node) == 0
    }

    pub fn is_retailer(&self, node: NodeId) -> bool {
        self.echelon_of(node) + 1 == self.echelon_layout.len()
    }

    /// Position of a retailer among the retailers (0-based).
    pub fn retailer_slot(&self, node: NodeId) -> Option<usize> {
        let r = self.echelon_range(self.echelon_layout.len() - 1);
        r.contains(&node.0).then(|| node.0 - r.start)
    }

    /// Outgoing link indices of `node`, ordered by destination index.
    pub fn outgoing(&self, node: NodeId) -> Vec<usize> {
        let mut out: Vec<usize> =
            (0..self.links.len()).filter(|&l| self.links[l].from == node).collect();
        out.sort_by_key(|&l| self.links[l].to);
        out
    }

    /// Incoming link indices of `node`, ordered by source index.
    pub fn incoming(&self, node: NodeId) -> Vec<usize> {
        let mut inc: Vec<usize> =
            (0..self.links.len()).filter(|&l| self.links[l].to == node).collect();
        inc.sort_by_key(|&l| self.links[l].from);
        inc
    }

    pub fn predecessors(&self, node: NodeId) -> Vec<NodeId> {
        self.incoming(node).into_iter().map(|l| self.links[l].from).collect()
    }

    /// Nodes that make shipment decisions (all but the last echelon).
    pub fn shipping_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        let last = self.echelon_layout.len() - 1;
        (0..self.echelon_range(last).start).map(NodeId)
    }

    /// Length of an observation vector: stock, two pipeline summaries per
    /// node, next demand per retailer, remaining steps.
    pub fn observation_len(&self) -> usize {
        3 * self.num_nodes() + self.num_retailers() + 1
    }

    /// Length of an action vector: production per supplier plus one shipment
    /// per link.
    pub fn action_len(&self) -> usize {
        self.num_suppliers() + self.num_links()
    }

    /// Product units leaving a node's pipeline per unit consumed from stock.
    pub fn product_per_consumed(&self, node: NodeId) -> f64 {
        if self.is_factory[node.0] {
            1.0 / self.processing_ratio[node.0]
        } else {
            1.0
        }
    }

    /// Upper bound on material consumed from stock per step by shipments.
    pub fn ship_base(&self, node: NodeId, stock: f64) -> f64 {
        if self.is_factory[node.0] {
            stock.min(self.processing_cap[node.0])
        } else {
            stock
        }
    }
}

fn check_len<T>(v: &[T], field: &'static str, expected: usize, out: &mut Vec<Violation>) -> bool {
    if v.len() != expected {
        out.push(Violation::LengthMismatch { field, expected, found: v.len() });
        false
    } else {
        true
    }
}

fn check_values(v: &[f64], field: &'static str, out: &mut Vec<Violation>) {
    for (index, &value) in v.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            out.push(Violation::NegativeOrNonFinite { field, index, value });
        }
    }
}

/// Checks every structural invariant and returns all violations found.
pub fn validate_config(config: &ChainConfig) -> Validation {
    let mut out = Vec::new();
    if config.echelon_layout.len() < 2 || config.echelon_layout.iter().any(|&s| s == 0) {
        out.push(Violation::EmptyLayout);
        return Validation { violations: out };
    }
    if config.horizon == 0 {
        out.push(Violation::ZeroHorizon);
    }
    let q = config.num_nodes();
    let per_node: [(&'static str, &[f64]); 9] = [
        ("processing_ratio", &config.processing_ratio),
        ("stock_cost", &config.stock_cost),
        ("production_cost", &config.production_cost),
        ("processing_cost", &config.processing_cost),
        ("production_cap", &config.production_cap),
        ("processing_cap", &config.processing_cap),
        ("stock_cap", &config.stock_cap),
        ("transport_cap", &config.transport_cap),
        ("initial_stock", &config.initial_stock),
    ];
    let mut lengths_ok = check_len(&config.is_factory, "is_factory", q, &mut out);
    lengths_ok &= check_len(&config.node_names, "node_names", q, &mut out);
    lengths_ok &= check_len(&config.initial_production, "initial_production", q, &mut out);
    for (field, v) in per_node.iter() {
        if check_len(v, field, q, &mut out) {
            check_values(v, field, &mut out);
        } else {
            lengths_ok = false;
        }
    }
    check_values(
        &[config.transport_cost, config.excess_penalty, config.unmet_penalty],
        "scalar_costs",
        &mut out,
    );
    for p in &config.initial_production {
        check_values(p, "initial_production", &mut out);
    }
    lengths_ok &= check_len(&config.initial_transport, "initial_transport", config.links.len(), &mut out);
    for t in &config.initial_transport {
        check_values(t, "initial_transport", &mut out);
    }

    let last = config.echelon_layout.len() - 1;
    for (i, link) in config.links.iter().enumerate() {
        if link.from.0 >= q || link.to.0 >= q {
            out.push(Violation::NonAdjacentLink { link: *link });
            continue;
        }
        let ef = config.echelon_of(link.from);
        let et = config.echelon_of(link.to);
        if et == 0 {
            out.push(Violation::IncomingLinkAtSupplier { link: *link });
        }
        if ef == last {
            out.push(Violation::OutgoingLinkAtRetailer { link: *link });
        }
        if et != ef + 1 {
            out.push(Violation::NonAdjacentLink { link: *link });
        }
        if config.links[..i].contains(link) {
            out.push(Violation::DuplicateLink { link: *link });
        }
    }
    for e in 0..last {
        for a in config.echelon_range(e) {
            for b in config.echelon_range(e + 1) {
                let (from, to) = (NodeId(a), NodeId(b));
                if !config.links.iter().any(|l| l.from == from && l.to == to) {
                    out.push(Violation::MissingLink { from, to });
                }
            }
        }
    }

    if lengths_ok {
        for n in 0..q {
            let node = NodeId(n);
            let ratio = config.processing_ratio[n];
            if !config.is_factory[n] && ratio != 1.0 {
                out.push(Violation::RatioAtNonFactory { node, ratio });
            }
            if !(ratio > 0.0) {
                out.push(Violation::NonPositiveRatio { node, ratio });
            }
            if config.initial_stock[n] > config.stock_cap[n] {
                out.push(Violation::InitialStockExceedsCapacity {
                    node,
                    stock: config.initial_stock[n],
                    capacity: config.stock_cap[n],
                });
            }
        }
    }
    Validation { violations: out }
}
