//! The built-in experiment catalog.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::{validate_config, ChainConfig};
use crate::stochastic::{DemandSpec, LeadTimeSpec, Perturbation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub chain: ChainConfig,
    pub demand: DemandSpec,
    pub lead_time: LeadTimeSpec,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error("invalid scenario `{name}`: {problems:?}")]
    Invalid { name: String, problems: Vec<String> },
}

/// Names of the 17 catalog scenarios, in table order.
pub const CATALOG: [&str; 17] = [
    "N0", "N20", "N40", "N60", "N0cl", "N20cl", "N40cl", "N60cl", "rN0", "rN50", "rN100", "rU200",
    "rN0cl", "rN50cl", "rN100cl", "rU200cl", "N20stc",
];

/// Stock costs of the `N20stc` variant in canonical node order.
pub const VARIANT_STOCK_COSTS: [f64; 8] = [1.0, 2.0, 1.0, 2.0, 5.0, 6.0, 5.0, 6.0];

/// The common two-nodes-per-echelon chain shared by every catalog scenario.
pub fn default_chain() -> ChainConfig {
    let mut c = ChainConfig::layered(&[2, 2, 2, 2], 360);
    c.is_factory = vec![false, false, true, true, false, false, false, false];
    c.processing_ratio = vec![1.0, 1.0, 3.0, 3.0, 1.0, 1.0, 1.0, 1.0];
    c.stock_cost = vec![1.0; 8];
    c.production_cost = vec![6.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    c.processing_cost = vec![0.0, 0.0, 12.0, 10.0, 0.0, 0.0, 0.0, 0.0];
    c.transport_cost = 2.0;
    c.excess_penalty = 10.0;
    c.unmet_penalty = 216.0;
    c.production_cap = vec![600.0, 840.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    c.processing_cap = vec![0.0, 0.0, 840.0, 960.0, 0.0, 0.0, 0.0, 0.0];
    c.stock_cap = vec![1600.0, 1800.0, 6400.0, 7200.0, 1600.0, 1800.0, 1600.0, 1800.0];
    c.transport_cap = c.stock_cap.clone();
    c.initial_stock = vec![800.0; 8];
    c.initial_production = vec![
        vec![600.0, 600.0],
        vec![840.0, 840.0],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
    ];
    // Factory totals (600, 840) per arrival step, split evenly over the two
    // supplying links; 240 per link into wholesalers and retailers.
    let factory_total = [600.0, 840.0];
    c.initial_transport = c
        .links
        .iter()
        .map(|link| {
            let per_step = if c.is_factory[link.to.0] {
                factory_total[link.to.0 - 2] / 2.0
            } else {
                240.0
            };
            vec![per_step; 2]
        })
        .collect();
    c
}

fn spec(name: &str, demand: DemandSpec, lead_time: LeadTimeSpec) -> ScenarioSpec {
    ScenarioSpec { name: name.to_string(), chain: default_chain(), demand, lead_time }
}

/// Looks up one of the 17 catalog scenarios by name.
pub fn builtin_scenario(name: &str) -> Result<ScenarioSpec, ScenarioError> {
    let gauss = |p: f64| Perturbation::Gaussian { std_dev: p };
    let uniform = Perturbation::Uniform { low: -200.0, high: 200.0 };
    let (seasonal, pert, stochastic_leads) = match name {
        "N0" => (true, Perturbation::None, true),
        "N20" | "N20stc" => (true, gauss(20.0), true),
        "N40" => (true, gauss(40.0), true),
        "N60" => (true, gauss(60.0), true),
        "N0cl" => (true, Perturbation::None, false),
        "N20cl" => (true, gauss(20.0), false),
        "N40cl" => (true, gauss(40.0), false),
        "N60cl" => (true, gauss(60.0), false),
        "rN0" => (false, Perturbation::None, true),
        "rN50" => (false, gauss(50.0), true),
        "rN100" => (false, gauss(100.0), true),
        "rU200" => (false, uniform, true),
        "rN0cl" => (false, Perturbation::None, false),
        "rN50cl" => (false, gauss(50.0), false),
        "rN100cl" => (false, gauss(100.0), false),
        "rU200cl" => (false, uniform, false),
        other => return Err(ScenarioError::Unknown(other.to_string())),
    };
    let demand = if seasonal { DemandSpec::seasonal(pert) } else { DemandSpec::regular(pert) };
    let lead = if stochastic_leads { LeadTimeSpec::stochastic() } else { LeadTimeSpec::constant() };
    let mut s = spec(name, demand, lead);
    if name == "N20stc" {
        s.chain.stock_cost = VARIANT_STOCK_COSTS.to_vec();
    }
    Ok(s)
}

impl ScenarioSpec {
    /// Validates the chain and the stochastic specs together.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut problems = validate_config(&self.chain).messages();
        if !self.demand.is_valid() {
            problems.push("demand spec violates clip_min <= sin_min <= sin_max <= clip_max, p >= 0, low <= high, peaks >= 1".to_string());
        }
        if !self.lead_time.is_valid() {
            problems.push("lead time spec needs 1 <= average <= maximum".to_string());
        }
        let lavg = self.lead_time.average as usize;
        for (n, p) in self.chain.initial_production.iter().enumerate() {
            if p.len() > lavg {
                problems.push(alloc::format!("initial_production[{n}] extends beyond the average lead time"));
            }
        }
        for (l, t) in self.chain.initial_transport.iter().enumerate() {
            if t.len() > lavg {
                problems.push(alloc::format!("initial_transport[{l}] extends beyond the average lead time"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid { name: self.name.clone(), problems })
        }
    }
}
