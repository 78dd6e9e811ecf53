//! Simulation, planning and learning core for capacitated multi-echelon
//! supply chains. Works without `std`; needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod agent;
pub mod chain;
pub mod codec;
pub mod lp;
pub mod ppo;
pub mod scenario;
pub mod sim;
pub mod stochastic;

pub use agent::{evaluate_costs, run_episode, EpisodeResult, Policy};
pub use chain::{validate_config, ChainConfig, Link, NodeId, ShipmentUnits, Validation, Violation};
pub use codec::{decode_action, encode_plan, normalize_observation, NormalizedAction, NormalizedObs, ObsScales};
pub use scenario::{builtin_scenario, ScenarioError, ScenarioSpec, CATALOG};
pub use sim::{
    CostBreakdown, EpisodeRealization, Observation, RawAction, SimError, Simulator, StepOutcome,
    SupplyChainState,
};
pub use stochastic::{DemandKind, DemandSpec, LeadTimeKind, LeadTimeSpec, Perturbation, RngStream};
