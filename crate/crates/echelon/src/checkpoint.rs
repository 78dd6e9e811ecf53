//! Versioned JSON checkpoints of trained agents.

use std::path::Path;

use echelon_core::ppo::PolicyBundle;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::io::write_atomic;

pub const FORMAT: &str = "echelon-policy";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<B> {
    format: String,
    version: u32,
    scenario: String,
    bundle: B,
}

pub fn save_checkpoint(path: &Path, scenario: &str, bundle: &PolicyBundle) -> Result<()> {
    let env = Envelope { format: FORMAT.into(), version: VERSION, scenario: scenario.into(), bundle };
    write_atomic(path, &serde_json::to_vec(&env)?)
}

/// Loads a checkpoint; returns the scenario name it was trained on.
pub fn load_checkpoint(path: &Path) -> Result<(String, PolicyBundle)> {
    let text = std::fs::read(path).at(path)?;
    let head: Envelope<serde::de::IgnoredAny> = serde_json::from_slice(&text)?;
    if head.format != FORMAT {
        return Err(Error::Checkpoint(format!("unknown format `{}`", head.format)));
    }
    if head.version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {}", head.version)));
    }
    let env: Envelope<PolicyBundle> = serde_json::from_slice(&text)?;
    env.bundle.check_finite().map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok((env.scenario, env.bundle))
}
