use std::path::PathBuf;

use echelon_core::lp::{BuildError, PlanError};
use echelon_core::ppo::TrainError;
use echelon_core::{ScenarioError, SimError};

use crate::solve::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("scenario file: {0}")]
    TomlRead(#[from] toml::de::Error),
    #[error("scenario file: {0}")]
    TomlWrite(#[from] toml::ser::Error),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("agent does not fit the scenario: {0}")]
    Mismatch(String),
    #[error("reports cover different episode sets")]
    EpisodeSetMismatch,
    #[error("statistics: {0}")]
    Stats(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| Error::Io { path: path.into(), source })
    }
}
