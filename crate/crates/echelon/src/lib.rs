//! File formats, LP solving, evaluation and experiment orchestration on top
//! of `echelon-core`.

pub mod campaign;
pub mod checkpoint;
pub mod error;
pub mod eval;
pub mod io;
pub mod lpfile;
pub mod report;
pub mod scenario_file;
pub mod solve;
pub mod stats;
pub mod tune;

pub use error::{Error, Result};
