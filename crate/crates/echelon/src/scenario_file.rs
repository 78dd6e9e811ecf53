//! Scenario files: TOML with a top-level `name` and `[chain]`, `[demand]`,
//! `[lead_time]` sections.

use std::path::Path;

use echelon_core::{builtin_scenario, ScenarioSpec, CATALOG};

use crate::error::{IoContext, Result};
use crate::io::write_atomic;

pub fn to_toml(s: &ScenarioSpec) -> Result<String> {
    Ok(toml::to_string(s)?)
}

pub fn from_toml(text: &str) -> Result<ScenarioSpec> {
    let s: ScenarioSpec = toml::from_str(text)?;
    s.validate()?;
    Ok(s)
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioSpec> {
    from_toml(&std::fs::read_to_string(path).at(path)?)
}

pub fn save_scenario_file(path: &Path, s: &ScenarioSpec) -> Result<()> {
    write_atomic(path, to_toml(s)?.as_bytes())
}

/// A catalog name or a path to a scenario file.
pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioSpec> {
    let p = Path::new(name_or_path);
    if CATALOG.contains(&name_or_path) || !p.exists() {
        return Ok(builtin_scenario(name_or_path)?);
    }
    load_scenario_file(p)
}

/// Writes all catalog scenarios as `<dir>/<name>.toml`.
pub fn write_catalog(dir: &Path) -> Result<()> {
    for name in CATALOG {
        save_scenario_file(&dir.join(format!("{name}.toml")), &builtin_scenario(name)?)?;
    }
    Ok(())
}
