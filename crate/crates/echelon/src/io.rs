//! Atomic file writes and CSV output with a schema comment row.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{IoContext, Result};

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).at(dir)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).at(&tmp)?;
        f.write_all(bytes).at(&tmp)?;
        f.sync_all().at(&tmp)?;
    }
    fs::rename(&tmp, path).at(path)
}

/// Serializes `rows` as CSV preceded by `# echelon <schema> v<version>`.
pub fn csv_bytes<T: Serialize>(schema: &str, version: u32, rows: &[T]) -> Result<Vec<u8>> {
    let mut out = format!("# echelon {schema} v{version}\n").into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    let body = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    if body.is_empty() {
        return Ok(out);
    }
    out.extend(body);
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, schema: &str, rows: &[T]) -> Result<()> {
    write_atomic(path, &csv_bytes(schema, 1, rows)?)
}

/// Reads CSV rows written by [`write_csv`], skipping the schema row.
pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).at(path)?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}
