use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Bumped whenever a field of an existing report changes meaning or is removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
    pub result: Value,
}

impl Report {
    pub fn new(command: &'static str, seed: Option<u64>, config: Value, result: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "circlat",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            result,
        }
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::numeric(e.to_string()))?;
        match out {
            Some(p) => fs::write(p, text + "\n")?,
            None => {
                let mut stdout = std::io::stdout().lock();
                writeln!(stdout, "{text}")?;
            }
        }
        Ok(())
    }
}

/// Writes plot data with a header row.
pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or_else(|e| json!({ "serialization_error": e.to_string() }))
}
