//! Versioned JSON run reports, written atomically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;

pub const REPORT_SCHEMA: &str = "kptlab.report/1";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub artifact_version: &'static str,
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    /// Only present with `--timing`, so that reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
    pub exit_code: i32,
    pub payload: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &'static str, cfg: &ExperimentConfig, payload: serde_json::Value, exit_code: i32) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            command,
            artifact_version: ARTIFACT_VERSION,
            config: cfg.echo.clone(),
            config_hash: cfg.hash(),
            wall_time_ms: None,
            exit_code,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
