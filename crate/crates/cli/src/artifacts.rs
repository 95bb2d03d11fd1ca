//! Artifact emission shared by every subcommand. All payload files are
//! deterministic; the wall-clock timestamp goes only into `run_meta.json`.

use crate::CliError;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Data(format!("serializing {name}: {e}")))?;
        fs::write(self.path(name), text)
            .map_err(|e| CliError::Data(format!("writing {name}: {e}")))?;
        Ok(())
    }

    /// Run metadata: timestamped, excluded from determinism contracts.
    pub fn write_meta(&self, command: &str, detail: serde_json::Value) -> Result<(), CliError> {
        let unix_time = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.write_json(
            "run_meta.json",
            &serde_json::json!({
                "command": command,
                "version": env!("CARGO_PKG_VERSION"),
                "unix_time": unix_time,
                "detail": detail,
            }),
        )
    }
}

#[derive(Serialize)]
pub struct SolveSummary {
    pub method: String,
    pub cost_estimate: f64,
    pub plan_cost: f64,
    pub exact_cost: Option<f64>,
    pub relative_gap: Option<f64>,
}
