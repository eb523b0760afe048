//! Run configuration and result envelopes.
//!
//! All numeric policy lives in a JSON config; command-line flags override
//! individual fields. Envelopes snapshot the effective config plus a
//! content hash of every input file, so a run can be reproduced exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ahlab::{Error, Result};

fn default_t_max() -> f64 {
    12.0
}
fn default_points() -> usize {
    1201
}
fn default_tol() -> f64 {
    1e-6
}
fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Registered task name.
    pub task: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
    /// Truncation radii (spectral tasks) or shoot parameters (sweep),
    /// increasing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Seed for any randomized sampling (recorded even when unused).
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(task: &str) -> RunConfig {
        RunConfig {
            task: task.to_string(),
            metric: None,
            field: None,
            schedule: None,
            n: None,
            kappa: None,
            d: None,
            s: None,
            alpha: None,
            time: None,
            parameter: None,
            t_max: default_t_max(),
            points: default_points(),
            tol: default_tol(),
            out_dir: default_out_dir(),
            seed: 0,
        }
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if !(self.t_max > 1.0) {
            return Err(Error::invalid("t_max must exceed 1"));
        }
        if let Some(sch) = &self.schedule {
            if sch.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::invalid("schedule must be strictly increasing"));
            }
        }
        Ok(())
    }

    /// Paths this run reads, for the input hash.
    pub fn input_paths(&self) -> Vec<&PathBuf> {
        self.metric.iter().chain(self.field.iter()).collect()
    }
}

/// Hex SHA-256 over the concatenation of the input files (path-tagged).
pub fn input_hash(paths: &[&PathBuf]) -> Result<Option<String>> {
    if paths.is_empty() {
        return Ok(None);
    }
    let mut hasher = Sha256::new();
    for p in paths {
        let bytes =
            fs::read(p).map_err(|e| Error::invalid(format!("{}: {e}", p.display())))?;
        hasher.update(p.to_string_lossy().as_bytes());
        hasher.update([0u8]);
        hasher.update(&bytes);
    }
    Ok(Some(format!("{:x}", hasher.finalize())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub task: String,
    pub config: RunConfig,
    /// SHA-256 of the input files, when the task reads any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_hash: Option<String>,
    /// Task-specific numeric payload.
    pub output: serde_json::Value,
    /// Inline CSV tables by quantity name (also written next to the
    /// envelope), so `plot-data` can run from the envelope alone.
    pub tables: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub wall_clock_ms: u128,
    pub version: String,
}

/// Two-column (or three-column) CSV for one named quantity of an envelope.
pub fn emit_plot_data(envelope: &ResultEnvelope, quantity: &str) -> Result<String> {
    match envelope.tables.iter().find(|(name, _)| name == quantity) {
        Some((_, csv)) => Ok(csv.clone()),
        None => {
            let available: Vec<&str> =
                envelope.tables.iter().map(|(n, _)| n.as_str()).collect();
            Err(Error::invalid(format!(
                "quantity `{quantity}` not in envelope; available: {available:?}"
            )))
        }
    }
}
