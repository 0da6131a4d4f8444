//! Result tables: noise level × objective grids with an Average row,
//! emitted as CSV plus a JSON sidecar carrying the full configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub noise_label: String,
    pub cells: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableMetadata {
    pub seed: u64,
    pub config: serde_json::Value,
    pub config_hash: String,
    /// Unix seconds at emit time. Lives only in the sidecar so the CSV is
    /// byte-identical across reruns.
    pub timestamp: Option<u64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    /// Column headers, one per objective.
    pub objective_labels: Vec<String>,
    pub rows: Vec<TableRow>,
    pub metadata: TableMetadata,
}

impl ResultTable {
    pub fn new(objective_labels: Vec<String>, seed: u64, config: serde_json::Value) -> Self {
        let config_hash = fnv1a_hex(config.to_string().as_bytes());
        Self {
            objective_labels,
            rows: Vec::new(),
            metadata: TableMetadata {
                seed,
                config,
                config_hash,
                timestamp: None,
                warnings: Vec::new(),
            },
        }
    }

    pub fn push_row(&mut self, noise_label: impl Into<String>, cells: Vec<f64>) -> Result<()> {
        if cells.len() != self.objective_labels.len() {
            return Err(BenchError::Config(format!(
                "row has {} cells for {} columns",
                cells.len(),
                self.objective_labels.len()
            )));
        }
        self.rows.push(TableRow { noise_label: noise_label.into(), cells });
        Ok(())
    }

    /// Arithmetic mean of every column over the noise levels, matching the
    /// Average row of the published tables.
    pub fn column_averages(&self) -> Vec<f64> {
        let cols = self.objective_labels.len();
        let mut sums = vec![0.0; cols];
        for row in &self.rows {
            for (s, &c) in sums.iter_mut().zip(&row.cells) {
                *s += c;
            }
        }
        let n = self.rows.len().max(1) as f64;
        sums.iter().map(|s| s / n).collect()
    }

    /// Renders the CSV body: header, one row per noise level with cells at
    /// two decimals, and the final Average row.
    pub fn to_csv(&self) -> Result<String> {
        if self.rows.is_empty() || self.objective_labels.is_empty() {
            return Err(BenchError::Config("refusing to emit an empty table".into()));
        }
        let mut out = String::new();
        out.push_str("noise");
        for label in &self.objective_labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for row in &self.rows {
            if row.cells.len() != self.objective_labels.len() {
                return Err(BenchError::Config("ragged table row".into()));
            }
            out.push_str(&row.noise_label);
            for cell in &row.cells {
                out.push_str(&format!(",{cell:.2}"));
            }
            out.push('\n');
        }
        out.push_str("Average");
        for avg in self.column_averages() {
            out.push_str(&format!(",{avg:.2}"));
        }
        out.push('\n');
        Ok(out)
    }

    /// Writes `<path>` (CSV) and `<path>.json` (full-precision cells plus
    /// configuration, seed, and timestamp).
    pub fn emit(&self, path: &Path) -> Result<()> {
        let csv = self.to_csv()?;
        fs::write(path, csv)
            .map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        let mut sidecar = self.clone();
        sidecar.metadata.timestamp =
            Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        let json = serde_json::to_string_pretty(&sidecar)?;
        let sidecar_path = sidecar_path(path);
        fs::write(&sidecar_path, json)
            .map_err(|source| BenchError::Io { path: sidecar_path.clone(), source })?;
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
