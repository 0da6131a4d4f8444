//! Declarative experiment configuration: a JSON file maps directly onto a
//! full noise-level × objective result table.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use gpca::{AscentSettings, KernelSpec, ObjectiveSpec, UpdateMode};

use crate::classify::{classify, reconstruction_report, PipelineConfig};
use crate::dataset::{load_dataset, parse_format, Dataset};
use crate::error::{BenchError, Result};
use crate::noise::{add_noise_with, NoiseKind};
use crate::table::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Per-class fitting + minimum-reconstruction-error prediction;
    /// cells are accuracy percentages.
    Classify,
    /// Single basis over original + noise images; cells are mean
    /// reconstruction errors scaled by 1/1000.
    Reconstruct,
}

fn default_components() -> usize {
    30
}

fn default_mode() -> String {
    "auto".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub protocol: Protocol,
    /// Training samples (classify) or the full unlabeled set (reconstruct).
    pub data: PathBuf,
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default)]
    pub test_labels: Option<PathBuf>,
    /// `idx`, `csv-matrix`, or `raw-u8`.
    pub format: String,
    /// First CSV column carries the class label.
    #[serde(default)]
    pub labeled_csv: bool,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub shape: Option<(usize, usize)>,
    /// One table row per entry: `none`, `gauss:<s>`, `sp:<d>`,
    /// `speckle:<e>`, `images:<n>`.
    pub noise: Vec<String>,
    /// One table column per entry: `lp:<p>`, `crossover:<a>`, `zeta1`,
    /// `zeta2`, `gauss:<q>`.
    pub objectives: Vec<String>,
    #[serde(default)]
    pub kernel: Option<String>,
    #[serde(default = "default_components")]
    pub components: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Leave training images clean and perturb only the test set.
    #[serde(default)]
    pub noise_test_only: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return Err(BenchError::Config("components must be at least 1".into()));
        }
        if self.noise.is_empty() || self.objectives.is_empty() {
            return Err(BenchError::Config("need at least one noise level and objective".into()));
        }
        for o in &self.objectives {
            o.parse::<ObjectiveSpec>()?;
        }
        for n in &self.noise {
            let kind: NoiseKind = n.parse()?;
            if self.protocol == Protocol::Classify && matches!(kind, NoiseKind::NoiseImages { .. })
            {
                return Err(BenchError::Config(
                    "images:<n> noise belongs to the reconstruct protocol".into(),
                ));
            }
        }
        if let Some(k) = &self.kernel {
            if k != "none" {
                k.parse::<KernelSpec>()?;
            }
        }
        self.mode.parse::<UpdateMode>()?;
        Ok(())
    }

    pub fn settings(&self) -> AscentSettings {
        let mut settings = AscentSettings { seed: self.seed, ..AscentSettings::default() };
        if let Some(tol) = self.tol {
            settings.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            settings.max_iter = max_iter;
        }
        settings
    }

    pub fn pipeline(&self, objective: &str) -> Result<PipelineConfig> {
        let kernel = match self.kernel.as_deref() {
            None | Some("none") => None,
            Some(k) => Some(k.parse()?),
        };
        Ok(PipelineConfig {
            objective: objective.parse()?,
            kernel,
            components: self.components,
            settings: self.settings(),
            mode: self.mode.parse()?,
        })
    }

    fn load(&self, path: &Path, labels: Option<&Path>) -> Result<Dataset> {
        let format = parse_format(&self.format, self.labeled_csv, self.dim)?;
        load_dataset(path, format, labels, self.shape)
    }
}

/// Runs the full grid. Each noise level perturbs the data once (a single
/// seeded stream covering train then test) and every objective column is
/// evaluated against that same noisy copy, mirroring how the published
/// tables compare objectives.
pub fn run_table(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let config_value = serde_json::to_value(config)?;
    let mut table = ResultTable::new(config.objectives.clone(), config.seed, config_value);

    match config.protocol {
        Protocol::Classify => {
            let train = config.load(&config.data, config.labels.as_deref())?;
            let test_path = config
                .test
                .as_ref()
                .ok_or_else(|| BenchError::Config("classify needs a test dataset".into()))?;
            let test = config.load(test_path, config.test_labels.as_deref())?;

            for (row_index, noise) in config.noise.iter().enumerate() {
                let kind: NoiseKind = noise.parse()?;
                // One stream per row: train first, then test, so the same
                // seed reproduces the exact pixel draws.
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(row_index as u64));
                let noisy_train = if config.noise_test_only {
                    train.clone()
                } else {
                    add_noise_with(&train, kind, &mut rng)?
                };
                let noisy_test = add_noise_with(&test, kind, &mut rng)?;

                let mut cells = Vec::with_capacity(config.objectives.len());
                for objective in &config.objectives {
                    let pipeline = config.pipeline(objective)?;
                    let outcome = classify(&noisy_train, &noisy_test, &pipeline)?;
                    table.metadata.warnings.extend(outcome.warnings);
                    cells.push(outcome.accuracy);
                }
                table.push_row(kind.level_label(), cells)?;
            }
        }
        Protocol::Reconstruct => {
            let mut data = config.load(&config.data, None)?;
            data.labels = None; // the protocol treats the set as one population
            for noise in &config.noise {
                let kind: NoiseKind = noise.parse()?;
                let count = match kind {
                    NoiseKind::NoiseImages { count } => count,
                    NoiseKind::None => 0,
                    other => {
                        return Err(BenchError::Config(format!(
                            "reconstruct protocol expects images:<n> noise, got {other}"
                        )))
                    }
                };
                let mut cells = Vec::with_capacity(config.objectives.len());
                for objective in &config.objectives {
                    let pipeline = config.pipeline(objective)?;
                    let outcome = reconstruction_report(&data, count, &pipeline, config.seed)?;
                    table.metadata.warnings.extend(outcome.warnings);
                    cells.push(outcome.scaled_error);
                }
                table.push_row(kind.level_label(), cells)?;
            }
        }
    }
    Ok(table)
}
