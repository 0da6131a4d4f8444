//! Benchmark harness for the `gpca` solvers: dataset loading, seeded noise
//! injection, per-class minimum-reconstruction-error classification, the
//! unlabeled reconstruction protocol, kernel-bandwidth sweeps, and result
//! tables with reproducible CSV output.

pub mod classify;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod model;
pub mod noise;
pub mod table;

pub use classify::{
    classify, fit_subspace, reconstruction_report, rho_sweep, ClassifyOutcome, PipelineConfig,
    SubspaceModel,
};
pub use dataset::{load_dataset, parse_format, take_rows, Dataset, DatasetFormat};
pub use error::{BenchError, Result};
pub use experiment::{run_table, ExperimentConfig, Protocol};
pub use noise::{add_noise, add_noise_with, NoiseKind, NoiseSpec};
pub use table::{ResultTable, TableMetadata, TableRow};
