//! Command-line harness. `gpca --help` lists the subcommands; each maps
//! onto one operation of the library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gpca::{AscentSettings, KernelSpec, ObjectiveSpec, UpdateMode};
use gpca_bench::classify::{classify, fit_subspace, reconstruction_report, rho_sweep, PipelineConfig};
use gpca_bench::dataset::{load_dataset, parse_format, Dataset};
use gpca_bench::experiment::{run_table, ExperimentConfig};
use gpca_bench::model::save_model;
use gpca_bench::noise::{add_noise_with, NoiseKind};
use gpca_bench::table::ResultTable;
use gpca_bench::{BenchError, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "gpca",
    about = "Generalized PCA: gradient-ascent and kernel fixed-point solvers with a noise/classification benchmark harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Dataset location and format flags shared by several subcommands.
#[derive(Args, Clone)]
struct DataArgs {
    /// idx | csv-matrix | raw-u8
    #[arg(long, default_value = "csv-matrix")]
    format: String,
    /// First CSV column is the class label
    #[arg(long)]
    labeled: bool,
    /// Sample width for raw-u8 files
    #[arg(long)]
    dim: Option<usize>,
    /// Image shape as h,w (noise semantics and bookkeeping)
    #[arg(long, value_parser = parse_shape)]
    shape: Option<(usize, usize)>,
}

fn parse_shape(s: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected h,w".into());
    }
    let h = parts[0].trim().parse().map_err(|e| format!("bad height: {e}"))?;
    let w = parts[1].trim().parse().map_err(|e| format!("bad width: {e}"))?;
    Ok((h, w))
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// `lp:<p>` | `crossover:<a>` | `zeta1` | `zeta2` | `gauss:<q>`
    #[arg(long)]
    objective: String,
    /// `gaussian:<rho>` | `linear` (omit for the non-kernel pipeline)
    #[arg(long)]
    kernel: Option<String>,
    /// Principal vectors per fitted subspace
    #[arg(long, default_value_t = 30)]
    components: usize,
    /// parallel | serial | auto
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn pipeline(&self) -> Result<PipelineConfig> {
        let objective: ObjectiveSpec = self.objective.parse()?;
        let kernel: Option<KernelSpec> = self.kernel.as_deref().map(str::parse).transpose()?;
        let mode: UpdateMode = self.mode.parse()?;
        if self.tol <= 0.0 || self.max_iter == 0 {
            return Err(BenchError::Config("tol must be > 0 and max-iter >= 1".into()));
        }
        Ok(PipelineConfig {
            objective,
            kernel,
            components: self.components,
            settings: AscentSettings {
                tol: self.tol,
                max_iter: self.max_iter,
                track_objective: true,
                seed: self.seed,
            },
            mode,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit one subspace on a whole dataset and write a model file
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        data_args: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-class fit + minimum-reconstruction-error classification
    Classify {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        train_labels: Option<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        test_labels: Option<PathBuf>,
        #[command(flatten)]
        data_args: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// `none` | `gauss:<sigma>` | `sp:<delta>` | `speckle:<eta>`
        #[arg(long, default_value = "none")]
        noise: String,
        /// Perturb only the test images, leaving training clean
        #[arg(long)]
        noise_test_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit on data + random noise images, report scaled reconstruction error
    Reconstruct {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        data_args: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 0)]
        noise_images: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive Gaussian-bandwidth search with the quadratic objective
    SweepRho {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        train_labels: Option<PathBuf>,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long)]
        validation_labels: Option<PathBuf>,
        #[command(flatten)]
        data_args: DataArgs,
        /// Comma-separated rho candidates
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        components: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reproduce a full noise-level x objective table from a JSON config
    Table {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path, labels: Option<&PathBuf>, args: &DataArgs) -> Result<Dataset> {
    let format = parse_format(&args.format, args.labeled, args.dim)?;
    load_dataset(path, format, labels.map(|p| p.as_path()), args.shape)
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fit { data, labels, data_args, solver, out } => {
            let mut dataset = load(&data, labels.as_ref(), &data_args)?;
            dataset.labels = None; // fit treats the set as one population
            let pipeline = solver.pipeline()?;
            let mut warnings = Vec::new();
            let model = fit_subspace(&dataset, &pipeline, &mut warnings)?;
            print_warnings(&warnings);
            save_model(&model, &solver.objective, solver.seed, &out)?;
            println!(
                "fitted {} components on {} samples -> {}",
                model.components(),
                dataset.n_samples(),
                out.display()
            );
        }
        Command::Classify {
            train,
            train_labels,
            test,
            test_labels,
            data_args,
            solver,
            noise,
            noise_test_only,
            out,
        } => {
            let train_set = load(&train, train_labels.as_ref(), &data_args)?;
            let test_set = load(&test, test_labels.as_ref(), &data_args)?;
            let kind: NoiseKind = noise.parse()?;
            let mut rng = ChaCha8Rng::seed_from_u64(solver.seed);
            let noisy_train = if noise_test_only {
                train_set.clone()
            } else {
                add_noise_with(&train_set, kind, &mut rng)?
            };
            let noisy_test = add_noise_with(&test_set, kind, &mut rng)?;
            let pipeline = solver.pipeline()?;
            let outcome = classify(&noisy_train, &noisy_test, &pipeline)?;
            print_warnings(&outcome.warnings);

            let config = serde_json::json!({
                "train": train, "test": test, "noise": noise,
                "noise_test_only": noise_test_only,
                "objective": solver.objective, "kernel": solver.kernel,
                "components": solver.components, "mode": solver.mode,
                "tol": solver.tol, "max_iter": solver.max_iter, "seed": solver.seed,
                "train_samples": noisy_train.n_samples(), "test_samples": noisy_test.n_samples(),
            });
            let mut table = ResultTable::new(vec![solver.objective.clone()], solver.seed, config);
            table.metadata.warnings = outcome.warnings.clone();
            table.push_row(kind.level_label(), vec![outcome.accuracy])?;
            table.emit(&out)?;
            println!(
                "accuracy {:.2}% ({}/{}) -> {}",
                outcome.accuracy,
                outcome.correct,
                outcome.total,
                out.display()
            );
        }
        Command::Reconstruct { data, data_args, solver, noise_images, out } => {
            let dataset = load(&data, None, &data_args)?;
            let pipeline = solver.pipeline()?;
            let outcome = reconstruction_report(&dataset, noise_images, &pipeline, solver.seed)?;
            print_warnings(&outcome.warnings);
            let config = serde_json::json!({
                "data": data, "noise_images": noise_images,
                "objective": solver.objective, "kernel": solver.kernel,
                "components": solver.components, "seed": solver.seed,
            });
            let mut table = ResultTable::new(vec![solver.objective.clone()], solver.seed, config);
            table.metadata.warnings = outcome.warnings.clone();
            table.push_row(noise_images.to_string(), vec![outcome.scaled_error])?;
            table.emit(&out)?;
            println!("scaled reconstruction error {:.4} -> {}", outcome.scaled_error, out.display());
        }
        Command::SweepRho {
            train,
            train_labels,
            validation,
            validation_labels,
            data_args,
            grid,
            components,
            seed,
        } => {
            let train_set = load(&train, train_labels.as_ref(), &data_args)?;
            let validation_set = load(&validation, validation_labels.as_ref(), &data_args)?;
            let settings = AscentSettings { seed, ..AscentSettings::default() };
            let outcome = rho_sweep(
                &train_set,
                &validation_set,
                &grid,
                components,
                &settings,
                UpdateMode::Auto,
            )?;
            for (rho, accuracy) in &outcome.accuracies {
                println!("rho {rho}: {accuracy:.2}%");
            }
            println!("best rho: {}", outcome.best_rho);
        }
        Command::Table { config, out } => {
            let config = ExperimentConfig::from_file(&config)?;
            let table = run_table(&config)?;
            print_warnings(&table.metadata.warnings);
            table.emit(&out)?;
            println!("{} rows x {} objectives -> {}", table.rows.len(), table.objective_labels.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
