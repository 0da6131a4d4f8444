//! Per-class subspace fitting and minimum-reconstruction-error
//! classification, plus the unlabeled reconstruction protocol and the
//! kernel-bandwidth sweep.

use ndarray::ArrayView1;

use gpca::{
    ascent, fit_kernel, AscentSettings, DataMatrix, Error as SolverError, KernelModel,
    KernelSpec, ObjectiveSpec, PrincipalBasis, UpdateMode,
};

use crate::dataset::{take_rows, Dataset};
use crate::error::{BenchError, Result};

/// Everything describing how a single subspace model is fitted.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub objective: ObjectiveSpec,
    pub kernel: Option<KernelSpec>,
    pub components: usize,
    pub settings: AscentSettings,
    pub mode: UpdateMode,
}

impl PipelineConfig {
    pub fn new(objective: ObjectiveSpec, kernel: Option<KernelSpec>, components: usize) -> Self {
        Self {
            objective,
            kernel,
            components,
            settings: AscentSettings::default(),
            mode: UpdateMode::Auto,
        }
    }
}

/// A fitted per-class (or whole-set) subspace.
pub enum SubspaceModel {
    Linear { data: DataMatrix, basis: PrincipalBasis },
    Kernel(Box<KernelModel>),
}

impl SubspaceModel {
    /// Reconstruction error of a raw sample against this subspace: squared
    /// L2 in input space for the linear pipeline, feature-space epsilon for
    /// the kernel pipeline.
    pub fn reconstruction_error(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        match self {
            SubspaceModel::Linear { data, basis } => {
                let centered = data.center_sample(x)?;
                Ok(basis.reconstruction_error(centered.view())?)
            }
            SubspaceModel::Kernel(model) => Ok(model.reconstruction_error(x)?),
        }
    }

    pub fn components(&self) -> usize {
        match self {
            SubspaceModel::Linear { basis, .. } => basis.len(),
            SubspaceModel::Kernel(model) => model.len(),
        }
    }
}

/// Fits one subspace on all rows of `dataset`, clamping the component count
/// to the achievable rank and retrying once when the exact rank is only
/// discovered mid-extraction.
pub fn fit_subspace(
    dataset: &Dataset,
    config: &PipelineConfig,
    warnings: &mut Vec<String>,
) -> Result<SubspaceModel> {
    let data = DataMatrix::center(dataset.samples.clone())?;
    let n = data.n_samples();
    let d = data.dim();
    match &config.kernel {
        None => {
            let cap = config.components.min(d).min(n).max(1);
            if cap < config.components {
                warnings.push(format!(
                    "{}: rank cap {} < requested {} components",
                    dataset.name, cap, config.components
                ));
            }
            let basis = match ascent::fit(&data, &config.objective, cap, &config.settings) {
                Ok(basis) => basis,
                Err(SolverError::RankDeficient { extracted, .. }) => {
                    warnings.push(format!(
                        "{}: rank exhausted at {extracted} of {cap} components",
                        dataset.name
                    ));
                    if extracted == 0 {
                        PrincipalBasis::empty(d)
                    } else {
                        ascent::fit(&data, &config.objective, extracted, &config.settings)?
                    }
                }
                Err(e) => return Err(e.into()),
            };
            Ok(SubspaceModel::Linear { data, basis })
        }
        Some(kernel) => {
            // Centered Gram matrices have rank at most n−1.
            let cap = config.components.min(n.saturating_sub(1)).max(if n > 1 { 1 } else { 0 });
            if cap < config.components {
                warnings.push(format!(
                    "{}: kernel rank cap {} < requested {} components",
                    dataset.name, cap, config.components
                ));
            }
            let model = match fit_kernel(
                &data,
                kernel,
                &config.objective,
                cap,
                &config.settings,
                config.mode,
            ) {
                Ok(model) => model,
                Err(SolverError::RankDeficient { extracted, .. }) => {
                    warnings.push(format!(
                        "{}: kernel rank exhausted at {extracted} of {cap} components",
                        dataset.name
                    ));
                    fit_kernel(
                        &data,
                        kernel,
                        &config.objective,
                        extracted,
                        &config.settings,
                        config.mode,
                    )?
                }
                Err(e) => return Err(e.into()),
            };
            Ok(SubspaceModel::Kernel(Box::new(model)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    /// Percentage in [0, 100].
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub warnings: Vec<String>,
}

/// Per class: center that class's training rows and fit a subspace; a test
/// sample is assigned to the class whose subspace reconstructs it with the
/// smallest error. Ties break to the smallest class label.
pub fn classify(train: &Dataset, test: &Dataset, config: &PipelineConfig) -> Result<ClassifyOutcome> {
    if train.labels.is_none() {
        return Err(BenchError::Config("classify needs labeled training data".into()));
    }
    let test_labels = test
        .labels
        .as_ref()
        .ok_or_else(|| BenchError::Config("classify needs labeled test data".into()))?;
    if train.dim() != test.dim() {
        return Err(BenchError::Config(format!(
            "train dimension {} != test dimension {}",
            train.dim(),
            test.dim()
        )));
    }
    let classes = train.classes();
    if classes.is_empty() {
        return Err(BenchError::Config("no classes in training data".into()));
    }

    let mut warnings = Vec::new();
    let mut models = Vec::with_capacity(classes.len());
    for &class in &classes {
        let rows = train.class_rows(class);
        let mut subset = take_rows(train, &rows);
        subset.name = format!("{}[class {class}]", train.name);
        subset.labels = None;
        models.push(fit_subspace(&subset, config, &mut warnings)?);
    }

    let mut correct = 0;
    for (i, &truth) in test_labels.iter().enumerate() {
        let x = test.samples.row(i);
        let mut best_class = classes[0];
        let mut best_error = f64::INFINITY;
        for (model, &class) in models.iter().zip(&classes) {
            let error = model.reconstruction_error(x)?;
            if error < best_error {
                best_error = error;
                best_class = class;
            }
        }
        if best_class == truth {
            correct += 1;
        }
    }
    let total = test_labels.len();
    Ok(ClassifyOutcome {
        accuracy: 100.0 * correct as f64 / total.max(1) as f64,
        correct,
        total,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct ReconstructionOutcome {
    /// Mean squared-L2 reconstruction error over the original samples,
    /// divided by 1000 for table parity.
    pub scaled_error: f64,
    pub warnings: Vec<String>,
}

/// The unlabeled protocol: extend the dataset with `noise_images` random
/// black-and-white images, fit one subspace on the extended set, and report
/// the mean reconstruction error over the original samples only.
pub fn reconstruction_report(
    data: &Dataset,
    noise_images: usize,
    config: &PipelineConfig,
    seed: u64,
) -> Result<ReconstructionOutcome> {
    if data.labels.is_some() {
        return Err(BenchError::Config(
            "the reconstruction protocol treats the dataset as unlabeled".into(),
        ));
    }
    let extended = crate::noise::add_noise(
        data,
        &crate::noise::NoiseSpec {
            kind: crate::noise::NoiseKind::NoiseImages { count: noise_images },
            seed,
        },
    )?;
    let mut warnings = Vec::new();
    let model = fit_subspace(&extended, config, &mut warnings)?;
    let mut total = 0.0;
    for i in 0..data.n_samples() {
        total += model.reconstruction_error(data.samples.row(i))?;
    }
    let mean = total / data.n_samples().max(1) as f64;
    Ok(ReconstructionOutcome { scaled_error: mean / 1000.0, warnings })
}

#[derive(Debug, Clone)]
pub struct RhoSweepOutcome {
    pub best_rho: f64,
    /// (rho, validation accuracy) pairs in grid order.
    pub accuracies: Vec<(f64, f64)>,
}

/// Exhaustive bandwidth selection for the Gaussian kernel, run with the
/// quadratic objective only; the winning rho is then reused verbatim for
/// every other objective. Ties break to the smallest rho.
pub fn rho_sweep(
    train: &Dataset,
    validation: &Dataset,
    grid: &[f64],
    components: usize,
    settings: &AscentSettings,
    mode: UpdateMode,
) -> Result<RhoSweepOutcome> {
    if grid.is_empty() {
        return Err(BenchError::Config("rho grid is empty".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut accuracies = Vec::with_capacity(sorted.len());
    let mut best_rho = sorted[0];
    let mut best_accuracy = f64::NEG_INFINITY;
    for &rho in &sorted {
        let config = PipelineConfig {
            objective: ObjectiveSpec::lp(2.0).expect("p=2 is valid"),
            kernel: Some(KernelSpec::gaussian(rho).map_err(BenchError::Solver)?),
            components,
            settings: settings.clone(),
            mode,
        };
        let outcome = classify(train, validation, &config)?;
        accuracies.push((rho, outcome.accuracy));
        if outcome.accuracy > best_accuracy {
            best_accuracy = outcome.accuracy;
            best_rho = rho;
        }
    }
    Ok(RhoSweepOutcome { best_rho, accuracies })
}
