//! Principal-vector extraction by normalized gradient ascent on the unit
//! sphere, with greedy orthogonal deflation.
//!
//! One step of the ascent maps w to the normalized weighted data sum
//! `Σ_i f'(w'x_i) x_i / ‖Σ_i f'(w'x_i) x_i‖`. For convex f each step cannot
//! decrease the objective `Σ_i f(w'x_i)`, so the iteration climbs to a
//! local maximizer on the sphere. Subsequent vectors come from repeating
//! the ascent on data projected into the orthogonal complement of the
//! vectors found so far.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::objective::ObjectiveSpec;

const ZERO_GRADIENT: f64 = 1e-30;

/// Stopping rule and bookkeeping knobs for the ascent.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AscentSettings {
    /// Convergence threshold on ‖Δw‖∞ (and ‖Δc‖∞ in the kernel solver).
    pub tol: f64,
    pub max_iter: usize,
    /// Record the objective at every iterate. Costs one extra pass over the
    /// scores per iteration; needed for the monotonicity diagnostics.
    pub track_objective: bool,
    /// Seed for the single perturbed restart taken when the gradient sum
    /// vanishes exactly.
    pub seed: u64,
}

impl Default for AscentSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 1000, track_objective: true, seed: 0 }
    }
}

impl AscentSettings {
    fn validate(&self) -> Result<()> {
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-vector fit report.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AscentDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Final objective Σ_i f(w'x_i).
    pub objective: f64,
    /// Whether the recorded objective trace was non-decreasing (within a
    /// 1e-10 slack for round-off). Must hold for convex f.
    pub monotone: bool,
    /// Objective at the start and after every accepted step, when tracked.
    pub objective_trace: Vec<f64>,
}

/// Ordered orthonormal principal vectors with their fit diagnostics.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrincipalBasis {
    vectors: Vec<Array1<f64>>,
    diagnostics: Vec<AscentDiagnostics>,
    dim: usize,
}

impl PrincipalBasis {
    /// Builds a basis from existing vectors, checking unit norms and
    /// pairwise orthogonality. Mainly for deserialized models; `fit` is the
    /// normal constructor.
    pub fn from_vectors(vectors: Vec<Array1<f64>>, dim: usize) -> Result<Self> {
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            if (v.dot(v).sqrt() - 1.0).abs() > 1e-8 {
                return Err(Error::Data("basis vector is not unit length".into()));
            }
        }
        for i in 0..vectors.len() {
            for j in (i + 1)..vectors.len() {
                if vectors[i].dot(&vectors[j]).abs() > 1e-6 {
                    return Err(Error::Data(format!("basis vectors {i} and {j} not orthogonal")));
                }
            }
        }
        let diagnostics = vectors
            .iter()
            .map(|_| AscentDiagnostics {
                iterations: 0,
                converged: true,
                objective: f64::NAN,
                monotone: true,
                objective_trace: Vec::new(),
            })
            .collect();
        Ok(Self { vectors, diagnostics, dim })
    }

    pub fn empty(dim: usize) -> Self {
        Self { vectors: Vec::new(), diagnostics: Vec::new(), dim }
    }

    pub fn vectors(&self) -> &[Array1<f64>] {
        &self.vectors
    }

    pub fn diagnostics(&self) -> &[AscentDiagnostics] {
        &self.diagnostics
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Principal components (w_j' x) of a centered sample.
    pub fn project(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(Array1::from_iter(self.vectors.iter().map(|w| w.dot(&x))))
    }

    /// Reconstruction Σ_j (w_j'x) w_j of a centered sample.
    pub fn reconstruct(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let scores = self.project(x)?;
        let mut rebuilt = Array1::zeros(self.dim);
        for (w, &score) in self.vectors.iter().zip(scores.iter()) {
            rebuilt.scaled_add(score, w);
        }
        Ok(rebuilt)
    }

    /// Squared L2 distance between a centered sample and its reconstruction.
    pub fn reconstruction_error(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        let rebuilt = self.reconstruct(x)?;
        Ok(x.iter().zip(rebuilt.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

/// Starting direction: the sample with the largest L2 norm, normalized.
/// Ties break to the smallest index.
pub fn init_direction(data: &DataMatrix) -> Result<Array1<f64>> {
    init_direction_of(data.samples().view())
}

fn init_direction_of(samples: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let mut best_idx = 0;
    let mut best_sq = f64::NEG_INFINITY;
    for (i, row) in samples.rows().into_iter().enumerate() {
        let sq = row.dot(&row);
        if sq > best_sq {
            best_sq = sq;
            best_idx = i;
        }
    }
    if best_sq <= ZERO_GRADIENT {
        return Err(Error::DegenerateData("every sample has zero norm".into()));
    }
    let row = samples.row(best_idx);
    Ok(&row / best_sq.sqrt())
}

/// Runs the normalized gradient ascent from `w0` until ‖Δw‖∞ < tol or the
/// iteration budget runs out. The result is sign-canonicalized so that its
/// largest-magnitude coordinate is positive (every objective in the menu is
/// even, so w and −w score identically).
pub fn ascend(
    data: &DataMatrix,
    spec: &ObjectiveSpec,
    w0: ArrayView1<'_, f64>,
    settings: &AscentSettings,
) -> Result<(Array1<f64>, AscentDiagnostics)> {
    ascend_on(data.samples().view(), spec, w0, settings)
}

fn ascend_on(
    samples: ArrayView2<'_, f64>,
    spec: &ObjectiveSpec,
    w0: ArrayView1<'_, f64>,
    settings: &AscentSettings,
) -> Result<(Array1<f64>, AscentDiagnostics)> {
    settings.validate()?;
    if w0.len() != samples.ncols() {
        return Err(Error::DimensionMismatch { expected: samples.ncols(), got: w0.len() });
    }
    let norm0 = w0.dot(&w0).sqrt();
    if (norm0 - 1.0).abs() >= 1e-6 || norm0.is_nan() {
        return Err(Error::Data(format!("w0 must be a unit vector, got norm {norm0}")));
    }

    let mut w = w0.to_owned();
    let mut trace = Vec::new();
    let mut restarted = false;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < settings.max_iter {
        let scores = samples.dot(&w);
        if settings.track_objective {
            trace.push(scores.iter().map(|&s| spec.value(s)).sum());
        }
        let weights = scores.mapv(|s| spec.derivative(s));
        let gradient = samples.t().dot(&weights);
        let gnorm = gradient.dot(&gradient).sqrt();
        if gnorm < ZERO_GRADIENT {
            if restarted {
                return Err(Error::StationaryDegenerate);
            }
            // One perturbed restart from a seeded random direction.
            restarted = true;
            w = random_unit(samples.ncols(), settings.seed);
            iterations += 1;
            continue;
        }
        let next = gradient / gnorm;
        let delta =
            next.iter().zip(w.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        w = next;
        iterations += 1;
        if delta < settings.tol {
            converged = true;
            break;
        }
    }

    canonicalize_sign(&mut w);
    let objective = samples.dot(&w).iter().map(|&s| spec.value(s)).sum();
    if settings.track_objective {
        trace.push(objective);
    }
    let monotone = trace.windows(2).all(|p| p[1] >= p[0] - 1e-10);
    Ok((w, AscentDiagnostics { iterations, converged, objective, monotone, objective_trace: trace }))
}

fn canonicalize_sign(w: &mut Array1<f64>) {
    let mut idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in w.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if w[idx] < 0.0 {
        w.mapv_inplace(|v| -v);
    }
}

fn random_unit(dim: usize, seed: u64) -> Array1<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Array1<f64> =
            Array1::from_iter((0..dim).map(|_| StandardNormal.sample(&mut rng)));
        let norm = v.dot(&v).sqrt();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Greedy extraction of `k` orthonormal principal vectors.
///
/// Each round initializes from the largest-norm residual sample, runs the
/// ascent, re-orthogonalizes the result against the vectors found so far
/// (deflation alone lets round-off accumulate over many components), and
/// projects the data onto the orthogonal complement.
pub fn fit(
    data: &DataMatrix,
    spec: &ObjectiveSpec,
    k: usize,
    settings: &AscentSettings,
) -> Result<PrincipalBasis> {
    let (n, d) = data.samples().dim();
    if k == 0 || k > d.min(n) {
        return Err(Error::Config(format!("k={k} outside 1..=min(d={d}, n={n})")));
    }
    let mut residual = data.samples().clone();
    let scale0 = residual.rows().into_iter().fold(0.0f64, |m, r| m.max(r.dot(&r).sqrt()));
    let mut vectors: Vec<Array1<f64>> = Vec::with_capacity(k);
    let mut diagnostics = Vec::with_capacity(k);

    for extracted in 0..k {
        let max_norm =
            residual.rows().into_iter().fold(0.0f64, |m, r| m.max(r.dot(&r).sqrt()));
        if max_norm <= 1e-12 * scale0.max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient { requested: k, extracted });
        }
        let w0 = init_direction_of(residual.view())?;
        let (mut w, diag) = ascend_on(residual.view(), spec, w0.view(), settings)?;
        for prev in &vectors {
            let overlap = prev.dot(&w);
            w.scaled_add(-overlap, prev);
        }
        let norm = w.dot(&w).sqrt();
        if norm <= 1e-12 {
            return Err(Error::RankDeficient { requested: k, extracted });
        }
        w /= norm;
        let scores = residual.dot(&w);
        residual -= &(scores.insert_axis(Axis(1)) * &w);
        vectors.push(w);
        diagnostics.push(diag);
    }
    Ok(PrincipalBasis { vectors, diagnostics, dim: d })
}
