//! Gram-matrix state for the kernelized solver: construction, feature-space
//! centering, per-component deflation, and the test-point kernel vectors
//! that mirror all of it at prediction time.

use ndarray::{Array1, Array2, ArrayView1};
use std::fmt;
use std::str::FromStr;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum KernelSpec {
    /// k(x, y) = exp(−‖x−y‖²/ρ²).
    Gaussian { rho: f64 },
    /// k(x, y) = x'y.
    Linear,
}

impl KernelSpec {
    pub fn gaussian(rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Config(format!("gaussian kernel requires rho > 0, got {rho}")));
        }
        Ok(Self::Gaussian { rho })
    }

    pub fn value(&self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        match *self {
            Self::Gaussian { rho } => {
                let dist_sq: f64 =
                    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-dist_sq / (rho * rho)).exp()
            }
            Self::Linear => a.dot(&b),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { rho } => write!(f, "gaussian:{rho}"),
            Self::Linear => write!(f, "linear"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Selection grammar: `gaussian:<rho>`, `linear`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(2, ':');
        match (parts.next().unwrap_or_default().trim(), parts.next().map(str::trim)) {
            ("linear", None) => Ok(Self::Linear),
            ("gaussian", Some(rho)) => Self::gaussian(
                rho.parse::<f64>()
                    .map_err(|e| Error::Config(format!("kernel '{s}': {e}")))?,
            ),
            _ => Err(Error::Config(format!("unknown kernel '{s}'"))),
        }
    }
}

/// One greedy deflation, frozen with everything needed to replay it on a
/// test-point kernel vector: K·c against the Gram matrix it was extracted
/// from, and the energy c'Kc.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeflationStep {
    pub c: Array1<f64>,
    pub kc: Array1<f64>,
    pub energy: f64,
}

/// The training Gram matrix together with the centering statistics and
/// deflation history required to treat test points consistently.
///
/// The current matrix is dropped on serialization (it can be megabytes and
/// is only needed to extract further components); a deserialized state still
/// supports every test-point operation.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GramState {
    #[cfg_attr(feature = "serde", serde(skip, default = "empty_matrix"))]
    k: Array2<f64>,
    n: usize,
    raw_row_means: Array1<f64>,
    raw_grand_mean: f64,
    centered: bool,
    history: Vec<DeflationStep>,
}

#[cfg(feature = "serde")]
fn empty_matrix() -> Array2<f64> {
    Array2::zeros((0, 0))
}

impl GramState {
    /// Wraps an externally computed Gram matrix. Callers with a precomputed
    /// (already centered, or deliberately uncentered) matrix can drive the
    /// solver directly; test-point centering statistics are zero in that
    /// case, so test-point operations assume the caller's matrix convention.
    pub fn from_matrix(k: Array2<f64>, centered: bool) -> Result<Self> {
        let n = k.nrows();
        if n != k.ncols() {
            return Err(Error::Data(format!("gram matrix must be square, got {n}x{}", k.ncols())));
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite gram entry".into()));
        }
        let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (k[[i, j]] - k[[j, i]]).abs() > 1e-10 * scale.max(1.0) {
                    return Err(Error::NotSymmetric {
                        max_asymmetry: (k[[i, j]] - k[[j, i]]).abs(),
                    });
                }
            }
        }
        Ok(Self {
            k,
            n,
            raw_row_means: Array1::zeros(n),
            raw_grand_mean: 0.0,
            centered,
            history: Vec::new(),
        })
    }
}

/// Builds the raw (uncentered) Gram matrix K_ij = k(x_i, x_j) over the
/// centered sample coordinates.
pub fn gram(data: &DataMatrix, spec: &KernelSpec) -> GramState {
    let n = data.n_samples();
    let samples = data.samples();
    let mut k = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = spec.value(samples.row(i), samples.row(j));
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    GramState {
        k,
        n,
        raw_row_means: Array1::zeros(n),
        raw_grand_mean: 0.0,
        centered: false,
        history: Vec::new(),
    }
}

/// K ← K − YK − KY + YKY with Y the constant matrix of entries 1/N, in the
/// O(N²) row-mean form. Returns the new matrix plus the row means and grand
/// mean of the input, which are exactly the statistics needed to center
/// test-point kernel vectors later.
fn double_center(k: &Array2<f64>) -> (Array2<f64>, Array1<f64>, f64) {
    let n = k.nrows();
    let row_means: Array1<f64> =
        Array1::from_iter(k.rows().into_iter().map(|r| r.sum() / n as f64));
    let grand_mean = row_means.sum() / n as f64;
    let mut out = k.clone();
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] -= row_means[i] + row_means[j] - grand_mean;
        }
    }
    (out, row_means, grand_mean)
}

impl GramState {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The current (possibly centered and deflated) Gram matrix.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.k
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn history(&self) -> &[DeflationStep] {
        &self.history
    }

    pub fn trace(&self) -> f64 {
        self.k.diag().sum()
    }

    /// Centers the features to zero mean in feature space. A no-op when the
    /// state is already centered.
    pub fn center(&mut self) {
        if self.centered {
            return;
        }
        let (centered, row_means, grand_mean) = double_center(&self.k);
        self.k = centered;
        self.raw_row_means = row_means;
        self.raw_grand_mean = grand_mean;
        self.centered = true;
    }

    /// Removes component `c` from the Gram matrix: K ← K − Kcc'K / c'Kc,
    /// recording the step for test-point replay.
    pub fn deflate(&mut self, c: ArrayView1<'_, f64>) -> Result<()> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: c.len() });
        }
        let kc = self.k.dot(&c);
        let energy = c.dot(&kc);
        let scale = self.k.iter().map(|x| x * x).sum::<f64>().sqrt();
        if energy <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateComponent { energy });
        }
        for i in 0..self.n {
            for j in 0..self.n {
                self.k[[i, j]] -= kc[i] * kc[j] / energy;
            }
        }
        self.history.push(DeflationStep { c: c.to_owned(), kc, energy });
        Ok(())
    }

    /// Kernel evaluations of a raw test point against every training sample,
    /// centered and deflation-replayed so the result lives in exactly the
    /// geometry of the current Gram matrix. For a training point this
    /// reproduces the corresponding column of `matrix()`.
    pub fn test_kernel_vector(
        &self,
        x: ArrayView1<'_, f64>,
        data: &DataMatrix,
        spec: &KernelSpec,
    ) -> Result<Array1<f64>> {
        let mut kv = self.centered_test_kernel(x, data, spec)?;
        for step in &self.history {
            let overlap = step.c.dot(&kv);
            kv.scaled_add(-overlap / step.energy, &step.kc);
        }
        Ok(kv)
    }

    /// Test-point kernel vector with centering applied but no deflation
    /// replay; the recurrent solver walks the history itself so it can read
    /// off one component score per stage.
    pub fn centered_test_kernel(
        &self,
        x: ArrayView1<'_, f64>,
        data: &DataMatrix,
        spec: &KernelSpec,
    ) -> Result<Array1<f64>> {
        let mut kv = self.raw_test_kernel(x, data, spec)?;
        if self.centered {
            let mean = kv.sum() / self.n as f64;
            kv = kv - &self.raw_row_means - mean + self.raw_grand_mean;
        }
        Ok(kv)
    }

    /// ‖Φ(x) − mean feature‖² expressed through kernel values: the centered
    /// self-kernel k(x,x) − 2·mean(k(x)) + grand mean. Deflation does not
    /// apply here; reconstruction errors subtract component scores from this
    /// full squared norm.
    pub fn centered_self_kernel(
        &self,
        x: ArrayView1<'_, f64>,
        data: &DataMatrix,
        spec: &KernelSpec,
    ) -> Result<f64> {
        let xc = data.center_sample(x)?;
        let self_raw = spec.value(xc.view(), xc.view());
        if !self.centered {
            return Ok(self_raw);
        }
        let kv = self.raw_test_kernel(x, data, spec)?;
        let mean = kv.sum() / self.n as f64;
        Ok(self_raw - 2.0 * mean + self.raw_grand_mean)
    }

    fn raw_test_kernel(
        &self,
        x: ArrayView1<'_, f64>,
        data: &DataMatrix,
        spec: &KernelSpec,
    ) -> Result<Array1<f64>> {
        if data.n_samples() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: data.n_samples() });
        }
        let xc = data.center_sample(x)?;
        Ok(Array1::from_iter(
            data.samples().rows().into_iter().map(|row| spec.value(row, xc.view())),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_data(seed: u64, n: usize, d: usize) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::center(Array2::from_shape_fn((n, d), |_| rng.random_range(-1.5..1.5)))
            .unwrap()
    }

    #[test]
    fn gaussian_kernel_point_values() {
        let spec = KernelSpec::gaussian(1.0).unwrap();
        let a = array![0.3, -0.7];
        assert_eq!(spec.value(a.view(), a.view()), 1.0);
        let b = array![1.3, -0.7]; // distance exactly 1
        assert!((spec.value(a.view(), b.view()) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn linear_gram_equals_outer_products() {
        let data = toy_data(1, 6, 3);
        let state = gram(&data, &KernelSpec::Linear);
        let expected = data.samples().dot(&data.samples().t());
        let err = (state.matrix() - &expected).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(err < 1e-12);
    }

    #[test]
    fn gram_is_symmetric() {
        let data = toy_data(2, 8, 4);
        let state = gram(&data, &KernelSpec::gaussian(2.0).unwrap());
        let k = state.matrix();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(k[[i, j]], k[[j, i]]);
            }
        }
    }

    #[test]
    fn centering_kills_constant_kernel() {
        let mut state = GramState {
            k: Array2::ones((4, 4)),
            n: 4,
            raw_row_means: Array1::zeros(4),
            raw_grand_mean: 0.0,
            centered: false,
            history: Vec::new(),
        };
        state.center();
        assert!(state.matrix().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn centering_zeroes_row_sums() {
        let data = toy_data(3, 10, 3);
        let mut state = gram(&data, &KernelSpec::gaussian(1.5).unwrap());
        let max = state.matrix().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        state.center();
        for row in state.matrix().rows() {
            assert!(row.sum().abs() <= 1e-8 * 10.0 * max);
        }
    }

    #[test]
    fn centering_two_by_two_hand_value() {
        let (centered, _, _) = double_center(&array![[2.0, 0.0], [0.0, 2.0]]);
        assert_eq!(centered, array![[1.0, -1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn double_centering_is_idempotent() {
        let data = toy_data(4, 7, 2);
        let state = gram(&data, &KernelSpec::gaussian(1.0).unwrap());
        let (once, _, _) = double_center(state.matrix());
        let (twice, _, _) = double_center(&once);
        let err = (&twice - &once).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(err < 1e-10);
    }

    #[test]
    fn centered_gram_stays_psd() {
        let data = toy_data(5, 9, 3);
        let mut state = gram(&data, &KernelSpec::gaussian(1.0).unwrap());
        state.center();
        let norm = state.matrix().iter().map(|x| x * x).sum::<f64>().sqrt();
        let eig = oracle::eig_top(state.matrix().view(), 9).unwrap();
        assert!(eig.values.iter().all(|&v| v >= -1e-8 * norm));
    }

    #[test]
    fn deflation_annihilates_component() {
        let data = toy_data(6, 8, 3);
        let mut state = gram(&data, &KernelSpec::gaussian(1.0).unwrap());
        state.center();
        let norm = state.matrix().iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let c = Array1::from_shape_fn(8, |_| rng.random_range(-1.0..1.0f64));
        state.deflate(c.view()).unwrap();
        let residual = state.matrix().dot(&c);
        let res_norm = residual.dot(&residual).sqrt();
        assert!(res_norm <= 1e-8 * norm, "K'c norm {res_norm}");
    }

    #[test]
    fn deflation_of_rank_one_yields_zero() {
        let v = array![1.0, -2.0, 0.5];
        let mut k = Array2::<f64>::zeros((3, 3));
        for i in 0..3 {
            for j in 0..3 {
                k[[i, j]] = v[i] * v[j];
            }
        }
        let mut state = GramState {
            k,
            n: 3,
            raw_row_means: Array1::zeros(3),
            raw_grand_mean: 0.0,
            centered: true,
            history: Vec::new(),
        };
        let c = array![1.0, 0.0, 0.0]; // v'c = 1 != 0
        state.deflate(c.view()).unwrap();
        assert!(state.matrix().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn deflation_preserves_psd_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for trial in 0..5 {
            let b = Array2::from_shape_fn((10, 10), |_| rng.random_range(-1.0..1.0f64));
            let k = b.dot(&b.t());
            let mut state = GramState {
                k,
                n: 10,
                raw_row_means: Array1::zeros(10),
                raw_grand_mean: 0.0,
                centered: true,
                history: Vec::new(),
            };
            let norm = state.matrix().iter().map(|x| x * x).sum::<f64>().sqrt();
            let trace_before = state.trace();
            let c = Array1::from_shape_fn(10, |_| rng.random_range(-1.0..1.0f64));
            state.deflate(c.view()).unwrap();
            let eig = oracle::eig_top(state.matrix().view(), 10).unwrap();
            assert!(
                eig.values.iter().all(|&v| v >= -1e-8 * norm),
                "trial {trial}: deflation broke positive semidefiniteness"
            );
            assert!(state.trace() <= trace_before + 1e-12);
        }
    }

    #[test]
    fn degenerate_deflation_is_rejected() {
        let mut state = GramState {
            k: Array2::zeros((3, 3)),
            n: 3,
            raw_row_means: Array1::zeros(3),
            raw_grand_mean: 0.0,
            centered: true,
            history: Vec::new(),
        };
        let c = array![1.0, 0.0, 0.0];
        assert!(matches!(
            state.deflate(c.view()),
            Err(Error::DegenerateComponent { .. })
        ));
    }

    #[test]
    fn test_vector_reproduces_gram_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let raw = Array2::from_shape_fn((7, 3), |_| rng.random_range(-2.0..2.0f64));
        let data = DataMatrix::center(raw.clone()).unwrap();
        let spec = KernelSpec::gaussian(1.3).unwrap();
        let mut state = gram(&data, &spec);
        state.center();
        // Also after a deflation step.
        let c = Array1::from_shape_fn(7, |_| rng.random_range(-1.0..1.0f64));
        for round in 0..2 {
            let scale = state.matrix().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..7 {
                let kv = state.test_kernel_vector(raw.row(i), &data, &spec).unwrap();
                let col = state.matrix().column(i);
                let err = kv.iter().zip(col.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(err <= 1e-8 * scale.max(1.0), "round {round}, point {i}: err {err}");
            }
            if round == 0 {
                state.deflate(c.view()).unwrap();
            }
        }
    }

    #[test]
    fn deflated_test_vectors_are_orthogonal_to_component() {
        let data = toy_data(7, 6, 2);
        let spec = KernelSpec::gaussian(1.0).unwrap();
        let mut state = gram(&data, &spec);
        state.center();
        let c = Array1::from_vec(vec![1.0, -1.0, 0.5, 0.0, 0.25, -0.75]);
        state.deflate(c.view()).unwrap();
        for i in 0..6 {
            // A centered training row equals raw mean + centered sample.
            let raw_point = &data.samples().row(i) + data.mean();
            let kv = state.test_kernel_vector(raw_point.view(), &data, &spec).unwrap();
            assert!(c.dot(&kv).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_kernel_test_vector_centers_to_zero() {
        // All samples identical: every Gaussian kernel value is 1.
        let raw = Array2::from_elem((5, 2), 3.0);
        let data = DataMatrix::center(raw).unwrap();
        let spec = KernelSpec::gaussian(1.0).unwrap();
        let mut state = gram(&data, &spec);
        state.center();
        let kv = state
            .test_kernel_vector(array![3.0, 3.0].view(), &data, &spec)
            .unwrap();
        assert!(kv.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn kernel_grammar_round_trip() {
        for s in ["gaussian:2.5", "linear"] {
            let spec: KernelSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("gaussian".parse::<KernelSpec>().is_err());
        assert!("gaussian:0".parse::<KernelSpec>().is_err());
        assert!("poly:2".parse::<KernelSpec>().is_err());
    }
}
