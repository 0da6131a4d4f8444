//! Generalized kernel PCA by recurrent fixed-point iteration.
//!
//! The principal vector w = Σ_j c_j Φ(x_j) / √(c'Kc) is never materialized;
//! its dual coefficients are driven to a fixed point of
//! `c ← f'(Kc / √(c'Kc))`. With f(x) = x² this is the power method on K;
//! with f(x) = |x| it is a Hopfield network (parallel or serial sign
//! updates). Greedy extraction deflates K between components.

use ndarray::{Array1, ArrayView1};
use std::fmt;
use std::str::FromStr;

use crate::ascent::AscentSettings;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernel::{gram, GramState, KernelSpec};
use crate::objective::ObjectiveSpec;

/// How coordinates of c are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum UpdateMode {
    /// All coordinates at once (the matrix form of the recurrence).
    Parallel,
    /// One coordinate at a time with the freshest c; for f' = sign this is
    /// the serial Hopfield update, which always converges.
    Serial,
    /// Parallel with 2-cycle detection; on a detected cycle the solve
    /// restarts in serial mode.
    #[default]
    Auto,
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parallel => write!(f, "parallel"),
            Self::Serial => write!(f, "serial"),
            Self::Auto => write!(f, "auto"),
        }
    }
}

impl FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "parallel" => Ok(Self::Parallel),
            "serial" => Ok(Self::Serial),
            "auto" => Ok(Self::Auto),
            other => Err(Error::Config(format!("unknown update mode '{other}'"))),
        }
    }
}

/// One extracted dual component.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DualComponent {
    /// Dual coefficients c, one per training sample.
    pub coefficients: Array1<f64>,
    /// √(c'Kc) at the fixed point, against the Gram matrix the component
    /// was extracted from.
    pub normalizer: f64,
    pub converged: bool,
    pub iterations: usize,
    pub cycle_detected: bool,
    /// √(c'Kc) across the run: per iteration in parallel mode, per accepted
    /// coordinate update in serial mode (where it is non-decreasing for
    /// f' = sign on a positive semidefinite matrix).
    pub energy_trace: Vec<f64>,
}

/// A fitted kernel model: Gram state (centering statistics plus deflation
/// history), the extracted components in order, and the training data the
/// kernel is evaluated against.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelModel {
    gram: GramState,
    components: Vec<DualComponent>,
    objective: ObjectiveSpec,
    kernel: KernelSpec,
    data: DataMatrix,
}

/// Initial coefficients: the indicator of the largest diagonal entry, i.e.
/// the sample with the largest feature-space norm. Ties break to the
/// smallest index.
pub fn init_dual(state: &GramState) -> Result<Array1<f64>> {
    let diag = state.matrix().diag();
    let mut best = f64::NEG_INFINITY;
    let mut idx = 0;
    for (i, &v) in diag.iter().enumerate() {
        if v > best {
            best = v;
            idx = i;
        }
    }
    if best <= 0.0 {
        return Err(Error::DegenerateData(
            "no positive diagonal entry in the gram matrix".into(),
        ));
    }
    let mut c = Array1::zeros(state.n());
    c[idx] = 1.0;
    Ok(c)
}

/// One parallel step: f'(Kc/√(c'Kc)) applied component-wise. For f' = sign,
/// coordinates whose argument is exactly zero retain their previous value.
pub fn iterate_parallel(
    state: &GramState,
    spec: &ObjectiveSpec,
    c: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    let kc = state.matrix().dot(&c);
    let energy = c.dot(&kc);
    if energy <= 0.0 {
        return Err(Error::DegenerateComponent { energy });
    }
    let scale = energy.sqrt();
    let retain_zero = spec.has_sign_derivative();
    Ok(Array1::from_iter(kc.iter().zip(c.iter()).map(|(&kci, &ci)| {
        if retain_zero && kci == 0.0 {
            ci
        } else {
            spec.derivative(kci / scale)
        }
    })))
}

/// Drives the recurrence from `init_dual` to a fixed point.
pub fn solve_component(
    state: &GramState,
    spec: &ObjectiveSpec,
    settings: &AscentSettings,
    mode: UpdateMode,
) -> Result<DualComponent> {
    let c0 = init_dual(state)?;
    match mode {
        UpdateMode::Parallel => run_parallel(state, spec, settings, c0, false),
        UpdateMode::Serial => run_serial(state, spec, settings, c0),
        UpdateMode::Auto => {
            let attempt = run_parallel(state, spec, settings, c0.clone(), true)?;
            if attempt.cycle_detected {
                let mut component = run_serial(state, spec, settings, c0)?;
                component.cycle_detected = true;
                Ok(component)
            } else {
                Ok(attempt)
            }
        }
    }
}

fn run_parallel(
    state: &GramState,
    spec: &ObjectiveSpec,
    settings: &AscentSettings,
    c0: Array1<f64>,
    detect_cycles: bool,
) -> Result<DualComponent> {
    let discrete = spec.has_sign_derivative();
    let mut c = c0;
    let mut two_ago: Option<Array1<f64>> = None;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut cycle_detected = false;

    while iterations < settings.max_iter {
        let kc = state.matrix().dot(&c);
        let energy = c.dot(&kc);
        if energy <= 0.0 {
            return Err(Error::DegenerateComponent { energy });
        }
        if settings.track_objective {
            trace.push(energy.sqrt());
        }
        let scale = energy.sqrt();
        let next = Array1::from_iter(kc.iter().zip(c.iter()).map(|(&kci, &ci)| {
            if discrete && kci == 0.0 {
                ci
            } else {
                spec.derivative(kci / scale)
            }
        }));
        let delta = inf_dist(&next, &c);
        let done = if discrete { delta == 0.0 } else { delta < settings.tol };
        if detect_cycles && !done {
            if let Some(prev2) = &two_ago {
                let dist2 = inf_dist(&next, prev2);
                let cycling = if discrete { dist2 == 0.0 } else { dist2 < settings.tol };
                if cycling {
                    cycle_detected = true;
                    c = next;
                    iterations += 1;
                    break;
                }
            }
        }
        two_ago = Some(std::mem::replace(&mut c, next));
        iterations += 1;
        if done {
            converged = true;
            break;
        }
    }

    finish_component(state, settings, c, iterations, converged, cycle_detected, trace)
}

fn run_serial(
    state: &GramState,
    spec: &ObjectiveSpec,
    settings: &AscentSettings,
    c0: Array1<f64>,
) -> Result<DualComponent> {
    let n = state.n();
    let k = state.matrix();
    let discrete = spec.has_sign_derivative();
    let max_sweeps = if discrete { n.saturating_mul(100).max(1) } else { settings.max_iter };

    let mut c = c0;
    let mut trace = Vec::new();
    let mut sweeps = 0;
    let mut converged = false;

    for _ in 0..max_sweeps {
        // Fresh pass values each sweep so incremental updates cannot drift.
        let mut kc = k.dot(&c);
        let mut energy = c.dot(&kc);
        if energy <= 0.0 {
            return Err(Error::DegenerateComponent { energy });
        }
        if settings.track_objective && sweeps == 0 {
            trace.push(energy.sqrt());
        }
        let mut max_delta = 0.0f64;
        for i in 0..n {
            if energy <= 0.0 {
                return Err(Error::DegenerateComponent { energy });
            }
            let arg = kc[i] / energy.sqrt();
            let new_ci = if discrete && kc[i] == 0.0 { c[i] } else { spec.derivative(arg) };
            let delta = new_ci - c[i];
            if delta != 0.0 {
                energy += 2.0 * delta * kc[i] + delta * delta * k[[i, i]];
                kc.scaled_add(delta, &k.column(i));
                c[i] = new_ci;
                max_delta = max_delta.max(delta.abs());
                if settings.track_objective {
                    trace.push(energy.max(0.0).sqrt());
                }
            }
        }
        sweeps += 1;
        let done = if discrete { max_delta == 0.0 } else { max_delta < settings.tol };
        if done {
            converged = true;
            break;
        }
    }

    finish_component(state, settings, c, sweeps, converged, false, trace)
}

fn finish_component(
    state: &GramState,
    settings: &AscentSettings,
    c: Array1<f64>,
    iterations: usize,
    converged: bool,
    cycle_detected: bool,
    mut trace: Vec<f64>,
) -> Result<DualComponent> {
    let kc = state.matrix().dot(&c);
    let energy = c.dot(&kc);
    if energy <= 0.0 {
        return Err(Error::DegenerateComponent { energy });
    }
    if settings.track_objective {
        trace.push(energy.sqrt());
    }
    Ok(DualComponent {
        coefficients: c,
        normalizer: energy.sqrt(),
        converged,
        iterations,
        cycle_detected,
        energy_trace: trace,
    })
}

fn inf_dist(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Runs the full greedy pipeline: Gram construction, feature centering,
/// then `k` rounds of solve-store-deflate.
pub fn fit(
    data: &DataMatrix,
    kernel: &KernelSpec,
    objective: &ObjectiveSpec,
    k: usize,
    settings: &AscentSettings,
    mode: UpdateMode,
) -> Result<KernelModel> {
    let n = data.n_samples();
    if k > n {
        return Err(Error::Config(format!("k={k} exceeds sample count {n}")));
    }
    let mut state = gram(data, kernel);
    state.center();
    let trace0 = state.trace();
    let mut components = Vec::with_capacity(k);

    for extracted in 0..k {
        if state.trace() <= 1e-12 * trace0.max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient { requested: k, extracted });
        }
        let component = match solve_component(&state, objective, settings, mode) {
            // A gram matrix without positive diagonal after deflation means
            // the feature span is exhausted, not a caller mistake.
            Err(Error::DegenerateData(_)) => {
                return Err(Error::RankDeficient { requested: k, extracted })
            }
            other => other?,
        };
        state.deflate(component.coefficients.view())?;
        components.push(component);
    }

    Ok(KernelModel {
        gram: state,
        components,
        objective: *objective,
        kernel: *kernel,
        data: data.clone(),
    })
}

impl KernelModel {
    pub fn components(&self) -> &[DualComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn gram(&self) -> &GramState {
        &self.gram
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn data(&self) -> &DataMatrix {
        &self.data
    }

    /// Component scores β_m = c_m' k̃_m(x) / √(c_m'K_m c_m) of a raw sample,
    /// where k̃_m is the test kernel vector centered and deflation-replayed
    /// through the first m−1 components.
    pub fn project(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let mut kv = self.gram.centered_test_kernel(x, &self.data, &self.kernel)?;
        let mut scores = Vec::with_capacity(self.components.len());
        for (component, step) in self.components.iter().zip(self.gram.history()) {
            let overlap = step.c.dot(&kv);
            scores.push(overlap / component.normalizer);
            kv.scaled_add(-overlap / step.energy, &step.kc);
        }
        Ok(Array1::from(scores))
    }

    /// Feature-space reconstruction error ε(x) = k̃(x,x) − Σ_m β_m². Tiny
    /// negative round-off (within 1e-8 relative to the self-kernel scale)
    /// clamps to zero; anything more negative is state corruption.
    pub fn reconstruction_error(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        let self_kernel = self.gram.centered_self_kernel(x, &self.data, &self.kernel)?;
        let scores = self.project(x)?;
        let error = self_kernel - scores.dot(&scores);
        let slack = 1e-8 * self_kernel.abs().max(1.0);
        if error < -slack {
            return Err(Error::Inconsistency(format!(
                "reconstruction error {error} below round-off slack -{slack}"
            )));
        }
        Ok(error.max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_data(seed: u64, n: usize, d: usize) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::center(Array2::from_shape_fn((n, d), |_| rng.random_range(-1.5..1.5)))
            .unwrap()
    }

    fn centered_state(data: &DataMatrix, kernel: &KernelSpec) -> GramState {
        let mut state = gram(data, kernel);
        state.center();
        state
    }

    #[test]
    fn init_dual_picks_max_diagonal() {
        let state =
            GramState::from_matrix(Array2::from_diag(&array![1.0, 3.0, 2.0]), true).unwrap();
        assert_eq!(init_dual(&state).unwrap(), array![0.0, 1.0, 0.0]);
    }

    #[test]
    fn init_dual_tie_breaks_to_first() {
        let state = GramState::from_matrix(Array2::from_diag(&array![2.0, 2.0]), true).unwrap();
        assert_eq!(init_dual(&state).unwrap(), array![1.0, 0.0]);
    }

    #[test]
    fn init_dual_rejects_centered_constant_kernel() {
        let mut state = GramState::from_matrix(Array2::ones((4, 4)), false).unwrap();
        state.center();
        assert!(matches!(init_dual(&state), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn parallel_step_quadratic_arithmetic() {
        let state = GramState::from_matrix(array![[2.0, 0.0], [0.0, 1.0]], true).unwrap();
        let spec = ObjectiveSpec::lp(2.0).unwrap();
        let c = array![1.0, 0.0];
        let next = iterate_parallel(&state, &spec, c.view()).unwrap();
        assert!((next[0] - 2.0 * 2.0f64.sqrt()).abs() < 1e-14);
        assert_eq!(next[1], 0.0);
    }

    #[test]
    fn parallel_step_sign_fixed_point_on_positive_matrix() {
        let k = array![[1.0, 0.3, 0.2], [0.3, 1.0, 0.5], [0.2, 0.5, 1.0]];
        let state = GramState::from_matrix(k, true).unwrap();
        let spec = ObjectiveSpec::lp(1.0).unwrap();
        let c = Array1::ones(3);
        let next = iterate_parallel(&state, &spec, c.view()).unwrap();
        assert_eq!(next, Array1::ones(3));
    }

    #[test]
    fn parallel_sign_step_equals_sign_of_kc() {
        // The positive scalar 1/sqrt(c'Kc) cannot change any sign, so the
        // p=1 parallel step is exactly sign(Kc) with zeros retained.
        let data = toy_data(77, 9, 3);
        let state = centered_state(&data, &KernelSpec::gaussian(1.1).unwrap());
        let spec = ObjectiveSpec::lp(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..20 {
            let c = Array1::from_shape_fn(9, |_| {
                [-1.0, 0.0, 1.0][rng.random_range(0..3usize)]
            });
            let kc = state.matrix().dot(&c);
            if c.dot(&kc) <= 0.0 {
                continue;
            }
            let next = iterate_parallel(&state, &spec, c.view()).unwrap();
            for i in 0..9 {
                let want = if kc[i] == 0.0 { c[i] } else { kc[i].signum() };
                assert_eq!(next[i], want, "coordinate {i}");
            }
        }
    }

    #[test]
    fn parallel_step_gaussian_like_stays_in_open_unit_interval() {
        let data = toy_data(1, 6, 2);
        let state = centered_state(&data, &KernelSpec::gaussian(1.0).unwrap());
        let spec = ObjectiveSpec::gaussian_like(2.0).unwrap();
        let c = init_dual(&state).unwrap();
        let next = iterate_parallel(&state, &spec, c.view()).unwrap();
        assert!(next.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn quadratic_solve_matches_power_method_eigenvector() {
        for seed in [2, 3, 4] {
            let data = toy_data(seed, 12, 3);
            let state = centered_state(&data, &KernelSpec::gaussian(1.5).unwrap());
            let spec = ObjectiveSpec::lp(2.0).unwrap();
            let component =
                solve_component(&state, &spec, &AscentSettings::default(), UpdateMode::Parallel)
                    .unwrap();
            assert!(component.converged);
            let eig = oracle::eig_top(state.matrix().view(), 1).unwrap();
            let c = &component.coefficients;
            let cos = c.dot(&eig.vectors.column(0)).abs() / c.dot(c).sqrt();
            assert!(cos > 1.0 - 1e-6, "seed {seed}: cosine {cos}");
        }
    }

    #[test]
    fn sign_solve_serial_reaches_fixed_point() {
        for seed in [5, 6, 7] {
            let data = toy_data(seed, 6, 2);
            let state = centered_state(&data, &KernelSpec::gaussian(1.0).unwrap());
            let spec = ObjectiveSpec::lp(1.0).unwrap();
            let component =
                solve_component(&state, &spec, &AscentSettings::default(), UpdateMode::Serial)
                    .unwrap();
            assert!(component.converged);
            let c = &component.coefficients;
            assert!(c.iter().all(|&v| v == 1.0 || v == -1.0 || v == 0.0));
            let kc = state.matrix().dot(c);
            for i in 0..6 {
                if kc[i] != 0.0 {
                    assert_eq!(c[i], kc[i].signum(), "seed {seed} coordinate {i}");
                }
            }
            // Flipping one coordinate changes c'Kc by 4(K_ii − |（Kc)_i|): a
            // sign fixed point is single-flip optimal exactly on the
            // coordinates where the diagonal does not dominate. (The classic
            // zero-diagonal Hopfield argument makes every flip losing; Gram
            // matrices have positive diagonals, so the exception is real.)
            let value = c.dot(&kc);
            for i in 0..6 {
                if c[i].abs() != 1.0 || kc[i] == 0.0 {
                    continue;
                }
                let mut flipped = c.clone();
                flipped[i] = -flipped[i];
                let flipped_value = flipped.dot(&state.matrix().dot(&flipped));
                let predicted = value + 4.0 * (state.matrix()[[i, i]] - kc[i].abs());
                assert!(
                    (flipped_value - predicted).abs() < 1e-10,
                    "seed {seed}: flip {i} energy {flipped_value} != predicted {predicted}"
                );
                if state.matrix()[[i, i]] <= kc[i].abs() {
                    assert!(flipped_value <= value + 1e-10);
                }
            }
        }
    }

    #[test]
    fn sign_solve_serial_energy_is_monotone() {
        for seed in 10..20u64 {
            let data = toy_data(seed, 8, 3);
            let state = centered_state(&data, &KernelSpec::gaussian(1.2).unwrap());
            let spec = ObjectiveSpec::lp(1.0).unwrap();
            let component =
                solve_component(&state, &spec, &AscentSettings::default(), UpdateMode::Serial)
                    .unwrap();
            for pair in component.energy_trace.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-10, "seed {seed}: energy dropped {pair:?}");
            }
        }
    }

    #[test]
    fn single_sample_fixes_immediately() {
        let state = GramState::from_matrix(array![[4.0]], true).unwrap();
        let spec = ObjectiveSpec::lp(1.5).unwrap();
        let component =
            solve_component(&state, &spec, &AscentSettings::default(), UpdateMode::Parallel)
                .unwrap();
        assert!(component.converged);
        assert!(component.iterations <= 2);
        // c = f'(√K₁₁)
        assert!((component.coefficients[0] - spec.derivative(2.0)).abs() < 1e-14);
    }

    #[test]
    fn parallel_two_cycle_falls_back_to_serial_in_auto_mode() {
        // Indefinite coupling built so that parallel sign updates oscillate
        // between (1,1,-1,-1)-type patterns while retaining positive energy.
        let k = array![
            [1.0, 1.0, 0.9, -0.9],
            [1.0, 1.0, -0.9, 0.9],
            [0.9, -0.9, -0.4, 0.0],
            [-0.9, 0.9, 0.0, -0.4]
        ];
        let state = GramState::from_matrix(k, true).unwrap();
        let spec = ObjectiveSpec::lp(1.0).unwrap();
        let settings = AscentSettings::default();

        let parallel =
            run_parallel(&state, &spec, &settings, init_dual(&state).unwrap(), true).unwrap();
        assert!(parallel.cycle_detected, "expected a parallel 2-cycle");

        let auto = solve_component(&state, &spec, &settings, UpdateMode::Auto).unwrap();
        assert!(auto.cycle_detected);
        assert!(auto.converged, "serial fallback should reach a fixed point");
        let kc = state.matrix().dot(&auto.coefficients);
        for i in 0..4 {
            if kc[i] != 0.0 {
                assert_eq!(auto.coefficients[i], kc[i].signum());
            }
        }
    }

    #[test]
    fn auto_equals_parallel_on_psd_gram() {
        let data = toy_data(8, 10, 3);
        let state = centered_state(&data, &KernelSpec::gaussian(1.0).unwrap());
        for spec in [
            ObjectiveSpec::lp(1.0).unwrap(),
            ObjectiveSpec::lp(2.0).unwrap(),
            ObjectiveSpec::zeta2(),
        ] {
            let settings = AscentSettings::default();
            let auto = solve_component(&state, &spec, &settings, UpdateMode::Auto).unwrap();
            let parallel =
                solve_component(&state, &spec, &settings, UpdateMode::Parallel).unwrap();
            assert!(!auto.cycle_detected);
            assert_eq!(auto.coefficients, parallel.coefficients);
        }
    }

    #[test]
    fn fit_scores_match_classical_kernel_pca() {
        let data = toy_data(21, 10, 3);
        let kernel = KernelSpec::gaussian(1.5).unwrap();
        let spec = ObjectiveSpec::lp(2.0).unwrap();
        let model =
            fit(&data, &kernel, &spec, 3, &AscentSettings::default(), UpdateMode::Auto).unwrap();

        // Classical route: eigendecomposition of the centered Gram matrix;
        // the score of training point i on component m is √λ_m v_m[i].
        let state = centered_state(&data, &kernel);
        let eig = oracle::eig_top(state.matrix().view(), 3).unwrap();
        for i in 0..10 {
            let raw_point = &data.samples().row(i) + data.mean();
            let scores = model.project(raw_point.view()).unwrap();
            for m in 0..3 {
                let classical = eig.values[m].max(0.0).sqrt() * eig.vectors[[i, m]];
                assert!(
                    (scores[m].abs() - classical.abs()).abs() < 1e-6,
                    "point {i} component {m}: {} vs {classical}",
                    scores[m]
                );
            }
        }
    }

    #[test]
    fn duplicate_points_share_component_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base = Array2::from_shape_fn((5, 2), |_| rng.random_range(-1.0..1.0f64));
        let mut doubled = Array2::zeros((10, 2));
        for i in 0..5 {
            doubled.row_mut(2 * i).assign(&base.row(i));
            doubled.row_mut(2 * i + 1).assign(&base.row(i));
        }
        let data = DataMatrix::center(doubled.clone()).unwrap();
        let kernel = KernelSpec::gaussian(1.0).unwrap();
        let spec = ObjectiveSpec::lp(2.0).unwrap();
        let model =
            fit(&data, &kernel, &spec, 2, &AscentSettings::default(), UpdateMode::Auto).unwrap();
        for i in 0..5 {
            let a = model.project(doubled.row(2 * i)).unwrap();
            let b = model.project(doubled.row(2 * i + 1)).unwrap();
            let gap = (&a - &b).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(gap < 1e-10, "duplicate pair {i} differs by {gap}");
        }
    }

    #[test]
    fn full_extraction_reconstructs_training_points() {
        let data = toy_data(41, 8, 3);
        let kernel = KernelSpec::gaussian(1.0).unwrap();
        let spec = ObjectiveSpec::lp(2.0).unwrap();
        // The centered Gram matrix has rank at most N−1; asking for N must
        // report exhaustion, and refitting with the reported count gives the
        // complete extraction.
        let extracted = match fit(&data, &kernel, &spec, 8, &AscentSettings::default(), UpdateMode::Auto)
        {
            Err(Error::RankDeficient { extracted, .. }) => extracted,
            other => panic!("expected rank exhaustion, got {other:?}"),
        };
        assert_eq!(extracted, 7);
        let model =
            fit(&data, &kernel, &spec, extracted, &AscentSettings::default(), UpdateMode::Auto)
                .unwrap();
        for i in 0..8 {
            let raw_point = &data.samples().row(i) + data.mean();
            let error = model.reconstruction_error(raw_point.view()).unwrap();
            assert!(error < 1e-6, "training point {i} error {error}");
        }
    }

    #[test]
    fn zero_components_error_is_self_kernel() {
        let data = toy_data(51, 6, 2);
        let kernel = KernelSpec::gaussian(1.0).unwrap();
        let spec = ObjectiveSpec::lp(2.0).unwrap();
        let model =
            fit(&data, &kernel, &spec, 0, &AscentSettings::default(), UpdateMode::Auto).unwrap();
        let x = array![0.4, -0.2];
        let error = model.reconstruction_error(x.view()).unwrap();
        let self_kernel = model
            .gram()
            .centered_self_kernel(x.view(), model.data(), model.kernel())
            .unwrap();
        assert!((error - self_kernel).abs() < 1e-14);
    }

    #[test]
    fn quadratic_scores_decorrelate_across_components() {
        let data = toy_data(61, 12, 4);
        let kernel = KernelSpec::gaussian(2.0).unwrap();
        let spec = ObjectiveSpec::lp(2.0).unwrap();
        let model =
            fit(&data, &kernel, &spec, 3, &AscentSettings::default(), UpdateMode::Auto).unwrap();
        let mut score_matrix = Array2::<f64>::zeros((12, 3));
        for i in 0..12 {
            let raw_point = &data.samples().row(i) + data.mean();
            score_matrix.row_mut(i).assign(&model.project(raw_point.view()).unwrap());
        }
        for m in 0..3 {
            for l in (m + 1)..3 {
                let a = score_matrix.column(m);
                let b = score_matrix.column(l);
                let dot = a.dot(&b).abs();
                let bound = 1e-6 * a.dot(&a).sqrt() * b.dot(&b).sqrt();
                assert!(dot <= bound.max(1e-12), "components {m},{l} correlate: {dot}");
            }
        }
    }

    #[test]
    fn trace_shrinks_with_each_deflation() {
        let data = toy_data(71, 9, 3);
        let kernel = KernelSpec::gaussian(1.0).unwrap();
        let spec = ObjectiveSpec::lp(1.5).unwrap();
        let mut state = centered_state(&data, &kernel);
        let mut last_trace = state.trace();
        for _ in 0..4 {
            let component =
                solve_component(&state, &spec, &AscentSettings::default(), UpdateMode::Auto)
                    .unwrap();
            state.deflate(component.coefficients.view()).unwrap();
            let trace = state.trace();
            assert!(trace <= last_trace + 1e-12);
            last_trace = trace;
        }
    }

    #[test]
    fn mode_grammar() {
        assert_eq!("parallel".parse::<UpdateMode>().unwrap(), UpdateMode::Parallel);
        assert_eq!("serial".parse::<UpdateMode>().unwrap(), UpdateMode::Serial);
        assert_eq!("auto".parse::<UpdateMode>().unwrap(), UpdateMode::Auto);
        assert!("sync".parse::<UpdateMode>().is_err());
    }
}
