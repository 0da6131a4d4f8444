//! Independent reference implementations used by tests and for reproducing
//! derived expected values.
//!
//! Everything here is deliberately brute force and shares no code with the
//! solver modules: the eigendecomposition is a local cyclic Jacobi, the
//! sphere search is an exhaustive angular grid, and the sign search
//! enumerates every ±1 vector. They ship in the library (not test-only
//! files) so users can regenerate any derived constant appearing in the
//! test suites.

use ndarray::{Array1, Array2, ArrayView2};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::objective::ObjectiveSpec;

/// Outcome of an exhaustive search.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub argmax: Array1<f64>,
    pub value: f64,
    pub resolution: f64,
}

/// Eigenpairs in descending eigenvalue order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// One eigenvector per column, matching `values`.
    pub vectors: Array2<f64>,
}

/// Dense symmetric eigendecomposition by cyclic Jacobi rotations, returning
/// the top `k` pairs in descending eigenvalue order.
pub fn eig_top(matrix: ArrayView2<'_, f64>, k: usize) -> Result<Eigen> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::UnsupportedInput(format!(
            "expected square matrix, got {}x{}",
            n,
            matrix.ncols()
        )));
    }
    if k > n {
        return Err(Error::UnsupportedInput(format!("k={k} exceeds dimension {n}")));
    }
    let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_asymmetry = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max((matrix[[i, j]] - matrix[[j, i]]).abs()));
    if max_asymmetry > 1e-8 * scale.max(1.0) {
        return Err(Error::NotSymmetric { max_asymmetry });
    }

    let mut a = matrix.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let off = |a: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[[p, q]] * a[[p, q]];
            }
        }
        s.sqrt()
    };
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * fro.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[[r, p]];
                    let arq = a[[r, q]];
                    a[[r, p]] = c * arp - s * arq;
                    a[[r, q]] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[[p, r]];
                    let aqr = a[[q, r]];
                    a[[p, r]] = c * apr - s * aqr;
                    a[[q, r]] = s * apr + c * aqr;
                }
                for r in 0..n {
                    let vrp = v[[r, p]];
                    let vrq = v[[r, q]];
                    v[[r, p]] = c * vrp - s * vrq;
                    v[[r, q]] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]));
    let values: Vec<f64> = order.iter().take(k).map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::<f64>::zeros((n, k));
    for (out, &src) in order.iter().take(k).enumerate() {
        vectors.column_mut(out).assign(&v.column(src));
    }
    Ok(Eigen { values, vectors })
}

/// Exhaustive evaluation of `sum_i f(w' x_i)` over an angular grid of the
/// unit sphere. Supports d = 2 (full circle) and d = 3 (polar × azimuthal
/// grid); higher dimensions are not gridable at useful resolutions.
pub fn sphere_grid_argmax(
    data: &DataMatrix,
    spec: &ObjectiveSpec,
    resolution: f64,
) -> Result<OracleReport> {
    if !resolution.is_finite() || resolution <= 0.0 {
        return Err(Error::UnsupportedInput(format!("resolution {resolution} must be positive")));
    }
    let objective = |w: &Array1<f64>| -> f64 {
        data.samples().rows().into_iter().map(|x| spec.value(x.dot(w))).sum()
    };
    match data.dim() {
        2 => {
            let x0: Vec<f64> = data.samples().column(0).to_vec();
            let x1: Vec<f64> = data.samples().column(1).to_vec();
            let steps = (std::f64::consts::TAU / resolution).ceil() as usize;
            let mut best_theta = 0.0;
            let mut best = f64::NEG_INFINITY;
            for i in 0..steps {
                let theta = i as f64 * resolution;
                let (s, c) = theta.sin_cos();
                let mut total = 0.0;
                for j in 0..x0.len() {
                    total += spec.value(c * x0[j] + s * x1[j]);
                }
                if total > best {
                    best = total;
                    best_theta = theta;
                }
            }
            let (s, c) = best_theta.sin_cos();
            Ok(OracleReport { argmax: Array1::from(vec![c, s]), value: best, resolution })
        }
        3 => {
            let polar_steps = (std::f64::consts::PI / resolution).ceil() as usize + 1;
            let azim_steps = (std::f64::consts::TAU / resolution).ceil() as usize;
            let mut best_w = Array1::zeros(3);
            let mut best = f64::NEG_INFINITY;
            for i in 0..polar_steps {
                let polar = (i as f64 * resolution).min(std::f64::consts::PI);
                let (sp, cp) = polar.sin_cos();
                for j in 0..azim_steps {
                    let azim = j as f64 * resolution;
                    let (sa, ca) = azim.sin_cos();
                    let w = Array1::from(vec![sp * ca, sp * sa, cp]);
                    let total = objective(&w);
                    if total > best {
                        best = total;
                        best_w = w;
                    }
                }
            }
            Ok(OracleReport { argmax: best_w, value: best, resolution })
        }
        d => Err(Error::UnsupportedInput(format!("sphere grid supports d=2 or 3, got {d}"))),
    }
}

/// Enumerates every c in {−1,+1}^N and returns the maximizer of √(c'Kc).
pub fn sign_enumerate(k: ArrayView2<'_, f64>) -> Result<OracleReport> {
    let n = k.nrows();
    if n != k.ncols() {
        return Err(Error::UnsupportedInput("matrix must be square".into()));
    }
    if n == 0 || n > 12 {
        return Err(Error::UnsupportedInput(format!("sign enumeration capped at N <= 12, got {n}")));
    }
    let mut best_value = f64::NEG_INFINITY;
    let mut best = vec![1.0; n];
    let mut c = vec![0.0f64; n];
    for mask in 0u32..(1 << n) {
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
        }
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += c[i] * k[[i, j]] * c[j];
            }
        }
        let value = quad.max(0.0).sqrt();
        if value > best_value {
            best_value = value;
            best.copy_from_slice(&c);
        }
    }
    Ok(OracleReport { argmax: Array1::from(best), value: best_value, resolution: 0.0 })
}
