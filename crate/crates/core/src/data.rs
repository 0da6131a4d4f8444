//! Sample storage with explicit centering state.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// An N×d sample matrix whose column means have been subtracted and stored.
///
/// Everything downstream (the ascent, Gram construction, projections)
/// assumes centered samples; keeping the mean on the struct makes it
/// impossible to lose track of which coordinates a test point must be
/// shifted into.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DataMatrix {
    samples: Array2<f64>,
    mean: Array1<f64>,
}

impl DataMatrix {
    /// Centers `raw` by subtracting each column's mean.
    pub fn center(raw: Array2<f64>) -> Result<Self> {
        let (n, d) = raw.dim();
        if n == 0 || d == 0 {
            return Err(Error::Data(format!("need at least a 1x1 matrix, got {n}x{d}")));
        }
        if let Some(bad) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite entry {bad}")));
        }
        let mean = raw.mean_axis(Axis(0)).expect("n >= 1");
        let samples = raw - &mean;
        Ok(Self { samples, mean })
    }

    /// Wraps samples that are already centered (mean vector of zeros).
    pub fn pre_centered(samples: Array2<f64>) -> Result<Self> {
        let d = samples.ncols();
        if samples.nrows() == 0 || d == 0 {
            return Err(Error::Data("empty matrix".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite entry".into()));
        }
        Ok(Self { samples, mean: Array1::zeros(d) })
    }

    /// Centered samples, one row per observation.
    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    /// The subtracted column mean.
    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    /// Shifts a raw observation into the centered coordinates of this set.
    pub fn center_sample(&self, raw: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if raw.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: raw.len() });
        }
        Ok(&raw - &self.mean)
    }
}
