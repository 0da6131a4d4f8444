//! Seeded noise injection on the 0–255 intensity scale.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    None,
    /// Additive normal noise with standard deviation `sigma` in intensity
    /// units, clamped back into [0, 255].
    Gaussian { sigma: f64 },
    /// Each pixel flips to 0 with probability delta/2 and to 255 with
    /// probability delta/2.
    SaltPepper { delta: f64 },
    /// Multiplicative x·(1+n) with n ~ Normal(0, eta) (eta is a variance),
    /// clamped back into [0, 255].
    Speckle { eta: f64 },
    /// Appends `count` images whose pixels are i.i.d. uniform over {0, 255}.
    NoiseImages { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseKind::Gaussian { sigma } if !sigma.is_finite() || sigma < 0.0 => {
                Err(BenchError::Config(format!("gaussian sigma must be >= 0, got {sigma}")))
            }
            NoiseKind::SaltPepper { delta } if !(0.0..=1.0).contains(&delta) => {
                Err(BenchError::Config(format!("salt-pepper delta must be in [0,1], got {delta}")))
            }
            NoiseKind::Speckle { eta } if !eta.is_finite() || eta < 0.0 => {
                Err(BenchError::Config(format!("speckle eta must be >= 0, got {eta}")))
            }
            _ => Ok(()),
        }
    }

    /// The row label used in result tables: the noise parameter value.
    pub fn level_label(&self) -> String {
        match *self {
            NoiseKind::None => "0".into(),
            NoiseKind::Gaussian { sigma } => format!("{sigma}"),
            NoiseKind::SaltPepper { delta } => format!("{delta}"),
            NoiseKind::Speckle { eta } => format!("{eta}"),
            NoiseKind::NoiseImages { count } => format!("{count}"),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NoiseKind::None => write!(f, "none"),
            NoiseKind::Gaussian { sigma } => write!(f, "gauss:{sigma}"),
            NoiseKind::SaltPepper { delta } => write!(f, "sp:{delta}"),
            NoiseKind::Speckle { eta } => write!(f, "speckle:{eta}"),
            NoiseKind::NoiseImages { count } => write!(f, "images:{count}"),
        }
    }
}

impl FromStr for NoiseKind {
    type Err = BenchError;

    /// Grammar: `none`, `gauss:<sigma>`, `sp:<delta>`, `speckle:<eta>`,
    /// `images:<count>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(2, ':');
        let head = parts.next().unwrap_or_default().trim();
        let param = parts.next().map(str::trim);
        let number = |p: Option<&str>| -> Result<f64> {
            p.ok_or_else(|| BenchError::Config(format!("noise '{s}' is missing its parameter")))?
                .parse::<f64>()
                .map_err(|e| BenchError::Config(format!("noise '{s}': {e}")))
        };
        let kind = match head {
            "none" => NoiseKind::None,
            "gauss" => NoiseKind::Gaussian { sigma: number(param)? },
            "sp" => NoiseKind::SaltPepper { delta: number(param)? },
            "speckle" => NoiseKind::Speckle { eta: number(param)? },
            "images" => NoiseKind::NoiseImages {
                count: param
                    .ok_or_else(|| BenchError::Config(format!("noise '{s}' needs a count")))?
                    .parse::<usize>()
                    .map_err(|e| BenchError::Config(format!("noise '{s}': {e}")))?,
            },
            _ => return Err(BenchError::Config(format!("unknown noise '{s}'"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

fn clamp_intensity(v: f64) -> f64 {
    v.clamp(0.0, 255.0)
}

/// Applies `spec` to a copy of `data`, consuming the generator in row-major
/// pixel order so a fixed seed reproduces the dataset byte for byte.
pub fn add_noise(data: &Dataset, spec: &NoiseSpec) -> Result<Dataset> {
    spec.kind.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    add_noise_with(data, spec.kind, &mut rng)
}

/// Same as [`add_noise`] but drawing from a caller-owned stream, so one
/// seed can cover a train set followed by a test set.
pub fn add_noise_with(
    data: &Dataset,
    kind: NoiseKind,
    rng: &mut ChaCha8Rng,
) -> Result<Dataset> {
    kind.validate()?;
    let mut out = data.clone();
    match kind {
        NoiseKind::None => {}
        NoiseKind::Gaussian { sigma } => {
            if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma).expect("validated");
                out.samples.mapv_inplace(|v| clamp_intensity(v + normal.sample(rng)));
            }
        }
        NoiseKind::SaltPepper { delta } => {
            if delta > 0.0 {
                out.samples.mapv_inplace(|v| {
                    let u: f64 = rng.random_range(0.0..1.0);
                    if u < delta / 2.0 {
                        0.0
                    } else if u < delta {
                        255.0
                    } else {
                        v
                    }
                });
            }
        }
        NoiseKind::Speckle { eta } => {
            if eta > 0.0 {
                let normal = Normal::new(0.0, eta.sqrt()).expect("validated");
                out.samples.mapv_inplace(|v| clamp_intensity(v * (1.0 + normal.sample(rng))));
            }
        }
        NoiseKind::NoiseImages { count } => {
            if data.labels.is_some() {
                return Err(BenchError::Config(
                    "noise images extend an unlabeled dataset; labels would go stale".into(),
                ));
            }
            let (n, d) = data.samples.dim();
            let mut samples = Array2::zeros((n + count, d));
            samples.slice_mut(ndarray::s![..n, ..]).assign(&data.samples);
            for i in n..n + count {
                for j in 0..d {
                    samples[[i, j]] = if rng.random_range(0.0..1.0) < 0.5 { 0.0 } else { 255.0 };
                }
            }
            out.samples = samples;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, d: usize, value: f64) -> Dataset {
        Dataset {
            name: "flat".into(),
            samples: Array2::from_elem((n, d), value),
            labels: None,
            shape: (1, d),
        }
    }

    #[test]
    fn zero_levels_are_identity() {
        let data = flat(3, 4, 100.0);
        for kind in [
            NoiseKind::None,
            NoiseKind::SaltPepper { delta: 0.0 },
            NoiseKind::Speckle { eta: 0.0 },
            NoiseKind::Gaussian { sigma: 0.0 },
        ] {
            let noisy = add_noise(&data, &NoiseSpec { kind, seed: 42 }).unwrap();
            assert_eq!(noisy.samples, data.samples, "{kind} changed the data");
        }
    }

    #[test]
    fn full_salt_pepper_splits_evenly() {
        let data = flat(100, 1000, 100.0);
        let spec = NoiseSpec { kind: NoiseKind::SaltPepper { delta: 1.0 }, seed: 7 };
        let noisy = add_noise(&data, &spec).unwrap();
        let zeros = noisy.samples.iter().filter(|&&v| v == 0.0).count() as f64;
        let whites = noisy.samples.iter().filter(|&&v| v == 255.0).count() as f64;
        let total = (100 * 1000) as f64;
        assert_eq!(zeros + whites, total);
        assert!((zeros / total - 0.5).abs() < 0.02, "zeros fraction {}", zeros / total);
        assert!((whites / total - 0.5).abs() < 0.02);
    }

    #[test]
    fn gaussian_clamps_to_intensity_range() {
        let data = flat(10, 100, 250.0);
        let spec = NoiseSpec { kind: NoiseKind::Gaussian { sigma: 100.0 }, seed: 3 };
        let noisy = add_noise(&data, &spec).unwrap();
        assert!(noisy.samples.iter().all(|&v| (0.0..=255.0).contains(&v)));
        assert_ne!(noisy.samples, data.samples);
    }

    #[test]
    fn noise_images_append_binary_rows() {
        let data = flat(5, 8, 42.0);
        let spec = NoiseSpec { kind: NoiseKind::NoiseImages { count: 3 }, seed: 9 };
        let noisy = add_noise(&data, &spec).unwrap();
        assert_eq!(noisy.n_samples(), 8);
        assert_eq!(noisy.samples.slice(ndarray::s![..5, ..]), data.samples);
        for i in 5..8 {
            assert!(noisy.samples.row(i).iter().all(|&v| v == 0.0 || v == 255.0));
        }
    }

    #[test]
    fn noise_images_refuse_labeled_data() {
        let mut data = flat(4, 2, 1.0);
        data.labels = Some(vec![0, 0, 1, 1]);
        let spec = NoiseSpec { kind: NoiseKind::NoiseImages { count: 2 }, seed: 1 };
        assert!(add_noise(&data, &spec).is_err());
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let data = flat(4, 16, 128.0);
        let spec = NoiseSpec { kind: NoiseKind::Gaussian { sigma: 25.0 }, seed: 11 };
        let a = add_noise(&data, &spec).unwrap();
        let b = add_noise(&data, &spec).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["none", "gauss:50", "sp:0.25", "speckle:4", "images:30"] {
            let kind: NoiseKind = s.parse().unwrap();
            assert_eq!(kind.to_string(), s);
        }
        assert!("sp:1.5".parse::<NoiseKind>().is_err());
        assert!("blur:1".parse::<NoiseKind>().is_err());
    }
}
