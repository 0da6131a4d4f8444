//! Per-component objective functions.
//!
//! Every solver in this crate maximizes `sum_i f(w' x_i)` over unit vectors
//! `w` for some scalar function `f` with (sub)derivative `f'`. This module
//! holds the whole menu behind one evaluation interface:
//!
//! * `lp:<p>`        — f(x) = |x|^p (p = 2 is conventional PCA, p = 1 the L1 variant)
//! * `crossover:<a>` — f(x) = x² for |x| <= a, |x| for |x| > a (quadratic core, linear tails)
//! * `zeta1`         — f'(x) = (1 − sech|x|)·sign(x)
//! * `zeta2`         — f'(x) = tanh²|x|·sign(x)
//! * `gauss:<q>`     — f'(x) = e^(−|x|^q)·sign(x)
//!
//! The last three are specified through `f'`; `f` is reconstructed as the
//! even antiderivative with f(0) = 0 and is used only for monitoring the
//! objective, never inside an update rule.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// sign with sign(0) = 0, keeping f' odd. `f64::signum` maps 0 to 1, which
/// would bias every sign-based update, so it is not used here.
#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ObjectiveKind {
    /// f(x) = |x|^p, p > 0.
    LpPower { p: f64 },
    /// f(x) = x² for |x| <= a, |x| for |x| > a. Continuous only at a = 1.
    Crossover { a: f64 },
    /// f'(x) = (1 − sech|x|)·sign(x).
    Zeta1,
    /// f'(x) = tanh²|x|·sign(x).
    Zeta2,
    /// f'(x) = e^(−|x|^q)·sign(x), q > 0. Not convex; accepted anyway.
    GaussianLike { q: f64 },
}

/// A validated objective. Immutable after construction; evaluation is pure,
/// so a spec can be shared freely across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveSpec {
    kind: ObjectiveKind,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind) -> Result<Self> {
        match kind {
            ObjectiveKind::LpPower { p } if !p.is_finite() || p <= 0.0 => {
                Err(Error::Config(format!("lp power requires p > 0, got {p}")))
            }
            ObjectiveKind::Crossover { a } if !a.is_finite() || a <= 0.0 => {
                Err(Error::Config(format!("crossover requires a > 0, got {a}")))
            }
            ObjectiveKind::GaussianLike { q } if !q.is_finite() || q <= 0.0 => {
                Err(Error::Config(format!("gauss requires q > 0, got {q}")))
            }
            kind => Ok(Self { kind }),
        }
    }

    pub fn lp(p: f64) -> Result<Self> {
        Self::new(ObjectiveKind::LpPower { p })
    }

    pub fn crossover(a: f64) -> Result<Self> {
        Self::new(ObjectiveKind::Crossover { a })
    }

    pub fn zeta1() -> Self {
        Self { kind: ObjectiveKind::Zeta1 }
    }

    pub fn zeta2() -> Self {
        Self { kind: ObjectiveKind::Zeta2 }
    }

    pub fn gaussian_like(q: f64) -> Result<Self> {
        Self::new(ObjectiveKind::GaussianLike { q })
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    /// True when f' is the sign function exactly (lp with p = 1). The
    /// recurrent solver then uses discrete Hopfield semantics: exact-equality
    /// convergence and retention of the previous coefficient on a zero
    /// argument.
    pub fn has_sign_derivative(&self) -> bool {
        matches!(self.kind, ObjectiveKind::LpPower { p } if p == 1.0)
    }

    /// f(x). For kinds defined only through f' (zeta1, zeta2, gauss) this is
    /// the even antiderivative with f(0) = 0, in closed form where one
    /// exists and by adaptive quadrature otherwise. Used for convergence
    /// diagnostics only.
    pub fn value(&self, x: f64) -> f64 {
        let ax = x.abs();
        match self.kind {
            ObjectiveKind::LpPower { p } => {
                if p == 2.0 {
                    x * x
                } else if p == 1.0 {
                    ax
                } else if p == 0.5 {
                    ax.sqrt()
                } else if p == 1.5 {
                    ax * ax.sqrt()
                } else {
                    ax.powf(p)
                }
            }
            ObjectiveKind::Crossover { a } => {
                if ax <= a {
                    x * x
                } else {
                    ax
                }
            }
            // integral of 1 - sech t is t - 2 atan(tanh(t/2))
            ObjectiveKind::Zeta1 => ax - 2.0 * (ax / 2.0).tanh().atan(),
            // integral of tanh² t = 1 - sech² t is t - tanh t
            ObjectiveKind::Zeta2 => ax - ax.tanh(),
            ObjectiveKind::GaussianLike { q } => {
                if q == 1.0 {
                    1.0 - (-ax).exp()
                } else {
                    adaptive_simpson(|t| (-t.powf(q)).exp(), 0.0, ax, 1e-10)
                }
            }
        }
    }

    /// f'(x), odd by construction. For lp with p < 1 the subderivative at
    /// x = 0 is taken to be 0 rather than a numerical infinity.
    pub fn derivative(&self, x: f64) -> f64 {
        let ax = x.abs();
        match self.kind {
            ObjectiveKind::LpPower { p } => {
                if p == 2.0 {
                    2.0 * x
                } else if p == 1.0 {
                    sign(x)
                } else if x == 0.0 {
                    0.0
                } else if p == 0.5 {
                    0.5 / ax.sqrt() * sign(x)
                } else if p == 1.5 {
                    1.5 * ax.sqrt() * sign(x)
                } else {
                    p * ax.powf(p - 1.0) * sign(x)
                }
            }
            ObjectiveKind::Crossover { a } => {
                if ax <= a {
                    2.0 * x
                } else {
                    sign(x)
                }
            }
            ObjectiveKind::Zeta1 => (1.0 - 1.0 / ax.cosh()) * sign(x),
            ObjectiveKind::Zeta2 => {
                let t = ax.tanh();
                t * t * sign(x)
            }
            ObjectiveKind::GaussianLike { q } => (-ax.powf(q)).exp() * sign(x),
        }
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ObjectiveKind::LpPower { p } => write!(f, "lp:{p}"),
            ObjectiveKind::Crossover { a } => write!(f, "crossover:{a}"),
            ObjectiveKind::Zeta1 => write!(f, "zeta1"),
            ObjectiveKind::Zeta2 => write!(f, "zeta2"),
            ObjectiveKind::GaussianLike { q } => write!(f, "gauss:{q}"),
        }
    }
}

impl FromStr for ObjectiveSpec {
    type Err = Error;

    /// Selection grammar: `lp:<p>`, `crossover:<a>`, `zeta1`, `zeta2`,
    /// `gauss:<q>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(2, ':');
        let head = parts.next().unwrap_or_default().trim();
        let param = parts.next().map(str::trim);
        let parse = |p: Option<&str>| -> Result<f64> {
            p.ok_or_else(|| Error::Config(format!("objective '{s}' is missing its parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("objective '{s}': {e}")))
        };
        match head {
            "lp" => Self::lp(parse(param)?),
            "crossover" => Self::crossover(parse(param)?),
            "zeta1" => Ok(Self::zeta1()),
            "zeta2" => Ok(Self::zeta2()),
            "gauss" => Self::gaussian_like(parse(param)?),
            _ => Err(Error::Config(format!("unknown objective '{s}'"))),
        }
    }
}

/// Plain adaptive Simpson quadrature. Only drives the diagnostic
/// antiderivatives, so simplicity wins over sophistication.
fn adaptive_simpson(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse(
        f: impl Fn(f64) -> f64 + Copy,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    recurse(f, a, b, simpson(f, a, b), tol, 40)
}
