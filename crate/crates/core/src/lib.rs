//! Generalized principal component analysis.
//!
//! Conventional PCA maximizes the sum of squared principal components
//! `Σ_i (w'x_i)²` over unit vectors w. This crate generalizes the square to
//! an arbitrary convex function f and solves the resulting problem two ways:
//!
//! * [`ascent`] — directly in input space, by the normalized gradient ascent
//!   `w ← Σ_i f'(w'x_i) x_i / ‖·‖` with greedy orthogonal deflation;
//! * [`kpca`] — in an implicit kernel feature space, by driving the dual
//!   coefficients c to a fixed point of `c ← f'(Kc/√(c'Kc))`. The f(x) = x²
//!   case reduces to power iteration on the Gram matrix, and f(x) = |x|
//!   reduces to Hopfield sign updates (parallel or serial).
//!
//! [`objective`] holds the menu of objective functions, [`kernel`] the Gram
//! machinery (centering, deflation, test-point bookkeeping), and [`oracle`]
//! brute-force reference implementations used by the test suites.

pub mod ascent;
pub mod data;
pub mod error;
pub mod kernel;
pub mod kpca;
pub mod objective;
pub mod oracle;

pub use ascent::{ascend, fit, init_direction, AscentDiagnostics, AscentSettings, PrincipalBasis};
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use kernel::{gram, DeflationStep, GramState, KernelSpec};
pub use kpca::{
    fit as fit_kernel, init_dual, iterate_parallel, solve_component, DualComponent, KernelModel,
    UpdateMode,
};
pub use objective::{ObjectiveKind, ObjectiveSpec};
