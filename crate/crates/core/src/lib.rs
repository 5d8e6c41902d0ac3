//! Optimal explicit Adams-type finite-difference formulas in the Hilbert
//! space `W2^(m,m-1)(0,1)`.
//!
//! A formula
//!
//! ```text
//! sum_{b=0}^{k} C_b phi(h b) - h sum_{b=0}^{k} C1_b phi'(h b) ~ 0
//! ```
//!
//! is optimal when its error functional has the smallest norm among all
//! formulas exact on `1, x, ..., x^(m-2), e^(-x)`. With the Adams choice
//! `C = (0, ..., 0, -1, 1)` the coefficients `C1` solve a square linear
//! system built from the Green's function of `d^(2m)/dx^(2m) - d^(2m-2)/dx^(2m-2)`.
//!
//! ```
//! use optimal_fd::{optimal_adams, FormulaParams, PrecisionContext};
//!
//! let ctx = PrecisionContext::default();
//! let opt = optimal_adams(FormulaParams::new(3, 10, 5)?, &ctx)?;
//! let sum: f64 = opt.formula.c1().iter().map(|c| c.to_f64()).sum();
//! assert!((sum - 1.0).abs() < 1e-15);
//! # Ok::<(), optimal_fd::Error>(())
//! ```
//!
//! Modules:
//!
//! - [`kernel`]: Green's function `G_m`, its derivatives, Euler-Frobenius
//!   polynomials.
//! - [`functional`]: formulas, the error functional, the norm.
//! - [`direct_solver`]: assembly and solution of the optimality system,
//!   optimality diagnostics.
//! - [`spectral`]: the characteristic polynomial, its roots and the
//!   root-power representation of the coefficients.
//! - [`integrator`]: the formulas as multistep ODE solvers, with an
//!   Adams-Bashforth baseline.
//!
//! All arithmetic is multiprecision (MPFR through `rug`); the width is set
//! by a [`PrecisionContext`], 256 bits by default.

pub mod complex;
pub mod direct_solver;
pub mod discrete;
pub mod error;
pub mod functional;
pub mod integrator;
pub mod kernel;
pub mod linalg;
pub mod poly;
pub mod precision;
pub mod quadrature;
pub mod spectral;

pub use direct_solver::{optimal_adams, OptimalFormula};
pub use error::{Error, Result};
pub use functional::{FdFormula, FormulaParams};
pub use integrator::{IvpProblem, Startup};
pub use precision::{PrecisionContext, Real};
pub use spectral::{cross_validate, SpectralRep};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/functional.md")]
    mod functional {}
    #[doc = include_str!("../../../book/src/optimal_coefficients.md")]
    mod optimal_coefficients {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
