//! Numerical core for the maximal marginal degrees of freedom of radial kernels.
//!
//! The crate builds, bottom up:
//!
//! - [`legendre`]: scaled and shifted Legendre polynomials `Q_k(x) = sqrt(2k+1) P_k(2x-1)`
//!   and Gauss–Legendre rules on `[0, 1]`.
//! - [`kernel`]: radial kernels `k(x, y) = phi(|x - y|^2 / d)`, Legendre expansions of the
//!   profile `phi`, the tail remainder `E_phi(n)` and coefficient decay classification.
//! - [`weights`]: the moment-matching weight functions `w_m^x` and their tensor products.
//! - [`operator`]: quadrature discretization of the integral operator `L_k`, its Mercer
//!   eigensystem and RKHS error evaluation.
//! - [`dof`]: pointwise, maximal and discrete marginal degrees of freedom, the effective
//!   dimension and the min-characterization objective.
//! - [`bounds`]: closed-form bound evaluators (degrees of freedom, coefficient decay,
//!   Nyström center counts, regularization operator norm).
//! - [`nystrom`]: full and Nyström kernel ridge regression.
//!
//! Everything here is `no_std` (with `alloc`); file formats and the experiment CLI live
//! in the companion `mmdf-cli` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod dof;
mod error;
pub mod kernel;
pub mod legendre;
pub mod linalg;
pub mod nystrom;
pub mod operator;
pub mod points;
pub mod sampling;
pub mod weights;

pub use error::{Error, Result};
pub use kernel::{KernelSpec, Profile};
pub use legendre::QuadratureRule;
pub use operator::DiscretizedOperator;
pub use points::PointSet;
pub use weights::{DesignDensity, MomentWeight};
