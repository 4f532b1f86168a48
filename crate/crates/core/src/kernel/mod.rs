//! Radial kernels `k(x, y) = phi(|x - y|^2 / d)` on `[0, 1]^d`.

mod decay;
mod expansion;
mod profile;

pub use decay::{classify_coefficients, classify_decay, DecayClass, DecayFit, DecayKind, DEFAULT_NOISE_FLOOR};
pub use expansion::{expand_profile, LegendreExpansion, REMAINDER_GRID};
pub use profile::{MaternSmoothness, Profile, TabulatedProfile};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::points::PointSet;

/// Largest admissible overshoot of the radial argument above 1.
pub const ARGUMENT_TOLERANCE: f64 = 1e-12;

/// A radial kernel: outer profile plus ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub profile: Profile,
    pub dim: usize,
}

impl KernelSpec {
    pub fn new(profile: Profile, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("kernel dimension must be at least 1"));
        }
        profile.validate()?;
        Ok(Self { profile, dim })
    }

    pub fn gaussian(gamma: f64, dim: usize) -> Result<Self> {
        Self::new(Profile::Gaussian { gamma }, dim)
    }

    /// `phi(0) = k(x, x)`.
    pub fn diagonal(&self) -> f64 {
        self.profile.eval(0.0)
    }

    /// Radial argument `|x - y|^2 / d`.
    #[inline]
    pub fn argument(&self, x: &[f64], y: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        sq / self.dim as f64
    }

    /// `k(x, y)` with domain checks.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(invalid(alloc::format!(
                "expected {}-dimensional points, got {} and {}",
                self.dim,
                x.len(),
                y.len()
            )));
        }
        let t = self.argument(x, y);
        if !(t <= 1.0 + ARGUMENT_TOLERANCE) {
            return Err(Error::Domain {
                what: "radial argument",
                value: t,
                domain: "[0, 1]",
            });
        }
        Ok(self.profile.eval(t))
    }

    /// `k(x, y)` without checks, for inner loops over validated points.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.profile.eval(self.argument(x, y))
    }

    /// Gram matrix `K_ij = k(x_i, x_j)`; exactly symmetric.
    pub fn gram(&self, points: &PointSet) -> Result<DMatrix<f64>> {
        self.check_points(points)?;
        let n = points.len();
        let diag = self.diagonal();
        let mut k = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let pj = points.point(j);
            k[(j, j)] = diag;
            for i in j + 1..n {
                let v = self.eval_unchecked(points.point(i), pj);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Rectangular kernel matrix `K_ij = k(a_i, b_j)`.
    pub fn cross_gram(&self, a: &PointSet, b: &PointSet) -> Result<DMatrix<f64>> {
        self.check_points(a)?;
        self.check_points(b)?;
        Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| {
            self.eval_unchecked(a.point(i), b.point(j))
        }))
    }

    /// Column `(k(x, p_1), ..., k(x, p_n))`.
    pub fn column(&self, points: &PointSet, x: &[f64]) -> Result<DVector<f64>> {
        self.check_point(x)?;
        Ok(DVector::from_iterator(
            points.len(),
            points.iter().map(|p| self.eval_unchecked(x, p)),
        ))
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid(alloc::format!(
                "expected a {}-dimensional point, got {}",
                self.dim,
                x.len()
            )));
        }
        for &v in x {
            crate::legendre::check_unit("coordinate", v)?;
        }
        Ok(())
    }

    pub(crate) fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.dim() != self.dim {
            return Err(invalid(alloc::format!(
                "expected {}-dimensional points, got {}",
                self.dim,
                points.dim()
            )));
        }
        for &v in points.coords() {
            crate::legendre::check_unit("coordinate", v)?;
        }
        Ok(())
    }

    /// Legendre expansion of the profile (see [`expand_profile`]).
    pub fn expand(&self, degree: usize, rule: &crate::QuadratureRule) -> Result<LegendreExpansion> {
        expand_profile(&self.profile, degree, rule)
    }
}
