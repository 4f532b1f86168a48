//! Moment-matching weight functions.
//!
//! The univariate weight `w_m^x(z) = sum_{l < m} Q_l(x) Q_l(z)` reproduces the monomial
//! moments `int_0^1 w_m^x(z) z^k dz = x^k` for `k < m`, with `||w_m^x||^2 <= m^2`.
//! On a box with design density `p`, the tensor product
//! `W_m^x(z) = prod_i w_{m,[a_i,b_i]}^{x_i}(z_i) / p(z)` satisfies
//! `int |y - z|^{2l} W_m^x(z) p(z) dz = |y - x|^{2l}` for `l <= (m - 1) / 2`.

use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::error::{invalid, Error, Result};
use crate::legendre::{self, fill_block, series_sum, QuadratureRule};

/// Relative tolerance for points sitting on the boundary of an interval.
const BOX_TOLERANCE: f64 = 1e-12;

/// `sum_{l < m} Q_l(x) Q_l(z)` for `x, z` in `[0, 1]`.
pub fn weight_eval_univariate(m: usize, x: f64, z: f64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("moment weight order must be at least 1"));
    }
    let x = legendre::check_unit("x", x)?;
    let z = legendre::check_unit("z", z)?;
    let qx = legendre::eval_scaled_legendre_block(m - 1, x)?;
    Ok(series_sum(&qx, 0, z))
}

/// The weight transported to `[a, b]`: `(b - a)^{-1} w_m^{x~}((z - a) / (b - a))`.
pub fn weight_eval_interval(m: usize, x: f64, a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a < b) {
        return Err(invalid(alloc::format!("interval [{a}, {b}] is empty")));
    }
    let h = b - a;
    weight_eval_univariate(m, to_unit(x, a, h, "x")?, to_unit(z, a, h, "z")?).map(|w| w / h)
}

fn to_unit(v: f64, a: f64, h: f64, what: &'static str) -> Result<f64> {
    let u = (v - a) / h;
    if !(-BOX_TOLERANCE..=1.0 + BOX_TOLERANCE).contains(&u) {
        return Err(Error::Domain {
            what,
            value: v,
            domain: "the weight's interval",
        });
    }
    Ok(u.clamp(0.0, 1.0))
}

/// Shape of a design density before rescaling to its box.
#[derive(Debug, Clone, Copy)]
pub enum DensityShape {
    Uniform,
    /// Proportional to `1 + (1/2) prod_i sin(pi u_i)` in unit coordinates `u`.
    Sinusoidal,
    /// A user evaluator on unit coordinates with declared bounds (before volume scaling).
    Custom {
        eval: fn(&[f64]) -> f64,
        lower: f64,
        upper: f64,
    },
}

/// A probability density on a box, bounded away from zero and infinity.
#[derive(Debug, Clone)]
pub struct DesignDensity {
    shape: DensityShape,
    domain: Vec<(f64, f64)>,
    volume: f64,
    /// Normalizing constant of the shape on the unit cube.
    normalizer: f64,
}

impl DesignDensity {
    pub fn uniform(dim: usize) -> Self {
        Self::unit_cube(DensityShape::Uniform, dim).expect("uniform density is valid")
    }

    /// `p(z) = (1 + sin-product / 2) / Z` with `Z` computed by quadrature.
    pub fn sinusoidal(dim: usize) -> Self {
        Self::unit_cube(DensityShape::Sinusoidal, dim).expect("sinusoidal density is valid")
    }

    pub fn unit_cube(shape: DensityShape, dim: usize) -> Result<Self> {
        Self::on_box(shape, alloc::vec![(0.0, 1.0); dim.max(1)])
    }

    pub fn on_box(shape: DensityShape, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.is_empty() {
            return Err(invalid("density domain needs at least one axis"));
        }
        if domain.iter().any(|&(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(invalid("density domain has an empty or infinite axis"));
        }
        let volume = domain.iter().map(|&(a, b)| b - a).product();
        let dim = domain.len();
        let normalizer = match shape {
            DensityShape::Uniform => 1.0,
            DensityShape::Sinusoidal => {
                // the sine product separates across axes
                let rule = QuadratureRule::gauss_legendre(64)?;
                let axis = rule.integrate(|u| (PI * u).sin());
                1.0 + 0.5 * axis.powi(dim as i32)
            }
            DensityShape::Custom { lower, upper, .. } => {
                if !(lower > 0.0) || !(upper >= lower) || !upper.is_finite() {
                    return Err(Error::Density(alloc::format!(
                        "declared bounds [{lower}, {upper}] must satisfy 0 < lower <= upper < inf"
                    )));
                }
                1.0
            }
        };
        Ok(Self {
            shape,
            domain,
            volume,
            normalizer,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn shape(&self) -> DensityShape {
        self.shape
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.shape, DensityShape::Uniform)
    }

    /// `p(z)`; `z` is assumed to lie in the domain.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let unit = |i: usize| {
            let (a, b) = self.domain[i];
            (z[i] - a) / (b - a)
        };
        let raw = match self.shape {
            DensityShape::Uniform => 1.0,
            DensityShape::Sinusoidal => {
                1.0 + 0.5 * (0..self.dim()).map(|i| (PI * unit(i)).sin()).product::<f64>()
            }
            DensityShape::Custom { eval, .. } => {
                let u: Vec<f64> = (0..self.dim()).map(unit).collect();
                eval(&u)
            }
        };
        raw / (self.normalizer * self.volume)
    }

    pub fn p_min(&self) -> f64 {
        let raw = match self.shape {
            DensityShape::Uniform | DensityShape::Sinusoidal => 1.0,
            DensityShape::Custom { lower, .. } => lower,
        };
        raw / (self.normalizer * self.volume)
    }

    pub fn p_max(&self) -> f64 {
        let raw = match self.shape {
            DensityShape::Uniform => 1.0,
            DensityShape::Sinusoidal => 1.5,
            DensityShape::Custom { upper, .. } => upper,
        };
        raw / (self.normalizer * self.volume)
    }

    /// `c_p = sup 1/p = 1 / p_min`.
    pub fn c_p(&self) -> f64 {
        1.0 / self.p_min()
    }

    /// Evaluates `p(z)` and rejects values inconsistent with the declared lower bound.
    pub fn eval_checked(&self, z: &[f64]) -> Result<f64> {
        let p = self.eval(z);
        if !(p >= 0.5 * self.p_min()) {
            return Err(Error::Density(alloc::format!(
                "p(z) = {p:e} is below half the declared minimum {:e}",
                self.p_min()
            )));
        }
        Ok(p)
    }
}

/// `W_m^x` on the density's box.
#[derive(Debug, Clone)]
pub struct MomentWeight {
    order: usize,
    location: Vec<f64>,
    density: DesignDensity,
    /// Per axis: `Q_l(x~_i)` for `l < m`.
    axis_coeffs: Vec<Vec<f64>>,
}

impl MomentWeight {
    pub fn new(order: usize, location: &[f64], density: &DesignDensity) -> Result<Self> {
        if order == 0 {
            return Err(invalid("moment weight order must be at least 1"));
        }
        if location.len() != density.dim() {
            return Err(invalid("location dimension does not match the density"));
        }
        let axis_coeffs = location
            .iter()
            .zip(density.domain())
            .map(|(&x, &(a, b))| {
                let u = to_unit(x, a, b - a, "location")?;
                legendre::eval_scaled_legendre_block(order - 1, u)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            order,
            location: location.to_vec(),
            density: density.clone(),
            axis_coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn density(&self) -> &DesignDensity {
        &self.density
    }

    /// Product of the per-axis interval weights, without the `1/p` factor.
    pub fn eval_product(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.location.len() {
            return Err(invalid("point dimension does not match the weight"));
        }
        let mut acc = 1.0;
        for ((&zi, &(a, b)), q) in z.iter().zip(self.density.domain()).zip(&self.axis_coeffs) {
            let h = b - a;
            acc *= series_sum(q, 0, to_unit(zi, a, h, "z")?) / h;
        }
        Ok(acc)
    }

    /// `W_m^x(z) = prod_i w_i(z_i) / p(z)`.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        let prod = self.eval_product(z)?;
        Ok(prod / self.density.eval_checked(z)?)
    }

    /// `||W_m^x||^2_{L^2(P)} = int W(z)^2 p(z) dz` by the tensor-product rule.
    pub fn norm_sq(&self, rule: &QuadratureRule) -> Result<f64> {
        if rule.len() < 2 * self.order {
            return Err(invalid(alloc::format!(
                "norm quadrature needs at least {} nodes, got {}",
                2 * self.order,
                rule.len()
            )));
        }
        let dim = self.location.len();
        let (nodes, weights) = rule.tensor(dim);
        let mut z = alloc::vec![0.0; dim];
        let mut total = 0.0;
        for (u, w) in nodes.iter().zip(&weights) {
            for i in 0..dim {
                let (a, b) = self.density.domain()[i];
                z[i] = a + (b - a) * u[i];
            }
            let prod = self.eval_product(&z)?;
            let p = self.density.eval_checked(&z)?;
            total += w * prod * prod / p;
        }
        Ok(total * self.density.volume)
    }

    /// Values of `W_m^x` at a set of nodes.
    pub fn values_at(&self, nodes: &crate::PointSet) -> Result<Vec<f64>> {
        nodes.iter().map(|z| self.eval(z)).collect()
    }
}

/// Univariate weights for many `z` at fixed `x` (shared recurrence).
pub fn weight_values_univariate(m: usize, x: f64, zs: &[f64]) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(invalid("moment weight order must be at least 1"));
    }
    let qx = legendre::eval_scaled_legendre_block(m - 1, x)?;
    let mut qz = Vec::with_capacity(m);
    zs.iter()
        .map(|&z| {
            let z = legendre::check_unit("z", z)?;
            fill_block(m - 1, z, &mut qz);
            Ok(qx.iter().zip(&qz).map(|(a, b)| a * b).sum())
        })
        .collect()
}
