//! Scaled and shifted Legendre polynomials on `[0, 1]` and Gauss–Legendre quadrature.
//!
//! `Q_k(x) = sqrt(2k + 1) * P_k(2x - 1)` is an orthonormal system in `L^2[0, 1]` with
//! `|Q_k(x)| <= sqrt(2k + 1)`. All evaluation goes through the three-term recurrence of
//! `P_k`, which stays stable far beyond the degrees used here.

use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::error::{invalid, Error, Result};
use crate::points::{tensor_product, PointSet};

/// Points this far outside `[0, 1]` are still accepted (and clamped).
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

/// Node count used when a caller does not pick one.
pub const DEFAULT_RULE_SIZE: usize = 256;

pub(crate) fn check_unit(what: &'static str, x: f64) -> Result<f64> {
    if !(-DOMAIN_TOLERANCE..=1.0 + DOMAIN_TOLERANCE).contains(&x) {
        return Err(Error::Domain {
            what,
            value: x,
            domain: "[0, 1]",
        });
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Runs the recurrence for `P_0 .. P_max` at `t` in `[-1, 1]`, calling `sink(k, P_k(t))`.
#[inline]
fn legendre_sweep(max_degree: usize, t: f64, mut sink: impl FnMut(usize, f64)) {
    let mut prev = 1.0;
    sink(0, prev);
    if max_degree == 0 {
        return;
    }
    let mut cur = t;
    sink(1, cur);
    for j in 1..max_degree {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * t * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        sink(j + 1, cur);
    }
}

#[inline]
fn scale(k: usize) -> f64 {
    (2.0 * k as f64 + 1.0).sqrt()
}

/// `Q_k(x)` for `x` in `[0, 1]`.
pub fn eval_scaled_legendre(k: usize, x: f64) -> Result<f64> {
    let x = check_unit("x", x)?;
    let mut value = 1.0;
    legendre_sweep(k, 2.0 * x - 1.0, |j, p| {
        if j == k {
            value = p;
        }
    });
    Ok(scale(k) * value)
}

/// `[Q_0(x), ..., Q_max(x)]` from a single recurrence sweep.
///
/// Each entry is bit-identical to the corresponding [`eval_scaled_legendre`] call.
pub fn eval_scaled_legendre_block(max_degree: usize, x: f64) -> Result<Vec<f64>> {
    let x = check_unit("x", x)?;
    let mut out = Vec::with_capacity(max_degree + 1);
    fill_block(max_degree, x, &mut out);
    Ok(out)
}

/// Unchecked block evaluation into a reusable buffer.
pub(crate) fn fill_block(max_degree: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    legendre_sweep(max_degree, 2.0 * x - 1.0, |k, p| out.push(scale(k) * p));
}

/// `sum_k coeffs[k] * Q_k(x)`, unchecked.
pub(crate) fn series_sum(coeffs: &[f64], first: usize, x: f64) -> f64 {
    if coeffs.len() <= first {
        return 0.0;
    }
    let mut acc = 0.0;
    legendre_sweep(coeffs.len() - 1, 2.0 * x - 1.0, |k, p| {
        if k >= first {
            acc += coeffs[k] * scale(k) * p;
        }
    });
    acc
}

/// The basis `{Q_0, ..., Q_max_degree}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaledLegendreBasis {
    max_degree: usize,
}

impl ScaledLegendreBasis {
    pub fn new(max_degree: usize) -> Self {
        Self { max_degree }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.max_degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        eval_scaled_legendre_block(self.max_degree, x)
    }

    /// Gram matrix `G_ij = sum_q w_q Q_i(z_q) Q_j(z_q)`, row-major.
    pub fn gram(&self, rule: &QuadratureRule) -> Vec<f64> {
        let n = self.len();
        let mut g = alloc::vec![0.0; n * n];
        let mut q = Vec::with_capacity(n);
        for (&z, &w) in rule.nodes().iter().zip(rule.weights()) {
            fill_block(self.max_degree, z, &mut q);
            for i in 0..n {
                let wi = w * q[i];
                for j in 0..n {
                    g[i * n + j] += wi * q[j];
                }
            }
        }
        g
    }
}

/// A quadrature rule on `[0, 1]`: strictly increasing nodes, positive weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// The `n`-point Gauss–Legendre rule mapped affinely from `[-1, 1]` to `[0, 1]`.
    ///
    /// Nodes are found by Newton's method on `P_n` started from Chebyshev-type guesses;
    /// the rule integrates polynomials of degree `2n - 1` exactly.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("a Gauss-Legendre rule needs at least one node"));
        }
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        // Roots come in +/- pairs; solve for the non-negative half and mirror.
        for i in 0..n.div_ceil(2) {
            let mut t = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, t);
                deriv = dp;
                let step = p / dp;
                t -= step;
                if step.abs() <= 1e-15 * t.abs().max(1.0) {
                    deriv = legendre_with_derivative(n, t).1;
                    break;
                }
            }
            if n % 2 == 1 && i == n / 2 {
                t = 0.0;
                deriv = legendre_with_derivative(n, 0.0).1;
            }
            let w = 2.0 / ((1.0 - t * t) * deriv * deriv);
            // t > 0 maps to the upper half of [0, 1]
            nodes[n - 1 - i] = 0.5 * (1.0 + t);
            nodes[i] = 0.5 * (1.0 - t);
            weights[n - 1 - i] = 0.5 * w;
            weights[i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    /// Builds a rule from raw parts, validating the invariants.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(invalid("nodes and weights must be non-empty and of equal length"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("nodes must be strictly increasing"));
        }
        if nodes.iter().any(|&z| !(0.0..=1.0).contains(&z)) {
            return Err(invalid("nodes must lie in [0, 1]"));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(invalid("weights must be positive"));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_0^1 f(z) dz`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }

    /// `int_a^b f(z) dz` by the affine image of the rule.
    pub fn integrate_on(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = b - a;
        h * self.integrate(|z| f(a + h * z))
    }

    /// Tensor-product rule on `[0, 1]^dim`: nodes (last axis fastest) and product weights.
    pub fn tensor(&self, dim: usize) -> (PointSet, Vec<f64>) {
        let nodes = tensor_product(&self.nodes, dim);
        let weights = tensor_product(&self.weights, dim)
            .iter()
            .map(|w| w.iter().product())
            .collect();
        (nodes, weights)
    }
}

/// `(P_n(t), P_n'(t))` for `|t| < 1`.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 0.0;
    legendre_sweep(n, t, |k, p| {
        if k + 1 == n {
            prev = p;
        }
        if k == n {
            cur = p;
        }
    });
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (cur, nf * (t * cur - prev) / (t * t - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_degree_values() {
        assert_eq!(eval_scaled_legendre(0, 0.7).unwrap(), 1.0);
        assert!(eval_scaled_legendre(1, 0.5).unwrap().abs() < 1e-15);
        // Q_3(x) = sqrt(7) * (5 t^3 - 3 t) / 2 with t = 2x - 1
        let explicit = |x: f64| {
            let t = 2.0 * x - 1.0;
            7f64.sqrt() * (5.0 * t * t * t - 3.0 * t) / 2.0
        };
        assert_relative_eq!(eval_scaled_legendre(3, 1.0).unwrap(), 7f64.sqrt(), max_relative = 1e-14);
        for &x in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            assert_relative_eq!(
                eval_scaled_legendre(3, x).unwrap(),
                explicit(x),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn block_matches_single_calls_bitwise() {
        for &x in &[0.0, 0.31, 0.5, 0.999, 1.0] {
            let block = eval_scaled_legendre_block(60, x).unwrap();
            for (k, &v) in block.iter().enumerate() {
                assert_eq!(v.to_bits(), eval_scaled_legendre(k, x).unwrap().to_bits());
            }
        }
        assert_eq!(eval_scaled_legendre_block(1, 1.0).unwrap(), [1.0, 3f64.sqrt()]);
        let b = eval_scaled_legendre_block(2, 0.5).unwrap();
        assert_eq!(b[0], 1.0);
        assert!(b[1].abs() < 1e-15);
        assert_relative_eq!(b[2], -(5f64.sqrt()) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn domain_checks() {
        assert!(matches!(eval_scaled_legendre(2, 1.1), Err(Error::Domain { .. })));
        assert!(eval_scaled_legendre(2, -1e-3).is_err());
        assert!(eval_scaled_legendre(2, f64::NAN).is_err());
        // within tolerance: clamped
        assert_relative_eq!(
            eval_scaled_legendre(2, 1.0 + 5e-13).unwrap(),
            5f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn endpoints() {
        for k in 0..=200usize {
            let s = scale(k);
            assert_relative_eq!(eval_scaled_legendre(k, 1.0).unwrap(), s, max_relative = 1e-10);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(
                eval_scaled_legendre(k, 0.0).unwrap(),
                sign * s,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn small_rules() {
        let r1 = QuadratureRule::gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.5]);
        assert_eq!(r1.weights(), &[1.0]);
        let r2 = QuadratureRule::gauss_legendre(2).unwrap();
        let off = 1.0 / (2.0 * 3f64.sqrt());
        assert_relative_eq!(r2.nodes()[0], 0.5 - off, epsilon = 1e-15);
        assert_relative_eq!(r2.nodes()[1], 0.5 + off, epsilon = 1e-15);
        assert_relative_eq!(r2.weights()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r2.weights()[1], 0.5, epsilon = 1e-15);
        assert!(QuadratureRule::gauss_legendre(0).is_err());
    }

    #[test]
    fn rule_invariants_and_exactness() {
        for n in [2usize, 3, 7, 16, 64, 255, 256, 512] {
            let r = QuadratureRule::gauss_legendre(n).unwrap();
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]), "n={n}");
            assert!(r.nodes().iter().all(|&z| (0.0..=1.0).contains(&z)));
            assert!(r.weights().iter().all(|&w| w > 0.0));
            let total: f64 = r.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "n={n}: sum {total}");
            assert_relative_eq!(r.integrate(|x| x * x * x), 0.25, epsilon = 1e-15);
            // highest exact monomial degree 2n - 1
            let deg = (2 * n - 1).min(60) as i32;
            assert_relative_eq!(
                r.integrate(|x| x.powi(deg)),
                1.0 / (deg as f64 + 1.0),
                max_relative = 1e-13
            );
        }
        // degree 2n is not exact
        let r = QuadratureRule::gauss_legendre(3).unwrap();
        assert!((r.integrate(|x| x.powi(6)) - 1.0 / 7.0).abs() > 1e-6);
    }

    #[test]
    fn orthonormal_gram() {
        let rule = QuadratureRule::gauss_legendre(64).unwrap();
        let basis = ScaledLegendreBasis::new(20);
        let g = basis.gram(&rule);
        let n = basis.len();
        let dev = (0..n * n)
            .map(|ij| (g[ij] - if ij / n == ij % n { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "max |G - I| = {dev}");
    }

    #[test]
    fn tensor_rule_integrates_products() {
        let r = QuadratureRule::gauss_legendre(4).unwrap();
        let (nodes, w) = r.tensor(2);
        assert_eq!(nodes.len(), 16);
        let s: f64 = nodes.iter().zip(&w).map(|(p, w)| w * p[0] * p[1] * p[1]).sum();
        assert_relative_eq!(s, 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(r.integrate_on(1.0, 3.0, |z| z), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn from_parts_validates() {
        assert!(QuadratureRule::from_parts(alloc::vec![0.5, 0.2], alloc::vec![0.5, 0.5]).is_err());
        assert!(QuadratureRule::from_parts(alloc::vec![0.5], alloc::vec![0.0]).is_err());
        assert!(QuadratureRule::from_parts(alloc::vec![1.5], alloc::vec![1.0]).is_err());
        assert!(QuadratureRule::from_parts(alloc::vec![0.5], alloc::vec![1.0]).is_ok());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn uniform_bound(x in 0.0f64..=1.0, k in 0usize..=40) {
                let q = eval_scaled_legendre(k, x).unwrap();
                prop_assert!(q.abs() <= (2.0 * k as f64 + 1.0).sqrt() + 1e-9);
            }
        }
    }
}
