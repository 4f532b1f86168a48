use alloc::vec::Vec;


use super::Profile;
use crate::error::{invalid, Result};
use crate::legendre::{fill_block, series_sum, QuadratureRule};

/// Interior resolution of the grid on which the tail remainder is maximized.
pub const REMAINDER_GRID: usize = 2048;

/// Coefficients `c_l = int_0^1 phi(t) Q_l(t) dt` for `l = 0..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreExpansion {
    coefficients: Vec<f64>,
    quadrature_order: usize,
    truncation_warning: bool,
}

/// Projects `phi` onto `Q_0..Q_degree` with `rule`.
///
/// The rule must have at least `degree + 8` nodes. The returned expansion carries a
/// warning flag when `|c_L|` is not negligible (`> 1e-8 max |c_l|`).
pub fn expand_profile(
    profile: &Profile,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<LegendreExpansion> {
    if rule.len() < degree + 8 {
        return Err(invalid(alloc::format!(
            "quadrature order {} is too small for degree {degree} (need at least {})",
            rule.len(),
            degree + 8
        )));
    }
    let mut coefficients = alloc::vec![0.0; degree + 1];
    let mut q = Vec::with_capacity(degree + 1);
    for (&z, &w) in rule.nodes().iter().zip(rule.weights()) {
        let fw = w * profile.eval(z);
        fill_block(degree, z, &mut q);
        for (c, qk) in coefficients.iter_mut().zip(&q) {
            *c += fw * qk;
        }
    }
    Ok(LegendreExpansion::from_coefficients(coefficients, rule.len()))
}

impl LegendreExpansion {
    /// Wraps precomputed coefficients.
    pub fn from_coefficients(coefficients: Vec<f64>, quadrature_order: usize) -> Self {
        let max = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let last = coefficients.last().map_or(0.0, |c| c.abs());
        Self {
            truncation_warning: last > 1e-8 * max,
            coefficients,
            quadrature_order,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn truncation_degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    /// `|c_L|` exceeds `1e-8 max |c_l|`: the truncation may be too aggressive.
    pub fn truncation_warning(&self) -> bool {
        self.truncation_warning
    }

    /// `sum_{l <= L} c_l Q_l(z)`.
    pub fn eval(&self, z: f64) -> f64 {
        series_sum(&self.coefficients, 0, z)
    }

    /// `E_phi(n) = max_z |sum_{l = n+1}^{L} c_l Q_l(z)|` over the default grid.
    pub fn remainder(&self, n: usize) -> f64 {
        self.remainder_on_grid(n, REMAINDER_GRID)
    }

    /// Remainder maximized over `grid + 1` equispaced points, endpoints included.
    pub fn remainder_on_grid(&self, n: usize, grid: usize) -> f64 {
        if n >= self.truncation_degree() || self.coefficients[n + 1..].iter().all(|&c| c == 0.0) {
            return 0.0;
        }
        let grid = grid.max(1);
        (0..=grid)
            .map(|i| series_sum(&self.coefficients, n + 1, i as f64 / grid as f64).abs())
            .fold(0.0, f64::max)
    }

    /// `sum_l c_l^2`.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rule(n: usize) -> QuadratureRule {
        QuadratureRule::gauss_legendre(n).unwrap()
    }

    /// Adaptive Simpson on [a, b]; independent of the Gauss rule.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    #[test]
    fn polynomial_profiles_have_exact_coefficients() {
        let q2 = Profile::LegendreSeries(alloc::vec![0.0, 0.0, 1.0]);
        let e = expand_profile(&q2, 6, &rule(32)).unwrap();
        for (l, &c) in e.coefficients().iter().enumerate() {
            let want = if l == 2 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-14, "c_{l} = {c}");
        }
        let lin = Profile::Polynomial(alloc::vec![0.0, 1.0]);
        let e = expand_profile(&lin, 5, &rule(16)).unwrap();
        assert_relative_eq!(e.coefficients()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.coefficients()[1], 1.0 / (2.0 * 3f64.sqrt()), epsilon = 1e-15);
        assert!(e.coefficients()[2..].iter().all(|c| c.abs() < 1e-15));
        assert!(!e.truncation_warning());
    }

    #[test]
    fn exponential_coefficients_match_adaptive_simpson() {
        let phi = Profile::gaussian(1.0);
        let e = expand_profile(&phi, 12, &rule(64)).unwrap();
        for l in 0..=12 {
            let f = |t: f64| phi.eval(t) * crate::legendre::eval_scaled_legendre(l, t).unwrap();
            let oracle = adaptive_simpson(&f, 0.0, 1.0, 1e-16);
            assert!(
                (e.coefficients()[l] - oracle).abs() < 1e-12,
                "l={l}: {} vs {oracle}",
                e.coefficients()[l]
            );
        }
    }

    #[test]
    fn rejects_small_rule_and_flags_truncation() {
        assert!(expand_profile(&Profile::gaussian(1.0), 10, &rule(17)).is_err());
        let e = expand_profile(&Profile::gaussian(1.0), 3, &rule(16)).unwrap();
        assert!(e.truncation_warning());
    }

    #[test]
    fn remainder_examples() {
        let q2 = Profile::LegendreSeries(alloc::vec![0.0, 0.0, 1.0]);
        let e = expand_profile(&q2, 6, &rule(32)).unwrap();
        assert!(e.remainder(2) < 1e-13);
        assert_relative_eq!(e.remainder(1), 5f64.sqrt(), max_relative = 1e-13);
        let exact = LegendreExpansion::from_coefficients(alloc::vec![0.0, 0.0, 1.0], 0);
        assert_eq!(exact.remainder(2), 0.0);
        assert_eq!(exact.remainder(5), 0.0);
    }

    #[test]
    fn gaussian_remainder_refinement() {
        let phi = Profile::gaussian(1.0);
        let coarse = expand_profile(&phi, 30, &rule(256)).unwrap();
        let fine = expand_profile(&phi, 60, &rule(256)).unwrap();
        let a = coarse.remainder(10);
        let b = fine.remainder_on_grid(10, 2 * REMAINDER_GRID);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn gaussian_reconstruction_and_parseval() {
        let phi = Profile::gaussian(1.0);
        let r = rule(256);
        let e = expand_profile(&phi, 60, &r).unwrap();
        let err = (0..=1024)
            .map(|i| {
                let z = i as f64 / 1024.0;
                (phi.eval(z) - e.eval(z)).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "reconstruction error {err}");
        for p in [
            Profile::gaussian(1.0),
            Profile::gaussian(4.0),
            Profile::InverseMultiquadric { gamma: 1.0 },
        ] {
            let e = expand_profile(&p, 80, &r).unwrap();
            let l2 = r.integrate(|t| p.eval(t) * p.eval(t));
            assert!((e.energy() - l2).abs() < 1e-10);
        }
    }

    #[test]
    fn remainder_non_increasing() {
        let r = rule(256);
        for p in [Profile::gaussian(1.0), Profile::InverseMultiquadric { gamma: 1.0 }] {
            let e = expand_profile(&p, 60, &r).unwrap();
            for n in 0..59 {
                assert!(e.remainder(n + 1) <= e.remainder(n) + 1e-12, "n={n}");
            }
        }
    }
}
