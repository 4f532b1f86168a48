//! Closed-form bound evaluators: degrees of freedom, objective values, Legendre
//! coefficient decay, Nyström center counts and the regularization operator norm.
//!
//! Evaluators that take `lambda` have `_ln` twins taking `ln(1/lambda)` so that
//! schedules such as `lambda_n = exp(-n)` can be evaluated without underflow.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};


use crate::error::{invalid, Error, Result};
use crate::kernel::Profile;
use crate::legendre::QuadratureRule;

fn positive(what: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain {
            what,
            value: v,
            domain: "(0, inf)",
        })
    }
}

fn unit_open(what: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(Error::Domain {
            what,
            value: v,
            domain: "(0, 1)",
        })
    }
}

/// Denominator of the polynomial-class exponent `2d / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentVariant {
    /// `s - d - 1/2`.
    #[default]
    DimensionAdjusted,
    /// `s`, as in the objective-value bound.
    Unadjusted,
}

impl ExponentVariant {
    pub fn denominator(self, d: usize, s: f64) -> f64 {
        match self {
            ExponentVariant::DimensionAdjusted => s - d as f64 - 0.5,
            ExponentVariant::Unadjusted => s,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExponentVariant::DimensionAdjusted => "s-d-1/2",
            ExponentVariant::Unadjusted => "s",
        }
    }
}

/// `C_s lambda^{-2d / denominator}`.
pub fn bound_dof_polynomial(lambda: f64, d: usize, s: f64, c_s: f64, variant: ExponentVariant) -> Result<f64> {
    bound_dof_polynomial_ln(-positive("lambda", lambda)?.ln(), d, s, c_s, variant)
}

pub fn bound_dof_polynomial_ln(
    ln_inv_lambda: f64,
    d: usize,
    s: f64,
    c_s: f64,
    variant: ExponentVariant,
) -> Result<f64> {
    let den = variant.denominator(d, s);
    if !(den > 0.0) {
        return Err(invalid(alloc::format!(
            "exponent denominator {} = {den} must be positive",
            variant.label()
        )));
    }
    Ok(c_s * (2.0 * d as f64 / den * ln_inv_lambda).exp())
}

/// `C_rho ln(1/lambda)^{2d}` for `0 < lambda < 1`.
pub fn bound_dof_analytic(lambda: f64, d: usize, c_rho: f64) -> Result<f64> {
    bound_dof_analytic_ln(-unit_open("lambda", lambda)?.ln(), d, c_rho)
}

pub fn bound_dof_analytic_ln(ln_inv_lambda: f64, d: usize, c_rho: f64) -> Result<f64> {
    if !(ln_inv_lambda > 0.0) {
        return Err(Error::Domain {
            what: "ln(1/lambda)",
            value: ln_inv_lambda,
            domain: "(0, inf)",
        });
    }
    Ok(c_rho * ln_inv_lambda.powi(2 * d as i32))
}

/// `C_s = c_p^2 2^{2d} (1 + 4 C_{phi,s} 8^s)`.
pub fn constant_cs(c_p: f64, d: usize, s: f64, c_phi_s: f64) -> Result<f64> {
    positive("c_p", c_p)?;
    positive("s", s)?;
    if !(c_phi_s >= 0.0) || !c_phi_s.is_finite() {
        return Err(Error::Domain {
            what: "C_phi_s",
            value: c_phi_s,
            domain: "[0, inf)",
        });
    }
    if s > 300.0 {
        return Err(invalid(alloc::format!("8^s overflows for s = {s}")));
    }
    let v = c_p * c_p * 4f64.powi(d as i32) * (1.0 + 4.0 * c_phi_s * 8f64.powf(s));
    if !v.is_finite() {
        return Err(invalid("C_s overflows"));
    }
    Ok(v)
}

/// Objective-value bound `lambda C_s lambda^{-2d/s}` (polynomial class).
pub fn objective_bound_polynomial(lambda: f64, d: usize, s: f64, c_s: f64) -> Result<f64> {
    Ok(lambda * bound_dof_polynomial(lambda, d, s, c_s, ExponentVariant::Unadjusted)?)
}

/// `(1 + c_p m^d) E_phi(floor((m - 1) / 2))`, the uniform-norm error of `L_k W_m^x`.
pub fn approximation_bound_uniform(c_p: f64, m: usize, d: usize, remainder: f64) -> f64 {
    (1.0 + c_p * (m as f64).powi(d as i32)) * remainder
}

/// `4 c_p^2 m^{2d} E_phi(floor((m - 1) / 2))`, the squared RKHS error of `L_k W_m^x`.
pub fn approximation_bound_rkhs(c_p: f64, m: usize, d: usize, remainder: f64) -> f64 {
    4.0 * c_p * c_p * (m as f64).powi(2 * d as i32) * remainder
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientForm {
    /// Product form, valid for `n >= s + 1`.
    Exact,
    /// `C_V n^{-(s+1/2)} / sqrt(2n+1)`, valid for `n >= 2s + 1`.
    Simplified,
}

/// Bound on `|c_n|` for a profile whose `s`-th derivative has bounded variation `V_s`.
pub fn coefficient_bound_polynomial(n: usize, s: u32, v_s: f64, form: CoefficientForm) -> Result<f64> {
    let su = s as usize;
    if n <= su {
        return Err(invalid(alloc::format!("coefficient bound needs n > s, got n = {n}, s = {s}")));
    }
    if !(v_s >= 0.0) {
        return Err(Error::Domain {
            what: "V_s",
            value: v_s,
            domain: "[0, inf)",
        });
    }
    let nf = n as f64;
    let front = SQRT_2 * v_s / (2.0 * nf + 1.0).sqrt();
    match form {
        CoefficientForm::Exact => {
            // the empty product (s = 0) is taken as 1
            let prod: f64 = (1..=su).map(|k| 1.0 / (nf - k as f64 + 0.5)).product();
            Ok(front * prod / (PI * (2.0 * nf - 2.0 * s as f64 - 1.0)).sqrt())
        }
        CoefficientForm::Simplified => {
            if n < 2 * su + 1 {
                return Err(invalid(alloc::format!(
                    "simplified coefficient bound needs n >= 2s + 1 = {}, got {n}",
                    2 * su + 1
                )));
            }
            let c_v = SQRT_2 * 2f64.powi(s as i32) * v_s / PI.sqrt();
            Ok(c_v * nf.powf(-(s as f64 + 0.5)) / (2.0 * nf + 1.0).sqrt())
        }
    }
}

/// Exact product form below `2s + 1`, simplified form from there on.
pub fn coefficient_bound_polynomial_auto(n: usize, s: u32, v_s: f64) -> Result<f64> {
    let form = if n > 2 * s as usize {
        CoefficientForm::Simplified
    } else {
        CoefficientForm::Exact
    };
    coefficient_bound_polynomial(n, s, v_s, form)
}

/// Bound on `|c_n|` for a profile analytic inside the Bernstein ellipse `E_rho`.
pub fn coefficient_bound_analytic(n: usize, rho: f64, d_rho: f64) -> Result<f64> {
    if !(rho > 1.0) || !rho.is_finite() {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
            domain: "(1, inf)",
        });
    }
    if n == 0 {
        return Ok(SQRT_2 * d_rho / 2.0);
    }
    let nf = n as f64;
    Ok(d_rho * SQRT_2 * nf.sqrt() / ((2.0 * nf + 1.0).sqrt() * rho.powf(nf)))
}

/// Required Nyström centers, with a flag when a degenerate log term forced `m = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterCount {
    pub m: usize,
    pub log_term: f64,
    pub clamped: bool,
}

/// `ceil(max(67, 5 N) ln(12 kappa^2 / (lambda delta)))`, at least 1.
pub fn nystrom_center_count(lambda: f64, dof_bound: f64, kappa: f64, delta: f64) -> Result<CenterCount> {
    positive("lambda", lambda)?;
    positive("kappa", kappa)?;
    unit_open("delta", delta)?;
    let arg = 12.0 * kappa * kappa / (lambda * delta);
    positive("log argument", arg)?;
    let log_term = arg.ln();
    let raw = (67f64.max(5.0 * dof_bound) * log_term).ceil();
    if !(raw >= 1.0) {
        return Ok(CenterCount {
            m: 1,
            log_term,
            clamped: true,
        });
    }
    Ok(CenterCount {
        m: raw as usize,
        log_term,
        clamped: false,
    })
}

/// `2 beta (1 + N1) / (3n) + sqrt(2 beta (1 + N2) / n)` with `beta = ln(4 tr / (lambda delta))`.
///
/// `dof_first` and `dof_sqrt` are the dof bounds entering each term; they coincide except
/// for the polynomial class, whose two terms carry different exponents.
pub fn regularization_bound_terms(beta: f64, n: f64, dof_first: f64, dof_sqrt: f64) -> f64 {
    2.0 * beta * (1.0 + dof_first) / (3.0 * n) + (2.0 * beta * (1.0 + dof_sqrt) / n).sqrt()
}

pub fn regularization_operator_bound(lambda: f64, n: usize, delta: f64, trace: f64, dof_bound: f64) -> Result<f64> {
    regularization_operator_bound_ln(-positive("lambda", lambda)?.ln(), n, delta, trace, dof_bound)
}

pub fn regularization_operator_bound_ln(
    ln_inv_lambda: f64,
    n: usize,
    delta: f64,
    trace: f64,
    dof_bound: f64,
) -> Result<f64> {
    let beta = regularization_beta(ln_inv_lambda, delta, trace)?;
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    Ok(regularization_bound_terms(beta, n as f64, dof_bound, dof_bound))
}

/// `beta = ln(4 tr / delta) + ln(1/lambda)`, rejected when not positive.
pub fn regularization_beta(ln_inv_lambda: f64, delta: f64, trace: f64) -> Result<f64> {
    unit_open("delta", delta)?;
    positive("trace", trace)?;
    let beta = (4.0 * trace / delta).ln() + ln_inv_lambda;
    if !(beta > 0.0) {
        return Err(Error::Domain {
            what: "ln(4 tr / (lambda delta))",
            value: beta,
            domain: "(0, inf)",
        });
    }
    Ok(beta)
}

/// Smoothness class of the profile `phi~(x) = phi((x + 1) / 2)` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothnessParams {
    Polynomial {
        s: f64,
        v_s: f64,
        c_phi_s: f64,
    },
    Analytic {
        rho: f64,
        d_rho: f64,
        circumference: f64,
    },
}

/// Non-fatal findings of [`SmoothnessParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothnessWarning {
    /// `s <= 3d`: the smoothness assumption is stronger than what the bound needs.
    BelowAssumedSmoothness,
}

impl SmoothnessParams {
    pub fn validate(&self, d: usize) -> Result<Vec<SmoothnessWarning>> {
        let mut warnings = Vec::new();
        match *self {
            SmoothnessParams::Polynomial { s, v_s, c_phi_s } => {
                if !(s > d as f64 + 0.5) {
                    return Err(invalid(alloc::format!("need s > d + 1/2, got s = {s}, d = {d}")));
                }
                if !(v_s >= 0.0) || !(c_phi_s >= 0.0) {
                    return Err(invalid("V_s and C_phi_s must be non-negative"));
                }
                if s <= 3.0 * d as f64 {
                    warnings.push(SmoothnessWarning::BelowAssumedSmoothness);
                }
            }
            SmoothnessParams::Analytic { rho, d_rho, .. } => {
                if !(rho > 1.0) {
                    return Err(invalid(alloc::format!("need rho > 1, got {rho}")));
                }
                if !(d_rho >= 0.0) {
                    return Err(invalid("D(rho) must be non-negative"));
                }
            }
        }
        Ok(warnings)
    }
}

/// A dof bound as a function of `ln(1/lambda)`, with the constant already fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofBoundModel {
    Polynomial { d: usize, s: f64, c_s: f64 },
    Analytic { d: usize, c_rho: f64 },
}

impl DofBoundModel {
    pub fn eval_ln(&self, ln_inv_lambda: f64) -> Result<f64> {
        match *self {
            DofBoundModel::Polynomial { d, s, c_s } => {
                bound_dof_polynomial_ln(ln_inv_lambda, d, s, c_s, ExponentVariant::DimensionAdjusted)
            }
            DofBoundModel::Analytic { d, c_rho } => bound_dof_analytic_ln(ln_inv_lambda, d, c_rho),
        }
    }

    /// The regularization bound; the polynomial class uses `2d / (s - d)` inside the root.
    pub fn regularization_bound_ln(&self, ln_inv_lambda: f64, n: usize, delta: f64, trace: f64) -> Result<f64> {
        let beta = regularization_beta(ln_inv_lambda, delta, trace)?;
        if n == 0 {
            return Err(invalid("sample size must be positive"));
        }
        let first = self.eval_ln(ln_inv_lambda)?;
        let second = match *self {
            DofBoundModel::Polynomial { d, s, c_s } => {
                let den = s - d as f64;
                if !(den > 0.0) {
                    return Err(invalid("need s > d"));
                }
                c_s * (2.0 * d as f64 / den * ln_inv_lambda).exp()
            }
            DofBoundModel::Analytic { .. } => first,
        };
        Ok(regularization_bound_terms(beta, n as f64, first, second))
    }
}

/// Marks each `n` whose regularization bound at `ln(1/lambda_n)` is below `threshold`.
pub fn feasible_lambda_check(
    ln_inv_lambdas: &[f64],
    ns: &[usize],
    model: &DofBoundModel,
    delta: f64,
    trace: f64,
    threshold: f64,
) -> Result<Vec<bool>> {
    regularization_curve(ln_inv_lambdas, ns, model, delta, trace)
        .map(|v| v.into_iter().map(|b| b < threshold).collect())
}

/// Regularization bound along a schedule `(n, ln(1/lambda_n))`.
pub fn regularization_curve(
    ln_inv_lambdas: &[f64],
    ns: &[usize],
    model: &DofBoundModel,
    delta: f64,
    trace: f64,
) -> Result<Vec<f64>> {
    if ln_inv_lambdas.len() != ns.len() {
        return Err(invalid("lambda and n sequences differ in length"));
    }
    ln_inv_lambdas
        .iter()
        .zip(ns)
        .map(|(&l, &n)| model.regularization_bound_ln(l, n, delta, trace))
        .collect()
}

/// Inputs of the external Nyström guarantee; `q`, `nu`, `gamma` are passed through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NystromGuaranteeParams {
    pub kappa: f64,
    pub delta: f64,
    pub q: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl NystromGuaranteeParams {
    pub fn validate(&self, phi0: f64) -> Result<()> {
        if !(self.kappa >= phi0.sqrt() * (1.0 - 1e-12)) {
            return Err(invalid(alloc::format!(
                "kappa = {} is below sqrt(phi(0)) = {}",
                self.kappa,
                phi0.sqrt()
            )));
        }
        unit_open("delta", self.delta)?;
        Ok(())
    }
}

/// Perimeter of the Bernstein ellipse with foci `+-1` and axis sum `rho`.
pub fn ellipse_circumference(rho: f64) -> Result<f64> {
    if !(rho > 1.0) {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
            domain: "(1, inf)",
        });
    }
    let a = 0.5 * (rho + 1.0 / rho);
    let b = 0.5 * (rho - 1.0 / rho);
    // trapezoid rule is spectrally accurate for periodic integrands
    let n = 4096;
    let h = 2.0 * PI / n as f64;
    Ok((0..n)
        .map(|i| {
            let t = i as f64 * h;
            (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt()
        })
        .sum::<f64>()
        * h)
}

/// `D(rho) = 2 L(E_rho) / (pi sqrt(rho^2 - 1)) max_{E_rho} |phi~|`, with the maximum
/// estimated by sampling the ellipse (approximate).
pub fn estimate_d_rho(profile: &Profile, rho: f64) -> Result<SmoothnessParams> {
    let limit = profile
        .analyticity_limit()
        .ok_or_else(|| invalid("profile has no known complex extension"))?;
    if !(rho < limit) {
        return Err(invalid(alloc::format!(
            "rho = {rho} is outside the analyticity region (limit {limit})"
        )));
    }
    let circumference = ellipse_circumference(rho)?;
    let a = 0.5 * (rho + 1.0 / rho);
    let b = 0.5 * (rho - 1.0 / rho);
    let samples = 8192;
    let mut max = 0.0f64;
    for i in 0..samples {
        let t = 2.0 * PI * i as f64 / samples as f64;
        let v = profile
            .complex_modulus(a * t.cos(), b * t.sin())
            .ok_or_else(|| invalid("profile has no known complex extension"))?;
        max = max.max(v);
    }
    let d_rho = 2.0 * circumference / (PI * (rho * rho - 1.0).sqrt()) * max;
    Ok(SmoothnessParams::Analytic {
        rho,
        d_rho,
        circumference,
    })
}

/// Default ellipse parameter: 1.5, or halfway to the analyticity limit if that is closer.
pub fn default_rho(profile: &Profile) -> Option<f64> {
    profile
        .analyticity_limit()
        .map(|limit| 1.5f64.min(1.0 + 0.5 * (limit - 1.0)))
}

/// Finite-difference weights for the `order`-th derivative at `x0` (Fornberg).
fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = alloc::vec![alloc::vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// `V_s = int_{-1}^{1} |phi~^{(s+1)}(x)| (1 - x^2)^{-1/4} dx`, by finite differences of
/// `phi~` and Gauss–Legendre quadrature in `x = cos(theta)` (approximate).
pub fn estimate_variation(profile: &Profile, s: u32) -> Result<f64> {
    let q = s as usize + 1;
    if q > 12 {
        return Err(invalid("finite-difference variation estimate supports s <= 11"));
    }
    let points = q + 3;
    let h = f64::EPSILON.powf(1.0 / (q as f64 + 3.0));
    let span = (points - 1) as f64 * h;
    let phi = |x: f64| profile.eval(0.5 * (x + 1.0));
    let rule = QuadratureRule::gauss_legendre(512)?;
    let mut total = 0.0;
    for (&u, &w) in rule.nodes().iter().zip(rule.weights()) {
        let theta = PI * u;
        let x = theta.cos();
        let start = (x - 0.5 * span).clamp(-1.0, 1.0 - span);
        let xs: Vec<f64> = (0..points).map(|j| start + j as f64 * h).collect();
        let deriv: f64 = fornberg(x, &xs, q)
            .iter()
            .zip(&xs)
            .map(|(c, &z)| c * phi(z))
            .sum();
        // dx (1 - x^2)^{-1/4} = sin(theta)^{1/2} dtheta
        total += w * PI * deriv.abs() * theta.sin().sqrt();
    }
    if !total.is_finite() {
        return Err(Error::Numerical("variation estimate is not finite".into()));
    }
    Ok(total)
}
