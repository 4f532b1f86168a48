//! Marginal degrees of freedom: pointwise `N_x(lambda)`, maximal `N_inf(lambda)`,
//! discrete `d_n(lambda)`, and the effective dimension `N(lambda)`.
//!
//! `N_x(lambda) = <k_x, (lambda + L_k)^{-1} k_x>_k` is also the optimal value of
//! `min_w lambda ||w||^2_{L^2(P)} + ||L_k w - k_x||_k^2`, divided by `lambda`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::operator::{DiscretizedOperator, EmpiricalOperator};
use crate::points::{uniform_grid, PointSet};

/// Eigenvalues below this fraction of `mu_1` are dropped from the Nyström extension.
pub const EIGENVALUE_FLOOR: f64 = 1e-13;

fn check_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "(0, inf)",
        });
    }
    Ok(lambda)
}

/// Default grid for the supremum over `x`: 65 points per axis in 1-d, 17 otherwise.
pub fn default_dof_grid(dim: usize) -> PointSet {
    uniform_grid(if dim == 1 { 65 } else { 17 }, dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofMethod {
    ContinuousQuadrature,
    DiscreteLeverage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofEstimate {
    pub lambda: f64,
    pub value: f64,
    pub argmax: Vec<f64>,
    pub method: DofMethod,
}

/// Projections `a_j = sum_i sqrt(d_i) k(x, z_i) u_ji` of `k_x` onto the eigenbasis.
fn projections(op: &DiscretizedOperator, x: &[f64]) -> Result<DVector<f64>> {
    let kx = op.kernel_column(x)?;
    let scaled = DVector::from_iterator(
        op.len(),
        kx.iter().zip(op.sqrt_masses()).map(|(k, s)| k * s),
    );
    Ok(op.eigenvectors().tr_mul(&scaled))
}

fn extension_sum(op: &DiscretizedOperator, a: &DVector<f64>, lambda: f64) -> f64 {
    let mu = op.eigenvalues();
    let floor = EIGENVALUE_FLOOR * mu[0];
    mu.iter()
        .zip(a.iter())
        .filter(|(&m, _)| m > floor && m > 0.0)
        .map(|(&m, &a)| a * a / (m * (lambda + m)))
        .sum()
}

fn node_closed_form(op: &DiscretizedOperator, i: usize, lambda: f64) -> f64 {
    let u = op.eigenvectors();
    let s: f64 = op
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(j, &m)| m * u[(i, j)] * u[(i, j)] / (lambda + m))
        .sum();
    s / op.masses()[i]
}

/// `N_x(lambda)`; at quadrature nodes the closed form `(1/d_i) (M (lambda + M)^{-1})_ii`.
pub fn pointwise_dof(op: &DiscretizedOperator, x: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    op.spec().check_point(x)?;
    if let Some(i) = op.node_index(x) {
        return Ok(node_closed_form(op, i, lambda));
    }
    pointwise_dof_extension(op, x, lambda)
}

/// `N_x(lambda) = sum_j mu_j phi_j(x)^2 / (lambda + mu_j)` through the Nyström
/// extension of the eigenfunctions, even when `x` is a node.
pub fn pointwise_dof_extension(op: &DiscretizedOperator, x: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let a = projections(op, x)?;
    Ok(extension_sum(op, &a, lambda))
}

/// `N_inf(lambda)` as the maximum of `N_x` over `grid`.
pub fn max_dof(op: &DiscretizedOperator, lambda: f64, grid: &PointSet) -> Result<DofEstimate> {
    max_dof_sweep(op, &[lambda], grid).map(|mut v| v.remove(0))
}

/// `N_inf` for several `lambda`, sharing the eigenbasis projections across the sweep.
pub fn max_dof_sweep(
    op: &DiscretizedOperator,
    lambdas: &[f64],
    grid: &PointSet,
) -> Result<Vec<DofEstimate>> {
    if grid.is_empty() {
        return Err(crate::error::invalid("dof grid is empty"));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    op.spec().check_points(grid)?;
    enum Probe {
        Node(usize),
        Off(DVector<f64>),
    }
    let probes = grid
        .iter()
        .map(|x| match op.node_index(x) {
            Some(i) => Ok(Probe::Node(i)),
            None => projections(op, x).map(Probe::Off),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let (best, value) = probes
                .iter()
                .map(|p| match p {
                    Probe::Node(i) => node_closed_form(op, *i, lambda),
                    Probe::Off(a) => extension_sum(op, a, lambda),
                })
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            DofEstimate {
                lambda,
                value,
                argmax: grid.point(best).to_vec(),
                method: DofMethod::ContinuousQuadrature,
            }
        })
        .collect())
}

/// Leverage scores `n (K (K + n lambda I)^{-1})_ii` for all samples.
pub fn leverage_scores(emp: &EmpiricalOperator, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let n = emp.len();
    if n == 0 {
        return Err(crate::error::invalid("empirical operator has no samples"));
    }
    let shift = n as f64 * lambda;
    let mut a = emp.gram().clone();
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let f = SpdFactor::new(&a)?;
    // K (K + cI)^{-1} = I - c (K + cI)^{-1}, with c including any jitter
    let c = shift + f.jitter();
    Ok(f
        .inverse_diagonal()
        .into_iter()
        .map(|inv| n as f64 * (1.0 - c * inv))
        .collect())
}

/// `d_n(lambda) = max_i n (K (K + n lambda I)^{-1})_ii`.
pub fn discrete_dof(emp: &EmpiricalOperator, lambda: f64) -> Result<DofEstimate> {
    let scores = leverage_scores(emp, lambda)?;
    let (best, value) = scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(DofEstimate {
        lambda,
        value,
        argmax: emp.samples().point(best).to_vec(),
        method: DofMethod::DiscreteLeverage,
    })
}

/// `N(lambda) = sum_j mu_j / (lambda + mu_j)`, over eigenvalues above the floor.
pub fn effective_dimension(op: &DiscretizedOperator, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let floor = EIGENVALUE_FLOOR * op.eigenvalues()[0];
    Ok(op
        .eigenvalues()
        .iter()
        .filter(|&&m| m > floor)
        .map(|&m| m / (lambda + m))
        .sum())
}

/// Node values of `w_lambda^x = (lambda + L_k)^{-1} k_x`, i.e. the solution of
/// `(lambda I + K D) w = k_x`, computed by a Cholesky solve of the symmetrized system.
pub fn representer_weights(op: &DiscretizedOperator, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let kx = op.kernel_column(x)?;
    let s = op.sqrt_masses();
    let n = op.len();
    let mut a = DMatrix::from_fn(n, n, |i, j| s[i] * op.gram()[(i, j)] * s[j]);
    for i in 0..n {
        a[(i, i)] += lambda;
    }
    let rhs = DVector::from_iterator(n, kx.iter().zip(s).map(|(k, s)| k * s));
    let v = SpdFactor::new(&a)?.solve(&rhs);
    Ok(v.iter().zip(s).map(|(v, s)| v / s).collect())
}

/// `lambda ||w||^2_{L^2(P)} + ||L_k w - k_x||_k^2`.
pub fn objective_value(op: &DiscretizedOperator, w: &[f64], x: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(lambda * op.l2_norm_sq(w)? + op.rkhs_error_sq(w, x)?)
}
