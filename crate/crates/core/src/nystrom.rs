//! Kernel ridge regression, full and Nyström.
//!
//! Both fits use the `K + n lambda I` convention. [`prediction_weight_problem`] uses
//! `K + lambda I`; its `lambda` equals `n` times the fitting `lambda`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Result};
use crate::kernel::KernelSpec;
use crate::linalg::SpdFactor;
use crate::points::PointSet;
use crate::sampling::{rng, sample_indices, standard_normal};

/// `f_0(x) = sin(2 pi x) exp(-x)` on the first coordinate.
pub fn benchmark_truth(x: &[f64]) -> f64 {
    (TAU * x[0]).sin() * (-x[0]).exp()
}

pub const BENCHMARK_N: usize = 2000;
pub const BENCHMARK_TEST_N: usize = 500;
pub const BENCHMARK_SIGMA: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct RegressionTask {
    pub inputs: PointSet,
    pub targets: Vec<f64>,
    pub truth: Option<fn(&[f64]) -> f64>,
    pub noise_sigma: f64,
    pub seed: Option<u64>,
}

impl RegressionTask {
    pub fn new(inputs: PointSet, targets: Vec<f64>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(invalid(alloc::format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.is_empty() {
            return Err(invalid("regression task is empty"));
        }
        Ok(Self {
            inputs,
            targets,
            truth: None,
            noise_sigma: 0.0,
            seed: None,
        })
    }

    /// Uniform inputs on `[0, 1]^dim`, `y = f0(x) + sigma * N(0, 1)`.
    pub fn synthetic(n: usize, dim: usize, f0: fn(&[f64]) -> f64, sigma: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("regression task is empty"));
        }
        let mut r = rng(seed);
        let coords: Vec<f64> = (0..n * dim).map(|_| r.random::<f64>()).collect();
        let inputs = PointSet::new(dim, coords)?;
        let targets = inputs
            .iter()
            .map(|x| f0(x) + sigma * standard_normal(&mut r))
            .collect();
        Ok(Self {
            inputs,
            targets,
            truth: Some(f0),
            noise_sigma: sigma,
            seed: Some(seed),
        })
    }

    /// The fixed benchmark: d = 1, n = 2000, sigma = 0.1.
    pub fn benchmark(seed: u64) -> Self {
        Self::synthetic(BENCHMARK_N, 1, benchmark_truth, BENCHMARK_SIGMA, seed)
            .expect("benchmark task is valid")
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Noise-free evaluation points for the synthetic truth.
    pub fn test_set(&self, n: usize, seed: u64) -> Result<(PointSet, Vec<f64>)> {
        let f0 = self.truth.ok_or_else(|| invalid("task has no known truth"))?;
        let t = Self::synthetic(n, self.inputs.dim(), f0, 0.0, seed)?;
        Ok((t.inputs, t.targets))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Full,
    Nystrom { m: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct FittedModel {
    pub centers: PointSet,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub method: FitMethod,
    /// Diagonal shift that the factorization needed.
    pub jitter: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(crate::Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

/// Solves `(K + n lambda I) alpha = y`.
pub fn fit_full_krr(task: &RegressionTask, spec: &KernelSpec, lambda: f64) -> Result<FittedModel> {
    check_lambda(lambda)?;
    let n = task.len();
    let mut a = spec.gram(&task.inputs)?;
    for i in 0..n {
        a[(i, i)] += n as f64 * lambda;
    }
    let f = SpdFactor::new(&a)?;
    let alpha = f.solve(&DVector::from_column_slice(&task.targets));
    Ok(FittedModel {
        centers: task.inputs.clone(),
        coefficients: alpha.as_slice().to_vec(),
        lambda,
        method: FitMethod::Full,
        jitter: f.jitter(),
    })
}

/// Nyström fit on `m` centers drawn without replacement.
///
/// Solves `(K_nm^T K_nm + n lambda K_mm) alpha = K_nm^T y` in the whitened form
/// `(B^T B + n lambda I) beta = B^T y` with `B = K_nm L^{-T}`, `K_mm = L L^T`, `alpha = L^{-T} beta`.
pub fn fit_nystrom(task: &RegressionTask, spec: &KernelSpec, lambda: f64, m: usize, seed: u64) -> Result<FittedModel> {
    check_lambda(lambda)?;
    let n = task.len();
    if m == 0 || m > n {
        return Err(invalid(alloc::format!("need 1 <= m <= n = {n}, got m = {m}")));
    }
    let centers = task.inputs.select(&sample_indices(n, m, seed));
    let kmm = spec.gram(&centers)?;
    let knm = spec.cross_gram(&task.inputs, &centers)?;
    let t = SpdFactor::new(&kmm)?;
    let l = t.l();
    // B^T = L^{-1} K_nm^T
    let mut bt = knm.transpose();
    if !l.solve_lower_triangular_mut(&mut bt) {
        return Err(crate::Error::Numerical("singular center factor".into()));
    }
    let mut a: DMatrix<f64> = &bt * bt.transpose();
    for i in 0..m {
        a[(i, i)] += n as f64 * lambda;
    }
    let rhs = &bt * DVector::from_column_slice(&task.targets);
    let inner = SpdFactor::new(&a)?;
    let mut alpha = inner.solve(&rhs);
    if !l.tr_solve_lower_triangular_mut(&mut alpha) {
        return Err(crate::Error::Numerical("singular center factor".into()));
    }
    Ok(FittedModel {
        centers,
        coefficients: alpha.as_slice().to_vec(),
        lambda,
        method: FitMethod::Nystrom { m, seed },
        jitter: t.jitter(),
    })
}

/// `sum_j alpha_j k(x, c_j)`.
pub fn predict(model: &FittedModel, spec: &KernelSpec, x: &[f64]) -> Result<f64> {
    spec.check_point(x)?;
    Ok(model
        .centers
        .iter()
        .zip(&model.coefficients)
        .map(|(c, a)| a * spec.eval_unchecked(x, c))
        .sum())
}

pub fn predict_many(model: &FittedModel, spec: &KernelSpec, points: &PointSet) -> Result<Vec<f64>> {
    points.iter().map(|x| predict(model, spec, x)).collect()
}

/// Mean squared error on an evaluation set.
pub fn empirical_risk(model: &FittedModel, spec: &KernelSpec, points: &PointSet, targets: &[f64]) -> Result<f64> {
    if points.is_empty() || points.len() != targets.len() {
        return Err(invalid("evaluation set must be non-empty with one target per point"));
    }
    let preds = predict_many(model, spec, points)?;
    Ok(preds
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / targets.len() as f64)
}

/// `min_w lambda ||w||^2 + ||sum_i w_i k(., x_i) - k_x||_k^2`, solved by
/// `(K + lambda I) w = k_x`. Returns `w` and the optimal value `phi(0) - k_x^T w`.
pub fn prediction_weight_problem(
    task: &RegressionTask,
    spec: &KernelSpec,
    lambda: f64,
    x: &[f64],
) -> Result<(Vec<f64>, f64)> {
    check_lambda(lambda)?;
    let mut a = spec.gram(&task.inputs)?;
    for i in 0..task.len() {
        a[(i, i)] += lambda;
    }
    let kx = spec.column(&task.inputs, x)?;
    let w = SpdFactor::new(&a)?.solve(&kx);
    let objective = spec.diagonal() - kx.dot(&w);
    Ok((w.as_slice().to_vec(), objective))
}

/// `lambda ||w||^2 + ||sum_i w_i k(., x_i) - k_x||_k^2` for arbitrary `w`.
pub fn prediction_objective(task: &RegressionTask, spec: &KernelSpec, lambda: f64, x: &[f64], w: &[f64]) -> Result<f64> {
    let k = spec.gram(&task.inputs)?;
    let kx = spec.column(&task.inputs, x)?;
    let w = DVector::from_column_slice(w);
    let err = w.dot(&(&k * &w)) - 2.0 * w.dot(&kx) + spec.diagonal();
    Ok(lambda * w.norm_squared() + err.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Profile;
    use approx::assert_relative_eq;

    fn gauss() -> KernelSpec {
        KernelSpec::gaussian(1.0, 1).unwrap()
    }

    #[test]
    fn one_point_fit() {
        let task = RegressionTask::new(PointSet::from_scalars(&[0.4]), alloc::vec![2.0]).unwrap();
        let m = fit_full_krr(&task, &gauss(), 1.0).unwrap();
        assert_relative_eq!(m.coefficients[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(predict(&m, &gauss(), &[0.4]).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_targets_and_large_lambda() {
        let mut task = RegressionTask::synthetic(30, 1, benchmark_truth, 0.1, 1).unwrap();
        let big = fit_full_krr(&task, &gauss(), 1e6).unwrap();
        let ynorm = task.targets.iter().map(|y| y * y).sum::<f64>().sqrt();
        let anorm = big.coefficients.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(anorm <= ynorm / (30.0 * 1e6) * 1.01);
        task.targets.iter_mut().for_each(|y| *y = 0.0);
        let z = fit_full_krr(&task, &gauss(), 1e-3).unwrap();
        assert!(z.coefficients.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn predict_trivial_cases() {
        let spec = KernelSpec::new(Profile::InverseMultiquadric { gamma: 2.0 }, 2).unwrap();
        let model = FittedModel {
            centers: PointSet::from_rows(&[[0.3, 0.6]]).unwrap(),
            coefficients: alloc::vec![1.0],
            lambda: 1.0,
            method: FitMethod::Full,
            jitter: 0.0,
        };
        assert_eq!(predict(&model, &spec, &[0.3, 0.6]).unwrap(), 1.0);
        let zero = FittedModel {
            coefficients: alloc::vec![0.0],
            ..model
        };
        assert_eq!(predict(&zero, &spec, &[0.1, 0.1]).unwrap(), 0.0);
    }

    #[test]
    fn nystrom_full_rank_matches_full_krr() {
        for seed in 0..10u64 {
            let n = 40 + 16 * seed as usize;
            let task = RegressionTask::synthetic(n, 1, benchmark_truth, 0.1, seed).unwrap();
            let lambda = 1e-4;
            let full = fit_full_krr(&task, &gauss(), lambda).unwrap();
            let nys = fit_nystrom(&task, &gauss(), lambda, n, seed).unwrap();
            let (pts, _) = task.test_set(50, 100 + seed).unwrap();
            let a = predict_many(&full, &gauss(), &pts).unwrap();
            let b = predict_many(&nys, &gauss(), &pts).unwrap();
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-8 * scale, "seed={seed}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn nystrom_single_center_is_finite() {
        let mut task = RegressionTask::synthetic(50, 1, benchmark_truth, 0.0, 3).unwrap();
        task.targets.iter_mut().for_each(|y| *y = 2.0);
        let m = fit_nystrom(&task, &gauss(), 1e-12, 1, 4).unwrap();
        let p = predict(&m, &gauss(), &[0.5]).unwrap();
        assert!(p.is_finite() && (p - 2.0).abs() < 1.0);
        assert!(fit_nystrom(&task, &gauss(), 1e-3, 0, 4).is_err());
        assert!(fit_nystrom(&task, &gauss(), 1e-3, 51, 4).is_err());
    }

    #[test]
    fn nystrom_is_deterministic() {
        let task = RegressionTask::synthetic(300, 1, benchmark_truth, 0.1, 8).unwrap();
        let a = fit_nystrom(&task, &gauss(), 1e-3, 40, 77).unwrap();
        let b = fit_nystrom(&task, &gauss(), 1e-3, 40, 77).unwrap();
        assert_eq!(a.centers, b.centers);
        assert_eq!(a.coefficients, b.coefficients);
        let c = fit_nystrom(&task, &gauss(), 1e-3, 40, 78).unwrap();
        assert_ne!(a.centers, c.centers);
    }

    #[test]
    fn risk_examples() {
        let task = RegressionTask::synthetic(20, 1, benchmark_truth, 0.0, 2).unwrap();
        let zero = FittedModel {
            centers: task.inputs.clone(),
            coefficients: alloc::vec![0.0; 20],
            lambda: 1.0,
            method: FitMethod::Full,
            jitter: 0.0,
        };
        assert_eq!(empirical_risk(&zero, &gauss(), &task.inputs, &[1.0; 20]).unwrap(), 1.0);
        assert_eq!(empirical_risk(&zero, &gauss(), &task.inputs, &[0.0; 20]).unwrap(), 0.0);
        assert!(empirical_risk(&zero, &gauss(), &PointSet::empty(1), &[]).is_err());
    }

    #[test]
    fn weight_problem_identities() {
        let task = RegressionTask::synthetic(25, 1, benchmark_truth, 0.1, 6).unwrap();
        let spec = KernelSpec::new(Profile::Matern {
            smoothness: crate::kernel::MaternSmoothness::Half,
            length_scale: 0.5,
        }, 1)
        .unwrap();
        // interpolation limit at a training point
        let xj = task.inputs.point(7).to_vec();
        let (w, _) = prediction_weight_problem(&task, &spec, 1e-12, &xj).unwrap();
        for (i, v) in w.iter().enumerate() {
            let want = if i == 7 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-6, "w_{i} = {v}");
        }
        let x = [0.333];
        let lambda = 1e-2;
        let (w, obj) = prediction_weight_problem(&task, &spec, lambda, &x).unwrap();
        let direct = prediction_objective(&task, &spec, lambda, &x, &w).unwrap();
        assert!((obj - direct).abs() < 1e-10);
        // w^T y is the full-KRR prediction with lambda_fit = lambda / n
        let fit = fit_full_krr(&task, &spec, lambda / task.len() as f64).unwrap();
        let wy: f64 = w.iter().zip(&task.targets).map(|(a, b)| a * b).sum();
        assert_relative_eq!(wy, predict(&fit, &spec, &x).unwrap(), max_relative = 1e-10);
    }
}
