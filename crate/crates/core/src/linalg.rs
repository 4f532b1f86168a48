//! Dense symmetric linear algebra shared by the operator, dof and regression modules.
//!
//! Factorizations are delegated to `nalgebra`; this module adds the jitter escalation
//! policy and a descending-order symmetric eigensystem.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative jitter levels (times the trace) tried after a plain factorization fails.
pub const JITTER_LADDER: [f64; 5] = [1e-14, 1e-13, 1e-12, 1e-11, 1e-10];

/// A Cholesky factor together with the diagonal shift that made it succeed.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

impl SpdFactor {
    /// Factors a symmetric matrix, escalating `jitter * trace` along [`JITTER_LADDER`].
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if let Some(chol) = Cholesky::new(a.clone()) {
            return Ok(Self { chol, jitter: 0.0 });
        }
        let trace = a.trace();
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(Error::Numerical(format!(
                "matrix of order {} has non-positive trace {trace}",
                a.nrows()
            )));
        }
        for rel in JITTER_LADDER {
            let shift = rel * trace;
            let mut shifted = a.clone();
            for i in 0..shifted.nrows() {
                shifted[(i, i)] += shift;
            }
            if let Some(chol) = Cholesky::new(shifted) {
                return Ok(Self { chol, jitter: shift });
            }
        }
        Err(Error::Numerical(format!(
            "matrix of order {} is not positive definite after jitter {:e} * trace",
            a.nrows(),
            JITTER_LADDER[JITTER_LADDER.len() - 1]
        )))
    }

    /// Absolute diagonal shift that was added (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// Diagonal of the inverse of the factored matrix.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.chol.l_dirty().nrows();
        let l = self.chol.l();
        let mut linv = DMatrix::<f64>::identity(n, n);
        // L^{-1} is lower triangular; (A^{-1})_ii = sum_k (L^{-1})_ki^2
        l.solve_lower_triangular_mut(&mut linv);
        (0..n).map(|i| linv.column(i).rows_range(i..).norm_squared()).collect()
    }
}

/// Eigenvalues sorted in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricEigensystem {
    pub fn new(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let mut vectors = DMatrix::<f64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }
}
