//! Quadrature discretization of the integral operator
//! `(L_k w)(y) = int w(z) k(y, z) p(z) dz` and its Mercer eigensystem.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelSpec;
use crate::legendre::QuadratureRule;
use crate::linalg::SymmetricEigensystem;
use crate::points::{uniform_grid, PointSet};
use crate::weights::DesignDensity;

/// Largest node count accepted by [`DiscretizedOperator::build`].
pub const DEFAULT_NODE_CAP: usize = 4096;

/// Eigenvalues below `-PSD_TOLERANCE * mu_1` are reported as a numerical failure.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Probe points per axis for uniform-error evaluation.
pub fn default_probe_grid(dim: usize) -> PointSet {
    uniform_grid(if dim == 1 { 129 } else { 33 }, dim)
}

/// `L_k` on a tensor Gauss–Legendre grid with masses `d_i = omega_i p(z_i)`.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    spec: KernelSpec,
    density: DesignDensity,
    nodes: PointSet,
    masses: Vec<f64>,
    sqrt_masses: Vec<f64>,
    gram: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    clamped: usize,
    most_negative: f64,
}

impl DiscretizedOperator {
    pub fn build(spec: &KernelSpec, density: &DesignDensity, per_axis_nodes: usize) -> Result<Self> {
        Self::build_with_cap(spec, density, per_axis_nodes, DEFAULT_NODE_CAP)
    }

    pub fn build_with_cap(
        spec: &KernelSpec,
        density: &DesignDensity,
        per_axis_nodes: usize,
        cap: usize,
    ) -> Result<Self> {
        if per_axis_nodes == 0 {
            return Err(invalid("need at least one node per axis"));
        }
        if density.dim() != spec.dim {
            return Err(invalid(alloc::format!(
                "density is {}-dimensional but the kernel is {}-dimensional",
                density.dim(),
                spec.dim
            )));
        }
        let total = (per_axis_nodes as u128).saturating_pow(spec.dim as u32);
        if total > cap as u128 {
            return Err(Error::Size {
                nodes: usize::try_from(total).unwrap_or(usize::MAX),
                cap,
            });
        }
        let rule = QuadratureRule::gauss_legendre(per_axis_nodes)?;
        let (unit, unit_weights) = rule.tensor(spec.dim);
        let domain = density.domain();
        let volume: f64 = domain.iter().map(|&(a, b)| b - a).product();
        let mut coords = Vec::with_capacity(unit.coords().len());
        for u in unit.iter() {
            coords.extend(u.iter().zip(domain).map(|(&t, &(a, b))| a + (b - a) * t));
        }
        let nodes = PointSet::new(spec.dim, coords)?;
        let mut masses = Vec::with_capacity(nodes.len());
        for (z, w) in nodes.iter().zip(&unit_weights) {
            let p = density.eval(z);
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::Density(alloc::format!(
                    "density evaluates to {p} at node {z:?}"
                )));
            }
            masses.push(w * volume * p);
        }
        Self::from_parts(spec.clone(), density.clone(), nodes, masses)
    }

    /// Assembles the operator from explicit nodes and masses.
    pub fn from_parts(
        spec: KernelSpec,
        density: DesignDensity,
        nodes: PointSet,
        masses: Vec<f64>,
    ) -> Result<Self> {
        if nodes.len() != masses.len() || nodes.is_empty() {
            return Err(invalid("need one positive mass per node"));
        }
        if masses.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::Density("node masses must be positive".into()));
        }
        let gram = spec.gram(&nodes)?;
        let sqrt_masses: Vec<f64> = masses.iter().map(|m| m.sqrt()).collect();
        let n = masses.len();
        let m = DMatrix::from_fn(n, n, |i, j| sqrt_masses[i] * gram[(i, j)] * sqrt_masses[j]);
        let eig = SymmetricEigensystem::new(m);
        let top = eig.values[0].max(0.0);
        let most_negative = eig.values.iter().cloned().fold(0.0, f64::min);
        if most_negative < -PSD_TOLERANCE * top {
            return Err(Error::Numerical(alloc::format!(
                "discretized operator has eigenvalue {most_negative:e} against mu_1 = {top:e}"
            )));
        }
        let clamped = eig.values.iter().filter(|&&v| v < 0.0).count();
        let eigenvalues = eig.values.iter().map(|&v| v.max(0.0)).collect();
        Ok(Self {
            spec,
            density,
            nodes,
            masses,
            sqrt_masses,
            gram,
            eigenvalues,
            eigenvectors: eig.vectors,
            clamped,
            most_negative,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn density(&self) -> &DesignDensity {
        &self.density
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub(crate) fn sqrt_masses(&self) -> &[f64] {
        &self.sqrt_masses
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// `mu_1 >= ... >= mu_N >= 0`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors of `D^{1/2} K D^{1/2}` as columns.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Number of negative roundoff eigenvalues that were set to zero.
    pub fn clamped_eigenvalues(&self) -> usize {
        self.clamped
    }

    /// Smallest eigenvalue before clamping (0 if none was negative).
    pub fn most_negative_eigenvalue(&self) -> f64 {
        self.most_negative
    }

    /// `sum_i d_i k(z_i, z_i)`, the trace of the discretized `L_k`.
    pub fn trace(&self) -> f64 {
        self.masses.iter().sum::<f64>() * self.spec.diagonal()
    }

    /// Index of the node equal to `x`, if any.
    pub fn node_index(&self, x: &[f64]) -> Option<usize> {
        self.nodes.iter().position(|z| z == x)
    }

    /// `(k(x, z_1), ..., k(x, z_N))`.
    pub fn kernel_column(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.spec.column(&self.nodes, x)
    }

    fn check_values(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.len() {
            return Err(invalid(alloc::format!(
                "expected {} node values, got {}",
                self.len(),
                w.len()
            )));
        }
        Ok(())
    }

    /// `sum_i d_i w(z_i) k(y, z_i)`, the quadrature value of `(L_k w)(y)`.
    pub fn apply(&self, w: &[f64], y: &[f64]) -> Result<f64> {
        self.check_values(w)?;
        self.spec.check_point(y)?;
        Ok(self
            .nodes
            .iter()
            .zip(&self.masses)
            .zip(w)
            .map(|((z, d), w)| d * w * self.spec.eval_unchecked(y, z))
            .sum())
    }

    /// `||L_k w - k_x||_k^2` before clamping.
    pub fn rkhs_error_sq_raw(&self, w: &[f64], x: &[f64]) -> Result<f64> {
        self.check_values(w)?;
        let kx = self.kernel_column(x)?;
        let dw = DVector::from_iterator(self.len(), self.masses.iter().zip(w).map(|(d, w)| d * w));
        let quad = dw.dot(&(&self.gram * &dw));
        Ok(quad - 2.0 * dw.dot(&kx) + self.spec.diagonal())
    }

    /// `||L_k w - k_x||_k^2 = <w, L_k w> - 2 (L_k w)(x) + k(x, x)`, clamped at 0.
    pub fn rkhs_error_sq(&self, w: &[f64], x: &[f64]) -> Result<f64> {
        self.rkhs_error_sq_raw(w, x).map(|v| v.max(0.0))
    }

    /// `max_y |(L_k w)(y) - k(y, x)|` over the probe points.
    pub fn uniform_error(&self, w: &[f64], x: &[f64], probes: &PointSet) -> Result<f64> {
        self.check_values(w)?;
        self.spec.check_point(x)?;
        self.spec.check_points(probes)?;
        let dw: Vec<f64> = self.masses.iter().zip(w).map(|(d, w)| d * w).collect();
        Ok(probes
            .iter()
            .map(|y| {
                let lw: f64 = self
                    .nodes
                    .iter()
                    .zip(&dw)
                    .map(|(z, c)| c * self.spec.eval_unchecked(y, z))
                    .sum();
                (lw - self.spec.eval_unchecked(y, x)).abs()
            })
            .fold(0.0, f64::max))
    }

    /// `<w, L_k w>_{L^2(P)}` and `||w||^2_{L^2(P)}` by quadrature.
    pub fn l2_norm_sq(&self, w: &[f64]) -> Result<f64> {
        self.check_values(w)?;
        Ok(self.masses.iter().zip(w).map(|(d, w)| d * w * w).sum())
    }
}

/// `L_k^D f = (1/n) sum_i f(x_i) k(., x_i)` on a sample.
#[derive(Debug, Clone)]
pub struct EmpiricalOperator {
    samples: PointSet,
    gram: DMatrix<f64>,
}

impl EmpiricalOperator {
    pub fn new(spec: &KernelSpec, samples: PointSet) -> Result<Self> {
        let gram = spec.gram(&samples)?;
        Ok(Self { samples, gram })
    }

    pub fn samples(&self) -> &PointSet {
        &self.samples
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Profile;
    use crate::sampling::uniform_points;
    use crate::weights::MomentWeight;
    use approx::assert_relative_eq;

    fn gaussian_op(n: usize) -> DiscretizedOperator {
        let spec = KernelSpec::gaussian(1.0, 1).unwrap();
        DiscretizedOperator::build(&spec, &DesignDensity::uniform(1), n).unwrap()
    }

    fn flat(dim: usize) -> KernelSpec {
        KernelSpec::new(Profile::Constant(1.0), dim).unwrap()
    }

    #[test]
    fn single_node() {
        let spec = KernelSpec::new(Profile::InverseMultiquadric { gamma: 3.0 }, 1).unwrap();
        let op = DiscretizedOperator::build(&spec, &DesignDensity::uniform(1), 1).unwrap();
        assert_eq!(op.len(), 1);
        assert_relative_eq!(op.eigenvalues()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn flat_kernel_is_rank_one() {
        for density in [DesignDensity::uniform(2), DesignDensity::sinusoidal(2)] {
            let op = DiscretizedOperator::build(&flat(2), &density, 12).unwrap();
            assert!((op.eigenvalues()[0] - 1.0).abs() < 1e-12);
            assert!(op.eigenvalues()[1..].iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn size_and_density_errors() {
        let spec = KernelSpec::gaussian(1.0, 3).unwrap();
        assert!(matches!(
            DiscretizedOperator::build(&spec, &DesignDensity::uniform(3), 17),
            Err(Error::Size { nodes: 4913, cap: 4096 })
        ));
        fn negative(_: &[f64]) -> f64 {
            -1.0
        }
        let bad = DesignDensity::unit_cube(
            crate::weights::DensityShape::Custom {
                eval: negative,
                lower: 0.5,
                upper: 1.0,
            },
            1,
        )
        .unwrap();
        let spec = KernelSpec::gaussian(1.0, 1).unwrap();
        assert!(matches!(
            DiscretizedOperator::build(&spec, &bad, 8),
            Err(Error::Density(_))
        ));
    }

    #[test]
    fn masses_and_trace() {
        for density in [DesignDensity::uniform(1), DesignDensity::sinusoidal(1)] {
            let spec = KernelSpec::new(Profile::InverseMultiquadric { gamma: 1.0 }, 1).unwrap();
            let op = DiscretizedOperator::build(&spec, &density, 64).unwrap();
            assert!((op.masses().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let s: f64 = op.eigenvalues().iter().sum();
            assert_relative_eq!(s, op.trace(), max_relative = 1e-8);
            assert!(op.most_negative_eigenvalue() >= -1e-10 * op.eigenvalues()[0]);
        }
    }

    #[test]
    fn eigenvalues_converge_under_refinement() {
        let a = gaussian_op(128);
        let b = gaussian_op(256);
        let mu1 = b.eigenvalues()[0];
        for j in 0..10 {
            let (x, y) = (a.eigenvalues()[j], b.eigenvalues()[j]);
            assert!((x - y).abs() <= 1e-12 * y + 1e-14 * mu1, "mu_{j}: {x} vs {y}");
        }
        // the well-resolved leading part agrees to full relative precision
        for j in 0..6 {
            assert_relative_eq!(a.eigenvalues()[j], b.eigenvalues()[j], max_relative = 1e-10);
        }
    }

    #[test]
    fn apply_examples() {
        let op = gaussian_op(16);
        assert_eq!(op.apply(&[0.0; 16], &[0.3]).unwrap(), 0.0);
        let f = DiscretizedOperator::build(&flat(1), &DesignDensity::sinusoidal(1), 16).unwrap();
        assert!((f.apply(&[1.0; 16], &[0.9]).unwrap() - 1.0).abs() < 1e-12);
        // unit mass at node j reproduces d_j * gram row j
        let mut w = alloc::vec![0.0; 16];
        w[5] = 1.0;
        for i in 0..16 {
            let got = op.apply(&w, op.nodes().point(i)).unwrap();
            assert_eq!(got, op.masses()[5] * op.gram()[(i, 5)]);
        }
        assert!(op.apply(&[0.0; 3], &[0.3]).is_err());
    }

    #[test]
    fn rkhs_error_examples() {
        let op = gaussian_op(32);
        assert_relative_eq!(op.rkhs_error_sq(&[0.0; 32], &[0.4]).unwrap(), 1.0);
        let f = DiscretizedOperator::build(&flat(1), &DesignDensity::uniform(1), 8).unwrap();
        assert!(f.rkhs_error_sq_raw(&[1.0; 8], &[0.7]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn uniform_error_of_zero_weight_is_kernel_max() {
        let op = gaussian_op(16);
        let probes = default_probe_grid(1);
        let got = op.uniform_error(&[0.0; 16], &[0.25], &probes).unwrap();
        let want = probes
            .iter()
            .map(|y| op.spec().eval(y, &[0.25]).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(got, want);
    }

    #[test]
    fn moment_weight_errors_below_bounds() {
        let spec = KernelSpec::gaussian(1.0, 1).unwrap();
        let density = DesignDensity::uniform(1);
        let op = DiscretizedOperator::build(&spec, &density, 128).unwrap();
        let expansion = spec.expand(60, &QuadratureRule::gauss_legendre(256).unwrap()).unwrap();
        let probes = default_probe_grid(1);
        for m in [3usize, 5, 9, 15] {
            let rem = expansion.remainder((m - 1) / 2);
            for i in 0..=32 {
                let x = [i as f64 / 32.0];
                let w = MomentWeight::new(m, &x, &density).unwrap().values_at(op.nodes()).unwrap();
                let raw = op.rkhs_error_sq_raw(&w, &x).unwrap();
                assert!(raw >= -1e-9);
                let hk = 4.0 * (m * m) as f64 * rem;
                assert!(raw <= hk + 1e-9, "m={m} x={x:?}: {raw} > {hk}");
                let inf = op.uniform_error(&w, &x, &probes).unwrap();
                assert!(inf <= (1.0 + m as f64) * rem + 1e-9, "m={m} x={x:?}: {inf}");
            }
        }
    }

    #[test]
    fn empirical_operator() {
        let spec = KernelSpec::gaussian(1.0, 2).unwrap();
        let one = EmpiricalOperator::new(&spec, uniform_points(1, 2, 0)).unwrap();
        assert_eq!(one.gram()[(0, 0)], 1.0);
        let base = uniform_points(5, 2, 1);
        let dup = base.select(&[0, 1, 2, 3, 4, 0]);
        let e = EmpiricalOperator::new(&spec, dup).unwrap();
        assert_eq!(e.gram().row(0), e.gram().row(5));
        let e = EmpiricalOperator::new(&spec, uniform_points(100, 2, 2)).unwrap();
        assert_eq!(e.gram().trace() / 100.0, 1.0);
    }
}
