//! Flat storage for sets of points in `R^d`.

use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// `len` points of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("point dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(invalid("coordinate count is not a multiple of the dimension"));
        }
        Ok(Self { dim, coords })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim: dim.max(1),
            coords: Vec::new(),
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| invalid("cannot infer dimension from an empty row list"))?;
        let mut coords = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(invalid("rows have inconsistent dimensions"));
            }
            coords.extend_from_slice(r);
        }
        Self::new(dim, coords)
    }

    /// One-dimensional point set from scalars.
    pub fn from_scalars(values: &[f64]) -> Self {
        Self {
            dim: 1,
            coords: values.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(invalid("point dimension mismatch"));
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Subset by indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            dim: self.dim,
            coords,
        }
    }
}

/// Tensor product of per-axis abscissae, last axis fastest.
pub fn tensor_product(axis: &[f64], dim: usize) -> PointSet {
    let n = axis.len();
    let total = n.pow(dim as u32);
    let mut coords = Vec::with_capacity(total * dim);
    let mut idx = alloc::vec![0usize; dim];
    for _ in 0..total {
        coords.extend(idx.iter().map(|&i| axis[i]));
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
        }
    }
    PointSet { dim, coords }
}

/// Equispaced grid on `[0, 1]^dim` with `per_axis` points per axis, corners included.
pub fn uniform_grid(per_axis: usize, dim: usize) -> PointSet {
    tensor_product(&linspace(per_axis), dim)
}

/// `n` equispaced points on `[0, 1]`, both endpoints included (a single point sits at 0.5).
pub fn linspace(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}
