//! Seeded randomness. Every randomized routine takes a `u64` seed and draws from
//! ChaCha8, so identical seeds give bit-identical results on every platform.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::points::PointSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` i.i.d. uniform points on `[0, 1]^dim`.
pub fn uniform_points(n: usize, dim: usize, seed: u64) -> PointSet {
    let mut r = rng(seed);
    let coords = (0..n * dim).map(|_| r.random::<f64>()).collect();
    PointSet::new(dim.max(1), coords).expect("coordinate count is a multiple of dim")
}

/// `m` distinct indices out of `0..n`, uniformly without replacement.
pub fn sample_indices(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut r = rng(seed);
    rand::seq::index::sample(&mut r, n, m.min(n)).into_vec()
}

/// Standard normal draw (Box–Muller).
pub fn standard_normal(r: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}
