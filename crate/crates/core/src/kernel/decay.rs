//! Classification of Legendre coefficient decay by log-linear least squares.
//!
//! Three single-regressor models are fitted to `log |c_l|`:
//! `log l` (polynomial), `l` (exponential) and `l log l` (super-exponential).
//! The model with the smallest RMS residual wins.

use alloc::vec::Vec;


use super::LegendreExpansion;
use crate::error::{Error, Result};

/// Coefficients at or below this magnitude are exact zeros.
pub const COEFFICIENT_FLOOR: f64 = 1e-300;

/// Coefficients below this fraction of the largest one are treated as roundoff.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-13;

/// Minimum number of usable tail coefficients.
pub const MIN_TAIL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayKind {
    /// `|c_l| ~ constant * l^(-s)`.
    Polynomial { s: f64, constant: f64 },
    /// `|c_l| ~ constant * exp(-rho l)`.
    Exponential { rho: f64, constant: f64 },
    /// `|c_l| ~ constant * exp(-rate l log l)`.
    SuperExponential { rate: f64, constant: f64 },
}

impl DecayKind {
    pub fn label(&self) -> &'static str {
        match self {
            DecayKind::Polynomial { .. } => "polynomial",
            DecayKind::Exponential { .. } => "exponential",
            DecayKind::SuperExponential { .. } => "super_exponential",
        }
    }
}

/// RMS residuals of the three candidate fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub polynomial_residual: f64,
    pub exponential_residual: f64,
    pub super_exponential_residual: f64,
    /// Number of coefficients that entered the fit.
    pub used: usize,
    /// Largest index that entered the fit.
    pub last_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayClass {
    pub kind: DecayKind,
    pub fit: DecayFit,
}

/// Classifies the tail of an expansion starting at `tail_start` (indices below 1 are skipped).
pub fn classify_decay(expansion: &LegendreExpansion, tail_start: usize) -> Result<DecayClass> {
    classify_coefficients(expansion.coefficients(), tail_start, DEFAULT_NOISE_FLOOR)
}

/// Classifies `coeffs[tail_start..]`, ignoring entries below
/// `max(COEFFICIENT_FLOOR, noise_floor * max |c|)`.
pub fn classify_coefficients(
    coeffs: &[f64],
    tail_start: usize,
    noise_floor: f64,
) -> Result<DecayClass> {
    let start = tail_start.max(1);
    let max = coeffs
        .iter()
        .filter(|c| c.is_finite())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let floor = COEFFICIENT_FLOOR.max(noise_floor * max);
    let tail: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, c)| c.is_finite() && c.abs() > floor)
        .map(|(l, c)| (l as f64, c.abs().ln()))
        .collect();
    if tail.is_empty() {
        return Err(Error::ClassificationFailed(alloc::format!(
            "all coefficients from index {start} are below the floor {floor:e}"
        )));
    }
    if tail.len() < MIN_TAIL {
        return Err(Error::ClassificationFailed(alloc::format!(
            "only {} tail coefficients above the floor {floor:e}, need {MIN_TAIL}",
            tail.len()
        )));
    }

    let poly = fit_line(tail.iter().map(|&(l, y)| (l.ln(), y)));
    let expo = fit_line(tail.iter().map(|&(l, y)| (l, y)));
    let sup = fit_line(tail.iter().map(|&(l, y)| (l * l.ln(), y)));
    let fit = DecayFit {
        polynomial_residual: poly.rms,
        exponential_residual: expo.rms,
        super_exponential_residual: sup.rms,
        used: tail.len(),
        last_index: tail.last().map_or(0, |t| t.0 as usize),
    };
    let kind = if sup.rms < expo.rms && sup.rms < poly.rms {
        DecayKind::SuperExponential {
            rate: -sup.slope,
            constant: sup.intercept.exp(),
        }
    } else if expo.rms <= poly.rms {
        DecayKind::Exponential {
            rho: -expo.slope,
            constant: expo.intercept.exp(),
        }
    } else {
        DecayKind::Polynomial {
            s: -poly.slope,
            constant: poly.intercept.exp(),
        }
    };
    Ok(DecayClass { kind, fit })
}

struct LineFit {
    slope: f64,
    intercept: f64,
    rms: f64,
}

fn fit_line(points: impl Iterator<Item = (f64, f64)> + Clone) -> LineFit {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (x - mx), b + (x - mx) * (y - my))
    });
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = points
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    LineFit {
        slope,
        intercept,
        rms: (sse / n).sqrt(),
    }
}
