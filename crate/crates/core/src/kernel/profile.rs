use alloc::vec::Vec;


use crate::error::{invalid, Result};
use crate::legendre;

/// Smoothness of a Matérn profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternSmoothness {
    /// nu = 1/2, `exp(-r / l)`.
    Half,
    /// nu = 3/2.
    ThreeHalves,
    /// nu = 5/2.
    FiveHalves,
}

/// The outer function `phi` of a radial kernel, defined on the radial argument `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `exp(-gamma t)`.
    Gaussian { gamma: f64 },
    /// `(1 + gamma t)^(-1/2)`.
    InverseMultiquadric { gamma: f64 },
    /// Matérn covariance in the scaled distance `r = sqrt(t)`.
    Matern {
        smoothness: MaternSmoothness,
        length_scale: f64,
    },
    /// `phi = c`, a rank-one kernel.
    Constant(f64),
    /// `phi = sum_l a_l Q_l`.
    LegendreSeries(Vec<f64>),
    /// `phi(t) = sum_k p_k t^k`.
    Polynomial(Vec<f64>),
    /// User-supplied samples with natural cubic spline interpolation.
    Tabulated(TabulatedProfile),
}

impl Profile {
    pub fn gaussian(gamma: f64) -> Self {
        Profile::Gaussian { gamma }
    }

    /// Checks parameters; constructors do not.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(alloc::format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            Profile::Gaussian { gamma } | Profile::InverseMultiquadric { gamma } => {
                positive("gamma", *gamma)
            }
            Profile::Matern { length_scale, .. } => positive("length_scale", *length_scale),
            Profile::Constant(c) if !c.is_finite() => Err(invalid("constant profile must be finite")),
            Profile::LegendreSeries(c) | Profile::Polynomial(c) if c.is_empty() => {
                Err(invalid("series profile needs at least one coefficient"))
            }
            _ => Ok(()),
        }
    }

    /// `phi(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Gaussian { gamma } => (-gamma * t).exp(),
            Profile::InverseMultiquadric { gamma } => 1.0 / (1.0 + gamma * t).sqrt(),
            Profile::Matern {
                smoothness,
                length_scale,
            } => {
                let r = t.max(0.0).sqrt() / length_scale;
                match smoothness {
                    MaternSmoothness::Half => (-r).exp(),
                    MaternSmoothness::ThreeHalves => {
                        let a = 3f64.sqrt() * r;
                        (1.0 + a) * (-a).exp()
                    }
                    MaternSmoothness::FiveHalves => {
                        let a = 5f64.sqrt() * r;
                        (1.0 + a + a * a / 3.0) * (-a).exp()
                    }
                }
            }
            Profile::Constant(c) => *c,
            Profile::LegendreSeries(c) => legendre::series_sum(c, 0, t.clamp(0.0, 1.0)),
            Profile::Polynomial(p) => p.iter().rev().fold(0.0, |acc, &c| acc * t + c),
            Profile::Tabulated(tab) => tab.eval(t),
        }
    }

    /// Largest Bernstein ellipse parameter `rho` for which `phi((z + 1) / 2)` is analytic
    /// inside the ellipse, if the profile admits a complex extension at all.
    /// `f64::INFINITY` marks entire functions.
    pub fn analyticity_limit(&self) -> Option<f64> {
        match self {
            Profile::Gaussian { .. }
            | Profile::Constant(_)
            | Profile::LegendreSeries(_)
            | Profile::Polynomial(_) => Some(f64::INFINITY),
            Profile::InverseMultiquadric { gamma } => {
                // branch point at t = -1/gamma, i.e. z = -1 - 2/gamma
                let a = 1.0 + 2.0 / gamma;
                Some(a + (a * a - 1.0).sqrt())
            }
            Profile::Matern { .. } | Profile::Tabulated(_) => None,
        }
    }

    /// `|phi~(z)|` for complex `z = re + i im`, where `phi~(z) = phi((z + 1) / 2)`.
    ///
    /// `None` when the profile has no known complex extension.
    pub fn complex_modulus(&self, re: f64, im: f64) -> Option<f64> {
        // t = (z + 1) / 2
        let (tr, ti) = (0.5 * (re + 1.0), 0.5 * im);
        match self {
            Profile::Gaussian { gamma } => Some((-gamma * tr).exp()),
            Profile::InverseMultiquadric { gamma } => {
                let (ur, ui) = (1.0 + gamma * tr, gamma * ti);
                Some((ur * ur + ui * ui).sqrt().powf(-0.5))
            }
            Profile::Constant(c) => Some(c.abs()),
            Profile::Polynomial(p) => {
                let (mut ar, mut ai) = (0.0, 0.0);
                for &c in p.iter().rev() {
                    let nr = ar * tr - ai * ti + c;
                    ai = ar * ti + ai * tr;
                    ar = nr;
                }
                Some((ar * ar + ai * ai).sqrt())
            }
            Profile::LegendreSeries(a) => {
                // P_k recurrence in the complex variable z
                let (mut pr, mut pi) = (1.0, 0.0);
                let (mut cr, mut ci) = (re, im);
                let mut sr = a[0];
                let mut si = 0.0;
                for (k, &coef) in a.iter().enumerate().skip(1) {
                    if k > 1 {
                        let j = (k - 1) as f64;
                        let nr = ((2.0 * j + 1.0) * (re * cr - im * ci) - j * pr) / (j + 1.0);
                        let ni = ((2.0 * j + 1.0) * (re * ci + im * cr) - j * pi) / (j + 1.0);
                        pr = cr;
                        pi = ci;
                        cr = nr;
                        ci = ni;
                    }
                    let s = (2.0 * k as f64 + 1.0).sqrt() * coef;
                    sr += s * cr;
                    si += s * ci;
                }
                Some((sr * sr + si * si).sqrt())
            }
            Profile::Matern { .. } | Profile::Tabulated(_) => None,
        }
    }
}

/// Samples `(t_i, phi(t_i))` with strictly increasing `t` covering `[0, 1]`,
/// interpolated by a natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    t: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t.len() != values.len() {
            return Err(invalid("tabulated profile: column lengths differ"));
        }
        if t.len() < 2 {
            return Err(invalid("tabulated profile: need at least two samples"));
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("tabulated profile: t must be strictly increasing"));
        }
        if t[0] > 0.0 || t[t.len() - 1] < 1.0 {
            return Err(invalid("tabulated profile: samples must cover [0, 1]"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tabulated profile: non-finite value"));
        }
        let second = natural_spline_second_derivatives(&t, &values);
        Ok(Self { t, values, second })
    }

    pub fn knots(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let x = x.clamp(self.t[0], self.t[n - 1]);
        // interval index k with t[k] <= x <= t[k+1]
        let k = match self.t.partition_point(|&tk| tk <= x) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.t[k + 1] - self.t[k];
        let a = (self.t[k + 1] - x) / h;
        let b = (x - self.t[k]) / h;
        a * self.values[k]
            + b * self.values[k + 1]
            + ((a * a * a - a) * self.second[k] + (b * b * b - b) * self.second[k + 1]) * h * h
                / 6.0
    }
}

fn natural_spline_second_derivatives(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut m = alloc::vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    let mut c_prime = alloc::vec![0.0; n];
    let mut d_prime = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = t[i] - t[i - 1];
        let h1 = t[i + 1] - t[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}
