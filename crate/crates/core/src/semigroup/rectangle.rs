use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

/// Mixed-boundary GFF on `[0, t] × [0, π]`: Dirichlet at `s ∈ {0, t}`,
/// Neumann at `θ ∈ {0, π}`, covariance the mixed Green function.
///
/// `X = Σ g_{mn} a_{mn} sin(mπs/t) cos(nθ)` with `a_{m0}² = 4/(tλ)`,
/// `a_{mn}² = 8/(tλ)`, `λ = (mπ/t)² + n²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleField {
    pub t: f64,
    pub m_max: usize,
    pub n_max: usize,
    /// `g_{mn}`, row `m − 1` holds `n = 0..=n_max`.
    pub coefficients: Vec<f64>,
}

fn amplitude(t: f64, m: usize, n: usize) -> f64 {
    let lam = (m as f64 * std::f64::consts::PI / t).powi(2) + (n * n) as f64;
    let num = if n == 0 { 4.0 } else { 8.0 };
    (num / (t * lam)).sqrt()
}

impl RectangleField {
    pub fn coefficient(&self, m: usize, n: usize) -> f64 {
        self.coefficients[(m - 1) * (self.n_max + 1) + n]
    }

    pub fn evaluate(&self, s: f64, theta: f64) -> f64 {
        let mut acc = 0.0;
        for m in 1..=self.m_max {
            let sm = (m as f64 * std::f64::consts::PI * s / self.t).sin();
            for n in 0..=self.n_max {
                acc += self.coefficient(m, n) * amplitude(self.t, m, n) * sm * (n as f64 * theta).cos();
            }
        }
        acc
    }

    /// `(1/π) ∫₀^π X(s, θ) dθ`.
    pub fn zero_mode_average(&self, s: f64) -> f64 {
        (1..=self.m_max)
            .map(|m| {
                self.coefficient(m, 0) * amplitude(self.t, m, 0) * (m as f64 * std::f64::consts::PI * s / self.t).sin()
            })
            .sum()
    }

    /// Covariance of the truncated series at two points.
    pub fn covariance_truncated(t: f64, m_max: usize, n_max: usize, a: (f64, f64), b: (f64, f64)) -> f64 {
        let mut acc = 0.0;
        for m in 1..=m_max {
            let w = m as f64 * std::f64::consts::PI / t;
            let sm = (w * a.0).sin() * (w * b.0).sin();
            for n in 0..=n_max {
                acc += amplitude(t, m, n).powi(2) * sm * (n as f64 * a.1).cos() * (n as f64 * b.1).cos();
            }
        }
        acc
    }
}

pub fn sample_rectangle_gff<R: Rng + ?Sized>(
    t: f64,
    m_max: usize,
    n_max: usize,
    rng: &mut R,
) -> Result<RectangleField> {
    check_positive("t", t)?;
    if m_max == 0 {
        return Err(Error::InvalidCutoff(m_max));
    }
    if n_max == 0 {
        return Err(Error::InvalidCutoff(n_max));
    }
    let coefficients = (0..m_max * (n_max + 1)).map(|_| rng.sample(StandardNormal)).collect();
    Ok(RectangleField { t, m_max, n_max, coefficients })
}
