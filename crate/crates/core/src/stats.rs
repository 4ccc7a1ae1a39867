use serde::{Deserialize, Serialize};

/// Monte Carlo estimate of an expectation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean - target| <= k_sigma * stderr + slack`.
    pub fn agrees_with(&self, target: f64, k_sigma: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= k_sigma * self.stderr + slack
    }

    /// Difference of two independent estimates.
    pub fn minus(&self, other: &McEstimate) -> McEstimate {
        McEstimate {
            mean: self.mean - other.mean,
            stderr: self.stderr.hypot(other.stderr),
            n_samples: self.n_samples.min(other.n_samples),
            seed: self.seed,
        }
    }

    pub fn scaled(&self, factor: f64) -> McEstimate {
        McEstimate { mean: self.mean * factor, stderr: self.stderr * factor.abs(), ..*self }
    }
}

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        McEstimate { mean: self.mean, stderr: (self.variance() / self.n as f64).sqrt(), n_samples: self.n, seed }
    }
}

/// Hill estimate of the tail index from the `k` largest of `samples`.
///
/// Returns `None` when fewer than `k + 1` positive samples are available.
pub fn hill_tail_index(samples: &[f64], k: usize) -> Option<f64> {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
    if k == 0 || xs.len() <= k {
        return None;
    }
    xs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let threshold = xs[k].ln();
    let xi = xs[..k].iter().map(|x| x.ln() - threshold).sum::<f64>() / k as f64;
    if xi > 0.0 {
        Some(1.0 / xi)
    } else {
        None
    }
}
