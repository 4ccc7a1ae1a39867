//! Regularized GMC potentials on the half-circle.
//!
//! With `φ^{h,k}(θ) = Σ_{n≤k} √2 x_n cos(nθ)/√n` the potentials are
//! `V^{(k)}_α = ∫₀^π e^{γφ^{h,k} − γ²/2 E[φ^{h,k}²]} (2|sin θ| + 1/k)^{−α} dθ`,
//! its unmollified martingale counterpart `W^{(k)}_α`, and the endpoint
//! weights `R^{(k)}`, `L^{(k)}`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::boundary_fields::HalfCircleField;
use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::rng::RngStream;
use crate::stats::{hill_tail_index, Accumulator, McEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmcParams {
    pub gamma: f64,
    pub alpha: f64,
    pub k: usize,
}

impl GmcParams {
    /// `γ ∈ [0, 2)`, `α ≥ 0`, `k ≥ 1`.  `γ = 0` is allowed as the deterministic case.
    pub fn new(gamma: f64, alpha: f64, k: usize) -> Result<Self> {
        if !(0.0..2.0).contains(&gamma) {
            return Err(Error::InvalidParameter { name: "gamma", value: gamma, expected: "gamma in [0, 2)" });
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter { name: "alpha", value: alpha, expected: "alpha >= 0" });
        }
        if k == 0 {
            return Err(Error::InvalidCutoff(k));
        }
        Ok(Self { gamma, alpha, k })
    }

    /// Parameters of the bulk boundary potential `V₊`, exponent `γ²/2`.
    pub fn v_plus(gamma: f64, k: usize) -> Result<Self> {
        Self::new(gamma, gamma * gamma / 2.0, k)
    }
}

/// Quadrature on `[0, π]` with the cosine table for modes `1..=k_max`.
#[derive(Clone, Debug)]
pub struct GmcGrid {
    k_max: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    two_sin: Vec<f64>,
    // node-major, k_max entries per node: √(2/n) cos(nθ)
    basis: Vec<f64>,
}

impl GmcGrid {
    /// Graded Gauss-Legendre rule with at least `8 k_max` nodes, refined
    /// down to the `1/k` scale of the mollified density.
    pub fn new(k_max: usize) -> Result<Self> {
        let levels = 6 + ((8.0 * k_max.max(1) as f64).ln() / (1.0f64 / 0.15).ln()).ceil() as usize;
        Self::graded(k_max, levels)
    }

    /// Grid for the unmollified density `(2 sin θ)^{−α}`: the refinement
    /// depth grows like `1/(1 − α)`.
    pub fn singular(k_max: usize, alpha: f64) -> Result<Self> {
        let singular = alpha.min(0.95);
        let levels = ((14.0 / (1.0 - singular)).ceil() as usize).clamp(6, 400);
        Self::graded(k_max, levels)
    }

    /// Rule on `[0, π/2]` refined at 0 and mirrored through `π/2`, so that
    /// nodes near `π` keep full relative accuracy in `sin θ`.
    fn graded(k_max: usize, levels: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        let half = Rule::graded(0.0, std::f64::consts::FRAC_PI_2, k_max.max(4), 12, &[0], levels);
        let m = half.len();
        let mut nodes = Vec::with_capacity(2 * m);
        let mut weights = Vec::with_capacity(2 * m);
        let mut two_sin = Vec::with_capacity(2 * m);
        let mut basis = Vec::with_capacity(2 * m * k_max);
        for mirror in [false, true] {
            for (&th, &w) in half.nodes.iter().zip(&half.weights) {
                nodes.push(if mirror { std::f64::consts::PI - th } else { th });
                weights.push(w);
                two_sin.push(2.0 * th.sin());
                for n in 1..=k_max {
                    let sign = if mirror && n % 2 == 1 { -1.0 } else { 1.0 };
                    basis.push(sign * (2.0 / n as f64).sqrt() * (n as f64 * th).cos());
                }
            }
        }
        if nodes.len() < 8 * k_max {
            return Err(Error::InsufficientQuadrature { nodes: nodes.len(), required: 8 * k_max });
        }
        Ok(Self { k_max, nodes, weights, two_sin, basis })
    }

    pub fn from_rule(k_max: usize, rule: Rule) -> Result<Self> {
        if rule.len() < 8 * k_max {
            return Err(Error::InsufficientQuadrature { nodes: rule.len(), required: 8 * k_max });
        }
        let mut basis = Vec::with_capacity(rule.len() * k_max);
        for &th in &rule.nodes {
            for n in 1..=k_max {
                basis.push((2.0 / n as f64).sqrt() * (n as f64 * th).cos());
            }
        }
        let two_sin = rule.nodes.iter().map(|t| 2.0 * t.min(std::f64::consts::PI - t).sin().abs()).collect();
        Ok(Self { k_max, nodes: rule.nodes, weights: rule.weights, two_sin, basis })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn check(&self, x: &[f64], k: usize) -> Result<()> {
        if k > self.k_max {
            return Err(Error::InsufficientQuadrature { nodes: self.len(), required: 8 * k });
        }
        if x.len() < k {
            return Err(Error::InvalidCutoff(x.len()));
        }
        Ok(())
    }

    /// `∫ e^{γφ^{h,k} − γ²/2 E[φ^{h,k}²]} ρ(θ) dθ` for the density `rho(2|sin θ|)`.
    fn chaos(&self, x: &[f64], gamma: f64, k: usize, rho: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            let row = &self.basis[i * self.k_max..i * self.k_max + k];
            let mut phi = 0.0;
            let mut var = 0.0;
            for (b, xn) in row.iter().zip(x) {
                phi += b * xn;
                var += b * b;
            }
            acc += w * (gamma * phi - 0.5 * gamma * gamma * var).exp() * rho(self.two_sin[i]);
        }
        acc
    }

    /// `V^{(k)}_α` from the first `k` modes of `x`.
    pub fn v(&self, x: &[f64], gamma: f64, alpha: f64, k: usize) -> Result<f64> {
        self.check(x, k)?;
        let m = 1.0 / k as f64;
        Ok(self.chaos(x, gamma, k, |s| (s + m).powf(-alpha)))
    }

    /// `W^{(k)}_α`, density `(2|sin θ|)^{−α}`.
    pub fn w(&self, x: &[f64], gamma: f64, alpha: f64, k: usize) -> Result<f64> {
        self.check(x, k)?;
        Ok(self.chaos(x, gamma, k, |s| s.powf(-alpha)))
    }

    /// Quadrature value of `∫ (2|sin θ| + 1/k)^{−α}`, the mean of `V^{(k)}_α`.
    pub fn v_mean(&self, alpha: f64, k: usize) -> f64 {
        let m = 1.0 / k as f64;
        self.weights.iter().zip(&self.two_sin).map(|(w, s)| w * (s + m).powf(-alpha)).sum()
    }

    /// Quadrature value of `∫ (2|sin θ|)^{−α}`.
    pub fn w_mean(&self, alpha: f64) -> f64 {
        self.weights.iter().zip(&self.two_sin).map(|(w, s)| w * s.powf(-alpha)).sum()
    }
}

fn modes_for(phi: &HalfCircleField<f64>, k: usize) -> Result<&[f64]> {
    if phi.n_cut() < k {
        return Err(Error::InvalidCutoff(phi.n_cut()));
    }
    Ok(&phi.modes[..k])
}

pub fn v_alpha_k(phi: &HalfCircleField<f64>, params: &GmcParams) -> Result<f64> {
    let x = modes_for(phi, params.k)?;
    GmcGrid::new(params.k)?.v(x, params.gamma, params.alpha, params.k)
}

pub fn w_alpha_k(phi: &HalfCircleField<f64>, params: &GmcParams) -> Result<f64> {
    if params.alpha >= 1.0 {
        return Err(Error::Divergent(format!("(2 sin θ)^(-{}) is not integrable", params.alpha)));
    }
    let x = modes_for(phi, params.k)?;
    GmcGrid::singular(params.k, params.alpha)?.w(x, params.gamma, params.alpha, params.k)
}

/// `e^{(γ/2)φ^{h,k}(θ₀) − (γ²/8) Σ_{n≤k} 2/n}` with `cos(nθ₀) = sign^n`.
fn endpoint(x: &[f64], gamma: f64, k: usize, sign: f64) -> f64 {
    let mut phi = 0.0;
    let mut var = 0.0;
    let mut s = 1.0;
    for (i, xn) in x[..k].iter().enumerate() {
        s *= sign;
        let n = (i + 1) as f64;
        phi += s * (2.0 / n).sqrt() * xn;
        var += 2.0 / n;
    }
    (0.5 * gamma * phi - gamma * gamma / 8.0 * var).exp()
}

pub fn r_k(phi: &HalfCircleField<f64>, params: &GmcParams) -> Result<f64> {
    Ok(endpoint(modes_for(phi, params.k)?, params.gamma, params.k, 1.0))
}

pub fn l_k(phi: &HalfCircleField<f64>, params: &GmcParams) -> Result<f64> {
    Ok(endpoint(modes_for(phi, params.k)?, params.gamma, params.k, -1.0))
}

/// Which regularized potential a martingale check is run on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    W,
    V,
}

/// Estimates `E[X^{(k+1)} | F_k] − X^{(k)}` for `X = W` or `V`: each outer
/// draw of `x_1..x_k` is paired with `inner` draws of `x_{k+1}`.
pub fn martingale_check(
    params: &GmcParams,
    potential: Potential,
    n_samples: u64,
    inner: usize,
    seed: u64,
) -> Result<McEstimate> {
    let (gamma, alpha, k) = (params.gamma, params.alpha, params.k);
    if potential == Potential::W && alpha >= 1.0 {
        return Err(Error::Divergent(format!("(2 sin θ)^(-{alpha}) is not integrable")));
    }
    let grid = match potential {
        Potential::W => GmcGrid::singular(k + 1, alpha)?,
        Potential::V => GmcGrid::new(k + 1)?,
    };
    let eval = |x: &[f64], level: usize| match potential {
        Potential::W => grid.w(x, gamma, alpha, level),
        Potential::V => grid.v(x, gamma, alpha, level),
    };
    let mut rng = RngStream::new(seed, 0).rng();
    let mut acc = Accumulator::new();
    let mut x = vec![0.0; k + 1];
    for _ in 0..n_samples {
        for xn in x[..k].iter_mut() {
            *xn = rng.sample(StandardNormal);
        }
        let base = eval(&x, k)?;
        let mut cond = 0.0;
        for _ in 0..inner.max(1) {
            x[k] = rng.sample(StandardNormal);
            cond += eval(&x, k + 1)?;
        }
        acc.push(cond / inner.max(1) as f64 - base);
    }
    Ok(acc.estimate(seed))
}

/// `f(p) = 1 + p(γ² − α) − p²γ²`.
pub fn p2_polynomial(p: f64, gamma: f64, alpha: f64) -> f64 {
    1.0 + p * (gamma * gamma - alpha) - p * p * gamma * gamma
}

/// Larger root `p₂` of `f`, the integrability threshold of `V_α`.
pub fn p2_threshold(gamma: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter { name: "alpha", value: alpha, expected: "alpha in (0, 1)" });
    }
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::InvalidParameter { name: "gamma", value: gamma, expected: "gamma in (0, 2)" });
    }
    let g2 = gamma * gamma;
    let h = 0.5 * (1.0 - alpha / g2);
    Ok(h + (1.0 / g2 + h * h).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub estimate: McEstimate,
    pub p: f64,
    /// Hill index of the sampled `(V^{(k)})^p`; below 2 the variance is not trustworthy.
    pub hill_index: Option<f64>,
    /// `p ≥ p₂` or `p > 2/γ²`.
    pub beyond_threshold: bool,
    pub heavy_tail: bool,
}

/// Estimates `E[(V^{(k)}_α)^p]`.
pub fn moment_estimate(params: &GmcParams, p: f64, n_samples: u64, seed: u64) -> Result<MomentReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter { name: "p", value: p, expected: "p > 0" });
    }
    let grid = GmcGrid::new(params.k)?;
    let mut rng = RngStream::new(seed, 0).rng();
    let mut acc = Accumulator::new();
    let mut samples = Vec::with_capacity(n_samples as usize);
    let mut x = vec![0.0; params.k];
    for _ in 0..n_samples {
        for xn in x.iter_mut() {
            *xn = rng.sample(StandardNormal);
        }
        let v = grid.v(&x, params.gamma, params.alpha, params.k)?.powf(p);
        acc.push(v);
        samples.push(v);
    }
    let tail = (samples.len() / 100).max(10);
    let hill_index = hill_tail_index(&samples, tail);
    let g2 = params.gamma * params.gamma;
    let beyond_threshold = (g2 > 0.0 && p > 2.0 / g2)
        || (params.alpha > 0.0
            && params.alpha < 1.0
            && g2 > 0.0
            && p >= p2_threshold(params.gamma, params.alpha).unwrap_or(f64::INFINITY));
    Ok(MomentReport {
        estimate: acc.estimate(seed),
        p,
        hill_index,
        beyond_threshold,
        heavy_tail: beyond_threshold || hill_index.is_some_and(|h| h < 2.0),
    })
}

/// Polynomial in `c` and modes `x_1..x_m`: `Σ coef · c^{c_pow} Π x_i^{pow_i}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub c_pow: u32,
    pub powers: Vec<u32>,
}

impl Polynomial {
    pub fn constant(a: f64) -> Self {
        Self { terms: vec![Monomial { coef: a, c_pow: 0, powers: vec![] }] }
    }

    pub fn monomial(coef: f64, c_pow: u32, powers: Vec<u32>) -> Self {
        Self { terms: vec![Monomial { coef, c_pow, powers }] }
    }

    pub fn plus(mut self, other: Polynomial) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Number of modes the polynomial depends on.
    pub fn n_modes(&self) -> usize {
        self.terms.iter().map(|t| t.powers.len()).max().unwrap_or(0)
    }

    pub fn eval(&self, c: f64, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let xs: f64 = t.powers.iter().enumerate().map(|(i, p)| x[i].powi(*p as i32)).product();
                t.coef * c.powi(t.c_pow as i32) * xs
            })
            .sum()
    }
}

/// Endpoint of a Cameron-Martin check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

/// Shift of `x_n` induced by the tilt `R^{(k)}` (right) or `L^{(k)}` (left):
/// the covariance of `(γ/2)φ^h(θ₀)` with `x_n`, namely `±γ/√(2n)`.
pub fn cameron_martin_shift(n: usize, gamma: f64, side: Side) -> f64 {
    let s = gamma / (2.0 * n as f64).sqrt();
    match side {
        Side::Right => s,
        Side::Left if n % 2 == 1 => -s,
        Side::Left => s,
    }
}

/// Residual `E[R^{(k)} u v] − E[u(x + a) v(x + a)]` at fixed `c`, estimated
/// with common random numbers; `shift` gives `a_n`.
pub fn cameron_martin_residual(
    u: &Polynomial,
    v: &Polynomial,
    params: &GmcParams,
    c: f64,
    side: Side,
    shift: impl Fn(usize) -> f64,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let m = u.n_modes().max(v.n_modes());
    let k = params.k;
    if k < m {
        return Err(Error::InvalidCutoff(k));
    }
    let sign = if side == Side::Right { 1.0 } else { -1.0 };
    let mut rng = RngStream::new(seed, 0).rng();
    let mut acc = Accumulator::new();
    let mut x = vec![0.0; k];
    let mut xs = vec![0.0; m];
    for _ in 0..n_samples {
        for xn in x.iter_mut() {
            *xn = rng.sample(StandardNormal);
        }
        for (i, s) in xs.iter_mut().enumerate() {
            *s = x[i] + shift(i + 1);
        }
        let lhs = endpoint(&x, params.gamma, k, sign) * u.eval(c, &x) * v.eval(c, &x);
        let rhs = u.eval(c, &xs) * v.eval(c, &xs);
        acc.push(lhs - rhs);
    }
    Ok(acc.estimate(seed))
}

/// Cameron-Martin residual with the shift `±γ/√(2n)`.
pub fn cameron_martin_check(
    u: &Polynomial,
    v: &Polynomial,
    params: &GmcParams,
    c: f64,
    side: Side,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let g = params.gamma;
    cameron_martin_residual(u, v, params, c, side, |n| cameron_martin_shift(n, g, side), n_samples, seed)
}
