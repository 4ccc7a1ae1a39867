//! Feynman-Kac Monte Carlo for the regularized semigroups.
//!
//! Paths run the free Markov process of the boundary field in the log-radius
//! `s`: the zero mode is a Brownian motion (generator `∂_c²` on half-circles,
//! `½∂_c²` on circles) and each mode is an Ornstein-Uhlenbeck process of rate
//! `n`, sampled with exact transitions.  Potentials are integrated in `s` by
//! the trapezoid rule on a uniform step dividing `t`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{hermite_psi, FockIndex};
use crate::boundary_fields::{CircleField, HalfCircleField};
use crate::error::{check_positive, Error, Result};
use crate::free_amplitudes::LiouvilleParams;
use crate::gmc::GmcGrid;
use crate::rng::RngStream;
use crate::stats::{Accumulator, McEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Half,
    Bulk,
}

/// Function of the zero mode multiplying an observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CWeight {
    One,
    /// `exp(−(c − center)²/(2 width²))`.
    Gaussian {
        center: f64,
        width: f64,
    },
}

impl CWeight {
    pub fn eval(&self, c: f64) -> f64 {
        match *self {
            CWeight::One => 1.0,
            CWeight::Gaussian { center, width } => (-(c - center).powi(2) / (2.0 * width * width)).exp(),
        }
    }

    /// `E[g(c + √var ξ)]`.
    pub fn heat(&self, c: f64, var: f64) -> f64 {
        match *self {
            CWeight::One => 1.0,
            CWeight::Gaussian { center, width } => {
                let s2 = width * width + var;
                width / s2.sqrt() * (-(c - center).powi(2) / (2.0 * s2)).exp()
            }
        }
    }

    pub fn sup(&self) -> f64 {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub kx: FockIndex,
    #[serde(default)]
    pub ky: FockIndex,
}

/// `F(c, x, y) = g(c) Σ coef ψ_{kx}(x) ψ_{ky}(y)`; half-circle observables have `ky = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub terms: Vec<Term>,
    pub c_weight: CWeight,
}

impl Observable {
    pub fn constant(a: f64) -> Self {
        Self { terms: vec![Term { coef: a, kx: FockIndex::vacuum(), ky: FockIndex::vacuum() }], c_weight: CWeight::One }
    }

    pub fn psi(kx: FockIndex, c_weight: CWeight) -> Self {
        Self { terms: vec![Term { coef: 1.0, kx, ky: FockIndex::vacuum() }], c_weight }
    }

    pub fn n_modes(&self) -> usize {
        self.terms.iter().map(|t| t.kx.support().max(t.ky.support())).max().unwrap_or(0)
    }

    fn is_half(&self) -> bool {
        self.terms.iter().all(|t| t.ky.support() == 0)
    }

    pub fn eval(&self, c: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            let py = if t.ky.support() == 0 { 1.0 } else { hermite_psi(&t.ky, y)? };
            acc += t.coef * hermite_psi(&t.kx, x)? * py;
        }
        Ok(acc * self.c_weight.eval(c))
    }

    /// Bound on `|F|` for Gaussian-free terms of degree zero; `None` otherwise.
    pub fn sup_bound(&self) -> Option<f64> {
        if self.terms.iter().all(|t| t.kx.support() == 0 && t.ky.support() == 0) {
            Some(self.terms.iter().map(|t| t.coef).sum::<f64>().abs() * self.c_weight.sup())
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkCutoffs {
    /// Modes entering the regularized potentials.
    pub modes: usize,
    /// Target time step; the actual step divides `t`.
    pub dt: f64,
}

impl FkCutoffs {
    pub fn doubled(&self) -> Self {
        Self { modes: 2 * self.modes, dt: self.dt / 2.0 }
    }

    fn steps(&self, t: f64) -> usize {
        ((t / self.dt).round() as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupQuery {
    pub t: f64,
    pub params: LiouvilleParams,
    pub observable: Observable,
    pub cutoffs: FkCutoffs,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkReport {
    pub estimate: McEstimate,
    pub quadratic_form_valid: bool,
    pub steps: usize,
    pub modes: usize,
    /// `e^{−tQ²/4}` (half) or `e^{−tQ²/2}` (bulk).
    pub prefactor: f64,
}

#[derive(Clone, Debug)]
struct State {
    c: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

struct CircleGrid {
    points: usize,
    // point-major, modes entries: cos(nθ)/√n, sin(nθ)/√n
    cos: Vec<f64>,
    sin: Vec<f64>,
}

struct Engine<'a> {
    geom: Geometry,
    params: &'a LiouvilleParams,
    modes: usize,
    alpha: f64,
    half_grid: Option<GmcGrid>,
    circle_grid: Option<CircleGrid>,
}

impl<'a> Engine<'a> {
    fn new(geom: Geometry, params: &'a LiouvilleParams, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        let half_grid = match geom {
            Geometry::Half if params.mu > 0.0 => Some(GmcGrid::new(modes)?),
            _ => None,
        };
        let circle_grid = match geom {
            Geometry::Bulk if params.mu > 0.0 => {
                let points = (8 * modes).max(16);
                let mut cos = Vec::with_capacity(points * modes);
                let mut sin = Vec::with_capacity(points * modes);
                for j in 0..points {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / points as f64;
                    for n in 1..=modes {
                        let a = (n as f64 * th).sin_cos();
                        let r = (n as f64).sqrt();
                        sin.push(a.0 / r);
                        cos.push(a.1 / r);
                    }
                }
                Some(CircleGrid { points, cos, sin })
            }
            _ => None,
        };
        let g = params.gamma;
        Ok(Self { geom, params, modes, alpha: g * g / 2.0, half_grid, circle_grid })
    }

    fn prefactor(&self, t: f64) -> f64 {
        let q2 = self.params.q * self.params.q;
        match self.geom {
            Geometry::Half => (-t * q2 / 4.0).exp(),
            Geometry::Bulk => (-t * q2 / 2.0).exp(),
        }
    }

    fn potential(&self, st: &State) -> Result<f64> {
        let p = self.params;
        let g = p.gamma;
        let k = self.modes;
        let mut u = 0.0;
        match self.geom {
            Geometry::Half => {
                if let Some(grid) = &self.half_grid {
                    u += p.mu * (g * st.c).exp() * grid.v(&st.x, g, self.alpha, k)?;
                }
                if p.mu_l > 0.0 || p.mu_r > 0.0 {
                    let e = (0.5 * g * st.c).exp();
                    let mut right = 0.0;
                    let mut left = 0.0;
                    let mut var = 0.0;
                    for (i, xn) in st.x[..k].iter().enumerate() {
                        let n = (i + 1) as f64;
                        let b = (2.0 / n).sqrt() * xn;
                        right += b;
                        left += if i % 2 == 0 { -b } else { b };
                        var += 2.0 / n;
                    }
                    let norm = -g * g / 8.0 * var;
                    u += p.mu_r * e * (0.5 * g * right + norm).exp();
                    u += p.mu_l * e * (0.5 * g * left + norm).exp();
                }
            }
            Geometry::Bulk => {
                if let Some(grid) = &self.circle_grid {
                    let var: f64 = (1..=k).map(|n| 1.0 / n as f64).sum();
                    let mut acc = 0.0;
                    for j in 0..grid.points {
                        let row = j * k..(j + 1) * k;
                        let mut phi = 0.0;
                        for ((c, s), (xn, yn)) in
                            grid.cos[row.clone()].iter().zip(&grid.sin[row]).zip(st.x.iter().zip(&st.y))
                        {
                            phi += xn * c - yn * s;
                        }
                        acc += (g * phi - 0.5 * g * g * var).exp();
                    }
                    u += p.mu * (g * st.c).exp() * acc * 2.0 * std::f64::consts::PI / grid.points as f64;
                }
            }
        }
        Ok(u)
    }

    fn transition(&self, st: &mut State, h: f64, rng: &mut ChaCha8Rng) {
        let zero_var = match self.geom {
            Geometry::Half => 2.0 * h,
            Geometry::Bulk => h,
        };
        st.c += zero_var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        for (i, xn) in st.x.iter_mut().enumerate() {
            let r = (-((i + 1) as f64) * h).exp();
            *xn = r * *xn + (-(-2.0 * (i + 1) as f64 * h).exp_m1()).sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
        for (i, yn) in st.y.iter_mut().enumerate() {
            let r = (-((i + 1) as f64) * h).exp();
            *yn = r * *yn + (-(-2.0 * (i + 1) as f64 * h).exp_m1()).sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
    }

    fn interacting(&self) -> bool {
        self.half_grid.is_some()
            || self.circle_grid.is_some()
            || (self.geom == Geometry::Half && (self.params.mu_l > 0.0 || self.params.mu_r > 0.0))
    }

    /// Runs `st` for time `t` in `steps` steps; returns `−∫U ds`.
    fn run(&self, st: &mut State, t: f64, steps: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
        let h = t / steps as f64;
        if !self.interacting() {
            for _ in 0..steps {
                self.transition(st, h, rng);
            }
            return Ok(0.0);
        }
        let mut lw = -0.5 * h * self.potential(st)?;
        for i in 1..=steps {
            self.transition(st, h, rng);
            let w = if i == steps { 0.5 * h } else { h };
            lw -= w * self.potential(st)?;
        }
        Ok(lw)
    }
}

fn start_half(phi: &HalfCircleField<f64>, modes: usize) -> State {
    State { c: phi.c, x: (1..=modes).map(|n| phi.mode(n)).collect(), y: Vec::new() }
}

fn start_bulk(phi: &CircleField<f64>, modes: usize) -> State {
    let (x, y) = (1..=modes).map(|n| phi.mode(n)).unzip();
    State { c: phi.c, x, y }
}

fn validate(q: &SemigroupQuery, geom: Geometry) -> Result<()> {
    check_positive("t", q.t)?;
    check_positive("dt", q.cutoffs.dt)?;
    if q.n_samples < 2 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: q.n_samples as f64,
            expected: "at least 2 samples",
        });
    }
    if geom == Geometry::Half && !q.observable.is_half() {
        return Err(Error::ShapeMismatch("half-circle observables carry no y modes".into()));
    }
    Ok(())
}

fn simulate(q: &SemigroupQuery, geom: Geometry, start: &State, stream: RngStream) -> Result<FkReport> {
    validate(q, geom)?;
    let engine = Engine::new(geom, &q.params, q.cutoffs.modes)?;
    let steps = q.cutoffs.steps(q.t);
    let pre = engine.prefactor(q.t);
    let mut rng = stream.rng();
    let mut acc = Accumulator::new();
    for _ in 0..q.n_samples {
        let mut st = start.clone();
        let lw = engine.run(&mut st, q.t, steps, &mut rng)?;
        acc.push(pre * q.observable.eval(st.c, &st.x, &st.y)? * lw.exp());
    }
    Ok(FkReport {
        estimate: acc.estimate(q.seed),
        quadratic_form_valid: q.params.quadratic_form_valid(),
        steps,
        modes: q.cutoffs.modes,
        prefactor: pre,
    })
}

fn sim_modes(q: &SemigroupQuery) -> usize {
    q.cutoffs.modes.max(q.observable.n_modes())
}

/// `S_μ(t)F(φ)` on the half-annulus.
pub fn fk_apply(query: &SemigroupQuery, phi: &HalfCircleField<f64>) -> Result<FkReport> {
    let start = start_half(phi, sim_modes(query));
    simulate(query, Geometry::Half, &start, RngStream::new(query.seed, 0))
}

/// `S(t)F(φ)` on the annulus with the bulk potential.
pub fn fk_apply_bulk(query: &SemigroupQuery, phi: &CircleField<f64>) -> Result<FkReport> {
    let start = start_bulk(phi, sim_modes(query));
    simulate(query, Geometry::Bulk, &start, RngStream::new(query.seed, 0))
}

fn free_apply(t: f64, q2_factor: f64, zero_var: f64, obs: &Observable, c: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for term in &obs.terms {
        let lvl = (term.kx.level() + term.ky.level()) as f64;
        let py = if term.ky.support() == 0 { 1.0 } else { hermite_psi(&term.ky, y)? };
        acc += term.coef * (-t * lvl).exp() * hermite_psi(&term.kx, x)? * py;
    }
    Ok((-t * q2_factor).exp() * obs.c_weight.heat(c, zero_var) * acc)
}

/// Exact `e^{−tH⁰₊}F(φ)`.
pub fn free_apply_half(t: f64, params: &LiouvilleParams, obs: &Observable, phi: &HalfCircleField<f64>) -> Result<f64> {
    check_positive("t", t)?;
    if !obs.is_half() {
        return Err(Error::ShapeMismatch("half-circle observables carry no y modes".into()));
    }
    let st = start_half(phi, obs.n_modes());
    free_apply(t, params.q * params.q / 4.0, 2.0 * t, obs, st.c, &st.x, &[])
}

/// Exact `e^{−tH⁰}F(φ)`.
pub fn free_apply_bulk(t: f64, params: &LiouvilleParams, obs: &Observable, phi: &CircleField<f64>) -> Result<f64> {
    check_positive("t", t)?;
    let st = start_bulk(phi, obs.n_modes());
    free_apply(t, params.q * params.q / 2.0, t, obs, st.c, &st.x, &st.y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub direct: McEstimate,
    pub composed: McEstimate,
    pub difference: McEstimate,
    pub pass: bool,
}

/// Compares `S(t+s)F` with `S(t)[S(s)F]`, the inner semigroup estimated by
/// `inner` paths from each outer endpoint.  Both use the step `cutoffs.dt`.
pub fn compose_check(
    geom: Geometry,
    t: f64,
    s: f64,
    query: &SemigroupQuery,
    start: &BoundaryStart,
    inner: usize,
) -> Result<ComposeReport> {
    check_positive("s", s)?;
    let modes = sim_modes(query);
    let st0 = start.state(geom, modes)?;
    let long = SemigroupQuery { t: t + s, ..query.clone() };
    let direct = simulate(&long, geom, &st0, RngStream::new(query.seed, 0))?.estimate;

    let q1 = SemigroupQuery { t, ..query.clone() };
    validate(&q1, geom)?;
    let engine = Engine::new(geom, &query.params, query.cutoffs.modes)?;
    let (n1, n2) = (query.cutoffs.steps(t), query.cutoffs.steps(s));
    let (p1, p2) = (engine.prefactor(t), engine.prefactor(s));
    let mut rng = RngStream::new(query.seed, 1).rng();
    let mut acc = Accumulator::new();
    let inner = inner.max(1);
    for _ in 0..query.n_samples {
        let mut mid = st0.clone();
        let w1 = engine.run(&mut mid, t, n1, &mut rng)?.exp();
        let mut sum = 0.0;
        for _ in 0..inner {
            let mut end = mid.clone();
            let w2 = engine.run(&mut end, s, n2, &mut rng)?.exp();
            sum += query.observable.eval(end.c, &end.x, &end.y)? * w2;
        }
        acc.push(p1 * w1 * p2 * sum / inner as f64);
    }
    let composed = acc.estimate(query.seed);
    let difference = direct.minus(&composed);
    Ok(ComposeReport { direct, composed, pass: difference.agrees_with(0.0, 3.0, 0.0), difference })
}

/// Initial datum for geometry-generic checks.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryStart {
    Half(HalfCircleField<f64>),
    Bulk(CircleField<f64>),
}

impl BoundaryStart {
    fn state(&self, geom: Geometry, modes: usize) -> Result<State> {
        match (self, geom) {
            (BoundaryStart::Half(f), Geometry::Half) => Ok(start_half(f, modes)),
            (BoundaryStart::Bulk(f), Geometry::Bulk) => Ok(start_bulk(f, modes)),
            _ => Err(Error::ShapeMismatch("initial datum does not match the geometry".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse: McEstimate,
    pub fine: McEstimate,
    pub shift: McEstimate,
    /// Doubling the cutoffs moved the estimate by more than 3 stderr.
    pub flagged: bool,
}

/// Reruns with doubled mode cutoff and halved step.
pub fn refinement_check(geom: Geometry, query: &SemigroupQuery, start: &BoundaryStart) -> Result<RefinementReport> {
    let coarse_q = query.clone();
    let fine_q = SemigroupQuery { cutoffs: query.cutoffs.doubled(), ..query.clone() };
    let coarse = simulate(&coarse_q, geom, &start.state(geom, sim_modes(&coarse_q))?, RngStream::new(query.seed, 0))?;
    let fine = simulate(&fine_q, geom, &start.state(geom, sim_modes(&fine_q))?, RngStream::new(query.seed, 2))?;
    let shift = fine.estimate.minus(&coarse.estimate);
    Ok(RefinementReport {
        coarse: coarse.estimate,
        fine: fine.estimate,
        flagged: !shift.agrees_with(0.0, 3.0, 0.0),
        shift,
    })
}

/// `⟨S(t)F, G⟩ − ⟨F, S(t)G⟩` under `dc ⊗ P`, the zero mode drawn from
/// `N(c_center, c_width²)` and reweighted to Lebesgue measure.
pub fn self_adjointness_check(
    geom: Geometry,
    query: &SemigroupQuery,
    g: &Observable,
    c_center: f64,
    c_width: f64,
) -> Result<McEstimate> {
    validate(query, geom)?;
    check_positive("c_width", c_width)?;
    if geom == Geometry::Half && !g.is_half() {
        return Err(Error::ShapeMismatch("half-circle observables carry no y modes".into()));
    }
    let f = &query.observable;
    let engine = Engine::new(geom, &query.params, query.cutoffs.modes)?;
    let modes = query.cutoffs.modes.max(f.n_modes()).max(g.n_modes());
    let steps = query.cutoffs.steps(query.t);
    let pre = engine.prefactor(query.t);
    let mut rng = RngStream::new(query.seed, 3).rng();
    let mut acc = Accumulator::new();
    let norm = 1.0 / (c_width * (2.0 * std::f64::consts::PI).sqrt());
    for _ in 0..query.n_samples {
        let z: f64 = rng.sample(StandardNormal);
        let c = c_center + c_width * z;
        let inv_pdf = 1.0 / (norm * (-0.5 * z * z).exp());
        let x: Vec<f64> = (0..modes).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = match geom {
            Geometry::Half => Vec::new(),
            Geometry::Bulk => (0..modes).map(|_| rng.sample(StandardNormal)).collect(),
        };
        let st = State { c, x, y };
        let mut a = st.clone();
        let wa = engine.run(&mut a, query.t, steps, &mut rng)?.exp();
        let mut b = st.clone();
        let wb = engine.run(&mut b, query.t, steps, &mut rng)?.exp();
        let lhs = f.eval(a.c, &a.x, &a.y)? * wa * g.eval(st.c, &st.x, &st.y)?;
        let rhs = f.eval(st.c, &st.x, &st.y)? * g.eval(b.c, &b.x, &b.y)? * wb;
        acc.push(pre * (lhs - rhs) * inv_pdf);
    }
    Ok(acc.estimate(query.seed))
}

/// Gram matrices `E[U ψ_a ψ_b]` for `U ∈ {V₊^{(k)}, L^{(k)}, R^{(k)}}` over `|a|, |b| ≤ k_level`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialMatrices {
    pub basis: Vec<FockIndex>,
    pub v: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub v_stderr: DMatrix<f64>,
    pub l_stderr: DMatrix<f64>,
    pub r_stderr: DMatrix<f64>,
    /// Smallest eigenvalues of `v`, `l`, `r`.
    pub min_eigenvalues: [f64; 3],
    /// Largest eigenvalue of `v + l + r`.
    pub c_k: f64,
}

pub fn potential_matrix_on_ek(
    k_level: usize,
    gamma: f64,
    k: usize,
    n_samples: u64,
    seed: u64,
) -> Result<PotentialMatrices> {
    if !(0.0..2.0).contains(&gamma) {
        return Err(Error::InvalidParameter { name: "gamma", value: gamma, expected: "gamma in [0, 2)" });
    }
    let basis = super::fock_basis(k_level);
    let dim = basis.len();
    let modes = k.max(k_level).max(1);
    let grid = GmcGrid::new(k.max(1))?;
    let alpha = gamma * gamma / 2.0;
    let mut rng = RngStream::new(seed, 0).rng();
    let mut accs = vec![Accumulator::new(); 3 * dim * dim];
    let mut psi = vec![0.0; dim];
    let mut x = vec![0.0; modes];
    for _ in 0..n_samples {
        for xn in x.iter_mut() {
            *xn = rng.sample(StandardNormal);
        }
        for (p, b) in psi.iter_mut().zip(&basis) {
            *p = hermite_psi(b, &x)?;
        }
        let kk = k.max(1);
        let v = grid.v(&x, gamma, alpha, kk)?;
        let (mut right, mut left, mut var) = (0.0, 0.0, 0.0);
        for (i, xn) in x[..kk].iter().enumerate() {
            let n = (i + 1) as f64;
            let b = (2.0 / n).sqrt() * xn;
            right += b;
            left += if i % 2 == 0 { -b } else { b };
            var += 2.0 / n;
        }
        let r = (0.5 * gamma * right - gamma * gamma / 8.0 * var).exp();
        let l = (0.5 * gamma * left - gamma * gamma / 8.0 * var).exp();
        for (u_i, u) in [v, l, r].into_iter().enumerate() {
            for a in 0..dim {
                for b in 0..dim {
                    accs[(u_i * dim + a) * dim + b].push(u * psi[a] * psi[b]);
                }
            }
        }
    }
    let pick = |u: usize, se: bool| {
        DMatrix::from_fn(dim, dim, |a, b| {
            let e = accs[(u * dim + a) * dim + b].estimate(seed);
            if se {
                e.stderr
            } else {
                e.mean
            }
        })
    };
    let (v, l, r) = (pick(0, false), pick(1, false), pick(2, false));
    let min_eig = |m: &DMatrix<f64>| SymmetricEigen::new(m.clone()).eigenvalues.min();
    let total = &v + &l + &r;
    let c_k = SymmetricEigen::new(total).eigenvalues.max();
    Ok(PotentialMatrices {
        min_eigenvalues: [min_eig(&v), min_eig(&l), min_eig(&r)],
        c_k,
        v_stderr: pick(0, true),
        l_stderr: pick(1, true),
        r_stderr: pick(2, true),
        basis,
        v,
        l,
        r,
    })
}
