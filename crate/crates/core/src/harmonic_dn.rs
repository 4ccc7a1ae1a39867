//! Harmonic extensions, Dirichlet-to-Neumann blocks and Green functions on flat
//! cylinders `[0, t] × T` (annuli) and half-cylinders `[0, t] × [0, π]`
//! (half-annuli, Neumann on the straight sides).
//!
//! Everything is diagonal in the Fourier index; blocks act on Fourier
//! coefficients, hence equally on the `x` and `y` mode coordinates.  The
//! Green functions are normalized by `−ΔG = 2πδ`.

use serde::{Deserialize, Serialize};

use crate::boundary_fields::{CircleField, HalfCircleField};
use crate::error::{check_positive, Error, Result};
use crate::scalar::{coth, csch, idx, lit, one_minus_exp_neg, to_f64, Scalar};

/// Cylinder of modulus `t = −log q`; `half` selects the half-annulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderGeometry<T> {
    t: T,
    half: bool,
}

impl<T: Scalar> CylinderGeometry<T> {
    pub fn new(t: T, half: bool) -> Result<Self> {
        check_positive("t", to_f64(t))?;
        Ok(Self { t, half })
    }

    /// Geometry of the (half-)annulus `q < |z| < 1`.
    pub fn from_q(q: T, half: bool) -> Result<Self> {
        let qf = to_f64(q);
        if !(qf > 0.0 && qf < 1.0) {
            return Err(Error::InvalidParameter { name: "q", value: qf, expected: "q in (0, 1)" });
        }
        Self::new(-q.ln(), half)
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn q(&self) -> T {
        (-self.t).exp()
    }

    pub fn half(&self) -> bool {
        self.half
    }

    pub fn parity(&self) -> Parity {
        if self.half {
            Parity::Even
        } else {
            Parity::Full
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Full,
    Even,
}

/// A 1×1 or symmetric-storage 2×2 block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Block<T> {
    Scalar(T),
    Pair([[T; 2]; 2]),
}

impl<T: Scalar> Block<T> {
    pub fn dim(&self) -> usize {
        match self {
            Block::Scalar(_) => 1,
            Block::Pair(_) => 2,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        match self {
            Block::Scalar(a) => {
                assert!(i == 0 && j == 0);
                *a
            }
            Block::Pair(m) => m[i][j],
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Block::Scalar(_) => true,
            Block::Pair(m) => m[0][1] == m[1][0],
        }
    }

    /// Positive semidefiniteness up to `tol` times the block scale.
    pub fn is_psd(&self, tol: T) -> bool {
        match self {
            Block::Scalar(a) => *a >= -tol,
            Block::Pair(m) => {
                let scale = m[0][0].abs().max(m[1][1].abs()).max(T::one());
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                m[0][0] >= -tol * scale && m[1][1] >= -tol * scale && det >= -tol * scale * scale
            }
        }
    }

    /// `vᵀ B v` for `v` of length `dim()`.
    pub fn quadratic(&self, v: &[T]) -> T {
        match self {
            Block::Scalar(a) => *a * v[0] * v[0],
            Block::Pair(m) => m[0][0] * v[0] * v[0] + lit::<T>(2.0) * m[0][1] * v[0] * v[1] + m[1][1] * v[1] * v[1],
        }
    }

    /// `B − λ·Id`.
    pub fn shifted(&self, lambda: T) -> Self {
        match self {
            Block::Scalar(a) => Block::Scalar(*a - lambda),
            Block::Pair(m) => Block::Pair([[m[0][0] - lambda, m[0][1]], [m[1][0], m[1][1] - lambda]]),
        }
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        match self {
            Block::Scalar(a) => vec![vec![to_f64(*a)]],
            Block::Pair(m) => m.iter().map(|r| r.iter().map(|v| to_f64(*v)).collect()).collect(),
        }
    }
}

/// Block-diagonal operator over Fourier modes `0..=N_cut`.
#[derive(Clone, Debug, PartialEq)]
pub struct DnOperator<T> {
    pub parity: Parity,
    pub t: Option<T>,
    pub zero_block: Block<T>,
    pub blocks: Vec<Block<T>>,
}

impl<T: Scalar> DnOperator<T> {
    pub fn n_cut(&self) -> usize {
        self.blocks.len()
    }

    /// Block of mode `n`, `n = 0` being the zero mode.
    pub fn block(&self, n: usize) -> &Block<T> {
        if n == 0 {
            &self.zero_block
        } else {
            &self.blocks[n - 1]
        }
    }

    /// Subtracts the model operator `D` (`|n|·Id` on each boundary).
    pub fn minus_model(&self) -> Self {
        Self {
            parity: self.parity,
            t: self.t,
            zero_block: self.zero_block,
            blocks: self.blocks.iter().enumerate().map(|(i, b)| b.shifted(idx::<T>(i + 1))).collect(),
        }
    }

    /// `(φ, Bφ)_2` for two circle data, with both `x` and `y` families.
    pub fn form_circle_pair(&self, f1: &CircleField<T>, f2: &CircleField<T>) -> T {
        let two = lit::<T>(2.0);
        let mut acc = self.zero_block.quadratic(&[f1.c, f2.c]);
        for n in 1..=self.n_cut() {
            let (x1, y1) = f1.mode(n);
            let (x2, y2) = f2.mode(n);
            let b = self.block(n);
            acc = acc + (b.quadratic(&[x1, x2]) + b.quadratic(&[y1, y2])) / (two * idx::<T>(n));
        }
        acc
    }

    /// `(φ, Bφ)_2` for two half-circle data, including the ½ weight of the pairing.
    pub fn form_half_pair(&self, f1: &HalfCircleField<T>, f2: &HalfCircleField<T>) -> T {
        let mut acc = self.zero_block.quadratic(&[f1.c, f2.c]);
        for n in 1..=self.n_cut() {
            acc = acc + self.block(n).quadratic(&[f1.mode(n), f2.mode(n)]) / idx::<T>(n);
        }
        acc / lit::<T>(2.0)
    }

    /// `(φ, Bφ)_2` for a single circle datum and 1×1 blocks.
    pub fn form_circle(&self, f: &CircleField<T>) -> T {
        let two = lit::<T>(2.0);
        let mut acc = self.zero_block.quadratic(&[f.c]);
        for n in 1..=self.n_cut() {
            let (x, y) = f.mode(n);
            let b = self.block(n);
            acc = acc + (b.quadratic(&[x]) + b.quadratic(&[y])) / (two * idx::<T>(n));
        }
        acc
    }

    /// `(φ, Bφ)_2` for a single half-circle datum and 1×1 blocks.
    pub fn form_half(&self, f: &HalfCircleField<T>) -> T {
        let mut acc = self.zero_block.quadratic(&[f.c]);
        for n in 1..=self.n_cut() {
            acc = acc + self.block(n).quadratic(&[f.mode(n)]) / idx::<T>(n);
        }
        acc / lit::<T>(2.0)
    }

    pub fn to_json(&self) -> Result<String> {
        let record = DnRecord {
            parity: self.parity,
            t: self.t.map(to_f64),
            zero_block: self.zero_block.to_rows(),
            blocks: self.blocks.iter().map(|b| b.to_rows()).collect(),
        };
        Ok(serde_json::to_string(&record)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: DnRecord = serde_json::from_str(s)?;
        let block = |rows: &Vec<Vec<f64>>| -> Result<Block<T>> {
            match rows.len() {
                1 if rows[0].len() == 1 => Ok(Block::Scalar(lit(rows[0][0]))),
                2 if rows[0].len() == 2 && rows[1].len() == 2 => {
                    Ok(Block::Pair([[lit(rows[0][0]), lit(rows[0][1])], [lit(rows[1][0]), lit(rows[1][1])]]))
                }
                _ => Err(Error::ShapeMismatch("blocks must be 1x1 or 2x2".into())),
            }
        };
        Ok(Self {
            parity: r.parity,
            t: r.t.map(lit),
            zero_block: block(&r.zero_block)?,
            blocks: r.blocks.iter().map(block).collect::<Result<_>>()?,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DnRecord {
    parity: Parity,
    t: Option<f64>,
    zero_block: Vec<Vec<f64>>,
    blocks: Vec<Vec<Vec<f64>>>,
}

/// Model multiplier `√(n² + λ)`; at `λ = 0` this is `D`.
pub fn dn_model<T: Scalar>(lambda: T, n_cut: usize) -> Result<DnOperator<T>> {
    crate::error::check_nonneg("lambda", to_f64(lambda))?;
    Ok(DnOperator {
        parity: Parity::Full,
        t: None,
        zero_block: Block::Scalar(lambda.sqrt()),
        blocks: (1..=n_cut)
            .map(|n| {
                let k = idx::<T>(n);
                Block::Scalar((k * k + lambda).sqrt())
            })
            .collect(),
    })
}

/// Two-boundary DN map of the cylinder; rows are (outer `s = 0`, inner `s = t`).
pub fn dn_annulus<T: Scalar>(geom: &CylinderGeometry<T>, n_cut: usize) -> DnOperator<T> {
    let t = geom.t();
    let z = T::one() / t;
    DnOperator {
        parity: geom.parity(),
        t: Some(t),
        zero_block: Block::Pair([[z, -z], [-z, z]]),
        blocks: (1..=n_cut)
            .map(|n| {
                let k = idx::<T>(n);
                let d = k * coth(k * t);
                let o = -k * csch(k * t);
                Block::Pair([[d, o], [o, d]])
            })
            .collect(),
    }
}

/// DN map at one end of the cylinder with the other end grounded.
pub fn dn_one_sided<T: Scalar>(geom: &CylinderGeometry<T>, n_cut: usize) -> DnOperator<T> {
    let t = geom.t();
    DnOperator {
        parity: geom.parity(),
        t: Some(t),
        zero_block: Block::Scalar(T::one() / t),
        blocks: (1..=n_cut).map(|n| Block::Scalar(idx::<T>(n) * coth(idx::<T>(n) * t))).collect(),
    }
}

/// Jump of normal derivatives across the cut joining cylinders of moduli `t1`, `t2`.
pub fn dn_jump<T: Scalar>(g1: &CylinderGeometry<T>, g2: &CylinderGeometry<T>, n_cut: usize) -> Result<DnOperator<T>> {
    if g1.half() != g2.half() {
        return Err(Error::ParityMismatch);
    }
    let (t1, t2) = (g1.t(), g2.t());
    Ok(DnOperator {
        parity: g1.parity(),
        t: Some(t1 + t2),
        zero_block: Block::Scalar(T::one() / t1 + T::one() / t2),
        blocks: (1..=n_cut)
            .map(|n| {
                let k = idx::<T>(n);
                Block::Scalar(k * (coth(k * t1) + coth(k * t2)))
            })
            .collect(),
    })
}

/// `sinh(n(t−s))/sinh(nt)` and `sinh(ns)/sinh(nt)` for `0 ≤ s ≤ t`.
fn profiles<T: Scalar>(n: T, s: T, t: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let den = one_minus_exp_neg(two * n * t);
    let a = (-n * s).exp() * one_minus_exp_neg(two * n * (t - s)) / den;
    let b = (-n * (t - s)).exp() * one_minus_exp_neg(two * n * s) / den;
    (a, b)
}

/// s-derivatives of [`profiles`].
fn profile_derivatives<T: Scalar>(n: T, s: T, t: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let den = one_minus_exp_neg(two * n * t);
    let a = -n * (-n * s).exp() * (T::one() + (-two * n * (t - s)).exp()) / den;
    let b = n * (-n * (t - s)).exp() * (T::one() + (-two * n * s).exp()) / den;
    (a, b)
}

/// Harmonic extension into the half-annulus `q ≤ |z| ≤ 1`, `Im z ≥ 0`, of
/// `φ1` on `|z| = 1` and `φ2` on `|z| = q`, Neumann on the real segments.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfAnnulusExtension<T> {
    pub geom: CylinderGeometry<T>,
    pub outer: HalfCircleField<T>,
    pub inner: HalfCircleField<T>,
}

pub fn harmonic_extension_half_annulus<T: Scalar>(
    geom: &CylinderGeometry<T>,
    phi1: &HalfCircleField<T>,
    phi2: &HalfCircleField<T>,
) -> Result<HalfAnnulusExtension<T>> {
    if !geom.half() {
        return Err(Error::ShapeMismatch("half-annulus extension needs a half geometry".into()));
    }
    let n = phi1.n_cut().max(phi2.n_cut());
    Ok(HalfAnnulusExtension { geom: *geom, outer: phi1.padded(n), inner: phi2.padded(n) })
}

impl<T: Scalar> HalfAnnulusExtension<T> {
    /// Coefficients `(a_n, b_n)` of `(zⁿ + z̄ⁿ)` and `(z⁻ⁿ + z̄⁻ⁿ)`.
    pub fn coefficients(&self) -> Vec<(T, T)> {
        let t = self.geom.t();
        let two = lit::<T>(2.0);
        (1..=self.outer.n_cut())
            .map(|n| {
                let k = idx::<T>(n);
                let (x1, x2) = (self.outer.mode(n), self.inner.mode(n));
                let e1 = (-k * t).exp();
                let e2 = (-two * k * t).exp();
                // (qⁿ − q⁻ⁿ) = −q⁻ⁿ(1 − q²ⁿ); divide numerators by q⁻ⁿ.
                let den = -one_minus_exp_neg(two * k * t) * (two * k).sqrt();
                ((x2 * e1 - x1) / den, (x1 * e2 - x2 * e1) / den)
            })
            .collect()
    }

    /// Value at cylinder coordinates `z = e^{−s+iθ}`.
    pub fn evaluate(&self, s: T, theta: T) -> T {
        let t = self.geom.t();
        let two = lit::<T>(2.0);
        let (c1, c2) = (self.outer.c, self.inner.c);
        let mut acc = c1 + (c2 - c1) * s / t;
        for n in 1..=self.outer.n_cut() {
            let k = idx::<T>(n);
            let (a, b) = profiles(k, s, t);
            let u = self.outer.mode(n) * a + self.inner.mode(n) * b;
            acc = acc + (two / k).sqrt() * u * (k * theta).cos();
        }
        acc
    }

    /// `(∂_s, ∂_θ)` at cylinder coordinates.
    pub fn gradient(&self, s: T, theta: T) -> (T, T) {
        let t = self.geom.t();
        let two = lit::<T>(2.0);
        let mut ds = (self.inner.c - self.outer.c) / t;
        let mut dth = T::zero();
        for n in 1..=self.outer.n_cut() {
            let k = idx::<T>(n);
            let (a, b) = profiles(k, s, t);
            let (da, db) = profile_derivatives(k, s, t);
            let (x1, x2) = (self.outer.mode(n), self.inner.mode(n));
            let (sn, cn) = (k * theta).sin_cos();
            let w = (two / k).sqrt();
            ds = ds + w * (x1 * da + x2 * db) * cn;
            dth = dth - w * (x1 * a + x2 * b) * k * sn;
        }
        (ds, dth)
    }

    /// Value at a point of the complex plane.
    pub fn evaluate_z(&self, re: T, im: T) -> T {
        let r = re.hypot(im);
        self.evaluate(-r.ln(), im.atan2(re))
    }
}

/// Harmonic extension into the annulus `q ≤ |z| ≤ 1` of `φ1` on `|z| = 1`
/// and `φ2` on `|z| = q`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusExtension<T> {
    pub geom: CylinderGeometry<T>,
    pub outer: CircleField<T>,
    pub inner: CircleField<T>,
}

pub fn harmonic_extension_annulus<T: Scalar>(
    geom: &CylinderGeometry<T>,
    phi1: &CircleField<T>,
    phi2: &CircleField<T>,
) -> AnnulusExtension<T> {
    let n = phi1.n_cut().max(phi2.n_cut());
    AnnulusExtension { geom: *geom, outer: phi1.padded(n), inner: phi2.padded(n) }
}

impl<T: Scalar> AnnulusExtension<T> {
    pub fn evaluate(&self, s: T, theta: T) -> T {
        let t = self.geom.t();
        let (c1, c2) = (self.outer.c, self.inner.c);
        let mut acc = c1 + (c2 - c1) * s / t;
        for n in 1..=self.outer.n_cut() {
            let k = idx::<T>(n);
            let (a, b) = profiles(k, s, t);
            let (x1, y1) = self.outer.mode(n);
            let (x2, y2) = self.inner.mode(n);
            let (sn, cn) = (k * theta).sin_cos();
            acc = acc + ((x1 * a + x2 * b) * cn - (y1 * a + y2 * b) * sn) / k.sqrt();
        }
        acc
    }

    pub fn gradient(&self, s: T, theta: T) -> (T, T) {
        let t = self.geom.t();
        let mut ds = (self.inner.c - self.outer.c) / t;
        let mut dth = T::zero();
        for n in 1..=self.outer.n_cut() {
            let k = idx::<T>(n);
            let (a, b) = profiles(k, s, t);
            let (da, db) = profile_derivatives(k, s, t);
            let (x1, y1) = self.outer.mode(n);
            let (x2, y2) = self.inner.mode(n);
            let (sn, cn) = (k * theta).sin_cos();
            let r = k.sqrt();
            ds = ds + ((x1 * da + x2 * db) * cn - (y1 * da + y2 * db) * sn) / r;
            dth = dth - ((x1 * a + x2 * b) * sn + (y1 * a + y2 * b) * cn) * k / r;
        }
        (ds, dth)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Dirichlet at both ends of the cylinder.
    DD,
    /// Dirichlet at both ends, Neumann on the sides `θ ∈ {0, π}` of the half-cylinder.
    Mixed,
}

/// Green function of the (half-)cylinder, mode by mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenKernel<T> {
    pub geom: CylinderGeometry<T>,
    pub bc: BoundaryCondition,
}

pub fn green_cylinder<T: Scalar>(geom: &CylinderGeometry<T>, bc: BoundaryCondition) -> GreenKernel<T> {
    GreenKernel { geom: *geom, bc }
}

/// `g_n(s, s')` on `[0, t]` with Dirichlet ends, solving `(−∂² + n²) g = δ`.
pub fn green_mode<T: Scalar>(n: usize, s: T, sp: T, t: T) -> T {
    let (lo, hi) = if s <= sp { (s, sp) } else { (sp, s) };
    if n == 0 {
        return lo * (t - hi) / t;
    }
    let k = idx::<T>(n);
    let two = lit::<T>(2.0);
    (-k * (hi - lo)).exp() * one_minus_exp_neg(two * k * lo) * one_minus_exp_neg(two * k * (t - hi))
        / (two * k * one_minus_exp_neg(two * k * t))
}

impl<T: Scalar> GreenKernel<T> {
    pub fn mode(&self, n: usize, s: T, sp: T) -> T {
        green_mode(n, s, sp, self.geom.t())
    }

    /// `G(s, θ; s', θ')` summed over `|n| ≤ n_max`.
    pub fn evaluate(&self, s: T, theta: T, sp: T, theta_p: T, n_max: usize) -> T {
        let two = lit::<T>(2.0);
        let dd = |d: T| {
            (1..=n_max).fold(self.mode(0, s, sp), |acc, n| acc + two * self.mode(n, s, sp) * (idx::<T>(n) * d).cos())
        };
        match self.bc {
            BoundaryCondition::DD => dd(theta - theta_p),
            BoundaryCondition::Mixed => dd(theta - theta_p) + dd(theta + theta_p),
        }
    }

    /// Multiplier of `G/2π` restricted to the circle `s = cut`, acting on mode `n`
    /// (arclength measure on the circle, or on the half-circle in the mixed case).
    pub fn cut_multiplier(&self, n: usize, cut: T) -> T {
        self.mode(n, cut, cut)
    }
}

/// Max deviation, over modes `0..=n_max` and a `grid × grid` set of pairs, of the
/// Markov decomposition of the cylinder Green function at `s = cut`:
/// `g = g_left ⊕ g_right + p g(cut, cut) p` with `p` the harmonic profile from the cut.
pub fn markov_decomposition_check<T: Scalar>(
    geom: &CylinderGeometry<T>,
    cut: T,
    n_max: usize,
    grid: usize,
) -> Result<T> {
    let t = geom.t();
    let cf = to_f64(cut);
    if !(cf > 0.0 && cf < to_f64(t)) {
        return Err(Error::InvalidParameter { name: "cut", value: cf, expected: "cut in (0, t)" });
    }
    let points: Vec<T> =
        (0..grid).map(|i| t * (idx::<T>(i) + lit(0.5)) / idx::<T>(grid)).chain(std::iter::once(cut)).collect();
    let profile = |n: usize, s: T| -> T {
        if n == 0 {
            if s <= cut {
                s / cut
            } else {
                (t - s) / (t - cut)
            }
        } else {
            let k = idx::<T>(n);
            if s <= cut {
                profiles(k, cut - s, cut).0
            } else {
                profiles(k, s - cut, t - cut).0
            }
        }
    };
    let mut worst = T::zero();
    for n in 0..=n_max {
        let on_cut = green_mode(n, cut, cut, t);
        for &s in &points {
            for &sp in &points {
                let lhs = green_mode(n, s, sp, t);
                let mut rhs = profile(n, s) * on_cut * profile(n, sp);
                if s < cut && sp < cut {
                    rhs = rhs + green_mode(n, s, sp, cut);
                } else if s > cut && sp > cut {
                    rhs = rhs + green_mode(n, s - cut, sp - cut, t - cut);
                }
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn geom(t: f64, half: bool) -> CylinderGeometry<f64> {
        CylinderGeometry::new(t, half).unwrap()
    }

    #[test]
    fn model_values() {
        let d = dn_model(0.0f64, 4).unwrap();
        assert_eq!(d.block(3).entry(0, 0), 3.0);
        assert_eq!(d.block(0).entry(0, 0), 0.0);
        let d5 = dn_model(5.0f64, 4).unwrap();
        assert!((d5.block(2).entry(0, 0) - 3.0).abs() < 1e-15);
        assert!(dn_model(-1.0, 2).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(CylinderGeometry::new(0.0, false).is_err());
        assert!(CylinderGeometry::<f64>::from_q(1.0, true).is_err());
        let g = CylinderGeometry::from_q(0.5f64, true).unwrap();
        assert!((g.q() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_sided_values() {
        let d = dn_one_sided(&geom(1.0, false), 50);
        assert!((d.block(1).entry(0, 0) - 1.0 / 1f64.tanh()).abs() < 1e-15);
        let n = 20.0;
        let exp = n * (1.0 + 2.0 * (-2.0 * n * 0.3f64).exp());
        let d = dn_one_sided(&geom(0.3, false), 20);
        assert!((d.block(20).entry(0, 0) - exp).abs() < 1e-6);
    }

    #[test]
    fn annulus_blocks_limits() {
        let d = dn_annulus(&geom(40.0, false), 3);
        for n in 1..=3 {
            let b = d.block(n);
            assert!((b.entry(0, 0) - n as f64).abs() < 1e-12);
            assert!(b.entry(0, 1).abs() < 1e-12);
        }
        let c = CircleField::new(1.7, vec![(0.0, 0.0); 3]);
        assert!(dn_annulus(&geom(0.8, false), 3).form_circle_pair(&c, &c).abs() < 1e-15);
    }

    #[test]
    fn jump_is_sum_of_one_sided_and_gluing_schur() {
        let (g1, g2) = (geom(0.4, false), geom(1.3, false));
        let j = dn_jump(&g1, &g2, 30).unwrap();
        let (a, b) = (dn_one_sided(&g1, 30), dn_one_sided(&g2, 30));
        for n in 0..=30 {
            let s = a.block(n).entry(0, 0) + b.block(n).entry(0, 0);
            assert!((j.block(n).entry(0, 0) - s).abs() < 1e-13 * s);
        }
        assert!(dn_jump(&g1, &geom(1.0, true), 3).is_err());
        let same = dn_jump(&g1, &g1, 5).unwrap();
        assert!((same.block(2).entry(0, 0) - 4.0 / (0.8f64).tanh()).abs() < 1e-13);
    }

    #[test]
    fn json_round_trip() {
        let d = dn_annulus(&geom(0.7, true), 4);
        let back = DnOperator::<f64>::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
        assert!(d.to_json().unwrap().contains("\"parity\":\"even\""));
    }

    #[test]
    fn explicit_coefficients_single_mode() {
        let g = geom(0.9, true);
        let x = 1.3;
        let ext = harmonic_extension_half_annulus(
            &g,
            &HalfCircleField::new(0.0, vec![x]),
            &HalfCircleField::new(0.0, vec![0.0]),
        )
        .unwrap();
        let q = g.q();
        let d = (q - 1.0 / q) * 2f64.sqrt();
        let (a, b) = ext.coefficients()[0];
        assert!((a - (-x / q) / d).abs() < 1e-13);
        assert!((b - x * q / d).abs() < 1e-13);
        // the coefficient form reproduces the profile form inside
        for &(r, th) in &[(0.8, 0.3), (0.55, 2.0)] {
            let z = (r * f64::cos(th), r * f64::sin(th));
            let via = 2.0 * a * r * (th).cos() + 2.0 * b * (th).cos() / r;
            assert!((via - ext.evaluate_z(z.0, z.1)).abs() < 1e-12);
        }
    }

    #[test]
    fn half_extension_traces() {
        let g = geom(1.1, true);
        let f1 = HalfCircleField::new(0.4, vec![1.0, -0.3, 0.7]);
        let f2 = HalfCircleField::new(-0.2, vec![0.1, 0.9]);
        let ext = harmonic_extension_half_annulus(&g, &f1, &f2).unwrap();
        for th in [0.0, 0.4, 1.9, PI] {
            assert!((ext.evaluate(0.0, th) - f1.evaluate(th)).abs() < 1e-12);
            assert!((ext.evaluate(1.1, th) - f2.evaluate(th)).abs() < 1e-12);
            assert_eq!(ext.gradient(0.5, 0.0).1, 0.0);
        }
        let cst = harmonic_extension_half_annulus(
            &g,
            &HalfCircleField::new(2.5, vec![0.0; 2]),
            &HalfCircleField::new(2.5, vec![0.0; 2]),
        )
        .unwrap();
        assert!((cst.evaluate(0.37, 1.2) - 2.5).abs() < 1e-15);
        assert!(harmonic_extension_half_annulus(&geom(1.0, false), &f1, &f2).is_err());
    }

    #[test]
    fn green_mode_properties() {
        let t = 1.7f64;
        for n in [0, 1, 4, 30] {
            assert_eq!(green_mode(n, 0.0, 0.6, t), 0.0);
            assert!(green_mode(n, t, 0.6, t).abs() < 1e-15);
            assert_eq!(green_mode(n, 0.3, 1.1, t), green_mode(n, 1.1, 0.3, t));
        }
    }

    #[test]
    fn mixed_green_is_doubled_dd() {
        let g = geom(2.0, true);
        let mixed = green_cylinder(&g, BoundaryCondition::Mixed);
        let dd = green_cylinder(&g, BoundaryCondition::DD);
        for &(s, th, sp, thp) in &[(0.5, 0.3, 1.2, 2.0), (1.0, 1.0, 1.4, 0.2)] {
            let a = mixed.evaluate(s, th, sp, thp, 64);
            let b = dd.evaluate(s, th, sp, thp, 64) + dd.evaluate(s, th, sp, -thp, 64);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn markov_small_cases() {
        let g = geom(2.0, false);
        assert!(markov_decomposition_check(&g, 0.7, 8, 10).unwrap() < 1e-13);
        assert!(markov_decomposition_check(&g, 0.0, 8, 10).is_err());
    }
}
