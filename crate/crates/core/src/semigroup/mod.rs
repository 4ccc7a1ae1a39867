//! Free and interacting semigroups of flat annuli and half-annuli.

mod fk;
mod rectangle;

pub use fk::{
    compose_check, fk_apply, fk_apply_bulk, free_apply_bulk, free_apply_half, potential_matrix_on_ek, refinement_check,
    self_adjointness_check, BoundaryStart, CWeight, ComposeReport, FkCutoffs, FkReport, Geometry, Observable,
    PotentialMatrices, RefinementReport, SemigroupQuery, Term,
};
pub use rectangle::{sample_rectangle_gff, RectangleField};

use serde::{Deserialize, Serialize};

use crate::boundary_fields::{CircleField, HalfCircleField};
use crate::error::{check_positive, Error, Result};
use crate::free_amplitudes::LiouvilleParams;
use crate::scalar::{idx, lit, one_minus_exp_neg, Scalar};

/// Occupation numbers `(k_1, k_2, …)` of a Fock state; trailing zeros are insignificant.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockIndex {
    pub k: Vec<u32>,
}

impl FockIndex {
    pub fn new(mut k: Vec<u32>) -> Self {
        while k.last() == Some(&0) {
            k.pop();
        }
        Self { k }
    }

    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Highest mode with nonzero occupation.
    pub fn support(&self) -> usize {
        self.k.len()
    }

    /// `|k| = Σ n k_n`.
    pub fn level(&self) -> usize {
        self.k.iter().enumerate().map(|(i, k)| (i + 1) * *k as usize).sum()
    }
}

/// Probabilists' Hermite polynomial `He_n(x)`.
pub fn hermite_he<T: Scalar>(n: u32, x: T) -> T {
    let (mut p0, mut p1) = (T::one(), x);
    if n == 0 {
        return p0;
    }
    for j in 1..n {
        let p2 = x * p1 - idx::<T>(j as usize) * p0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `ψ_k(x) = Π_n He_{k_n}(x_n)/√(k_n!)`, orthonormal under the standard Gaussian.
pub fn hermite_psi<T: Scalar>(k: &FockIndex, x: &[T]) -> Result<T> {
    if k.support() > x.len() {
        return Err(Error::ShapeMismatch(format!("index supported on {} modes, {} given", k.support(), x.len())));
    }
    let mut acc = T::one();
    for (kn, xn) in k.k.iter().zip(x) {
        let fact: f64 = (1..=*kn).map(|j| j as f64).product();
        acc = acc * hermite_he(*kn, *xn) / lit::<T>(fact.sqrt());
    }
    Ok(acc)
}

/// Eigenvalue of the mode-number operator on `ψ_k`.
pub fn p_plus_apply(k: &FockIndex) -> usize {
    k.level()
}

/// All indices with `|k| ≤ level`, ordered by level then lexicographically.
pub fn fock_basis(level: usize) -> Vec<FockIndex> {
    fn go(n: usize, remaining: usize, level: usize, cur: &mut Vec<u32>, out: &mut Vec<FockIndex>) {
        if n > level {
            out.push(FockIndex::new(cur.clone()));
            return;
        }
        let mut k = 0;
        while k * n <= remaining {
            cur.push(k as u32);
            go(n + 1, remaining - k * n, level, cur, out);
            cur.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    go(1, level, level, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.level().cmp(&b.level()).then_with(|| a.k.cmp(&b.k)));
    out
}

/// OU transition density with respect to the standard Gaussian,
/// `(1−r²)^{−1/2} exp((2rab − r²(a²+b²))/(2(1−r²)))`.
pub fn mehler<T: Scalar>(a: T, b: T, r: T) -> T {
    log_mehler(a, b, r).exp()
}

pub fn log_mehler<T: Scalar>(a: T, b: T, r: T) -> T {
    let two = lit::<T>(2.0);
    let d = T::one() - r * r;
    (two * r * a * b - r * r * (a * a + b * b)) / (two * d) - d.ln() / two
}

/// `Σ_{n>N} log(1 − e^{−2nt})`.
fn log_tail<T: Scalar>(t: T, n_cut: usize) -> T {
    let mut acc = T::zero();
    let mut n = n_cut + 1;
    loop {
        let u = one_minus_exp_neg(lit::<T>(2.0) * idx::<T>(n) * t);
        let term = u.ln();
        acc = acc + term;
        if term.abs() < T::epsilon() * lit(1e-3) {
            break;
        }
        n += 1;
    }
    acc
}

/// Kernel of `e^{−tH⁰₊}` on half-circle data: heat kernel of `∂_c²`, a Mehler
/// factor `e^{−nt}` per mode (modes beyond both cutoffs at zero data
/// included), and `e^{−tQ²/4}`.
pub fn free_kernel_half<T: Scalar>(
    t: T,
    params: &LiouvilleParams,
    phi1: &HalfCircleField<T>,
    phi2: &HalfCircleField<T>,
) -> Result<T> {
    Ok(log_free_kernel_half(t, params, phi1, phi2)?.exp())
}

pub fn log_free_kernel_half<T: Scalar>(
    t: T,
    params: &LiouvilleParams,
    phi1: &HalfCircleField<T>,
    phi2: &HalfCircleField<T>,
) -> Result<T> {
    check_positive("t", t.to_f64().unwrap_or(f64::NAN))?;
    let q = lit::<T>(params.q);
    let four = lit::<T>(4.0);
    let dc = phi1.c - phi2.c;
    let mut acc = -t * q * q / four - (four * T::PI() * t).ln() / lit(2.0) - dc * dc / (four * t);
    let n_cut = phi1.n_cut().max(phi2.n_cut());
    for n in 1..=n_cut {
        acc = acc + log_mehler(phi1.mode(n), phi2.mode(n), (-idx::<T>(n) * t).exp());
    }
    Ok(acc - log_tail(t, n_cut) / lit(2.0))
}

/// Kernel of `e^{−tH⁰}e^{iϑΠ}` on circle data: heat kernel of `½∂_c²`, the
/// complex Mehler factor `e^{−nt}e^{inϑ}` per mode pair, and `e^{−tQ²/2}`.
pub fn free_kernel_annulus<T: Scalar>(
    t: T,
    vartheta: T,
    params: &LiouvilleParams,
    phi1: &CircleField<T>,
    phi2: &CircleField<T>,
) -> Result<T> {
    Ok(log_free_kernel_annulus(t, vartheta, params, phi1, phi2)?.exp())
}

pub fn log_free_kernel_annulus<T: Scalar>(
    t: T,
    vartheta: T,
    params: &LiouvilleParams,
    phi1: &CircleField<T>,
    phi2: &CircleField<T>,
) -> Result<T> {
    check_positive("t", t.to_f64().unwrap_or(f64::NAN))?;
    let q = lit::<T>(params.q);
    let two = lit::<T>(2.0);
    let dc = phi1.c - phi2.c;
    let mut acc = -t * q * q / two - (two * T::PI() * t).ln() / two - dc * dc / (two * t);
    let n_cut = phi1.n_cut().max(phi2.n_cut());
    for n in 1..=n_cut {
        let k = idx::<T>(n);
        let r = (-k * t).exp();
        let ((x1, y1), (x2, y2)) = (phi1.mode(n), phi2.mode(n));
        let (s, c) = (k * vartheta).sin_cos();
        let cross = (x1 * x2 + y1 * y2) * c - (y1 * x2 - x1 * y2) * s;
        let d = one_minus_exp_neg(two * k * t);
        let sq = x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2;
        acc = acc + (two * r * cross - r * r * sq) / (two * d) - d.ln();
    }
    Ok(acc - log_tail(t, n_cut))
}
