//! Zeta-regularized Laplacian determinants on flat annuli and half-annuli, the
//! Fredholm determinant of the DN ratio at a cut, and the resulting gluing
//! identity for determinants.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::harmonic_dn::Parity;
use crate::scalar::{coth, idx, lit, to_f64, Scalar};

/// Upper limit on product factors when truncating automatically.
pub const MAX_FACTORS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDeterminant<T> {
    pub value: T,
    pub log_value: T,
    pub n_cut: usize,
    /// Bound on `|log value − log exact|` from the product truncation.
    pub tail_bound: T,
}

impl<T: Scalar> SpectralDeterminant<T> {
    fn from_log(log_value: T, n_cut: usize, tail_bound: T) -> Self {
        Self { value: log_value.exp(), log_value, n_cut, tail_bound }
    }
}

/// `Σ_{n≤N} log(1 − δ^{2n})` with a bound on the omitted tail.
///
/// With `n_cut = None` the sum stops once `δ^{2n} < 10⁻¹⁶`.
pub fn log_euler_product<T: Scalar>(delta: T, n_cut: Option<usize>) -> (T, usize, T) {
    let d2 = delta * delta;
    let stop = lit::<T>(1e-16);
    let mut acc = T::zero();
    let mut pow = T::one();
    let mut n = 0;
    let limit = n_cut.unwrap_or(MAX_FACTORS);
    while n < limit {
        let next = pow * d2;
        if n_cut.is_none() && next < stop {
            break;
        }
        pow = next;
        n += 1;
        acc = acc + (-pow).ln_1p();
    }
    // Σ_{n>N} |log(1−δ^{2n})| ≤ δ^{2(N+1)} / ((1−δ²)(1−δ^{2(N+1)}))
    let first = pow * d2;
    let tail = first / ((T::one() - d2) * (T::one() - first));
    (acc, n, tail)
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    let d = to_f64(delta);
    if d > 0.0 && d < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "delta", value: d, expected: "delta in (0, 1)" })
    }
}

/// Dirichlet determinant of the annulus `δ < |z| < 1`:
/// `(−log δ / π) δ^{1/6} ∏(1 − δ^{2n})²`.
pub fn det_annulus_dirichlet<T: Scalar>(delta: T) -> Result<SpectralDeterminant<T>> {
    det_annulus_dirichlet_with(delta, None)
}

pub fn det_annulus_dirichlet_with<T: Scalar>(delta: T, n_cut: Option<usize>) -> Result<SpectralDeterminant<T>> {
    check_delta(delta)?;
    let (lp, n, tail) = log_euler_product(delta, n_cut);
    let two = lit::<T>(2.0);
    let log = (-delta.ln() / T::PI()).ln() + delta.ln() / lit(6.0) + two * lp;
    Ok(SpectralDeterminant::from_log(log, n, two * tail))
}

/// Determinant of the half-annulus with Dirichlet on the half-circles and Neumann
/// on the segments: `−√(2/π) log δ · δ^{1/12} ∏(1 − δ^{2n})`.
pub fn det_half_annulus_mixed<T: Scalar>(delta: T) -> Result<SpectralDeterminant<T>> {
    det_half_annulus_mixed_with(delta, None)
}

pub fn det_half_annulus_mixed_with<T: Scalar>(delta: T, n_cut: Option<usize>) -> Result<SpectralDeterminant<T>> {
    check_delta(delta)?;
    let (lp, n, tail) = log_euler_product(delta, n_cut);
    let two = lit::<T>(2.0);
    let log = (two / T::PI()).sqrt().ln() + (-delta.ln()).ln() + delta.ln() / lit(12.0) + lp;
    Ok(SpectralDeterminant::from_log(log, n, tail))
}

/// Dirichlet determinant of the half-annulus: `(2π)^{−1/2} δ^{1/12} ∏(1 − δ^{2n})`.
pub fn det_half_annulus_dirichlet<T: Scalar>(delta: T) -> Result<SpectralDeterminant<T>> {
    det_half_annulus_dirichlet_with(delta, None)
}

pub fn det_half_annulus_dirichlet_with<T: Scalar>(delta: T, n_cut: Option<usize>) -> Result<SpectralDeterminant<T>> {
    check_delta(delta)?;
    let (lp, n, tail) = log_euler_product(delta, n_cut);
    let log = -(lit::<T>(2.0) * T::PI()).ln() / lit(2.0) + delta.ln() / lit(12.0) + lp;
    Ok(SpectralDeterminant::from_log(log, n, tail))
}

/// Per-mode factors of `det_Fr(D_cut (2D₀)⁻¹)` at a cut splitting moduli `t1 | t2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FredholmRatio<T> {
    pub f0: T,
    pub factors: Vec<T>,
    pub parity: Parity,
}

impl<T: Scalar> FredholmRatio<T> {
    pub fn multiplicity(&self) -> usize {
        match self.parity {
            Parity::Full => 2,
            Parity::Even => 1,
        }
    }

    pub fn log_det(&self) -> T {
        let m = idx::<T>(self.multiplicity());
        self.factors.iter().fold(self.f0.ln(), |acc, f| acc + m * f.ln())
    }

    /// Bound on the omitted `log f_n`, `n > N`, using `log coth x ≤ 2e^{−2x}/(1−e^{−2x})`.
    pub fn tail_bound(&self, t_min: T) -> T {
        let n = idx::<T>(self.factors.len() + 1);
        let two = lit::<T>(2.0);
        let r = (-two * t_min).exp();
        let first = r.powf(n);
        idx::<T>(self.multiplicity()) * two * first / ((T::one() - r) * (T::one() - first))
    }
}

pub fn fredholm_cut_ratio<T: Scalar>(t1: T, t2: T, parity: Parity, n_cut: usize) -> Result<FredholmRatio<T>> {
    check_positive("t1", to_f64(t1))?;
    check_positive("t2", to_f64(t2))?;
    let two = lit::<T>(2.0);
    Ok(FredholmRatio {
        f0: (T::one() / t1 + T::one() / t2) / two,
        factors: (1..=n_cut)
            .map(|n| {
                let k = idx::<T>(n);
                (coth(k * t1) + coth(k * t2)) / two
            })
            .collect(),
        parity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BfkReport<T> {
    pub log_lhs: T,
    pub log_rhs: T,
    pub lhs: T,
    pub rhs: T,
    pub rel_err: T,
    pub tail_bound: T,
}

/// Compares `det(t1 + t2)` with `det(t1)·det(t2)·det_Fr·(2π)^{b}` where
/// `b = 1` for a full cut circle and `b = 1/2` for a cut half-circle.
pub fn verify_bfk<T: Scalar>(t1: T, t2: T, parity: Parity, n_cut: usize) -> Result<BfkReport<T>> {
    check_positive("t1", to_f64(t1))?;
    check_positive("t2", to_f64(t2))?;
    let det = |t: T| -> Result<SpectralDeterminant<T>> {
        let d = (-t).exp();
        match parity {
            Parity::Full => det_annulus_dirichlet_with(d, Some(n_cut)),
            Parity::Even => det_half_annulus_mixed_with(d, Some(n_cut)),
        }
    };
    let whole = det(t1 + t2)?;
    let (a, b) = (det(t1)?, det(t2)?);
    let fr = fredholm_cut_ratio(t1, t2, parity, n_cut)?;
    let two_pi = lit::<T>(2.0) * T::PI();
    let weight = match parity {
        Parity::Full => T::one(),
        Parity::Even => lit(0.5),
    };
    let log_rhs = a.log_value + b.log_value + fr.log_det() + weight * two_pi.ln();
    let diff = whole.log_value - log_rhs;
    Ok(BfkReport {
        log_lhs: whole.log_value,
        log_rhs,
        lhs: whole.value,
        rhs: log_rhs.exp(),
        rel_err: diff.exp_m1().abs(),
        tail_bound: whole.tail_bound + a.tail_bound + b.tail_bound + fr.tail_bound(t1.min(t2)),
    })
}

/// `(ζ(0), ζ'(0))` of the Riemann zeta function.
pub fn zeta_constants<T: Scalar>() -> (T, T) {
    let two_pi = lit::<T>(2.0) * T::PI();
    (lit(-0.5), -two_pi.ln() / lit(2.0))
}
