//! Free-field amplitudes `A⁰ = exp(−½(φ, (D_Σ − D)φ)₂)` of flat annuli and
//! half-annuli, their normalization `Z = det(Δ)^{−1/2}`, gluing constants, and
//! the Seiberg / Gauss-Bonnet bookkeeping.

mod kernel;

pub use kernel::{
    annulus_kernel, circle_variables, glue_gaussian, gluing_residuals, half_annulus_kernel, half_variables,
    log_euler_tail, tail_gluing_correction, GaussianKernel, GluingResidual, ModeId, Variable,
};

use serde::{Deserialize, Serialize};

use crate::boundary_fields::{rotate, CircleField, HalfCircleField};
use crate::determinants::{det_annulus_dirichlet, det_half_annulus_mixed};
use crate::error::{check_nonneg, Error, Result};
use crate::harmonic_dn::{dn_annulus, CylinderGeometry};
use crate::scalar::{idx, lit, one_minus_exp_neg, Scalar};

/// Liouville coupling constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleParams {
    pub gamma: f64,
    pub q: f64,
    pub mu: f64,
    pub mu_l: f64,
    pub mu_r: f64,
    pub c_l: f64,
}

impl LiouvilleParams {
    pub fn new(gamma: f64, mu: f64, mu_l: f64, mu_r: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(Error::InvalidParameter { name: "gamma", value: gamma, expected: "gamma in (0, 2)" });
        }
        check_nonneg("mu", mu)?;
        check_nonneg("mu_l", mu_l)?;
        check_nonneg("mu_r", mu_r)?;
        let q = gamma / 2.0 + 2.0 / gamma;
        Ok(Self { gamma, q, mu, mu_l, mu_r, c_l: 1.0 + 6.0 * q * q })
    }

    /// Free theory at coupling `gamma`.
    pub fn free(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0, 0.0, 0.0)
    }

    /// Whether the quadratic-form description of the Hamiltonian applies.
    pub fn quadratic_form_valid(&self) -> bool {
        self.gamma < std::f64::consts::SQRT_2 || self.mu == 0.0
    }
}

fn require_half<T: Scalar>(geom: &CylinderGeometry<T>, yes: bool) -> Result<()> {
    if geom.half() == yes {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(if yes {
            "expected a half-annulus geometry".into()
        } else {
            "expected a full annulus geometry".into()
        }))
    }
}

/// Closed form of the half-annulus free amplitude:
/// `exp((c₁−c₂)²/(4 log q) − Σ_n [(x₂−qⁿx₁)²/(2(1−q²ⁿ)) − x₂²/2])`.
pub fn amplitude_half_annulus_free<T: Scalar>(
    geom: &CylinderGeometry<T>,
    phi1: &HalfCircleField<T>,
    phi2: &HalfCircleField<T>,
) -> Result<T> {
    require_half(geom, true)?;
    Ok(log_amplitude_half_annulus_free(geom, phi1, phi2).exp())
}

pub fn log_amplitude_half_annulus_free<T: Scalar>(
    geom: &CylinderGeometry<T>,
    phi1: &HalfCircleField<T>,
    phi2: &HalfCircleField<T>,
) -> T {
    let t = geom.t();
    let two = lit::<T>(2.0);
    let dc = phi1.c - phi2.c;
    let mut acc = -dc * dc / (lit::<T>(4.0) * t);
    for n in 1..=phi1.n_cut().max(phi2.n_cut()) {
        let k = idx::<T>(n);
        let (x1, x2) = (phi1.mode(n), phi2.mode(n));
        let qn = (-k * t).exp();
        let d = x2 - qn * x1;
        acc = acc - (d * d / (two * one_minus_exp_neg(two * k * t)) - x2 * x2 / two);
    }
    acc
}

/// Annulus free amplitude assembled from the DN blocks of the cylinder.
pub fn amplitude_annulus_free<T: Scalar>(
    geom: &CylinderGeometry<T>,
    phi1: &CircleField<T>,
    phi2: &CircleField<T>,
) -> Result<T> {
    Ok(log_amplitude_annulus_free(geom, phi1, phi2)?.exp())
}

pub fn log_amplitude_annulus_free<T: Scalar>(
    geom: &CylinderGeometry<T>,
    phi1: &CircleField<T>,
    phi2: &CircleField<T>,
) -> Result<T> {
    require_half(geom, false)?;
    if phi1.n_cut() != phi2.n_cut() {
        return Err(Error::ShapeMismatch(format!("cutoffs {} and {}", phi1.n_cut(), phi2.n_cut())));
    }
    let op = dn_annulus(geom, phi1.n_cut()).minus_model();
    Ok(-op.form_circle_pair(phi1, phi2) / lit(2.0))
}

/// Amplitude of the annulus `|q| < |z| < 1` with inner parametrization `z = q e^{iθ}`,
/// `q = |q| e^{iϑ}`; `phi2` is the inner datum.
pub fn amplitude_annulus_free_rotated<T: Scalar>(
    geom: &CylinderGeometry<T>,
    vartheta: T,
    phi1: &CircleField<T>,
    phi2: &CircleField<T>,
) -> Result<T> {
    amplitude_annulus_free(geom, phi1, &rotate(phi2, -vartheta))
}

/// `Z = det(Δ)^{−1/2}`; mixed conditions for half-annuli, Dirichlet for annuli.
/// The boundary-curvature factor is 1 since the boundary circles are geodesic.
pub fn z_normalization<T: Scalar>(geom: &CylinderGeometry<T>) -> Result<T> {
    Ok(log_z_normalization(geom)?.exp())
}

pub fn log_z_normalization<T: Scalar>(geom: &CylinderGeometry<T>) -> Result<T> {
    let d = geom.q();
    let det = if geom.half() { det_half_annulus_mixed(d)? } else { det_annulus_dirichlet(d)? };
    Ok(-det.log_value / lit(2.0))
}

/// Constant `C` of the gluing of `k_ℓ` circles and `k_h` half-circles.
pub fn gluing_constant(k_l: u32, k_h: u32, dirichlet_remains: bool) -> Result<f64> {
    if k_l == 0 && k_h == 0 {
        return Err(Error::InvalidParameter {
            name: "k_l + k_h",
            value: 0.0,
            expected: "at least one glued boundary component",
        });
    }
    let (kl, kh) = (k_l as f64, k_h as f64);
    let pi = std::f64::consts::PI;
    let (e2, epi) = if dirichlet_remains {
        (kl / 2.0 + 3.0 * kh / 4.0, kl + 3.0 * kh / 4.0)
    } else {
        (kl / 2.0 + 3.0 * kh / 4.0 - 1.0, kl - 1.0 + 3.0 * kh / 4.0)
    };
    Ok(1.0 / (2f64.powf(e2) * pi.powf(epi)))
}

/// Insertion weights and the topology of the surface carrying them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InsertionSet {
    pub bulk: Vec<f64>,
    pub boundary: Vec<f64>,
    pub chi: i32,
    pub b_h_dirichlet: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeibergReport {
    pub first_bound: bool,
    pub second_bound: bool,
    /// `Σα + Σβ/2 − Qχ`.
    pub margin: f64,
}

impl SeibergReport {
    pub fn holds(&self) -> bool {
        self.first_bound && self.second_bound
    }
}

pub fn seiberg_check(ins: &InsertionSet, params: &LiouvilleParams) -> SeibergReport {
    let total: f64 = ins.bulk.iter().sum::<f64>() + ins.boundary.iter().sum::<f64>() / 2.0;
    let margin = total - params.q * ins.chi as f64;
    SeibergReport {
        first_bound: margin > 0.0,
        second_bound: ins.bulk.iter().chain(&ins.boundary).all(|w| *w < params.q),
        margin,
    }
}

/// `Δ_α = (α/2)(Q − α/2)`.
pub fn conformal_weight(alpha: f64, params: &LiouvilleParams) -> f64 {
    alpha / 2.0 * (params.q - alpha / 2.0)
}

/// `χ − b_h^D/2`, which equals the curvature integrals and vanishes for flat
/// models with geodesic boundary.
pub fn gauss_bonnet_flat(b_h_dirichlet: i32, chi: i32) -> f64 {
    chi as f64 - b_h_dirichlet as f64 / 2.0
}
