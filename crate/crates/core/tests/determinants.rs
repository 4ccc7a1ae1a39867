//! Closed-form determinants against an independent zeta-function computation
//! from the heat trace, plus the cut identity over random moduli.

use proptest::prelude::*;
use segal_core::determinants::{
    det_annulus_dirichlet, det_half_annulus_dirichlet, det_half_annulus_mixed, fredholm_cut_ratio, log_euler_product,
    verify_bfk,
};
use segal_core::harmonic_dn::Parity;
use segal_core::quadrature::gauss_legendre;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E₁(x)`.
fn e1(x: f64) -> f64 {
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // modified Lentz on the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Angular spectrum on a circle of length 2π (`alpha = 1, beta = 0`), Neumann on
/// `[0, π]` (`½, ½`) or Dirichlet on `[0, π]` (`½, −½`); Dirichlet on `[0, t]` in `s`.
/// Returns `−ζ'(0)` of `m² + (πk/t)²`.
fn minus_zeta_prime(t: f64, alpha: f64, beta: f64) -> f64 {
    let theta_weights = |m: i64| -> f64 {
        if alpha == 1.0 {
            1.0
        } else if m == 0 {
            if beta > 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            1.0
        }
    };
    let ms: Vec<i64> = if alpha == 1.0 { (-60..=60).collect() } else { (0..=60).collect() };

    // ∫_1^∞ Θ(τ) dτ/τ, termwise.
    let mut i2 = 0.0;
    for &m in &ms {
        let w = theta_weights(m);
        if w == 0.0 {
            continue;
        }
        for k in 1.. {
            let lam = (m * m) as f64 + (PI * k as f64 / t).powi(2);
            if lam > 45.0 {
                break;
            }
            i2 += w * e1(lam);
        }
    }

    // ∫_0^1 (Θ − A) dτ/τ from the Poisson-dual form.
    let rest = |tau: f64| -> f64 {
        let dual = |a2: f64| -> f64 {
            (1..).map(|j: i32| (-a2 * (j * j) as f64 / tau).exp()).take_while(|v| *v > 1e-300).sum()
        };
        let e_theta = dual(PI * PI);
        let e_s = dual(t * t);
        let f0 = alpha * (PI / tau).sqrt() + beta;
        let df = 2.0 * alpha * (PI / tau).sqrt() * e_theta;
        let g0 = t / (2.0 * (PI * tau).sqrt()) - 0.5;
        let dg = t / (PI * tau).sqrt() * e_s;
        (f0 * dg + df * g0 + df * dg) / tau
    };
    let (x, w) = gauss_legendre(24);
    let panels = 40;
    let mut i1 = 0.0;
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (xi, wi) in x.iter().zip(&w) {
            let tau = 0.5 * (b - a) * xi + 0.5 * (a + b);
            i1 += 0.5 * (b - a) * wi * rest(tau);
        }
    }

    let a_m1 = alpha * t / 2.0;
    let a_mh = -alpha * PI.sqrt() / 2.0 + beta * t / (2.0 * PI.sqrt());
    let a_0 = -beta / 2.0;
    let zeta_prime = i1 + i2 - a_m1 - 2.0 * a_mh + EULER_GAMMA * a_0;
    -zeta_prime
}

#[test]
fn exponential_integral_values() {
    assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
    assert!((e1(0.1) - 1.822_923_958_419_390_7).abs() < 1e-13);
    assert!((e1(5.0) - 0.001_148_295_591_275_325_8).abs() < 1e-16);
}

#[test]
fn annulus_dirichlet_matches_heat_trace() {
    for &t in &[0.6, 1.0, 2.0, 3.5] {
        let oracle = minus_zeta_prime(t, 1.0, 0.0);
        let d = det_annulus_dirichlet((-t as f64).exp()).unwrap();
        assert!((d.log_value - oracle).abs() < 1e-9, "t={t}: {} vs {oracle}", d.log_value);
    }
}

#[test]
fn half_annulus_mixed_matches_heat_trace() {
    for &t in &[0.6, 1.0, 2.0, 3.5] {
        let oracle = minus_zeta_prime(t, 0.5, 0.5);
        let d = det_half_annulus_mixed((-t as f64).exp()).unwrap();
        assert!((d.log_value - oracle).abs() < 1e-9, "t={t}: {} vs {oracle}", d.log_value);
    }
}

#[test]
fn half_annulus_dirichlet_matches_heat_trace() {
    for &t in &[0.6, 1.0, 2.0, 3.5] {
        let oracle = minus_zeta_prime(t, 0.5, -0.5);
        let d = det_half_annulus_dirichlet((-t as f64).exp()).unwrap();
        assert!((d.log_value - oracle).abs() < 1e-9, "t={t}: {} vs {oracle}", d.log_value);
    }
}

#[test]
fn fredholm_log_det_by_direct_sum() {
    let (t1, t2) = (0.4, 1.3);
    let r = fredholm_cut_ratio(t1, t2, Parity::Full, 300).unwrap();
    let modes: f64 = (1..=300)
        .map(|n| {
            let k = n as f64;
            ((1.0 / (k * t1).tanh() + 1.0 / (k * t2).tanh()) / 2.0).ln()
        })
        .sum();
    let zero = ((1.0 / t1 + 1.0 / t2) / 2.0).ln();
    assert!((r.log_det() - zero - 2.0 * modes).abs() < 1e-12, "{} vs {}", r.log_det(), zero + 2.0 * modes);
    let even = fredholm_cut_ratio(t1, t2, Parity::Even, 300).unwrap();
    assert!((r.log_det() - even.log_det() - modes).abs() < 1e-12);
}

#[test]
fn euler_product_tail_bound_holds() {
    for &d in &[0.2f64, 0.8, 0.97] {
        let (exact, _, _) = log_euler_product(d, None);
        for n in [1usize, 5, 20] {
            let (part, used, bound) = log_euler_product(d, Some(n));
            assert_eq!(used, n);
            // the automatic cutoff itself drops terms below 1e-16
            assert!((exact - part).abs() <= bound + 1e-15, "{d} {n}");
        }
    }
}

#[test]
fn invalid_moduli_are_rejected() {
    assert!(det_half_annulus_dirichlet(-0.2f64).is_err());
    assert!(det_half_annulus_mixed(1.5f64).is_err());
    assert!(det_annulus_dirichlet(f64::NAN).is_err());
    assert!(fredholm_cut_ratio(-1.0f64, 1.0, Parity::Full, 10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cut_identity_holds(t1 in 0.2f64..3.0, t2 in 0.2f64..3.0, even in any::<bool>()) {
        let parity = if even { Parity::Even } else { Parity::Full };
        let r = verify_bfk(t1, t2, parity, 400).unwrap();
        prop_assert!(r.rel_err < 1e-10, "{:?}", r);
    }

    #[test]
    fn mixed_dirichlet_product(d in 0.01f64..0.95) {
        let a = det_annulus_dirichlet(d).unwrap().log_value;
        let m = det_half_annulus_mixed(d).unwrap().log_value;
        let h = det_half_annulus_dirichlet(d).unwrap().log_value;
        prop_assert!((m + h - a).abs() < 1e-12);
    }
}
