use proptest::prelude::*;
use segal_core::boundary_fields::{rotate, CircleField, HalfCircleField};
use segal_core::free_amplitudes::LiouvilleParams;
use segal_core::gmc::GmcGrid;
use segal_core::harmonic_dn::{green_cylinder, BoundaryCondition, CylinderGeometry};
use segal_core::quadrature::gauss_legendre;
use segal_core::semigroup::{
    compose_check, fk_apply, fk_apply_bulk, fock_basis, free_apply_bulk, free_apply_half, free_kernel_annulus,
    free_kernel_half, hermite_he, hermite_psi, mehler, potential_matrix_on_ek, refinement_check, sample_rectangle_gff,
    self_adjointness_check, BoundaryStart, CWeight, FkCutoffs, FockIndex, Geometry, Observable, RectangleField,
    SemigroupQuery, Term,
};
use segal_core::stats::Accumulator;
use segal_core::RngStream;
use std::f64::consts::PI;

/// Composite Gauss-Legendre nodes and weights on `[a, b]`.
fn composite(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

fn gauss_rule() -> Vec<(f64, f64)> {
    composite(-12.0, 12.0, 24, 16).into_iter().map(|(x, w)| (x, w * (-0.5 * x * x).exp() / (2.0 * PI).sqrt())).collect()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn gaussian(center: f64, width: f64) -> CWeight {
    CWeight::Gaussian { center, width }
}

#[test]
fn hermite_functions_are_orthonormal() {
    let rule = gauss_rule();
    for m in 0..8u32 {
        for n in 0..8u32 {
            let ip: f64 = rule.iter().map(|(x, w)| w * hermite_he(m, *x) * hermite_he(n, *x)).sum();
            let expect = if m == n { factorial(n) } else { 0.0 };
            assert!((ip - expect).abs() < 1e-9 * factorial(m.max(n)), "{m} {n}: {ip}");
        }
    }
    // multi-mode products factor
    let k = FockIndex::new(vec![2, 0, 1]);
    let x = [0.3, -1.1, 0.7];
    let expect = hermite_he(2, 0.3) / 2f64.sqrt() * hermite_he(1, 0.7);
    assert!((hermite_psi(&k, &x).unwrap() - expect).abs() < 1e-14);
    assert!(hermite_psi(&k, &x[..2]).is_err());
}

#[test]
fn fock_basis_counts_partitions() {
    // cumulative partition numbers 1, 2, 4, 7, 12, 19
    let cumulative = [1usize, 2, 4, 7, 12, 19];
    for (level, &count) in cumulative.iter().enumerate() {
        let b = fock_basis(level);
        assert_eq!(b.len(), count, "level {level}");
        assert!(b.windows(2).all(|w| w[0].level() <= w[1].level()));
        let mut uniq = b.clone();
        uniq.dedup();
        assert_eq!(uniq.len(), b.len());
        assert!(b.iter().all(|k| k.level() <= level));
    }
    assert_eq!(FockIndex::new(vec![1, 0, 0]), FockIndex::new(vec![1]));
    assert_eq!(FockIndex::new(vec![0, 2, 1]).level(), 7);
}

#[test]
fn mehler_is_the_ou_transition() {
    let rule = gauss_rule();
    for &r in &[0.1, 0.5, 0.9] {
        for &a in &[-1.3, 0.0, 0.8] {
            let mass: f64 = rule.iter().map(|(b, w)| w * mehler(a, *b, r)).sum();
            assert!((mass - 1.0).abs() < 1e-10, "r={r} a={a}: {mass}");
            for n in 1..5u32 {
                let lhs: f64 = rule.iter().map(|(b, w)| w * mehler(a, *b, r) * hermite_he(n, *b)).sum();
                let rhs = r.powi(n as i32) * hermite_he(n, a);
                assert!((lhs - rhs).abs() < 1e-9, "n={n} r={r} a={a}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn mehler_chapman_kolmogorov() {
    let rule = gauss_rule();
    for &(r1, r2) in &[(0.3, 0.6), (0.8, 0.5), (0.95, 0.9)] {
        for &(a, c) in &[(0.2, -0.4), (1.5, 0.7)] {
            let lhs: f64 = rule.iter().map(|(b, w)| w * mehler(a, *b, r1) * mehler(*b, c, r2)).sum();
            let rhs = mehler(a, c, r1 * r2);
            assert!((lhs - rhs).abs() < 1e-9 * rhs, "{r1} {r2}: {lhs} vs {rhs}");
        }
    }
}

/// `Π_{n>N} (1 − e^{−2nt})^{−power}`: the zero-data factor for modes left out
/// of the quadrature.
fn tail_product(t: f64, n: usize, power: f64) -> f64 {
    ((n + 1)..400).map(|k| (1.0 - (-2.0 * k as f64 * t).exp()).powf(-power)).product()
}

#[test]
fn half_kernel_integrates_to_the_free_semigroup() {
    let t = 0.6;
    let params = LiouvilleParams::free(1.2).unwrap();
    let obs = Observable {
        terms: vec![
            Term { coef: 1.0, kx: FockIndex::new(vec![1]), ky: FockIndex::vacuum() },
            Term { coef: -0.4, kx: FockIndex::new(vec![2]), ky: FockIndex::vacuum() },
        ],
        c_weight: gaussian(0.3, 0.8),
    };
    let phi = HalfCircleField::new(0.1, vec![0.7]);
    let cs = composite(-14.0, 14.0, 40, 16);
    let xs = gauss_rule();
    let mut total = 0.0;
    for (c, wc) in &cs {
        for (x, wx) in &xs {
            let k = free_kernel_half(t, &params, &phi, &HalfCircleField::new(*c, vec![*x])).unwrap();
            total += wc * wx * k * obs.eval(*c, &[*x], &[]).unwrap();
        }
    }
    let exact = free_apply_half(t, &params, &obs, &phi).unwrap() * tail_product(t, 1, 0.5);
    assert!((total - exact).abs() < 1e-10 * exact.abs(), "{total} vs {exact}");
}

#[test]
fn annulus_kernel_integrates_to_the_free_semigroup() {
    let t = 0.5;
    let params = LiouvilleParams::free(0.8).unwrap();
    let obs = Observable {
        terms: vec![
            Term { coef: 1.0, kx: FockIndex::new(vec![1]), ky: FockIndex::new(vec![1]) },
            Term { coef: 0.5, kx: FockIndex::vacuum(), ky: FockIndex::new(vec![2]) },
        ],
        c_weight: gaussian(-0.2, 0.9),
    };
    let phi = CircleField::new(0.3, vec![(0.4, -0.6)]);
    let cs = composite(-12.0, 12.0, 24, 16);
    let xs: Vec<(f64, f64)> = composite(-9.0, 9.0, 6, 12)
        .into_iter()
        .map(|(x, w)| (x, w * (-0.5 * x * x).exp() / (2.0 * PI).sqrt()))
        .collect();
    let mut total = 0.0;
    for (c, wc) in &cs {
        for (x, wx) in &xs {
            for (y, wy) in &xs {
                let to = CircleField::new(*c, vec![(*x, *y)]);
                let k = free_kernel_annulus(t, 0.0, &params, &phi, &to).unwrap();
                total += wc * wx * wy * k * obs.eval(*c, &[*x], &[*y]).unwrap();
            }
        }
    }
    let exact = free_apply_bulk(t, &params, &obs, &phi).unwrap() * tail_product(t, 1, 1.0);
    assert!((total - exact).abs() < 1e-9 * exact.abs(), "{total} vs {exact}");
}

#[test]
fn rectangle_covariance_is_the_mixed_green_function() {
    let t = 1.5;
    let g = green_cylinder(&CylinderGeometry::new(t, true).unwrap(), BoundaryCondition::Mixed);
    for &(a, b) in &[((0.4, 0.7), (1.0, 2.2)), ((0.2, 0.1), (1.3, 3.0)), ((0.75, 0.0), (0.75, 1.6))] {
        let rect = RectangleField::covariance_truncated(t, 40_000, 300, a, b);
        let green = g.evaluate(a.0, a.1, b.0, b.1, 300);
        assert!((rect - green).abs() < 1e-5, "{a:?} {b:?}: {rect} vs {green}");
    }
}

#[test]
fn rectangle_zero_mode_is_a_brownian_bridge() {
    let t = 2.0;
    for &s in &[0.3, 1.0, 1.7] {
        let var = RectangleField::covariance_truncated(t, 200_000, 0, (s, 0.0), (s, 1.0));
        let bridge = 2.0 * s * (t - s) / t;
        assert!((var - bridge).abs() < 1e-4, "s={s}: {var} vs {bridge}");
    }
}

#[test]
fn zero_mode_variance_from_the_green_function() {
    // (1/π²)∫∫ G_mixed dθ dθ' on a midpoint grid finer than the mode cutoff,
    // where every cosine term integrates to zero
    let (t, n_max, m) = (2.5, 40, 96);
    let g = green_cylinder(&CylinderGeometry::new(t, true).unwrap(), BoundaryCondition::Mixed);
    let grid: Vec<f64> = (0..m).map(|i| PI * (i as f64 + 0.5) / m as f64).collect();
    for &(s, sp) in &[(0.4, 0.4), (1.0, 1.9), (2.2, 0.3)] {
        let mut avg = 0.0;
        for a in &grid {
            for b in &grid {
                avg += g.evaluate(s, *a, sp, *b, n_max);
            }
        }
        avg /= (m * m) as f64;
        let (lo, hi) = if s < sp { (s, sp) } else { (sp, s) };
        let bridge = 2.0 * lo * (t - hi) / t;
        assert!((avg - bridge).abs() < 1e-12, "{s} {sp}: {avg} vs {bridge}");
    }
    // the half-disk limit t → ∞ has variance 2s
    let big = green_cylinder(&CylinderGeometry::new(1e6, true).unwrap(), BoundaryCondition::Mixed);
    let v: f64 = grid
        .iter()
        .flat_map(|a| grid.iter().map(move |b| (*a, *b)))
        .map(|(a, b)| big.evaluate(0.7, a, 0.7, b, n_max))
        .sum::<f64>()
        / (m * m) as f64;
    assert!((v - 1.4).abs() < 1e-5, "{v}");
}

#[test]
fn sampled_rectangle_matches_truncated_covariance() {
    let (t, m, n) = (1.2, 20, 8);
    let a = (0.3, 0.4);
    let b = (0.8, 1.9);
    let mut rng = RngStream::new(21, 0).rng();
    let mut cross = Accumulator::new();
    let mut zero = Accumulator::new();
    for _ in 0..20_000 {
        let f = sample_rectangle_gff(t, m, n, &mut rng).unwrap();
        cross.push(f.evaluate(a.0, a.1) * f.evaluate(b.0, b.1));
        zero.push(f.zero_mode_average(a.0).powi(2));
        assert!(f.evaluate(0.0, 1.0).abs() + f.evaluate(t, 2.0).abs() < 1e-12);
    }
    let cross = cross.estimate(21);
    let zero = zero.estimate(21);
    assert!(cross.agrees_with(RectangleField::covariance_truncated(t, m, n, a, b), 4.0, 0.0), "{cross:?}");
    assert!(zero.agrees_with(RectangleField::covariance_truncated(t, m, 0, a, a), 4.0, 0.0), "{zero:?}");
    let mut rng = RngStream::new(0, 0).rng();
    assert!(sample_rectangle_gff(0.0, 4, 4, &mut rng).is_err());
    assert!(sample_rectangle_gff(1.0, 0, 4, &mut rng).is_err());
}

fn half_query(mu: f64, obs: Observable, n: u64, seed: u64) -> SemigroupQuery {
    SemigroupQuery {
        t: 0.4,
        params: LiouvilleParams::new(1.0, mu, mu, mu).unwrap(),
        observable: obs,
        cutoffs: FkCutoffs { modes: 4, dt: 0.1 },
        n_samples: n,
        seed,
    }
}

#[test]
fn free_feynman_kac_matches_exact_bulk() {
    let obs = Observable {
        terms: vec![
            Term { coef: 1.0, kx: FockIndex::new(vec![1]), ky: FockIndex::vacuum() },
            Term { coef: 0.7, kx: FockIndex::vacuum(), ky: FockIndex::new(vec![0, 1]) },
            Term { coef: 0.3, kx: FockIndex::vacuum(), ky: FockIndex::vacuum() },
        ],
        c_weight: gaussian(0.0, 1.0),
    };
    let q = SemigroupQuery { t: 0.5, ..half_query(0.0, obs.clone(), 40_000, 31) };
    let phi = CircleField::new(0.2, vec![(0.5, -0.3), (0.1, 0.8)]);
    let mc = fk_apply_bulk(&q, &phi).unwrap();
    let exact = free_apply_bulk(0.5, &q.params, &obs, &phi).unwrap();
    assert!(mc.estimate.agrees_with(exact, 4.0, 0.0), "{:?} vs {exact}", mc.estimate);
    assert!((mc.prefactor - (-0.5 * q.params.q * q.params.q / 2.0).exp()).abs() < 1e-14);
}

#[test]
fn free_feynman_kac_matches_exact_half() {
    let obs = Observable::psi(FockIndex::new(vec![1, 1]), gaussian(0.5, 0.7));
    let q = half_query(0.0, obs.clone(), 40_000, 32);
    let phi = HalfCircleField::new(-0.1, vec![0.9, -0.6]);
    let mc = fk_apply(&q, &phi).unwrap();
    let exact = free_apply_half(0.4, &q.params, &obs, &phi).unwrap();
    assert!(mc.estimate.agrees_with(exact, 4.0, 0.0), "{:?} vs {exact}", mc.estimate);
    assert!((mc.prefactor - (-0.4 * q.params.q * q.params.q / 4.0).exp()).abs() < 1e-14);
}

#[test]
fn interacting_semigroup_is_positive_and_contracting() {
    let phi = HalfCircleField::new(0.3, vec![0.2, -0.4]);
    let free = fk_apply(&half_query(0.0, Observable::constant(1.0), 2000, 5), &phi).unwrap();
    let int = fk_apply(&half_query(1.0, Observable::constant(1.0), 2000, 5), &phi).unwrap();
    assert!((free.estimate.mean - free.prefactor).abs() < 1e-12);
    assert!(int.estimate.mean > 0.0 && int.estimate.mean < int.prefactor);
    assert!(int.quadratic_form_valid);

    let obs = Observable::psi(FockIndex::vacuum(), gaussian(0.0, 0.5));
    let r = fk_apply(&half_query(2.0, obs, 2000, 6), &phi).unwrap();
    assert!(r.estimate.mean.abs() <= r.prefactor);
}

#[test]
fn semigroup_is_symmetric() {
    let f = Observable::psi(FockIndex::new(vec![1]), gaussian(0.0, 1.0));
    let g = Observable {
        terms: vec![
            Term { coef: 1.0, kx: FockIndex::vacuum(), ky: FockIndex::vacuum() },
            Term { coef: 0.5, kx: FockIndex::new(vec![0, 1]), ky: FockIndex::vacuum() },
        ],
        c_weight: gaussian(0.4, 0.8),
    };
    let q = half_query(1.0, f, 20_000, 41);
    let d = self_adjointness_check(Geometry::Half, &q, &g, 0.0, 1.5).unwrap();
    assert!(d.agrees_with(0.0, 4.0, 0.0), "{d:?}");
}

#[test]
fn compose_and_refine_in_the_bulk() {
    let obs = Observable {
        terms: vec![
            Term { coef: 1.0, kx: FockIndex::vacuum(), ky: FockIndex::vacuum() },
            Term { coef: 0.5, kx: FockIndex::new(vec![1]), ky: FockIndex::new(vec![1]) },
        ],
        c_weight: gaussian(0.0, 1.0),
    };
    let q = SemigroupQuery { n_samples: 20_000, seed: 51, ..half_query(0.5, obs, 20_000, 51) };
    let start = BoundaryStart::Bulk(CircleField::new(0.1, vec![(0.3, 0.2)]));
    let c = compose_check(Geometry::Bulk, 0.2, 0.3, &q, &start, 2).unwrap();
    assert!(c.pass, "{c:?}");
    // the free flow does not see the cutoffs once they cover the observable
    let free = SemigroupQuery { params: LiouvilleParams::free(1.0).unwrap(), ..q.clone() };
    let r = refinement_check(Geometry::Bulk, &free, &start).unwrap();
    assert!(!r.flagged, "{r:?}");
    // doubling the mode cutoff also doubles the GMC cutoff, so the interacting
    // estimate is allowed to move; the report must say so consistently
    let r = refinement_check(Geometry::Bulk, &q, &start).unwrap();
    assert!((r.shift.mean - (r.fine.mean - r.coarse.mean)).abs() < 1e-15);
    assert_eq!(r.flagged, !r.shift.agrees_with(0.0, 3.0, 0.0));
    let wrong = BoundaryStart::Half(HalfCircleField::new(0.0, vec![0.1]));
    assert!(compose_check(Geometry::Bulk, 0.2, 0.3, &q, &wrong, 2).is_err());
}

#[test]
fn query_validation() {
    let phi = HalfCircleField::new(0.0, vec![0.1]);
    let q = half_query(1.0, Observable::constant(1.0), 1, 0);
    assert!(fk_apply(&q, &phi).is_err());
    let q = SemigroupQuery { t: 0.0, ..half_query(1.0, Observable::constant(1.0), 10, 0) };
    assert!(fk_apply(&q, &phi).is_err());
    let bulk_obs = Observable {
        terms: vec![Term { coef: 1.0, kx: FockIndex::vacuum(), ky: FockIndex::new(vec![1]) }],
        c_weight: CWeight::One,
    };
    assert!(fk_apply(&half_query(1.0, bulk_obs, 10, 0), &phi).is_err());
    assert!(potential_matrix_on_ek(1, 2.0, 4, 10, 0).is_err());
}

#[test]
fn potential_matrices_without_coupling() {
    // at γ = 0 every potential is constant: V = π, L = R = 1
    let m = potential_matrix_on_ek(2, 0.0, 4, 20_000, 61).unwrap();
    let dim = m.basis.len();
    for a in 0..dim {
        for b in 0..dim {
            let id = if a == b { 1.0 } else { 0.0 };
            assert!((m.v[(a, b)] - PI * m.l[(a, b)]).abs() < 1e-10);
            assert!((m.l[(a, b)] - m.r[(a, b)]).abs() < 1e-12);
            assert!((m.l[(a, b)] - id).abs() < 5.0 * m.l_stderr[(a, b)].max(1e-3), "{a} {b}: {}", m.l[(a, b)]);
        }
    }
}

/// `E[ψ_m(x+h) ψ_l(x+h)]` for a single standard Gaussian coordinate.
fn shifted_gram(m: u32, l: u32, h: f64, rule: &[(f64, f64)]) -> f64 {
    let norm = (factorial(m) * factorial(l)).sqrt();
    rule.iter().map(|(x, w)| w * hermite_he(m, x + h) * hermite_he(l, x + h)).sum::<f64>() / norm
}

#[test]
fn endpoint_matrices_are_shifted_gram_matrices() {
    let (gamma, k) = (1.0, 4);
    let m = potential_matrix_on_ek(2, gamma, k, 40_000, 62).unwrap();
    let rule = gauss_rule();
    let dim = m.basis.len();
    for side in 0..2 {
        let (mat, se) = if side == 0 { (&m.r, &m.r_stderr) } else { (&m.l, &m.l_stderr) };
        for a in 0..dim {
            for b in 0..dim {
                let mut expect = 1.0;
                for n in 1..=k {
                    let h = gamma / (2.0 * n as f64).sqrt();
                    let h = if side == 1 && n % 2 == 1 { -h } else { h };
                    let ka = m.basis[a].k.get(n - 1).copied().unwrap_or(0);
                    let kb = m.basis[b].k.get(n - 1).copied().unwrap_or(0);
                    expect *= shifted_gram(ka, kb, h, &rule);
                }
                assert!(
                    (mat[(a, b)] - expect).abs() < 5.0 * se[(a, b)],
                    "side {side} {a} {b}: {} vs {expect} +/- {}",
                    mat[(a, b)],
                    se[(a, b)]
                );
            }
        }
    }
}

#[test]
fn potential_matrices_first_moment_and_positivity() {
    let m = potential_matrix_on_ek(0, 1.0, 8, 20_000, 63).unwrap();
    let mean = GmcGrid::new(8).unwrap().v_mean(0.5, 8);
    assert!((m.v[(0, 0)] - mean).abs() < 4.0 * m.v_stderr[(0, 0)], "{} vs {mean}", m.v[(0, 0)]);
    assert!((m.l[(0, 0)] - 1.0).abs() < 4.0 * m.l_stderr[(0, 0)]);

    let m = potential_matrix_on_ek(3, 1.0, 4, 4000, 64).unwrap();
    for e in m.min_eigenvalues {
        assert!(e > -1e-10, "{:?}", m.min_eigenvalues);
    }
    assert!(m.c_k >= m.min_eigenvalues.iter().sum::<f64>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn annulus_kernel_rotation_covariance(
        t in 0.2f64..2.0,
        th in -4.0f64..4.0,
        c1 in -1.0f64..1.0,
        c2 in -1.0f64..1.0,
        m1 in prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 3),
        m2 in prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 3),
    ) {
        let p = LiouvilleParams::free(1.0).unwrap();
        let f1 = CircleField::new(c1, m1);
        let f2 = CircleField::new(c2, m2);
        let k = free_kernel_annulus(t, th, &p, &f1, &f2).unwrap();
        let straight = free_kernel_annulus(t, 0.0, &p, &f1, &rotate(&f2, -th)).unwrap();
        prop_assert!((k - straight).abs() <= 1e-10 * k.abs());
        let both = free_kernel_annulus(t, 0.0, &p, &rotate(&f1, th), &f2).unwrap();
        prop_assert!((k - both).abs() <= 1e-10 * k.abs());
    }

    #[test]
    fn half_kernel_is_symmetric(
        t in 0.2f64..2.0,
        c1 in -1.0f64..1.0,
        c2 in -1.0f64..1.0,
        m1 in prop::collection::vec(-1.5f64..1.5, 4),
        m2 in prop::collection::vec(-1.5f64..1.5, 4),
    ) {
        let p = LiouvilleParams::free(1.0).unwrap();
        let a = HalfCircleField::new(c1, m1);
        let b = HalfCircleField::new(c2, m2);
        let ab = free_kernel_half(t, &p, &a, &b).unwrap();
        let ba = free_kernel_half(t, &p, &b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab);
    }
}
