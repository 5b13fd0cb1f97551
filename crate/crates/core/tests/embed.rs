mod common;

use std::sync::Arc;

use common::{ellipsoid, ellipsoid_total_h, max_abs_diff, rotation};
use proptest::prelude::*;
use qlm_core::cases::{generate, standard_suite, Case, TauProfile};
use qlm_core::embed::{
    check_convexity_condition, lift_to_minkowski, project_metric, projected_gauss_curvature, solve_weyl,
    solve_weyl_from, tensor_deviation, theorem_b, EmbeddingR3, WeylConfig,
};
use qlm_core::extrinsic::{extrinsic_r3, extrinsic_r31, total_k_hat_via_projection};
use qlm_core::sphere::sh::random_field;
use qlm_core::sphere::{differential, gauss_curvature, norm_sq, MetricField, ScalarField, SphereGrid};
use qlm_core::QlmError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> Arc<SphereGrid> {
    SphereGrid::new(n, 2 * n).unwrap()
}

fn relative_metric_residual(x: &EmbeddingR3, sigma: &MetricField) -> f64 {
    let induced = x.induced_tensor();
    tensor_deviation(&induced, sigma.tensor()) / sigma.tensor().max_abs()
}

#[test]
fn zero_tau_leaves_metric_unchanged() {
    let g = grid(12);
    let sigma = ellipsoid(&g, 1.0, 1.1, 1.2).induced_metric().unwrap();
    let hat = project_metric(&sigma, &ScalarField::zeros(&g)).unwrap();
    for c in 0..3 {
        assert_eq!(hat.tensor().comp(c), sigma.tensor().comp(c));
    }
}

#[test]
fn convexity_on_round_sphere_with_tilt() {
    // Hess(ε cos θ) = −ε cos θ σ on the unit sphere, so the condition reads
    // 1 + ε² cos²θ / (1 + ε² sin²θ).
    let g = grid(16);
    let eps = 0.2;
    let tau = ScalarField::from_fn(&g, |t, _| eps * t.cos());
    let rep = check_convexity_condition(&MetricField::round(&g, 1.0), &tau).unwrap();
    let oracle = ScalarField::from_fn(&g, |t, _| {
        1.0 + eps * eps * t.cos().powi(2) / (1.0 + eps * eps * t.sin().powi(2))
    });
    assert!(rep.holds);
    let dev = max_abs_diff(rep.values.values(), oracle.values());
    assert!(dev < 1e-10, "{dev:e}");
    assert!((rep.min_value - oracle.min()).abs() < 1e-10);

    let round = check_convexity_condition(&MetricField::round(&g, 2.0), &ScalarField::zeros(&g)).unwrap();
    assert!((round.min_value - 0.25).abs() < 1e-12);
}

#[test]
fn dumbbell_fails_convexity_at_the_neck() {
    let g = grid(24);
    let d = generate(&Case::Dumbbell { neck: 0.5 }, &g).unwrap();
    let rep = check_convexity_condition(&d.data.sigma, &ScalarField::zeros(&g)).unwrap();
    assert!(!rep.holds);
    assert!(rep.min_value < 0.0);
    assert!((rep.worst_node.colat - std::f64::consts::FRAC_PI_2).abs() < 0.15);
    let err = theorem_b(&d.data.sigma, &ScalarField::zeros(&g), &WeylConfig::default()).unwrap_err();
    assert!(matches!(err, QlmError::Precondition(_)), "{err}");
}

#[test]
fn projected_metric_of_boosted_sphere_is_its_projection() {
    let g = grid(24);
    let d = generate(&Case::BoostedSphere { r: 1.0, rapidity: 0.5 }, &g).unwrap();
    let x = d.embedding.unwrap();
    let hat = project_metric(&d.data.sigma, &d.own_tau).unwrap();
    let direct = x.spatial().induced_tensor();
    assert!(tensor_deviation(hat.tensor(), &direct) < 1e-12);
    assert!(projected_gauss_curvature(&d.data.sigma, &d.own_tau).unwrap().min() > 0.0);
}

#[test]
fn weyl_recovers_ellipsoid() {
    let g = grid(32);
    let target = ellipsoid(&g, 1.0, 1.1, 1.2);
    let sigma = target.induced_metric().unwrap();
    let (x, report) = solve_weyl(&sigma, &WeylConfig::default()).unwrap();
    assert!(report.residual_inf <= 1e-8);
    assert!(report.continuation_steps <= 64);
    assert!(relative_metric_residual(&x, &sigma) <= 1e-8);
    let total = total_k_hat_via_projection(&x).unwrap();
    let oracle = ellipsoid_total_h(1.0, 1.1, 1.2);
    assert!((total - oracle).abs() / oracle <= 1e-6, "{total} vs {oracle}");
}

#[test]
fn weyl_round_metric_is_exact() {
    let g = grid(16);
    let (x, report) = solve_weyl(&MetricField::round(&g, 1.7), &WeylConfig::default()).unwrap();
    assert!(report.residual_inf <= 1e-10);
    for i in 0..g.len() {
        let p = x.point(i);
        assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.7).abs() < 1e-10);
    }
}

#[test]
fn resolve_from_rotated_guess_keeps_total_mean_curvature() {
    let g = grid(24);
    let target = ellipsoid(&g, 1.0, 1.1, 1.2);
    let sigma = target.induced_metric().unwrap();
    let cfg = WeylConfig::default();
    let (a, _) = solve_weyl(&sigma, &cfg).unwrap();
    let guess = target.transformed(&rotation([0.6, 0.0, 0.8], 0.9), [0.3, -0.2, 0.1]);
    let (b, rep) = solve_weyl_from(&sigma, &guess, &cfg).unwrap();
    assert!(rep.residual_inf <= 1e-8);
    let ka = total_k_hat_via_projection(&a).unwrap();
    let kb = total_k_hat_via_projection(&b).unwrap();
    assert!((ka - kb).abs() <= 1e-8 * ka, "{ka} vs {kb}");
    assert!(tensor_deviation(&a.induced_tensor(), &b.induced_tensor()) <= 1e-7);
}

#[test]
fn total_mean_curvature_is_rigid_motion_invariant() {
    let g = grid(24);
    let x = ellipsoid(&g, 1.0, 1.3, 0.8);
    let base = total_k_hat_via_projection(&x).unwrap();
    for (axis, angle, shift) in [([0.0, 0.0, 1.0], 0.4, [1.0, 2.0, 3.0]), ([0.48, 0.6, 0.64], 2.1, [-0.5, 0.0, 0.7])] {
        let moved = total_k_hat_via_projection(&x.transformed(&rotation(axis, angle), shift)).unwrap();
        assert!((moved - base).abs() <= 1e-8 * base);
    }
}

#[test]
fn lift_reproduces_lorentzian_metric() {
    let g = grid(24);
    let xh = ellipsoid(&g, 1.0, 1.1, 1.2);
    let tau = ScalarField::from_fn(&g, |t, _| 0.1 * t.cos());
    let x = lift_to_minkowski(&xh, &tau).unwrap();
    assert_eq!(x.time().values(), tau.values());
    let sigma_hat = xh.induced_tensor();
    let d = differential(&tau);
    let n = g.len();
    let expected: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let s = sigma_hat.at(i);
            let (a, b) = (d.comp(0)[i], d.comp(1)[i]);
            [s[0] - a * a, s[1] - a * b, s[2] - b * b]
        })
        .collect();
    let induced = x.induced_tensor();
    for (i, e) in expected.iter().enumerate() {
        let got = induced.at(i);
        assert!((0..3).all(|c| (got[c] - e[c]).abs() <= 1e-8));
    }
}

#[test]
fn theorem_b_recovers_boosted_sphere() {
    let g = grid(24);
    let d = generate(&Case::BoostedSphere { r: 1.0, rapidity: 0.5 }, &g).unwrap();
    let analytic = extrinsic_r31(d.embedding.as_ref().unwrap()).unwrap();
    let (x, report) = theorem_b(&d.data.sigma, &d.own_tau, &WeylConfig::default()).unwrap();
    assert!(report.residual_inf <= 1e-8);
    let recovered = extrinsic_r31(&x).unwrap();
    assert!(max_abs_diff(recovered.h0_norm.values(), analytic.h0_norm.values()) <= 1e-6);
    assert!(max_abs_diff(recovered.theta.values(), analytic.theta.values()) <= 1e-6);
    let k = gauss_curvature(&x.induced_metric().unwrap());
    assert!(max_abs_diff(k.values(), gauss_curvature(&d.data.sigma).values()) <= 1e-6);
}

#[test]
fn time_translation_changes_nothing() {
    let g = grid(16);
    let d = generate(&Case::Ellipsoid { a: 1.0, b: 1.1, c: 1.2 }, &g).unwrap();
    let tau = TauProfile::Cos(0.1).field(&g);
    let cfg = WeylConfig::default();
    let (a, _) = theorem_b(&d.data.sigma, &tau, &cfg).unwrap();
    let (b, _) = theorem_b(&d.data.sigma, &tau.map(|v| v + 0.7), &cfg).unwrap();
    for k in 0..3 {
        assert!(max_abs_diff(a.coord(k).values(), b.coord(k).values()) <= 1e-10);
    }
    assert!(max_abs_diff(a.time().values(), &b.time().values().iter().map(|v| v - 0.7).collect::<Vec<_>>()) < 1e-14);
}

#[test]
fn suite_metrics_embed_within_step_budget() {
    let g = grid(24);
    for case in standard_suite() {
        let d = generate(&case, &g).unwrap();
        for tau in [d.own_tau.clone(), TauProfile::Cos(0.1).field(&g)] {
            let (x, rep) = theorem_b(&d.data.sigma, &tau, &WeylConfig::default()).unwrap();
            assert!(rep.continuation_steps <= 64, "{}", case.name());
            let ext = extrinsic_r3(x.spatial()).unwrap();
            assert!(ext.gauss_equation_residual() <= 1e-6, "{}", case.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn determinant_ratio(seed in 0u64..10_000, amp in 0.0f64..0.5) {
        let g = grid(12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = ellipsoid(&g, 1.0, 1.2, 0.9).induced_metric().unwrap();
        let tau = random_field(&g, 4, amp.max(1e-3), &mut rng).unwrap();
        let hat = project_metric(&sigma, &tau).unwrap();
        let gs = norm_sq(&sigma, &differential(&tau));
        for i in 0..g.len() {
            let ratio = hat.det()[i] / sigma.det()[i];
            prop_assert!((ratio - 1.0 - gs.values()[i]).abs() <= 1e-12 * ratio);
        }
    }

    #[test]
    fn projected_curvature_two_paths(seed in 0u64..10_000, amp in 0.01f64..0.3) {
        let g = grid(24);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = ellipsoid(&g, 1.0, 1.1, 1.2).induced_metric().unwrap();
        let tau = random_field(&g, 3, amp, &mut rng).unwrap();
        let a = projected_gauss_curvature(&sigma, &tau).unwrap();
        let b = gauss_curvature(&project_metric(&sigma, &tau).unwrap());
        prop_assert!(max_abs_diff(a.values(), b.values()) <= 1e-6 * b.max_abs());
    }
}
