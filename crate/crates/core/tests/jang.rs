use proptest::prelude::*;
use qlm_core::cases::{generate, Case};
use qlm_core::data::PhysicalSurfaceData;
use qlm_core::embed::{EmbeddingR3, EmbeddingR31};
use qlm_core::extrinsic::{mdot, mean_curvature_vector_r31};
use qlm_core::jang::{
    boundary_data_in_slice, boundary_expression, solve_jang_radial, InnerBoundary, JangConfig, RadialInitialData,
    RadialProfile, TabulatedProfile,
};
use qlm_core::QlmError;
use qlm_core::sphere::{gradient, norm_sq, pair, CovectorField, ScalarField, SphereGrid};

fn slice_f(p: [f64; 3]) -> f64 {
    0.2 * p[2] + 0.05 * (p[0] * p[0] - p[1] * p[1]) + 0.05 * p[0]
}

fn slice_df(p: [f64; 3]) -> [f64; 3] {
    [0.1 * p[0] + 0.05, -0.1 * p[1], 0.2]
}

#[test]
fn boundary_expression_matches_boosted_frame() {
    let g = SphereGrid::new(24, 48).unwrap();
    let xh = EmbeddingR3::from_fn(&g, |t, p| [t.sin() * p.cos(), 1.1 * t.sin() * p.sin(), 0.9 * t.cos()]);
    let tau = ScalarField::new(&g, (0..g.len()).map(|i| slice_f(xh.point(i))).collect()).unwrap();
    let x = EmbeddingR31::new(xh, tau.clone()).unwrap();
    let (bd, frame) = boundary_data_in_slice(&x, slice_df).unwrap();
    let sigma = x.induced_metric().unwrap();
    let f3 = ScalarField::from_fn(&g, |t, p| 0.3 * t.cos() + 0.1 * t.sin() * p.cos() + 0.2);
    let data = PhysicalSurfaceData::new(
        sigma.clone(),
        ScalarField::constant(&g, 1.0),
        CovectorField::zeros(&g),
        "test",
    )
    .unwrap()
    .with_boundary(bd)
    .unwrap();
    let out = boundary_expression(&data, &tau, &f3).unwrap();
    let boosted = frame.boosted(&out.e3_prime_boost);
    let alpha = boosted.connection_form();
    let (dtau, grad) = gradient(&sigma, &tau).unwrap();
    let gs = norm_sq(&sigma, &dtau);
    let a = pair(&alpha, &grad);
    let h = mean_curvature_vector_r31(&x).unwrap();
    let mut worst = 0.0f64;
    for i in 0..g.len() {
        let w = (1.0 + gs.values()[i]).sqrt();
        let direct = -w * mdot(&h.at(i), &boosted.e3[i]) - a.values()[i];
        worst = worst.max((direct - w * out.boundary_expression.values()[i]).abs());
    }
    assert!(worst <= 1e-8, "{worst:e}");
}

fn radial(r_min: f64, r_max: f64, profile: RadialProfile) -> RadialInitialData {
    RadialInitialData::new(r_min, r_max, profile).unwrap()
}

fn f3_at(points: usize, data: &RadialInitialData, tau: f64) -> f64 {
    let cfg = JangConfig {
        points,
        ..JangConfig::default()
    };
    solve_jang_radial(data, tau, InnerBoundary::Regularity, &cfg).unwrap().f3_boundary
}

#[test]
fn time_symmetric_data_gives_constant_solution() {
    for (data, tau) in [
        (radial(0.0, 1.0, RadialProfile::Flat), 0.0),
        (radial(0.0, 2.0, RadialProfile::Flat), -0.7),
        (radial(3.0, 10.0, RadialProfile::Schwarzschild { m: 1.0 }), 0.25),
    ] {
        assert!(data.is_time_symmetric());
        let sol = solve_jang_radial(&data, tau, InnerBoundary::Regularity, &JangConfig::default()).unwrap();
        assert!(sol.residual_inf <= 1e-12);
        assert!(sol.f.iter().all(|f| (f - tau).abs() <= 1e-12));
        assert_eq!(sol.f3_boundary, 0.0);
    }
}

#[test]
fn self_convergence_order() {
    let data = radial(1.0, 2.0, RadialProfile::ConstantTrace { c: 0.1 });
    let (a, b, c) = (f3_at(41, &data, 0.0), f3_at(81, &data, 0.0), f3_at(161, &data, 0.0));
    let order = ((a - b).abs() / (b - c).abs()).log2();
    assert!(order >= 2.0, "observed order {order}");
    // Richardson reference for the error reduction per halving.
    let reference = f3_at(641, &data, 0.0);
    assert!((b - reference).abs() * 4.0 <= (a - reference).abs());
}

#[test]
fn dirichlet_inner_value_is_kept() {
    let data = radial(1.0, 2.0, RadialProfile::ConstantTrace { c: 0.15 });
    let sol = solve_jang_radial(&data, 0.2, InnerBoundary::Dirichlet(-0.1), &JangConfig::default()).unwrap();
    assert!((sol.f[0] + 0.1).abs() < 1e-14);
    assert!((sol.f[sol.f.len() - 1] - 0.2).abs() < 1e-14);
    assert!(sol.residual_inf <= 1e-8);
}

#[test]
fn large_trace_blows_up() {
    let data = radial(0.0, 3.0, RadialProfile::ConstantTrace { c: 0.6 });
    let err = solve_jang_radial(&data, 0.0, InnerBoundary::Regularity, &JangConfig::default()).unwrap_err();
    assert!(matches!(err, QlmError::JangBlowUp { .. }), "{err}");
}

#[test]
fn zero_normal_derivative_reduces_to_k() {
    let g = SphereGrid::new(12, 24).unwrap();
    let d = generate(&Case::SchwarzschildSphere { m: 1.0, r: 4.0 }, &g).unwrap();
    let out = boundary_expression(&d.data, &ScalarField::zeros(&g), &ScalarField::zeros(&g)).unwrap();
    let k = &d.data.boundary.as_ref().unwrap().k;
    assert!(out.e3_prime_boost.max_abs() == 0.0);
    assert!(out
        .boundary_expression
        .values()
        .iter()
        .zip(k.values())
        .all(|(a, b)| (a - b).abs() < 1e-15));
}

#[test]
fn tabulated_profile_matches_named_one() {
    let r: Vec<f64> = (0..=200).map(|i| 3.0 + 7.0 * i as f64 / 200.0).collect();
    let g_rr: Vec<f64> = r.iter().map(|r| 1.0 / (1.0 - 2.0 / r)).collect();
    let zeros = vec![0.0; r.len()];
    let tab = TabulatedProfile::new(&r, &g_rr, &r, &zeros, &zeros).unwrap();
    let data = radial(3.0, 10.0, RadialProfile::Tabulated(tab));
    let named = radial(3.0, 10.0, RadialProfile::Schwarzschild { m: 1.0 });
    for x in [3.3, 5.0, 9.1] {
        assert!((data.at(x).g_rr - named.at(x).g_rr).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residual_is_small(c in -0.3f64..0.3, tau in -1.0f64..1.0, r_min in 0.0f64..1.0) {
        let data = radial(r_min, r_min + 1.0, RadialProfile::ConstantTrace { c });
        let sol = solve_jang_radial(&data, tau, InnerBoundary::Regularity, &JangConfig::default()).unwrap();
        prop_assert!(sol.residual_inf <= 1e-8);
        prop_assert!((sol.f[sol.f.len() - 1] - tau).abs() < 1e-14);
        // f' has the sign of c for this data.
        prop_assert!(sol.f3_boundary * c >= 0.0);
    }
}
