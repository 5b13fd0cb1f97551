use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use qlm_core::cases::{generate, standard_suite, Case};
use qlm_core::sphere::sh::random_field;
use qlm_core::sphere::{
    differential, gauss_curvature, gradient, inner, integrate, laplacian, MetricField, ScalarField, SphereGrid,
    SymTensorField,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn conformal(grid: &Arc<SphereGrid>, u: &ScalarField) -> MetricField {
    let n = grid.len();
    let e: Vec<f64> = u.values().iter().map(|v| (2.0 * v).exp()).collect();
    let s = grid.sample(|t, _| t.sin() * t.sin());
    let g: Vec<f64> = (0..n).map(|i| e[i] * s[i]).collect();
    MetricField::new(SymTensorField::new(grid, e, vec![0.0; n], g).unwrap()).unwrap()
}

fn exp_x(t: f64, p: f64) -> f64 {
    (t.sin() * p.cos()).exp()
}

/// `Δ_{S²} e^{x}` from `Δ_{R³} − ∂²_r − 2∂_r` at `r = 1`.
fn lap_exp_x(t: f64, p: f64) -> f64 {
    let x = t.sin() * p.cos();
    x.exp() * (1.0 - x * x - 2.0 * x)
}

#[test]
fn laplacian_converges_spectrally() {
    let mut last = f64::INFINITY;
    for n in [8, 16, 32] {
        let g = SphereGrid::new(n, 2 * n).unwrap();
        let f = ScalarField::from_fn(&g, exp_x);
        let lap = laplacian(&MetricField::round(&g, 1.0), &f).unwrap();
        let exact = ScalarField::from_fn(&g, lap_exp_x);
        let err = lap.zip_map(&exact, |a, b| a - b).max_abs();
        if last > 1e-11 {
            assert!(err * 4.0 <= last, "n = {n}: {err:e} after {last:e}");
        }
        last = err;
    }
    assert!(last < 1e-10);
}

#[test]
fn gradient_of_height_function() {
    // On the unit sphere |∇ cos θ|² = sin²θ.
    let g = SphereGrid::new(16, 32).unwrap();
    let sigma = MetricField::round(&g, 1.0);
    let f = ScalarField::from_fn(&g, |t, _| t.cos());
    let d = differential(&f);
    let n = inner(&sigma, &d, &d);
    let exact = ScalarField::from_fn(&g, |t, _| t.sin().powi(2));
    assert!(n.zip_map(&exact, |a, b| a - b).max_abs() < 1e-13);
}

#[test]
fn gauss_bonnet_on_generated_metrics() {
    let g = SphereGrid::new(32, 64).unwrap();
    let mut cases = standard_suite();
    cases.push(Case::Dumbbell { neck: 0.5 });
    cases.push(Case::RoundSphere { r: 2.0 });
    for case in cases {
        let d = generate(&case, &g).unwrap();
        let total = integrate(&d.data.sigma, &gauss_curvature(&d.data.sigma)).unwrap();
        assert!((total / (4.0 * PI) - 1.0).abs() <= 1e-7, "{}: {total}", case.name());
    }
}

#[test]
fn round_sphere_area() {
    let g = SphereGrid::new(8, 16).unwrap();
    let s = MetricField::round(&g, 2.0);
    assert!((s.area() - 16.0 * PI).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivatives_annihilate_constants(c in -1e3f64..1e3, seed in 0u64..1000) {
        let g = SphereGrid::new(12, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = conformal(&g, &random_field(&g, 4, 0.3, &mut rng).unwrap());
        let f = ScalarField::constant(&g, c);
        let (d, _) = gradient(&sigma, &f).unwrap();
        prop_assert!(d.comp(0).iter().chain(d.comp(1)).all(|v| v.abs() <= 1e-13));
        prop_assert!(laplacian(&sigma, &f).unwrap().max_abs() <= 1e-13);
    }

    #[test]
    fn gauss_bonnet_conformal(seed in 0u64..1000, amp in 0.05f64..0.6) {
        // e^{2u} is not band-limited; 24x48 under-resolves the larger amplitudes.
        let g = SphereGrid::new(32, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = conformal(&g, &random_field(&g, 3, amp, &mut rng).unwrap());
        let total = integrate(&sigma, &gauss_curvature(&sigma)).unwrap();
        prop_assert!((total / (4.0 * PI) - 1.0).abs() <= 1e-7, "{}", total);
    }

    #[test]
    fn integration_by_parts(seed in 0u64..1000) {
        let g = SphereGrid::new(24, 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = conformal(&g, &random_field(&g, 2, 0.2, &mut rng).unwrap());
        let f = random_field(&g, 4, 1.0, &mut rng).unwrap();
        let h = random_field(&g, 4, 1.0, &mut rng).unwrap();
        let lhs = integrate(&sigma, &f.zip_map(&laplacian(&sigma, &h).unwrap(), |a, b| a * b)).unwrap();
        let rhs = -integrate(&sigma, &inner(&sigma, &differential(&f), &differential(&h))).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{} vs {}", lhs, rhs);
    }
}

