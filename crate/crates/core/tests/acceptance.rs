//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use common::{ellipsoid, ellipsoid_total_h, max_abs_diff, rotation, schwarzschild_mass};
use qlm_core::cases::{generate, standard_suite, Case, TauProfile};
use qlm_core::data::PhysicalSurfaceData;
use qlm_core::embed::{
    project_metric, projected_gauss_curvature, solve_weyl, solve_weyl_from, tensor_deviation, theorem_b,
    EmbeddingR3, EmbeddingR31, WeylConfig,
};
use qlm_core::energy::{frak_h, generalized_mean_curvature, optimal_boost, quasi_local_mass, MassConfig};
use qlm_core::extrinsic::{mdot, mean_curvature_vector_r31, total_k_hat_via_projection, total_k_hat_via_sigma_formula};
use qlm_core::jang::{
    boundary_data_in_slice, boundary_expression, solve_jang_radial, InnerBoundary, JangConfig, RadialInitialData,
    RadialProfile,
};
use qlm_core::optimal::{total_mean_curvature_variation, xi_gradient, GradientConfig};
use qlm_core::sphere::sh::random_field;
use qlm_core::sphere::{
    gauss_curvature, gradient, integrate, norm_sq, pair, CovectorField, Parity, ScalarField, SphereGrid,
    SymTensorField,
};
use qlm_core::{QlmError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

fn grid(n: usize) -> Arc<SphereGrid> {
    SphereGrid::new(n, 2 * n).expect("grid")
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// `δσ_ab = ⟨∂_a X, ∂_b V⟩ + ⟨∂_a V, ∂_b X⟩`.
fn metric_variation(x: &EmbeddingR3, v: &EmbeddingR3) -> Result<SymTensorField> {
    let g = x.grid();
    let n = g.len();
    let mut c = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for k in 0..3 {
        let (xt, xp) = (g.d_colat(x.coord(k).values(), Parity::Even), g.d_lon(x.coord(k).values()));
        let (vt, vp) = (g.d_colat(v.coord(k).values(), Parity::Even), g.d_lon(v.coord(k).values()));
        for i in 0..n {
            c[0][i] += 2.0 * xt[i] * vt[i];
            c[1][i] += xt[i] * vp[i] + vt[i] * xp[i];
            c[2][i] += 2.0 * xp[i] * vp[i];
        }
    }
    let [a, b, d] = c;
    SymTensorField::new(g, a, b, d)
}

fn mass_of(case: &Case, g: &Arc<SphereGrid>, tau: Option<&ScalarField>) -> Result<f64> {
    let d = generate(case, g)?;
    let tau = tau.unwrap_or(&d.own_tau);
    Ok(quasi_local_mass(&d.data, tau, &MassConfig::default())?.mass)
}

fn criterion_1() -> Result<(bool, String)> {
    let g = grid(48);
    let mut ok = true;
    let mut parts = Vec::new();
    for case in [
        Case::BoostedSphere { r: 1.0, rapidity: 0.5 },
        Case::Ellipsoid { a: 1.0, b: 1.1, c: 1.2 },
    ] {
        let t = Instant::now();
        let m = mass_of(&case, &g, None)?;
        let dt = secs(t);
        ok &= m.abs() <= 1e-4 && dt <= 60.0;
        parts.push(format!("{} mass {m:.2e} in {dt:.1} s", case.name()));
    }
    Ok((ok, format!("48x96: {}", parts.join("; "))))
}

fn criterion_2() -> Result<(bool, String)> {
    let t = Instant::now();
    let m = mass_of(&Case::SchwarzschildSphere { m: 1.0, r: 4.0 }, &grid(32), Some(&ScalarField::zeros(&grid(32))))?;
    let dt = secs(t);
    let expected = 4.0 * (1.0 - 0.5f64.sqrt());
    let err = (m - expected).abs();
    Ok((err <= 1e-6 && dt <= 10.0, format!("mass {m:.10} vs {expected:.10}, error {err:.1e}, {dt:.2} s")))
}

fn criterion_3() -> Result<(bool, String)> {
    let t = Instant::now();
    let g = grid(32);
    let zero = ScalarField::zeros(&g);
    let mut masses = Vec::new();
    for r in [3.0, 4.0, 6.0, 10.0] {
        masses.push(mass_of(&Case::SchwarzschildSphere { m: 1.0, r }, &g, Some(&zero))?);
    }
    let dt = secs(t);
    let decreasing = masses.windows(2).all(|w| w[1] < w[0]);
    let above = masses.iter().all(|m| *m > 1.0);
    let closer = masses[3] - 1.0 < masses[0] - 1.0;
    let oracle = [3.0, 4.0, 6.0, 10.0]
        .iter()
        .zip(&masses)
        .fold(0.0f64, |a, (r, m)| a.max((m - schwarzschild_mass(1.0, *r)).abs()));
    Ok((
        decreasing && above && closer && dt <= 30.0,
        format!(
            "masses {:.6} {:.6} {:.6} {:.6}, max closed-form error {oracle:.1e}, {dt:.2} s",
            masses[0], masses[1], masses[2], masses[3]
        ),
    ))
}

fn criterion_4() -> Result<(bool, String)> {
    let g = grid(32);
    let mut surfaces: Vec<(String, EmbeddingR31)> = Vec::new();
    for case in [
        Case::BoostedSphere { r: 1.0, rapidity: 0.5 },
        Case::BoostedSphere { r: 1.0, rapidity: 1.0 },
        Case::GraphOverSphere {
            r: 1.0,
            profile: TauProfile::Mix(0.1),
        },
    ] {
        surfaces.push((case.name(), generate(&case, &g)?.embedding.expect("embedded")));
    }
    surfaces.push((
        "ellipsoid(1, 1.1, 1.2), cos:0.1".into(),
        EmbeddingR31::new(ellipsoid(&g, 1.0, 1.1, 1.2), TauProfile::Cos(0.1).field(&g))?,
    ));
    surfaces.push((
        "sphere(1), cos:0.1".into(),
        EmbeddingR31::new(EmbeddingR3::round(&g, 1.0), TauProfile::Cos(0.1).field(&g))?,
    ));
    let mut worst = 0.0f64;
    for (_, x) in &surfaces {
        let a = total_k_hat_via_projection(x.spatial())?;
        let b = total_k_hat_via_sigma_formula(x, x.time())?;
        worst = worst.max((a - b).abs() / a.abs());
    }
    Ok((worst <= 1e-6, format!("max relative difference {worst:.1e} over {} surfaces", surfaces.len())))
}

fn criterion_5() -> Result<(bool, String)> {
    let g = grid(32);
    let mut worst = 0.0f64;
    let mut n = 0;
    for case in standard_suite() {
        let d = generate(&case, &g)?;
        for tau in [d.own_tau.clone(), TauProfile::Cos(0.1).field(&g), TauProfile::Mix(0.1).field(&g)] {
            let a = projected_gauss_curvature(&d.data.sigma, &tau)?;
            let b = gauss_curvature(&project_metric(&d.data.sigma, &tau)?);
            worst = worst.max(max_abs_diff(a.values(), b.values()) / b.max_abs());
            n += 1;
        }
    }
    Ok((worst <= 1e-6, format!("max node-wise relative difference {worst:.1e} over {n} inputs")))
}

fn criterion_6() -> Result<(bool, String)> {
    let g = grid(32);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut smallest = f64::INFINITY;
    let mut at_zero = 0.0f64;
    let mut n = 0;
    for case in standard_suite() {
        let d = generate(&case, &g)?;
        for tau in [d.own_tau.clone(), TauProfile::Mix(0.1).field(&g)] {
            let phi = optimal_boost(&d.data, &tau)?;
            let best = frak_h(&d.data, &tau)?;
            let h0 = generalized_mean_curvature(&d.data, &tau, &phi)?;
            at_zero = at_zero.max((integrate(&d.data.sigma, &h0)? - best).abs());
            for _ in 0..100 {
                let amp: f64 = rand::Rng::gen_range(&mut rng, 0.01..1.0);
                let dphi = random_field(&g, 4, amp, &mut rng)?;
                let h = generalized_mean_curvature(&d.data, &tau, &phi.zip_map(&dphi, |a, b| a + b))?;
                smallest = smallest.min(integrate(&d.data.sigma, &h)? - best);
                n += 1;
            }
        }
    }
    Ok((
        smallest > 0.0 && at_zero <= 1e-10,
        format!("smallest excess {smallest:.2e} over {n} boosts, |excess| at zero perturbation {at_zero:.1e}"),
    ))
}

fn criterion_7() -> Result<(bool, String)> {
    let g = grid(32);
    let cfg = GradientConfig {
        seed: SEED,
        ..GradientConfig::default()
    };
    let mut fd = 0.0f64;
    for (case, tau) in [
        (Case::SchwarzschildSphere { m: 1.0, r: 4.0 }, TauProfile::Mix(0.2)),
        (Case::Ellipsoid { a: 1.0, b: 1.1, c: 1.2 }, TauProfile::Mix(0.1)),
        (
            Case::GraphOverSphere {
                r: 1.0,
                profile: TauProfile::Mix(0.1),
            },
            TauProfile::P2(0.05),
        ),
    ] {
        let d = generate(&case, &g)?;
        let rep = xi_gradient(&d.data, &tau.field(&g), &cfg)?;
        fd = fd.max(rep.fd_check.unwrap_or(f64::INFINITY));
    }
    let mut stationary = 0.0f64;
    let no_fd = GradientConfig {
        fd_directions: 0,
        ..GradientConfig::default()
    };
    for case in [
        Case::BoostedSphere { r: 1.0, rapidity: 0.5 },
        Case::GraphOverSphere {
            r: 1.0,
            profile: TauProfile::Mix(0.1),
        },
    ] {
        let d = generate(&case, &g)?;
        stationary = stationary.max(xi_gradient(&d.data, &d.own_tau, &no_fd)?.grad_field.max_abs());
    }
    Ok((
        fd <= 1e-4 && stationary <= 1e-4,
        format!("gradient vs differences {fd:.1e} (3 cases x 5 directions), max |grad| at Minkowski τ {stationary:.1e}"),
    ))
}

fn criterion_8() -> Result<(bool, String)> {
    let g = grid(32);
    let x = ellipsoid(&g, 1.0, 1.1, 1.2);
    let w = [0.3, -0.2, 0.5];
    let b = [0.1, -0.4, 0.2];
    let v = EmbeddingR3::from_fn(&g, |t, p| {
        let q = [t.sin() * p.cos(), 1.1 * t.sin() * p.sin(), 1.2 * t.cos()];
        [
            w[1] * q[2] - w[2] * q[1] + b[0],
            w[2] * q[0] - w[0] * q[2] + b[1],
            w[0] * q[1] - w[1] * q[0] + b[2],
        ]
    });
    let rigid = total_mean_curvature_variation(&x, &metric_variation(&x, &v)?)?.abs();
    let stretch = EmbeddingR3::from_fn(&g, |t, _| [0.0, 0.0, t.cos()]);
    let formula = total_mean_curvature_variation(&x, &metric_variation(&x, &stretch)?)?;
    let h = 1e-4;
    let fd = (ellipsoid_total_h(1.0, 1.1, 1.2 + h) - ellipsoid_total_h(1.0, 1.1, 1.2 - h)) / (2.0 * h);
    let rel = (formula - fd).abs() / fd.abs();
    Ok((
        rigid <= 1e-8 && rel <= 1e-5,
        format!("rigid motion {rigid:.1e}; ellipsoid family {formula:.9} vs difference {fd:.9} (relative {rel:.1e})"),
    ))
}

fn jang_two_path(g: &Arc<SphereGrid>) -> Result<f64> {
    let profile = TauProfile::Mix(0.1);
    let d = generate(&Case::GraphOverSphere { r: 1.0, profile }, g)?;
    let x = d.embedding.expect("embedded");
    let (bd, frame) = boundary_data_in_slice(&x, |p| profile.extension_gradient(p))?;
    let sigma = x.induced_metric()?;
    let data = PhysicalSurfaceData::new(sigma.clone(), ScalarField::constant(g, 1.0), CovectorField::zeros(g), "slice")?
        .with_boundary(bd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let f3 = random_field(g, 3, 0.5, &mut rng)?;
    let out = boundary_expression(&data, x.time(), &f3)?;
    let boosted = frame.boosted(&out.e3_prime_boost);
    let alpha = boosted.connection_form();
    let (dtau, grad) = gradient(&sigma, x.time())?;
    let gs = norm_sq(&sigma, &dtau);
    let a = pair(&alpha, &grad);
    let h = mean_curvature_vector_r31(&x)?;
    let mut worst = 0.0f64;
    for i in 0..g.len() {
        let w = (1.0 + gs.values()[i]).sqrt();
        let direct = -w * mdot(&h.at(i), &boosted.e3[i]) - a.values()[i];
        worst = worst.max((direct - w * out.boundary_expression.values()[i]).abs());
    }
    Ok(worst)
}

fn criterion_9() -> Result<(bool, String)> {
    let mut const_dev = 0.0f64;
    let mut residual = 0.0f64;
    for (data, tau) in [
        (RadialInitialData::new(0.0, 1.0, RadialProfile::Flat)?, 0.3),
        (RadialInitialData::new(3.0, 10.0, RadialProfile::Schwarzschild { m: 1.0 })?, -0.2),
    ] {
        let sol = solve_jang_radial(&data, tau, InnerBoundary::Regularity, &JangConfig::default())?;
        residual = residual.max(sol.residual_inf);
        const_dev = const_dev.max(sol.f.iter().fold(0.0f64, |m, f| m.max((f - tau).abs())));
    }
    let data = RadialInitialData::new(1.0, 2.0, RadialProfile::ConstantTrace { c: 0.1 })?;
    let f3 = |points| -> Result<f64> {
        let cfg = JangConfig {
            points,
            ..JangConfig::default()
        };
        Ok(solve_jang_radial(&data, 0.0, InnerBoundary::Regularity, &cfg)?.f3_boundary)
    };
    let (a, b, c) = (f3(41)?, f3(81)?, f3(161)?);
    let order = ((a - b).abs() / (b - c).abs()).log2();
    let two_path = jang_two_path(&grid(32))?;
    Ok((
        residual <= 1e-12 && const_dev <= 1e-12 && order >= 2.0 && two_path <= 1e-8,
        format!(
            "time-symmetric residual {residual:.1e}, deviation from constant {const_dev:.1e}; observed order {order:.2}; boundary two-path {two_path:.1e}"
        ),
    ))
}

fn criterion_10() -> Result<(bool, String)> {
    let g = grid(32);
    let cfg = WeylConfig::default();
    let target = ellipsoid(&g, 1.0, 1.1, 1.2);
    let sigma = target.induced_metric()?;
    let (x, _) = solve_weyl(&sigma, &cfg)?;
    let residual = tensor_deviation(&x.induced_tensor(), sigma.tensor()) / sigma.tensor().max_abs();
    let k1 = total_k_hat_via_projection(&x)?;
    let guess = target.transformed(&rotation([0.6, 0.0, 0.8], 0.9), [0.3, -0.2, 0.1]);
    let (y, _) = solve_weyl_from(&sigma, &guess, &cfg)?;
    let k2 = total_k_hat_via_projection(&y)?;
    let resolve = (k1 - k2).abs() / k1;
    let oracle = ellipsoid_total_h(1.0, 1.1, 1.2);
    let analytic = (k1 - oracle).abs() / oracle;
    let mut steps = 0;
    let mut solves = 0;
    for case in standard_suite() {
        let d = generate(&case, &g)?;
        for tau in [d.own_tau.clone(), TauProfile::Cos(0.1).field(&g), TauProfile::Mix(0.1).field(&g)] {
            let (_, rep) = theorem_b(&d.data.sigma, &tau, &cfg)?;
            steps = steps.max(rep.continuation_steps);
            solves += 1;
        }
    }
    Ok((
        residual <= 1e-8 && resolve <= 1e-8 && analytic <= 1e-6 && steps <= 64,
        format!(
            "ellipsoid isometry residual {residual:.1e}, total mean curvature vs quadrature {analytic:.1e}, re-solve change {resolve:.1e}; at most {steps} continuation steps over {solves} solves"
        ),
    ))
}

fn criterion_11() -> Result<(bool, String)> {
    let g = grid(32);
    let mut lowest = f64::INFINITY;
    let mut admissible = 0;
    let mut rejected = 0;
    for case in standard_suite() {
        let d = generate(&case, &g)?;
        for tau in [
            d.own_tau.clone(),
            ScalarField::zeros(&g),
            TauProfile::Cos(0.1).field(&g),
            TauProfile::Mix(0.1).field(&g),
        ] {
            match quasi_local_mass(&d.data, &tau, &MassConfig::default()) {
                Ok(rep) if rep.admissibility.flags().iter().all(|(_, f)| f.holds()) => {
                    lowest = lowest.min(rep.mass);
                    admissible += 1;
                }
                Ok(_) | Err(QlmError::Admissibility(_)) => rejected += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok((
        lowest >= -1e-4 && admissible > 0,
        format!("lowest mass {lowest:.2e} over {admissible} admissible (case, τ) pairs, {rejected} not admissible"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<(bool, String)>); 11] = [
        ("zero mass on Minkowski surfaces", criterion_1),
        ("Schwarzschild closed form", criterion_2),
        ("large-sphere trend", criterion_3),
        ("total mean curvature two paths", criterion_4),
        ("projected Gauss curvature two paths", criterion_5),
        ("optimal boost minimality", criterion_6),
        ("gradient and stationarity", criterion_7),
        ("total mean curvature variation", criterion_8),
        ("radial Jang solver", criterion_9),
        ("Weyl solver", criterion_10),
        ("nonnegativity", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.1} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            secs(t)
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
