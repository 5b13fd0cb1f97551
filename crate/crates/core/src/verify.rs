//! Identity checks run by `qlm verify`. Each check reports the largest
//! deviation it saw against its tolerance.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cases::{generate, Case, TauProfile};
use crate::data::PhysicalSurfaceData;
use crate::embed::{projected_gauss_curvature, project_metric, EmbeddingR3, EmbeddingR31};
use crate::energy::{frak_h, generalized_mean_curvature, optimal_boost};
use crate::error::{QlmError, Result};
use crate::extrinsic::{mdot, mean_curvature_vector_r31, total_k_hat_via_projection, total_k_hat_via_sigma_formula};
use crate::jang::{boundary_data_in_slice, boundary_expression};
use crate::optimal::{total_mean_curvature_variation, variation_tensor_divergence, xi_gradient, GradientConfig};
use crate::sphere::sh::random_field;
use crate::sphere::{
    gauss_curvature, gradient, integrate, norm_sq, pair, CovectorField, MetricField, ScalarField, SphereGrid,
    SymTensorField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Extrinsic,
    Embedding,
    Energy,
    Variation,
    Jang,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["default", "extrinsic", "embed", "energy", "variation", "jang"];

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = QlmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" | "all" => Ok(Suite::All),
            "extrinsic" => Ok(Suite::Extrinsic),
            "embed" => Ok(Suite::Embedding),
            "energy" => Ok(Suite::Energy),
            "variation" => Ok(Suite::Variation),
            "jang" => Ok(Suite::Jang),
            _ => Err(QlmError::InvalidInput(format!(
                "unknown suite '{s}' (one of {})",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<34} {:>11.3e} <= {:<9.1e} {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.deviation,
            self.tolerance,
            self.detail
        )
    }
}

fn check(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<(f64, String)>) -> IdentityCheck {
    match f() {
        Ok((deviation, detail)) => IdentityCheck {
            name,
            deviation,
            tolerance,
            detail,
        },
        Err(e) => IdentityCheck {
            name,
            deviation: f64::INFINITY,
            tolerance,
            detail: format!("error: {e}"),
        },
    }
}

fn minkowski_surfaces(grid: &Arc<SphereGrid>) -> Result<Vec<(String, EmbeddingR31)>> {
    let ell = EmbeddingR3::from_fn(grid, |t, p| [t.sin() * p.cos(), 1.1 * t.sin() * p.sin(), 1.2 * t.cos()]);
    let tau = ScalarField::from_fn(grid, |t, _| 0.1 * t.cos());
    let mut out = vec![("ellipsoid lift, τ = 0.1 cos θ".to_string(), EmbeddingR31::new(ell, tau)?)];
    for case in [
        Case::BoostedSphere { r: 1.0, rapidity: 0.5 },
        Case::GraphOverSphere {
            r: 1.0,
            profile: TauProfile::Mix(0.1),
        },
    ] {
        let g = generate(&case, grid)?;
        out.push((case.name(), g.embedding.expect("Minkowski case")));
    }
    Ok(out)
}

fn convex_pairs(grid: &Arc<SphereGrid>) -> Result<Vec<(String, MetricField, ScalarField)>> {
    let mut out = Vec::new();
    for case in crate::cases::standard_suite() {
        let g = generate(&case, grid)?;
        out.push((case.name(), g.data.sigma.clone(), g.own_tau.clone()));
        out.push((format!("{} with τ = cos:0.1", case.name()), g.data.sigma, TauProfile::Cos(0.1).field(grid)));
    }
    Ok(out)
}

fn minimality(data: &PhysicalSurfaceData, tau: &ScalarField, rng: &mut ChaCha8Rng, trials: usize) -> Result<f64> {
    let g = data.sigma.grid();
    let phi = optimal_boost(data, tau)?;
    let best = frak_h(data, tau)?;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let amp = rng.gen_range(0.01..1.0);
        let d = random_field(g, 4.min(g.max_resolved_degree()), amp, rng)?;
        let h = generalized_mean_curvature(data, tau, &phi.zip_map(&d, |a, b| a + b))?;
        worst = worst.min(integrate(&data.sigma, &h)? - best);
    }
    Ok(worst)
}

/// Induced-metric variation of `X ↦ X + s V`.
fn metric_variation(x: &EmbeddingR3, v: &EmbeddingR3) -> SymTensorField {
    let g = x.grid();
    let n = g.len();
    let d = |e: &EmbeddingR3, k: usize| {
        let c = e.coord(k).values();
        (g.d_colat(c, crate::sphere::Parity::Even), g.d_lon(c))
    };
    let dx: Vec<_> = (0..3).map(|k| d(x, k)).collect();
    let dv: Vec<_> = (0..3).map(|k| d(v, k)).collect();
    let mut c = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        for k in 0..3 {
            let (xa, xb) = (dx[k].0[i], dx[k].1[i]);
            let (va, vb) = (dv[k].0[i], dv[k].1[i]);
            c[0][i] += 2.0 * xa * va;
            c[1][i] += xa * vb + va * xb;
            c[2][i] += 2.0 * xb * vb;
        }
    }
    SymTensorField::from_raw(g, c)
}

/// `∫ H dv` of the ellipsoid `(a, b, c)` from its closed forms on `grid`.
pub fn ellipsoid_total_mean_curvature(grid: &Arc<SphereGrid>, a: f64, b: f64, c: f64) -> Result<f64> {
    let gen = generate(&Case::Ellipsoid { a, b, c }, grid)?;
    integrate(&gen.data.sigma, &gen.data.h_norm)
}

pub fn run_suite(suite: Suite, grid: &Arc<SphereGrid>, seed: u64) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if suite.includes(Suite::Extrinsic) {
        out.push(check("total k̂: projection vs σ formula", 1e-6, || {
            let mut worst = 0.0f64;
            for (_, x) in minkowski_surfaces(grid)? {
                let a = total_k_hat_via_projection(x.spatial())?;
                let b = total_k_hat_via_sigma_formula(&x, x.time())?;
                worst = worst.max((a - b).abs() / a.abs());
            }
            Ok((worst, "relative, 3 surfaces".into()))
        }));
    }

    if suite.includes(Suite::Embedding) {
        out.push(check("K̂ formula vs curvature of σ̂", 1e-6, || {
            let mut worst = 0.0f64;
            let pairs = convex_pairs(grid)?;
            for (_, sigma, tau) in &pairs {
                let a = projected_gauss_curvature(sigma, tau)?;
                let b = gauss_curvature(&project_metric(sigma, tau)?);
                let scale = b.max_abs();
                worst = worst.max(a.zip_map(&b, |x, y| (x - y).abs()).max_abs() / scale);
            }
            Ok((worst, format!("node-wise relative, {} inputs", pairs.len())))
        }));
        out.push(check("Gauss–Bonnet", 1e-8, || {
            let mut worst = 0.0f64;
            let mut cases = crate::cases::standard_suite();
            cases.push(Case::Dumbbell { neck: 0.5 });
            for case in &cases {
                let g = generate(case, grid)?;
                let k = gauss_curvature(&g.data.sigma);
                worst = worst.max((integrate(&g.data.sigma, &k)? - 4.0 * PI).abs() / (4.0 * PI));
            }
            Ok((worst, format!("relative, {} metrics", cases.len())))
        }));
    }

    if suite.includes(Suite::Energy) {
        out.push(check("optimal boost minimality", 1e-10, || {
            let mut worst = f64::INFINITY;
            let mut n = 0;
            for case in crate::cases::standard_suite() {
                let g = generate(&case, grid)?;
                for tau in [g.own_tau.clone(), TauProfile::Mix(0.1).field(grid)] {
                    worst = worst.min(minimality(&g.data, &tau, &mut rng, 100)?);
                    n += 1;
                }
            }
            Ok(((-worst).max(0.0), format!("smallest excess {worst:.3e} over {n}×100 boosts")))
        }));
    }

    if suite.includes(Suite::Variation) {
        out.push(check("total mean curvature: rigid motion", 1e-8, || {
            let x = EmbeddingR3::from_fn(grid, |t, p| [t.sin() * p.cos(), 1.1 * t.sin() * p.sin(), 1.2 * t.cos()]);
            let v = EmbeddingR3::from_fn(grid, |t, p| {
                let q = [t.sin() * p.cos(), 1.1 * t.sin() * p.sin(), 1.2 * t.cos()];
                // ω × q + b with ω = (0.3, −0.2, 0.5)
                [-0.2 * q[2] - 0.5 * q[1] + 0.1, 0.5 * q[0] - 0.3 * q[2] - 0.4, 0.3 * q[1] + 0.2 * q[0] + 0.2]
            });
            Ok((total_mean_curvature_variation(&x, &metric_variation(&x, &v))?.abs(), "absolute".into()))
        }));
        out.push(check("total mean curvature: ellipsoid family", 1e-5, || {
            let x = EmbeddingR3::from_fn(grid, |t, p| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]);
            let v = EmbeddingR3::from_fn(grid, |t, _| [0.0, 0.0, t.cos()]);
            let an = total_mean_curvature_variation(&x, &metric_variation(&x, &v))?;
            let h = 1e-4;
            let fd = (ellipsoid_total_mean_curvature(grid, 1.0, 1.0, 1.0 + h)?
                - ellipsoid_total_mean_curvature(grid, 1.0, 1.0, 1.0 - h)?)
                / (2.0 * h);
            Ok(((an - fd).abs() / fd.abs(), format!("formula {an:.10} vs difference {fd:.10}")))
        }));
        out.push(check("variation tensor divergence", 1e-5, || {
            let x = EmbeddingR3::from_fn(grid, |t, p| [t.sin() * p.cos(), 1.1 * t.sin() * p.sin(), 1.2 * t.cos()]);
            Ok((variation_tensor_divergence(&x)?, "max pointwise norm on ellipsoid".into()))
        }));
        out.push(check("Ξ gradient vs differences", 1e-4, || {
            let mut worst = 0.0f64;
            let cfg = GradientConfig {
                seed,
                ..GradientConfig::default()
            };
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
                let g = generate(&case, grid)?;
                let rep = xi_gradient(&g.data, &tau.field(grid), &cfg)?;
                worst = worst.max(rep.fd_check.unwrap_or(f64::INFINITY));
            }
            Ok((worst, "relative, 3 cases × 5 directions".into()))
        }));
        out.push(check("Ξ stationary at Minkowski τ", 1e-4, || {
            let mut worst = 0.0f64;
            for case in [
                Case::BoostedSphere { r: 1.0, rapidity: 0.5 },
                Case::GraphOverSphere {
                    r: 1.0,
                    profile: TauProfile::Mix(0.1),
                },
            ] {
                let g = generate(&case, grid)?;
                let cfg = GradientConfig {
                    fd_directions: 0,
                    ..GradientConfig::default()
                };
                worst = worst.max(xi_gradient(&g.data, &g.own_tau, &cfg)?.grad_field.max_abs());
            }
            Ok((worst, "max |δΞ/δτ|".into()))
        }));
    }

    if suite.includes(Suite::Jang) {
        out.push(check("Jang boundary expression vs boosted frame", 1e-8, || {
            let profile = TauProfile::Mix(0.1);
            let g = generate(&Case::GraphOverSphere { r: 1.0, profile }, grid)?;
            let x = g.embedding.expect("Minkowski case");
            let (bd, frame) = boundary_data_in_slice(&x, |p| profile.extension_gradient(p))?;
            let sigma = x.induced_metric()?;
            let data = PhysicalSurfaceData::new(
                sigma.clone(),
                ScalarField::constant(grid, 1.0),
                CovectorField::zeros(grid),
                "slice",
            )?
            .with_boundary(bd)?;
            let f3 = random_field(grid, 3.min(grid.max_resolved_degree()), 0.5, &mut rng)?;
            let out = boundary_expression(&data, x.time(), &f3)?;
            let boosted = frame.boosted(&out.e3_prime_boost);
            let alpha = boosted.connection_form();
            let (dtau, grad) = gradient(&sigma, x.time())?;
            let gs = norm_sq(&sigma, &dtau);
            let a = pair(&alpha, &grad);
            let h = mean_curvature_vector_r31(&x)?;
            let mut worst = 0.0f64;
            for i in 0..grid.len() {
                let w = (1.0 + gs.values()[i]).sqrt();
                let direct = -w * mdot(&h.at(i), &boosted.e3[i]) - a.values()[i];
                worst = worst.max((direct - w * out.boundary_expression.values()[i]).abs());
            }
            Ok((worst, "node-wise, graph over sphere with random f₃".into()))
        }));
    }
    Ok(out)
}
