//! Analytic test surfaces.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::data::{BoundaryData, PhysicalSurfaceData};
use crate::embed::{EmbeddingR3, EmbeddingR31};
use crate::energy::minkowski_surface_data;
use crate::error::{QlmError, Result};
use crate::jang::boundary_data_in_slice;
use crate::sphere::{CovectorField, MetricField, ScalarField, SphereGrid, SymTensorField};

/// Time-function profile written as a polynomial `T(u)` in the unit vector
/// `u = (sin θ cos φ, sin θ sin φ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauProfile {
    Zero,
    /// `ε u_z`.
    Cos(f64),
    /// `ε (3 u_z² − 1) / 2`.
    P2(f64),
    /// `ε (u_z + u_x / 2 + 0.3 (3 u_z² − 1) / 2 + 0.2 u_x u_y)`.
    Mix(f64),
}

impl TauProfile {
    pub fn value(&self, u: [f64; 3]) -> f64 {
        match *self {
            TauProfile::Zero => 0.0,
            TauProfile::Cos(e) => e * u[2],
            TauProfile::P2(e) => e * (3.0 * u[2] * u[2] - 1.0) / 2.0,
            TauProfile::Mix(e) => {
                e * (u[2] + 0.5 * u[0] + 0.15 * (3.0 * u[2] * u[2] - 1.0) + 0.2 * u[0] * u[1])
            }
        }
    }

    /// Euclidean gradient of the polynomial `T` at `u`.
    pub fn poly_gradient(&self, u: [f64; 3]) -> [f64; 3] {
        match *self {
            TauProfile::Zero => [0.0; 3],
            TauProfile::Cos(e) => [0.0, 0.0, e],
            TauProfile::P2(e) => [0.0, 0.0, 3.0 * e * u[2]],
            TauProfile::Mix(e) => [e * (0.5 + 0.2 * u[1]), e * 0.2 * u[0], e * (1.0 + 0.9 * u[2])],
        }
    }

    pub fn field(&self, grid: &Arc<SphereGrid>) -> ScalarField {
        ScalarField::from_fn(grid, |t, p| self.value(unit(t, p)))
    }

    /// Gradient of the degree-zero extension `F(x) = T(x/|x|)`.
    pub fn extension_gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let u = [x[0] / r, x[1] / r, x[2] / r];
        let g = self.poly_gradient(u);
        let d = g[0] * u[0] + g[1] * u[1] + g[2] * u[2];
        [(g[0] - d * u[0]) / r, (g[1] - d * u[1]) / r, (g[2] - d * u[2]) / r]
    }
}

impl FromStr for TauProfile {
    type Err = QlmError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || QlmError::InvalidInput(format!("unknown τ profile '{s}' (zero, cos:ε, p2:ε, mix:ε)"));
        if s == "zero" {
            return Ok(TauProfile::Zero);
        }
        let (name, eps) = s.split_once(':').ok_or_else(bad)?;
        let e: f64 = eps.parse().map_err(|_| bad())?;
        if !e.is_finite() {
            return Err(bad());
        }
        match name {
            "cos" => Ok(TauProfile::Cos(e)),
            "p2" => Ok(TauProfile::P2(e)),
            "mix" => Ok(TauProfile::Mix(e)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for TauProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauProfile::Zero => write!(f, "zero"),
            TauProfile::Cos(e) => write!(f, "cos:{e}"),
            TauProfile::P2(e) => write!(f, "p2:{e}"),
            TauProfile::Mix(e) => write!(f, "mix:{e}"),
        }
    }
}

fn unit(t: f64, p: f64) -> [f64; 3] {
    [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
}

#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    RoundSphere { r: f64 },
    BoostedSphere { r: f64, rapidity: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    GraphOverSphere { r: f64, profile: TauProfile },
    SchwarzschildSphere { m: f64, r: f64 },
    /// `σ = dθ² + (sin θ − ν sin³θ)² dφ²`.
    Dumbbell { neck: f64 },
}

impl Case {
    pub fn name(&self) -> String {
        match self {
            Case::RoundSphere { r } => format!("round_sphere(r={r})"),
            Case::BoostedSphere { r, rapidity } => format!("boosted_sphere(r={r}, rapidity={rapidity})"),
            Case::Ellipsoid { a, b, c } => format!("ellipsoid({a}, {b}, {c})"),
            Case::GraphOverSphere { r, profile } => format!("graph_over_sphere(r={r}, tau={profile})"),
            Case::SchwarzschildSphere { m, r } => format!("schwarzschild_sphere(m={m}, r={r})"),
            Case::Dumbbell { neck } => format!("dumbbell(neck={neck})"),
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(QlmError::InvalidInput(format!("{what} must be positive and finite, got {v}")))
            }
        };
        match *self {
            Case::RoundSphere { r } => pos(r, "r"),
            Case::BoostedSphere { r, rapidity } => {
                pos(r, "r")?;
                if !rapidity.is_finite() {
                    return Err(QlmError::InvalidInput("rapidity must be finite".into()));
                }
                Ok(())
            }
            Case::Ellipsoid { a, b, c } => pos(a, "a").and(pos(b, "b")).and(pos(c, "c")),
            Case::GraphOverSphere { r, .. } => pos(r, "r"),
            Case::SchwarzschildSphere { m, r } => {
                pos(m, "m")?;
                pos(r, "r")?;
                if r <= 2.0 * m {
                    return Err(QlmError::InvalidInput(format!("r = {r} is not outside the horizon r = {}", 2.0 * m)));
                }
                Ok(())
            }
            Case::Dumbbell { neck } => {
                if neck > 1.0 / 3.0 && neck <= 2.0 / 3.0 {
                    Ok(())
                } else {
                    Err(QlmError::InvalidInput(format!("dumbbell neck must lie in (1/3, 2/3], got {neck}")))
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedCase {
    pub case: Case,
    pub data: PhysicalSurfaceData,
    /// Time function of the surface when it is given as a surface in Minkowski space.
    pub own_tau: ScalarField,
    pub embedding: Option<EmbeddingR31>,
}

fn round_data(grid: &Arc<SphereGrid>, r: f64, h: f64, provenance: String) -> Result<PhysicalSurfaceData> {
    let h = ScalarField::constant(grid, h);
    PhysicalSurfaceData::new(MetricField::round(grid, r), h.clone(), CovectorField::zeros(grid), provenance)?
        .with_boundary(BoundaryData {
            k: h,
            tr_p: ScalarField::zeros(grid),
            p_e3: CovectorField::zeros(grid),
        })
}

pub fn generate(case: &Case, grid: &Arc<SphereGrid>) -> Result<GeneratedCase> {
    case.validate()?;
    let name = case.name();
    let zero = ScalarField::zeros(grid);
    let out = match *case {
        Case::RoundSphere { r } => GeneratedCase {
            case: case.clone(),
            data: round_data(grid, r, 2.0 / r, name)?,
            own_tau: zero.clone(),
            embedding: Some(EmbeddingR31::new(EmbeddingR3::round(grid, r), zero)?),
        },
        Case::BoostedSphere { r, rapidity } => {
            let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
            let spatial = EmbeddingR3::from_fn(grid, |t, p| [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * ch * t.cos()]);
            let tau = ScalarField::from_fn(grid, |t, _| r * sh * t.cos());
            GeneratedCase {
                case: case.clone(),
                data: round_data(grid, r, 2.0 / r, name)?,
                own_tau: tau.clone(),
                embedding: Some(EmbeddingR31::new(spatial, tau)?),
            }
        }
        Case::Ellipsoid { a, b, c } => {
            let n = grid.len();
            let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            let mut k = vec![0.0; n];
            for i in 0..n {
                let (t, p) = grid.coords(i);
                let (st, ct, sp, cp) = (t.sin(), t.cos(), p.sin(), p.cos());
                comps[0][i] = a * a * ct * ct * cp * cp + b * b * ct * ct * sp * sp + c * c * st * st;
                comps[1][i] = (b * b - a * a) * st * ct * sp * cp;
                comps[2][i] = st * st * (a * a * sp * sp + b * b * cp * cp);
                let x = [a * st * cp, b * st * sp, c * ct];
                let hh = (x[0] * x[0] / a.powi(4) + x[1] * x[1] / b.powi(4) + x[2] * x[2] / c.powi(4)).sqrt();
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                k[i] = (a * a + b * b + c * c - r2) / ((a * b * c).powi(2) * hh.powi(3));
            }
            let [c11, c12, c22] = comps;
            let sigma = MetricField::new(SymTensorField::new(grid, c11, c12, c22)?)?;
            let k = ScalarField::new(grid, k)?;
            let data = PhysicalSurfaceData::new(sigma, k.clone(), CovectorField::zeros(grid), name)?.with_boundary(
                BoundaryData {
                    k,
                    tr_p: zero.clone(),
                    p_e3: CovectorField::zeros(grid),
                },
            )?;
            let spatial = EmbeddingR3::from_fn(grid, |t, p| [a * t.sin() * p.cos(), b * t.sin() * p.sin(), c * t.cos()]);
            GeneratedCase {
                case: case.clone(),
                data,
                own_tau: zero.clone(),
                embedding: Some(EmbeddingR31::new(spatial, zero)?),
            }
        }
        Case::GraphOverSphere { r, profile } => {
            let tau = profile.field(grid);
            let x = EmbeddingR31::new(EmbeddingR3::round(grid, r), tau.clone())?;
            let mut data = minkowski_surface_data(&x, &name)?;
            // the surface lies in the slice t = T(x/|x|) whenever that slice is space-like
            let spacelike = (0..grid.len()).all(|i| {
                let d = profile.extension_gradient(x.spatial().point(i));
                d[0] * d[0] + d[1] * d[1] + d[2] * d[2] < 1.0
            });
            if spacelike {
                let (b, _) = boundary_data_in_slice(&x, |p| profile.extension_gradient(p))?;
                data = data.with_boundary(b)?;
            }
            GeneratedCase {
                case: case.clone(),
                data,
                own_tau: tau,
                embedding: Some(x),
            }
        }
        Case::SchwarzschildSphere { m, r } => GeneratedCase {
            case: case.clone(),
            data: round_data(grid, r, 2.0 / r * (1.0 - 2.0 * m / r).sqrt(), name)?,
            own_tau: zero,
            embedding: None,
        },
        Case::Dumbbell { neck } => {
            let nu = neck;
            let rho = |t: f64| t.sin() - nu * t.sin().powi(3);
            let drho = |t: f64| t.cos() * (1.0 - 3.0 * nu * t.sin().powi(2));
            let ddrho = |t: f64| -t.sin() - nu * (6.0 * t.sin() * t.cos().powi(2) - 3.0 * t.sin().powi(3));
            let n = grid.len();
            let mut k = vec![0.0; n];
            let mut g22 = vec![0.0; n];
            for i in 0..n {
                let (t, _) = grid.coords(i);
                let dz = (1.0 - drho(t).powi(2)).sqrt();
                k[i] = dz / rho(t) - ddrho(t) / dz;
                g22[i] = rho(t).powi(2);
            }
            let sigma = MetricField::new(SymTensorField::new(grid, vec![1.0; n], vec![0.0; n], g22)?)?;
            let k = ScalarField::new(grid, k)?;
            let data = PhysicalSurfaceData::new(sigma, k.clone(), CovectorField::zeros(grid), name)?.with_boundary(
                BoundaryData {
                    k,
                    tr_p: zero.clone(),
                    p_e3: CovectorField::zeros(grid),
                },
            )?;
            let z = dumbbell_height(nu);
            let spatial = EmbeddingR3::from_fn(grid, |t, p| [rho(t) * p.cos(), rho(t) * p.sin(), z(t)]);
            GeneratedCase {
                case: case.clone(),
                data,
                own_tau: zero.clone(),
                embedding: Some(EmbeddingR31::new(spatial, zero)?),
            }
        }
    };
    Ok(out)
}

/// Height function `z(θ) = ∫_θ^{π/2} √(1 − ρ'²)` of the dumbbell profile, by
/// Gauss–Legendre quadrature; odd about the equator.
fn dumbbell_height(nu: f64) -> impl Fn(f64) -> f64 {
    let (x, w) = crate::sphere::gauss_legendre(48);
    move |t: f64| {
        let (a, b) = (t, std::f64::consts::FRAC_PI_2);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        x.iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let s = mid + half * xi;
                let d = s.cos() * (1.0 - 3.0 * nu * s.sin().powi(2));
                wi * (1.0 - d * d).max(0.0).sqrt()
            })
            .sum::<f64>()
            * half
    }
}

/// Cases with a convex metric and admissible zero time function.
pub fn standard_suite() -> Vec<Case> {
    vec![
        Case::RoundSphere { r: 1.0 },
        Case::BoostedSphere { r: 1.0, rapidity: 0.5 },
        Case::Ellipsoid { a: 1.0, b: 1.1, c: 1.2 },
        Case::GraphOverSphere {
            r: 1.0,
            profile: TauProfile::Mix(0.1),
        },
        Case::SchwarzschildSphere { m: 1.0, r: 4.0 },
    ]
}
