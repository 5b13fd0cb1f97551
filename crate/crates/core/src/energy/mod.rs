//! Generalized mean curvature, the frame-minimized energy `𝔥`, admissibility
//! and the quasi-local mass at a fixed time function.

use std::f64::consts::PI;

use crate::data::PhysicalSurfaceData;
use crate::embed::{check_convexity_condition, theorem_b, EmbeddingR31, WeylConfig, WeylSolveReport};
use crate::error::{QlmError, Result};
use crate::extrinsic::{extrinsic_r31, total_k_hat_via_projection};
use crate::jang::{boundary_expression, check_gradient_condition};
use crate::sphere::{differential, gradient, integrate, laplacian, norm_sq, pair, same_grid, ScalarField};

fn ensure_grid(data: &PhysicalSurfaceData, f: &ScalarField) -> Result<()> {
    if same_grid(data.sigma.grid(), f.grid()) {
        Ok(())
    } else {
        Err(QlmError::GridMismatch)
    }
}

/// `h = √(1+|∇τ|²) cosh φ |H| − α_{ê₃}(∇τ) − ∇τ·∇φ` for the frame
/// `e₃ = cosh φ ê₃ − sinh φ ê₄`.
pub fn generalized_mean_curvature(
    data: &PhysicalSurfaceData,
    tau: &ScalarField,
    phi: &ScalarField,
) -> Result<ScalarField> {
    ensure_grid(data, tau)?;
    ensure_grid(data, phi)?;
    data.require_positive_mean_curvature()?;
    let (dtau, grad) = gradient(&data.sigma, tau)?;
    let gs = norm_sq(&data.sigma, &dtau);
    let a = pair(&data.alpha_hat, &grad);
    let dphi = pair(&differential(phi), &grad);
    let n = data.sigma.grid().len();
    let vals = (0..n)
        .map(|i| {
            (1.0 + gs.values()[i]).sqrt() * phi.values()[i].cosh() * data.h_norm.values()[i]
                - a.values()[i]
                - dphi.values()[i]
        })
        .collect();
    ScalarField::new(data.sigma.grid(), vals)
}

/// `φ* = asinh(−Δτ / (|H| √(1+|∇τ|²)))`.
pub fn optimal_boost(data: &PhysicalSurfaceData, tau: &ScalarField) -> Result<ScalarField> {
    ensure_grid(data, tau)?;
    data.require_positive_mean_curvature()?;
    let lap = laplacian(&data.sigma, tau)?;
    let gs = norm_sq(&data.sigma, &differential(tau));
    Ok(crate::extrinsic::boost_angle(&data.h_norm, &lap, &gs))
}

/// Integrand of `𝔥` in closed form.
pub fn frak_h_integrand(data: &PhysicalSurfaceData, tau: &ScalarField) -> Result<ScalarField> {
    let phi = optimal_boost(data, tau)?;
    let lap = laplacian(&data.sigma, tau)?;
    let (dtau, grad) = gradient(&data.sigma, tau)?;
    let gs = norm_sq(&data.sigma, &dtau);
    let a = pair(&data.alpha_hat, &grad);
    let dphi = pair(&differential(&phi), &grad);
    let n = data.sigma.grid().len();
    let vals = (0..n)
        .map(|i| {
            let (l, h) = (lap.values()[i], data.h_norm.values()[i]);
            (l * l + h * h * (1.0 + gs.values()[i])).sqrt() - dphi.values()[i] - a.values()[i]
        })
        .collect();
    ScalarField::new(data.sigma.grid(), vals)
}

/// `𝔥(Σ, i, τ)`.
pub fn frak_h(data: &PhysicalSurfaceData, tau: &ScalarField) -> Result<f64> {
    integrate(&data.sigma, &frak_h_integrand(data, tau)?)
}

/// Induced data `(σ, |H₀|, α_{e₃^{H₀}})` of a surface in Minkowski space.
pub fn minkowski_surface_data(x: &EmbeddingR31, provenance: &str) -> Result<PhysicalSurfaceData> {
    let ext = extrinsic_r31(x)?;
    PhysicalSurfaceData::new(ext.sigma, ext.h0_norm, ext.alpha_h0, provenance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagState {
    Holds,
    Fails,
    Unknown,
}

/// How a flag was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagBasis {
    /// Direct evaluation of the defining condition.
    Certified,
    /// A sufficient condition was checked; failure leaves the flag unknown.
    SufficientCondition,
    /// Evaluated with a stand-in for unavailable data.
    Proxy,
}

#[derive(Debug, Clone)]
pub struct Flag {
    pub state: FlagState,
    pub basis: FlagBasis,
    pub margin: Option<f64>,
    pub note: String,
}

impl Flag {
    fn decided(holds: bool, basis: FlagBasis, margin: f64, note: &str) -> Flag {
        Flag {
            state: if holds { FlagState::Holds } else { FlagState::Fails },
            basis,
            margin: Some(margin),
            note: note.to_string(),
        }
    }

    fn unknown(basis: FlagBasis, margin: Option<f64>, note: &str) -> Flag {
        Flag {
            state: FlagState::Unknown,
            basis,
            margin,
            note: note.to_string(),
        }
    }

    pub fn holds(&self) -> bool {
        self.state == FlagState::Holds
    }
}

#[derive(Debug, Clone)]
pub struct Admissibility {
    pub convexity: Flag,
    pub jang_solvable: Flag,
    pub positive_h: Flag,
}

impl Admissibility {
    pub fn flags(&self) -> [(&'static str, &Flag); 3] {
        [
            ("convexity", &self.convexity),
            ("jang_solvable", &self.jang_solvable),
            ("positive_h", &self.positive_h),
        ]
    }
}

/// Outward normal derivative `f₃` of a solution of Jang's equation with
/// boundary value `τ`.
#[derive(Debug, Clone)]
pub struct JangCertificate {
    pub f3: ScalarField,
}

pub fn check_admissibility(
    data: &PhysicalSurfaceData,
    tau: &ScalarField,
    certificate: Option<&JangCertificate>,
) -> Result<Admissibility> {
    ensure_grid(data, tau)?;
    let conv = check_convexity_condition(&data.sigma, tau)?;
    let convexity = Flag::decided(conv.holds, FlagBasis::Certified, conv.min_value, "min of K + det(∇²τ)/(1+|∇τ|²)");

    let jang_solvable = match (certificate, &data.boundary) {
        (Some(_), _) => Flag {
            state: FlagState::Holds,
            basis: FlagBasis::Certified,
            margin: None,
            note: "solution supplied".into(),
        },
        (None, Some(b)) => {
            let cond = check_gradient_condition(&b.k, &b.tr_p)?;
            if cond.holds {
                Flag {
                    state: FlagState::Holds,
                    basis: FlagBasis::SufficientCondition,
                    margin: Some(cond.margin),
                    note: "k > |tr P|".into(),
                }
            } else {
                Flag::unknown(FlagBasis::SufficientCondition, Some(cond.margin), "k > |tr P| fails; solvability undecided")
            }
        }
        (None, None) => Flag::unknown(FlagBasis::SufficientCondition, None, "no boundary data"),
    };

    let positive_h = match (certificate, &data.boundary) {
        (Some(cert), Some(_)) => {
            let b = boundary_expression(data, tau, &cert.f3)?;
            let m = b.boundary_expression.min();
            Flag::decided(m > 0.0, FlagBasis::Certified, m, "Jang frame")
        }
        (Some(_), None) => Flag::unknown(FlagBasis::Certified, None, "boundary data missing for the Jang frame"),
        (None, _) => {
            if data.h_norm.min() > 0.0 {
                let phi = optimal_boost(data, tau)?;
                let m = generalized_mean_curvature(data, tau, &phi)?.min();
                Flag::decided(m > 0.0, FlagBasis::Proxy, m, "optimal frame used in place of the Jang frame")
            } else {
                Flag::decided(false, FlagBasis::Proxy, data.h_norm.min(), "|H| not positive")
            }
        }
    };

    Ok(Admissibility {
        convexity,
        jang_solvable,
        positive_h,
    })
}

#[derive(Debug, Clone)]
pub struct MassConfig {
    pub g: f64,
    pub weyl: WeylConfig,
    /// Relative tolerance between the two evaluations of the reference energy.
    pub identity_tol: f64,
    /// Shift `τ` to zero mean before use.
    pub mean_zero_tau: bool,
}

impl Default for MassConfig {
    fn default() -> Self {
        MassConfig {
            g: 1.0,
            weyl: WeylConfig::default(),
            identity_tol: 1e-6,
            mean_zero_tau: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MassReport {
    /// `𝔥(Σ, i₀, τ)` as `∫ k̂ dv̂` of the projected reference surface.
    pub reference_energy: f64,
    /// The same quantity from the closed form on the reference data.
    pub reference_energy_check: f64,
    pub physical_energy: f64,
    pub mass: f64,
    pub g: f64,
    pub tau_used: ScalarField,
    pub admissibility: Admissibility,
    pub weyl: WeylSolveReport,
    pub reference: EmbeddingR31,
}

/// Area-weighted mean subtracted.
pub fn mean_zero(sigma: &crate::sphere::MetricField, tau: &ScalarField) -> Result<ScalarField> {
    let mean = integrate(sigma, tau)? / sigma.area();
    Ok(tau.map(|v| v - mean))
}

pub fn quasi_local_mass(data: &PhysicalSurfaceData, tau: &ScalarField, config: &MassConfig) -> Result<MassReport> {
    ensure_grid(data, tau)?;
    if !(config.g > 0.0) {
        return Err(QlmError::InvalidInput("G must be positive".into()));
    }
    data.require_positive_mean_curvature()?;
    let tau = if config.mean_zero_tau {
        mean_zero(&data.sigma, tau)?
    } else {
        tau.clone()
    };
    let admissibility = check_admissibility(data, &tau, None)?;
    if !admissibility.convexity.holds() {
        return Err(QlmError::Admissibility(format!(
            "convexity condition fails (minimum {:e})",
            admissibility.convexity.margin.unwrap_or(f64::NAN)
        )));
    }
    let (x, weyl) = theorem_b(&data.sigma, &tau, &config.weyl)?;
    let reference_energy = total_k_hat_via_projection(x.spatial())?;
    let reference_data = minkowski_surface_data(&x, "reference")?;
    let reference_energy_check = frak_h(&reference_data, x.time())?;
    let rel = (reference_energy - reference_energy_check).abs() / reference_energy.abs().max(f64::MIN_POSITIVE);
    if rel > config.identity_tol {
        return Err(QlmError::InternalConsistency(format!(
            "reference energy {reference_energy} vs closed form {reference_energy_check} (relative {rel:e})"
        )));
    }
    let physical_energy = frak_h(data, &tau)?;
    let mass = (reference_energy - physical_energy) / (8.0 * PI * config.g);
    Ok(MassReport {
        reference_energy,
        reference_energy_check,
        physical_energy,
        mass,
        g: config.g,
        tau_used: tau,
        admissibility,
        weyl,
        reference: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{CovectorField, MetricField, SphereGrid};

    fn round_data(r: f64) -> PhysicalSurfaceData {
        let g = SphereGrid::new(12, 24).unwrap();
        PhysicalSurfaceData::new(
            MetricField::round(&g, r),
            ScalarField::constant(&g, 2.0 / r),
            CovectorField::zeros(&g),
            "round",
        )
        .unwrap()
    }

    #[test]
    fn trivial_tau_gives_liu_yau_integrand() {
        let d = round_data(1.5);
        let g = d.sigma.grid().clone();
        for tau in [ScalarField::zeros(&g), ScalarField::constant(&g, 0.7)] {
            let phi = optimal_boost(&d, &tau).unwrap();
            assert!(phi.max_abs() < 1e-12);
            let h = generalized_mean_curvature(&d, &tau, &ScalarField::zeros(&g)).unwrap();
            assert!(h.values().iter().all(|v| (v - 2.0 / 1.5).abs() < 1e-12));
        }
        assert!((frak_h(&d, &ScalarField::zeros(&g)).unwrap() - 8.0 * PI * 1.5).abs() < 1e-9);
    }

    #[test]
    fn optimal_boost_formula() {
        let d = round_data(1.0);
        let g = d.sigma.grid().clone();
        let tau = ScalarField::from_fn(&g, |t, _| 0.1 * t.cos());
        let phi = optimal_boost(&d, &tau).unwrap();
        for i in 0..g.len() {
            let (t, _) = g.coords(i);
            let expect = (0.2 * t.cos() / (2.0 * (1.0 + 0.01 * t.sin().powi(2)).sqrt())).asinh();
            assert!((phi.values()[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_generalized_mean_curvature_at_optimum() {
        let d = round_data(1.0);
        let g = d.sigma.grid().clone();
        let tau = ScalarField::from_fn(&g, |t, p| 0.1 * t.cos() + 0.05 * t.sin() * p.sin());
        let phi = optimal_boost(&d, &tau).unwrap();
        let a = integrate(&d.sigma, &generalized_mean_curvature(&d, &tau, &phi).unwrap()).unwrap();
        let b = frak_h(&d, &tau).unwrap();
        assert!((a - b).abs() < 1e-10 * b.abs());
    }

    #[test]
    fn nonpositive_mean_curvature_is_rejected() {
        let g = SphereGrid::new(12, 24).unwrap();
        let d = PhysicalSurfaceData::new(
            MetricField::round(&g, 1.0),
            ScalarField::zeros(&g),
            CovectorField::zeros(&g),
            "bad",
        )
        .unwrap();
        assert!(optimal_boost(&d, &ScalarField::zeros(&g)).is_err());
    }
}
