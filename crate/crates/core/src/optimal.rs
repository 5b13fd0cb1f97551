//! Variation of the total mean curvature, the mass functional `Ξ` as a
//! function of the time function, its gradient, and a descent loop over `τ`.

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::PhysicalSurfaceData;
use crate::embed::{check_convexity_condition, theorem_b_from, EmbeddingR3, EmbeddingR31, WeylConfig};
use crate::energy::{frak_h, mean_zero, optimal_boost, quasi_local_mass, MassConfig, MassReport};
use crate::error::{QlmError, Result};
use crate::extrinsic::{extrinsic_r3, total_k_hat_via_projection, ExtrinsicDataR3};
use crate::sphere::sh::{random_field, ShBasis};
use crate::sphere::{
    divergence, gradient, hessian, integrate, lower, norm_sq, same_grid, tensor_divergence, ScalarField,
    SymTensorField,
};

/// `T^{ab} = Ĥ σ̂^{ab} − σ̂^{ac} σ̂^{bd} ĥ_cd`.
pub fn variation_tensor(ext: &ExtrinsicDataR3) -> SymTensorField {
    let n = ext.metric.grid().len();
    let mut c = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let [a, b, d] = ext.metric.inv_at(i);
        let [h11, h12, h22] = ext.h.at(i);
        // rows of σ̂^{-1} ĥ
        let m11 = a * h11 + b * h12;
        let m12 = a * h12 + b * h22;
        let m21 = b * h11 + d * h12;
        let m22 = b * h12 + d * h22;
        let k = ext.k_hat.values()[i];
        c[0][i] = k * a - (m11 * a + m12 * b);
        c[1][i] = k * b - (m11 * b + m12 * d);
        c[2][i] = k * d - (m21 * b + m22 * d);
    }
    SymTensorField::from_raw(ext.metric.grid(), c)
}

/// `½ ∫ T^{ab} δσ_ab dv̂`, the first variation of `∫ Ĥ dv̂` under `σ̂ → σ̂ + δσ`.
pub fn total_mean_curvature_variation(x_hat: &EmbeddingR3, delta_sigma: &SymTensorField) -> Result<f64> {
    if !same_grid(x_hat.grid(), delta_sigma.grid()) {
        return Err(QlmError::GridMismatch);
    }
    let ext = extrinsic_r3(x_hat)?;
    let t = variation_tensor(&ext);
    let vals = (0..x_hat.grid().len())
        .map(|i| {
            let [t11, t12, t22] = t.at(i);
            let [d11, d12, d22] = delta_sigma.at(i);
            0.5 * (t11 * d11 + 2.0 * t12 * d12 + t22 * d22)
        })
        .collect();
    integrate(&ext.metric, &ScalarField::new(x_hat.grid(), vals)?)
}

/// Max pointwise norm of `∇̂_a T^{ab}`.
pub fn variation_tensor_divergence(x_hat: &EmbeddingR3) -> Result<f64> {
    let ext = extrinsic_r3(x_hat)?;
    let div = tensor_divergence(&ext.metric, &variation_tensor(&ext));
    Ok(norm_sq(&ext.metric, &lower(&ext.metric, &div)).values().iter().fold(0.0f64, |a, b| a.max(b.sqrt())))
}

struct XiState {
    xi: f64,
    x: EmbeddingR31,
}

fn evaluate(data: &PhysicalSurfaceData, tau: &ScalarField, guess: Option<&EmbeddingR3>, weyl: &WeylConfig) -> Result<XiState> {
    let (x, _) = theorem_b_from(&data.sigma, tau, guess, weyl)?;
    let xi = total_k_hat_via_projection(x.spatial())? - frak_h(data, tau)?;
    Ok(XiState { xi, x })
}

/// `Ξ = ∫ k̂ dv̂ − 𝔥(Σ, i, τ)`.
pub fn xi_functional(data: &PhysicalSurfaceData, tau: &ScalarField, weyl: &WeylConfig) -> Result<f64> {
    Ok(evaluate(data, tau, None, weyl)?.xi)
}

/// Variational derivative of `Ξ` as a density against `dv_σ`, given the
/// reference embedding at `τ`.
fn gradient_density(data: &PhysicalSurfaceData, tau: &ScalarField, x: &EmbeddingR31) -> Result<ScalarField> {
    let sigma = &data.sigma;
    let g = sigma.grid();
    let ext = extrinsic_r3(x.spatial())?;
    let t = variation_tensor(&ext);
    let hess = hessian(sigma, tau)?;
    let (dtau, grad) = gradient(sigma, tau)?;
    let s = norm_sq(sigma, &dtau);
    let theta = optimal_boost(data, tau)?;
    let (_, grad_theta) = gradient(sigma, &theta)?;
    let v = crate::sphere::raise(sigma, &data.alpha_hat);
    let c: Vec<f64> = (0..g.len())
        .map(|i| theta.values()[i].cosh() * data.h_norm.values()[i] / (1.0 + s.values()[i]).sqrt())
        .collect();
    let w = grad.scale(&c).axpy(-1.0, &grad_theta).axpy(-1.0, &v);
    let div = divergence(sigma, &w)?;
    let vals = (0..g.len())
        .map(|i| {
            let [t11, t12, t22] = t.at(i);
            let [h11, h12, h22] = hess.at(i);
            -(t11 * h11 + 2.0 * t12 * h12 + t22 * h22) / (1.0 + s.values()[i]).sqrt() + div.values()[i]
        })
        .collect();
    ScalarField::new(g, vals)
}

#[derive(Debug, Clone)]
pub struct VariationReport {
    pub xi_value: f64,
    /// Left side of the Euler–Lagrange equation.
    pub el_residual: ScalarField,
    /// `δΞ/δτ` against `dv_σ`.
    pub grad_field: ScalarField,
    /// `∫ grad dv_σ / area`; zero up to discretization by shift invariance.
    pub grad_mean: f64,
    /// Max relative error of `∫ grad δτ` against central differences of `Ξ`.
    pub fd_check: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GradientConfig {
    pub weyl: WeylConfig,
    /// Number of random directions for the difference check; 0 skips it.
    pub fd_directions: usize,
    pub fd_step: f64,
    /// Highest harmonic degree of the random directions.
    pub fd_degree: usize,
    pub seed: u64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        GradientConfig {
            weyl: WeylConfig::default(),
            fd_directions: 5,
            fd_step: 1e-5,
            fd_degree: 4,
            seed: 42,
        }
    }
}

pub fn xi_gradient(data: &PhysicalSurfaceData, tau: &ScalarField, config: &GradientConfig) -> Result<VariationReport> {
    if !same_grid(data.sigma.grid(), tau.grid()) {
        return Err(QlmError::GridMismatch);
    }
    data.require_positive_mean_curvature()?;
    let state = evaluate(data, tau, None, &config.weyl)?;
    report_at(data, tau, &state, config)
}

fn report_at(data: &PhysicalSurfaceData, tau: &ScalarField, state: &XiState, config: &GradientConfig) -> Result<VariationReport> {
    let grad = gradient_density(data, tau, &state.x)?;
    let grad_mean = integrate(&data.sigma, &grad)? / data.sigma.area();
    let fd_check = if config.fd_directions > 0 {
        Some(fd_check(data, tau, &grad, state, config)?)
    } else {
        None
    };
    Ok(VariationReport {
        xi_value: state.xi,
        el_residual: grad.clone(),
        grad_field: grad,
        grad_mean,
        fd_check,
    })
}

fn fd_check(
    data: &PhysicalSurfaceData,
    tau: &ScalarField,
    grad: &ScalarField,
    state: &XiState,
    config: &GradientConfig,
) -> Result<f64> {
    let g = data.sigma.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let degree = config.fd_degree.min(g.max_resolved_degree()).max(1);
    let h = config.fd_step;
    let mut worst = 0.0f64;
    for _ in 0..config.fd_directions {
        let dir = random_field(g, degree, 1.0, &mut rng)?;
        let plus = tau.zip_map(&dir, |a, b| a + h * b);
        let minus = tau.zip_map(&dir, |a, b| a - h * b);
        let guess = Some(state.x.spatial());
        let fd = (evaluate(data, &plus, guess, &config.weyl)?.xi - evaluate(data, &minus, guess, &config.weyl)?.xi) / (2.0 * h);
        let an = integrate(&data.sigma, &grad.zip_map(&dir, |a, b| a * b))?;
        let rel = (an - fd).abs() / fd.abs().max(f64::MIN_POSITIVE);
        debug!("gradient check: analytic {an:e}, difference {fd:e}, relative {rel:e}");
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    /// Stop once `‖δΞ/δτ‖∞` is below this.
    pub gtol: f64,
    pub max_iterations: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_halvings: usize,
    /// Smooth the gradient by `(1 + l(l+1))⁻²` before stepping.
    pub sobolev: bool,
    pub weyl: WeylConfig,
    pub mass: MassConfig,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            gtol: 1e-6,
            max_iterations: 100,
            armijo: 1e-4,
            max_halvings: 30,
            sobolev: true,
            weyl: WeylConfig::default(),
            mass: MassConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub tau: ScalarField,
    pub mass: MassReport,
    pub variation: VariationReport,
    /// `Ξ` at every accepted iterate, starting with `τ₀`.
    pub xi_history: Vec<f64>,
    pub grad_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub rejected_for_convexity: usize,
}

/// Descent direction: the gradient weighted by the `σ` density, smoothed in
/// the round harmonic basis, with the constant mode removed.
fn direction(data: &PhysicalSurfaceData, grad: &ScalarField, basis: Option<&ShBasis>) -> Result<ScalarField> {
    let g = data.sigma.grid();
    match basis {
        None => mean_zero(&data.sigma, grad),
        Some(b) => {
            let weighted: Vec<f64> = (0..g.len())
                .map(|i| grad.values()[i] * data.sigma.density()[i])
                .collect();
            let mut c = b.analyze(&weighted);
            for (k, ck) in c.iter_mut().enumerate() {
                let l = b.degree_of(k) as f64;
                *ck /= (1.0 + l * (l + 1.0)).powi(2);
            }
            ScalarField::new(g, b.synthesize(&c, false).value)
        }
    }
}

pub fn minimize_tau(data: &PhysicalSurfaceData, tau0: &ScalarField, config: &OptimizeConfig) -> Result<OptimizeOutcome> {
    if !same_grid(data.sigma.grid(), tau0.grid()) {
        return Err(QlmError::GridMismatch);
    }
    data.require_positive_mean_curvature()?;
    let g = data.sigma.grid().clone();
    let mut tau = mean_zero(&data.sigma, tau0)?;
    let conv = check_convexity_condition(&data.sigma, &tau)?;
    if !conv.holds {
        return Err(QlmError::Admissibility(format!(
            "initial τ violates the convexity condition (minimum {:e})",
            conv.min_value
        )));
    }
    let basis = if config.sobolev {
        Some(ShBasis::new(&g, 1, g.max_resolved_degree())?)
    } else {
        None
    };
    let mut state = evaluate(data, &tau, None, &config.weyl)?;
    let mut xi_history = vec![state.xi];
    let mut grad_history = Vec::new();
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut rejected_for_convexity = 0;
    while iterations < config.max_iterations {
        let grad = gradient_density(data, &tau, &state.x)?;
        let gnorm = grad.max_abs();
        grad_history.push(gnorm);
        if gnorm <= config.gtol {
            converged = true;
            break;
        }
        let d = direction(data, &grad, basis.as_ref())?;
        let slope = integrate(&data.sigma, &grad.zip_map(&d, |a, b| a * b))?;
        if !(slope > 0.0) {
            debug!("no descent along the smoothed gradient (slope {slope:e})");
            break;
        }
        let mut accepted = None;
        let mut only_convexity = true;
        let mut t = step;
        for _ in 0..config.max_halvings {
            let trial = mean_zero(&data.sigma, &tau.zip_map(&d, |a, b| a - t * b))?;
            if !check_convexity_condition(&data.sigma, &trial)?.holds {
                rejected_for_convexity += 1;
                t *= 0.5;
                continue;
            }
            match evaluate(data, &trial, Some(state.x.spatial()), &config.weyl) {
                Ok(s) if s.xi <= state.xi - config.armijo * t * slope => {
                    accepted = Some((trial, s));
                    break;
                }
                Ok(_) => only_convexity = false,
                Err(e) => {
                    debug!("trial step rejected: {e}");
                    only_convexity = false;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, s)) => {
                tau = trial;
                state = s;
                xi_history.push(state.xi);
                iterations += 1;
                step = (2.0 * t).min(1e3);
                debug!("iteration {iterations}: Ξ = {:e}, ‖grad‖∞ = {gnorm:e}, step {t:e}", state.xi);
            }
            None if only_convexity => {
                return Err(QlmError::AdmissibilityBoundary(format!(
                    "every trial step left the convexity region after {iterations} iteration(s), Ξ = {:e}",
                    state.xi
                )));
            }
            None => {
                debug!("line search failed at ‖grad‖∞ = {gnorm:e}");
                break;
            }
        }
    }
    info!(
        "τ descent: {iterations} iteration(s), Ξ = {:e}, converged = {converged}",
        state.xi
    );
    let variation = report_at(
        data,
        &tau,
        &state,
        &GradientConfig {
            weyl: config.weyl.clone(),
            fd_directions: 0,
            ..GradientConfig::default()
        },
    )?;
    let mass = quasi_local_mass(data, &tau, &config.mass)?;
    Ok(OptimizeOutcome {
        tau,
        mass,
        variation,
        xi_history,
        grad_history,
        iterations,
        converged,
        rejected_for_convexity,
    })
}
