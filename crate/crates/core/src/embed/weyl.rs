//! Euclidean isometric embedding of a positively curved metric.
//!
//! The coordinates are expanded in real spherical harmonics of degree
//! `1..=L` and fitted by damped Gauss–Newton to the node-wise metric
//! mismatch. Linear steps are solved matrix-free by CGLS. The target metric
//! is approached along `(1 − s) σ_start + s σ̂`, with `σ_start` the metric of
//! the initial guess (the equal-area round sphere by default).

use std::sync::Arc;

use log::debug;

use super::{apply_gauge, EmbeddingR3};
use crate::error::{QlmError, Result};
use crate::sphere::sh::{ShBasis, Synthesis};
use crate::sphere::{gauss_curvature, same_grid, MetricField, ScalarField, SphereGrid};

#[derive(Debug, Clone)]
pub struct WeylConfig {
    /// Target for the max coordinate-component metric mismatch, relative to `max |σ̂|`.
    pub tol: f64,
    pub max_continuation_steps: usize,
    /// Highest harmonic degree; defaults to `min(n_colat, n_lon/2) − 2`.
    pub max_degree: Option<usize>,
    /// Gauss–Newton iterations per continuation step.
    pub max_iterations: usize,
    pub max_cg_iterations: usize,
    /// Keep iterating after `tol` is met until the steps stagnate.
    pub polish: bool,
}

impl Default for WeylConfig {
    fn default() -> Self {
        WeylConfig {
            tol: 1e-8,
            max_continuation_steps: 64,
            max_degree: None,
            max_iterations: 40,
            max_cg_iterations: 600,
            polish: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeylSolveReport {
    pub residual_inf: f64,
    pub iterations: usize,
    pub continuation_steps: usize,
    pub gauge: String,
    pub degree: usize,
}

/// Loose tolerance for intermediate continuation targets.
const INTERMEDIATE_TOL: f64 = 1e-6;
/// Intermediate targets that the basis cannot resolve to `INTERMEDIATE_TOL`
/// are still accepted below this residual.
const STAGNATION_ACCEPT: f64 = 1e-3;

struct Fitter {
    basis: ShBasis,
    scale: Vec<f64>,
    weight: Vec<f64>,
    sin: Vec<f64>,
    norm: f64,
    max_cg: usize,
}

enum Outcome {
    Converged(usize),
    /// Least-squares minimum reached above the tolerance.
    Stagnated(f64),
    Failed,
}

struct State {
    coeffs: [Vec<f64>; 3],
    synth: [Synthesis; 3],
    residual: Vec<f64>,
    cost: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Fitter {
    fn new(grid: &Arc<SphereGrid>, degree: usize, norm: f64, max_cg: usize) -> Result<Self> {
        let basis = ShBasis::new(grid, 1, degree)?;
        let scale = basis.modes().iter().map(|m| 1.0 / m.l as f64).collect();
        let weight = grid.quad_weights().iter().map(|w| w.sqrt()).collect();
        let sin = (0..grid.len()).map(|i| grid.coords(i).0.sin()).collect();
        Ok(Fitter {
            basis,
            scale,
            weight,
            sin,
            norm,
            max_cg,
        })
    }

    fn n(&self) -> usize {
        self.weight.len()
    }

    fn nb(&self) -> usize {
        self.basis.len()
    }

    fn state(&self, coeffs: [Vec<f64>; 3], target: &[Vec<f64>; 3]) -> State {
        let synth = [
            self.basis.synthesize(&coeffs[0], true),
            self.basis.synthesize(&coeffs[1], true),
            self.basis.synthesize(&coeffs[2], true),
        ];
        let n = self.n();
        let mut residual = vec![0.0; 3 * n];
        for i in 0..n {
            let (mut e, mut f, mut g) = (0.0, 0.0, 0.0);
            for s in &synth {
                let (xt, xp) = (s.d_colat[i], s.d_lon[i]);
                e += xt * xt;
                f += xt * xp;
                g += xp * xp;
            }
            let (w, sn) = (self.weight[i] / self.norm, self.sin[i]);
            residual[i] = w * (e - target[0][i]);
            residual[n + i] = w * std::f64::consts::SQRT_2 * (f - target[1][i]) / sn;
            residual[2 * n + i] = w * (g - target[2][i]) / (sn * sn);
        }
        let cost = dot(&residual, &residual);
        State {
            coeffs,
            synth,
            residual,
            cost,
        }
    }

    /// Max coordinate-component mismatch relative to the metric scale.
    fn residual_inf(&self, st: &State, target: &[Vec<f64>; 3]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n() {
            let (mut e, mut f, mut g) = (0.0, 0.0, 0.0);
            for s in &st.synth {
                let (xt, xp) = (s.d_colat[i], s.d_lon[i]);
                e += xt * xt;
                f += xt * xp;
                g += xp * xp;
            }
            worst = worst
                .max((e - target[0][i]).abs())
                .max((f - target[1][i]).abs())
                .max((g - target[2][i]).abs());
        }
        worst / self.norm
    }

    /// `J v` for scaled coefficient perturbations `v = [vx | vy | vz]`.
    fn apply(&self, st: &State, v: &[f64]) -> Vec<f64> {
        let (n, nb) = (self.n(), self.nb());
        let mut out = vec![0.0; 3 * n];
        for c in 0..3 {
            let dc: Vec<f64> = v[c * nb..(c + 1) * nb].iter().zip(&self.scale).map(|(a, s)| a * s).collect();
            let d = self.basis.synthesize(&dc, true);
            let s = &st.synth[c];
            for i in 0..n {
                let (xt, xp) = (s.d_colat[i], s.d_lon[i]);
                out[i] += 2.0 * xt * d.d_colat[i];
                out[n + i] += xt * d.d_lon[i] + xp * d.d_colat[i];
                out[2 * n + i] += 2.0 * xp * d.d_lon[i];
            }
        }
        for i in 0..n {
            let (w, sn) = (self.weight[i] / self.norm, self.sin[i]);
            out[i] *= w;
            out[n + i] *= w * std::f64::consts::SQRT_2 / sn;
            out[2 * n + i] *= w / (sn * sn);
        }
        out
    }

    /// `Jᵀ y`.
    fn apply_t(&self, st: &State, y: &[f64]) -> Vec<f64> {
        let (n, nb) = (self.n(), self.nb());
        let mut a1 = vec![0.0; n];
        let mut a2 = vec![0.0; n];
        let mut a3 = vec![0.0; n];
        for i in 0..n {
            let (w, sn) = (self.weight[i] / self.norm, self.sin[i]);
            a1[i] = w * y[i];
            a2[i] = w * std::f64::consts::SQRT_2 * y[n + i] / sn;
            a3[i] = w * y[2 * n + i] / (sn * sn);
        }
        let mut out = vec![0.0; 3 * nb];
        let mut gt = vec![0.0; n];
        let mut gp = vec![0.0; n];
        for c in 0..3 {
            let s = &st.synth[c];
            for i in 0..n {
                let (xt, xp) = (s.d_colat[i], s.d_lon[i]);
                gt[i] = 2.0 * a1[i] * xt + a2[i] * xp;
                gp[i] = a2[i] * xt + 2.0 * a3[i] * xp;
            }
            let g = self.basis.synthesize_adjoint(&[], &gt, &gp);
            for (k, v) in g.iter().enumerate() {
                out[c * nb + k] = v * self.scale[k];
            }
        }
        out
    }

    /// Damped least-squares step `min ‖J d + r‖² + λ‖d‖²` by CGLS, in scaled variables.
    fn cgls(&self, st: &State, lambda: f64, eta: f64) -> (Vec<f64>, usize) {
        let m = 3 * self.nb();
        let mut x = vec![0.0; m];
        let mut rr: Vec<f64> = st.residual.iter().map(|v| -v).collect();
        let mut s = self.apply_t(st, &rr);
        let mut p = s.clone();
        let mut gamma = dot(&s, &s);
        let gamma0 = gamma;
        if gamma0 == 0.0 {
            return (x, 0);
        }
        let mut it = 0;
        while it < self.max_cg {
            it += 1;
            let q = self.apply(st, &p);
            let delta = dot(&q, &q) + lambda * dot(&p, &p);
            if delta <= 0.0 {
                break;
            }
            let alpha = gamma / delta;
            for k in 0..m {
                x[k] += alpha * p[k];
            }
            for (r, qv) in rr.iter_mut().zip(&q) {
                *r -= alpha * qv;
            }
            s = self.apply_t(st, &rr);
            if lambda > 0.0 {
                for k in 0..m {
                    s[k] -= lambda * x[k];
                }
            }
            let gamma_new = dot(&s, &s);
            if gamma_new <= eta * eta * gamma0 {
                break;
            }
            let beta = gamma_new / gamma;
            gamma = gamma_new;
            for k in 0..m {
                p[k] = s[k] + beta * p[k];
            }
        }
        (x, it)
    }

    fn step(&self, st: &State, dir: &[f64], t: f64, target: &[Vec<f64>; 3]) -> State {
        let nb = self.nb();
        let mut coeffs = st.coeffs.clone();
        for (c, cf) in coeffs.iter_mut().enumerate() {
            for k in 0..nb {
                cf[k] += t * dir[c * nb + k] * self.scale[k];
            }
        }
        self.state(coeffs, target)
    }

    /// Gauss–Newton with line search and Levenberg fallback.
    fn newton(&self, st: &mut State, target: &[Vec<f64>; 3], tol: f64, polish: bool, max_iter: usize) -> Outcome {
        let mut lambda = 0.0;
        let mut slow = 0;
        let mut met = self.residual_inf(st, target) <= tol;
        if met && !polish {
            return Outcome::Converged(0);
        }
        for it in 1..=max_iter {
            let (dir, cg_its) = self.cgls(st, lambda, 1e-4);
            let mut accepted = None;
            let mut t = 1.0;
            for _ in 0..8 {
                let trial = self.step(st, &dir, t, target);
                if trial.cost.is_finite() && trial.cost < st.cost {
                    accepted = Some(trial);
                    break;
                }
                t *= 0.5;
            }
            let Some(trial) = accepted else {
                if met {
                    return Outcome::Converged(it);
                }
                lambda = if lambda == 0.0 { 1e-6 } else { lambda * 10.0 };
                if lambda > 1e6 {
                    return Outcome::Stagnated(self.residual_inf(st, target));
                }
                continue;
            };
            let ratio = trial.cost / st.cost;
            let coeff_max = st.coeffs.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            let step_max = dir
                .iter()
                .enumerate()
                .fold(0.0f64, |a, (k, d)| a.max((t * d * self.scale[k % self.nb()]).abs()));
            *st = trial;
            lambda *= 0.1;
            if lambda < 1e-12 {
                lambda = 0.0;
            }
            let resid = self.residual_inf(st, target);
            met = resid <= tol;
            debug!("weyl iteration {it}: cost {:.3e}, residual {resid:.3e}, step {step_max:.3e}, cg {cg_its}", st.cost);
            if met && (!polish || step_max <= 1e-12 * coeff_max || ratio > 0.9) {
                return Outcome::Converged(it);
            }
            slow = if ratio > 0.98 { slow + 1 } else { 0 };
            if !met && slow >= 3 {
                return Outcome::Stagnated(resid);
            }
        }
        if met {
            Outcome::Converged(max_iter)
        } else {
            Outcome::Failed
        }
    }

    fn embedding(&self, st: &State) -> EmbeddingR3 {
        let g = self.basis.grid();
        EmbeddingR3 {
            coords: [
                ScalarField::from_raw(g, st.synth[0].value.clone()),
                ScalarField::from_raw(g, st.synth[1].value.clone()),
                ScalarField::from_raw(g, st.synth[2].value.clone()),
            ],
        }
    }
}

fn default_degree(grid: &SphereGrid) -> usize {
    (grid.n_colat().min(grid.n_lon() / 2) - 2).min(grid.max_resolved_degree())
}

/// Solves from the equal-area round sphere.
pub fn solve_weyl(sigma_hat: &MetricField, config: &WeylConfig) -> Result<(EmbeddingR3, WeylSolveReport)> {
    let r = (sigma_hat.area() / (4.0 * std::f64::consts::PI)).sqrt();
    let guess = EmbeddingR3::round(sigma_hat.grid(), r);
    solve_weyl_from(sigma_hat, &guess, config)
}

/// Solves from an arbitrary initial embedding.
pub fn solve_weyl_from(
    sigma_hat: &MetricField,
    guess: &EmbeddingR3,
    config: &WeylConfig,
) -> Result<(EmbeddingR3, WeylSolveReport)> {
    let grid = sigma_hat.grid();
    if !same_grid(grid, guess.grid()) {
        return Err(QlmError::GridMismatch);
    }
    if !(config.tol > 0.0) {
        return Err(QlmError::InvalidInput("Weyl tolerance must be positive".into()));
    }
    let k = gauss_curvature(sigma_hat);
    let worst = k.argmin();
    if k.values()[worst] <= 0.0 {
        return Err(QlmError::Precondition(format!(
            "Gauss curvature of the projected metric is {:e} at {}",
            k.values()[worst],
            grid.location(worst)
        )));
    }
    let degree = config.max_degree.unwrap_or_else(|| default_degree(grid));
    let target_tensor = sigma_hat.tensor();
    let norm = target_tensor.max_abs();
    let fitter = Fitter::new(grid, degree, norm, config.max_cg_iterations)?;

    let start_tensor = guess.induced_tensor();
    let coeffs = [
        fitter.basis.analyze(guess.coord(0).values()),
        fitter.basis.analyze(guess.coord(1).values()),
        fitter.basis.analyze(guess.coord(2).values()),
    ];
    let blend = |s: f64| -> [Vec<f64>; 3] {
        let mut out = [Vec::new(), Vec::new(), Vec::new()];
        for (c, o) in out.iter_mut().enumerate() {
            *o = start_tensor
                .comp(c)
                .iter()
                .zip(target_tensor.comp(c))
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect();
        }
        out
    };
    let final_target = blend(1.0);
    let mut st = fitter.state(coeffs, &final_target);

    let (mut s, mut ds) = (0.0f64, 1.0f64);
    let (mut steps, mut iterations) = (0usize, 0usize);
    loop {
        if steps >= config.max_continuation_steps {
            let residual = fitter.residual_inf(&st, &final_target);
            return Err(QlmError::WeylStall {
                steps,
                s,
                residual,
                best: Box::new(fitter.embedding(&st)),
            });
        }
        steps += 1;
        let s_try = (s + ds).min(1.0);
        let last = s_try >= 1.0;
        let target = if last { final_target.clone() } else { blend(s_try) };
        let mut trial = fitter.state(st.coeffs.clone(), &target);
        let tol = if last { config.tol } else { config.tol.max(INTERMEDIATE_TOL) };
        let outcome = fitter.newton(&mut trial, &target, tol, last && config.polish, config.max_iterations);
        match outcome {
            Outcome::Converged(its) => {
                debug!("continuation step {steps}: s = {s_try:.4} reached in {its} iteration(s)");
                iterations += its;
                st = trial;
                s = s_try;
                if last {
                    break;
                }
                ds = (2.0 * ds).min(1.0);
            }
            Outcome::Stagnated(resid) if !last && resid <= STAGNATION_ACCEPT => {
                debug!("continuation step {steps}: s = {s_try:.4} accepted at residual {resid:.3e}");
                st = trial;
                s = s_try;
                ds = (2.0 * ds).min(1.0);
            }
            Outcome::Stagnated(resid) if last => {
                return Err(QlmError::WeylStall {
                    steps,
                    s: s_try,
                    residual: resid,
                    best: Box::new(fitter.embedding(&trial)),
                });
            }
            _ => {
                debug!("continuation step {steps}: s = {s_try:.4} failed");
                ds *= 0.5;
            }
        }
    }
    st = fitter.state(st.coeffs, &final_target);
    let raw = fitter.embedding(&st);
    let (x_hat, gauge) = apply_gauge(&raw)?;
    let residual_inf = super::tensor_deviation(&x_hat.induced_tensor(), target_tensor) / norm;
    Ok((
        x_hat,
        WeylSolveReport {
            residual_inf,
            iterations,
            continuation_steps: steps,
            gauge,
            degree,
        },
    ))
}
