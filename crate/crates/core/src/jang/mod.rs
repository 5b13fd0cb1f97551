//! Jang's equation on spherically symmetric initial data, and the boundary
//! expression it induces on a surface.
//!
//! For `g = g_rr dr² + ρ² dΩ²`, `p = p_rr dr² + p_tan ρ² dΩ²` and `f = f(r)`
//! the equation reads, with `W = √(1 + f'²/g_rr)`,
//!
//! `(f'' − g_rr' f' / (2 g_rr)) / (g_rr W³) − p_rr / (g_rr W²) + 2 ρ' f' / (ρ g_rr W) − 2 p_tan = 0`.

mod boundary;
pub mod fd;
pub mod spline;

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::error::{QlmError, Result};
use fd::UniformStencils;
use spline::CubicSpline;

pub use boundary::{
    boundary_data_in_slice, boundary_expression, check_gradient_condition, BoundaryTermData, GradientCondition,
};

/// Radial profile of the initial data.
#[derive(Debug, Clone)]
pub enum RadialProfile {
    Flat,
    /// Time-symmetric Schwarzschild slice in areal radius.
    Schwarzschild { m: f64 },
    /// Flat metric with `p_rr = p_tan = c`.
    ConstantTrace { c: f64 },
    Tabulated(TabulatedProfile),
}

#[derive(Debug, Clone)]
pub struct TabulatedProfile {
    pub g_rr: CubicSpline,
    pub rho: CubicSpline,
    pub p_rr: CubicSpline,
    pub p_tan: CubicSpline,
}

impl TabulatedProfile {
    pub fn new(r: &[f64], g_rr: &[f64], rho: &[f64], p_rr: &[f64], p_tan: &[f64]) -> Result<Self> {
        Ok(TabulatedProfile {
            g_rr: CubicSpline::new(r.to_vec(), g_rr.to_vec())?,
            rho: CubicSpline::new(r.to_vec(), rho.to_vec())?,
            p_rr: CubicSpline::new(r.to_vec(), p_rr.to_vec())?,
            p_tan: CubicSpline::new(r.to_vec(), p_tan.to_vec())?,
        })
    }
}

/// Pointwise coefficients at one radius.
#[derive(Debug, Clone, Copy)]
pub struct RadialPoint {
    pub g_rr: f64,
    pub dg_rr: f64,
    pub rho: f64,
    pub drho: f64,
    pub p_rr: f64,
    pub p_tan: f64,
}

#[derive(Debug, Clone)]
pub struct RadialInitialData {
    pub r_min: f64,
    pub r_max: f64,
    pub profile: RadialProfile,
}

impl RadialInitialData {
    pub fn new(r_min: f64, r_max: f64, profile: RadialProfile) -> Result<Self> {
        if !(r_min >= 0.0 && r_max > r_min) {
            return Err(QlmError::InvalidInput(format!("bad radial interval [{r_min}, {r_max}]")));
        }
        if let RadialProfile::Tabulated(t) = &profile {
            let (a, b) = t.g_rr.domain();
            if r_min < a || r_max > b {
                return Err(QlmError::InvalidInput("radial interval exceeds the tabulated range".into()));
            }
        }
        let data = RadialInitialData { r_min, r_max, profile };
        for k in 0..=200 {
            let r = r_min + (r_max - r_min) * k as f64 / 200.0;
            let p = data.at(r);
            let rho_ok = p.rho > 0.0 || (r == 0.0 && p.rho == 0.0);
            if !(p.g_rr > 0.0 && p.g_rr.is_finite() && rho_ok && p.drho > 0.0) {
                return Err(QlmError::InvalidInput(format!(
                    "radial data invalid at r = {r}: need g_rr > 0, ρ > 0 and ρ increasing"
                )));
            }
        }
        Ok(data)
    }

    pub fn at(&self, r: f64) -> RadialPoint {
        match &self.profile {
            RadialProfile::Flat => RadialPoint {
                g_rr: 1.0,
                dg_rr: 0.0,
                rho: r,
                drho: 1.0,
                p_rr: 0.0,
                p_tan: 0.0,
            },
            RadialProfile::Schwarzschild { m } => {
                let u = 1.0 - 2.0 * m / r;
                RadialPoint {
                    g_rr: 1.0 / u,
                    dg_rr: -2.0 * m / (r * r * u * u),
                    rho: r,
                    drho: 1.0,
                    p_rr: 0.0,
                    p_tan: 0.0,
                }
            }
            RadialProfile::ConstantTrace { c } => RadialPoint {
                g_rr: 1.0,
                dg_rr: 0.0,
                rho: r,
                drho: 1.0,
                p_rr: *c,
                p_tan: *c,
            },
            RadialProfile::Tabulated(t) => {
                let (g, dg) = t.g_rr.eval(r);
                let (rho, drho) = t.rho.eval(r);
                RadialPoint {
                    g_rr: g,
                    dg_rr: dg,
                    rho,
                    drho,
                    p_rr: t.p_rr.eval(r).0,
                    p_tan: t.p_tan.eval(r).0,
                }
            }
        }
    }

    /// Whether the data is time-symmetric (`p ≡ 0`).
    pub fn is_time_symmetric(&self) -> bool {
        match &self.profile {
            RadialProfile::Flat | RadialProfile::Schwarzschild { .. } => true,
            RadialProfile::ConstantTrace { c } => *c == 0.0,
            RadialProfile::Tabulated(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerBoundary {
    /// `f'(r_min) = 0`.
    Regularity,
    Dirichlet(f64),
}

#[derive(Debug, Clone)]
pub struct JangConfig {
    pub points: usize,
    pub tol: f64,
    pub max_iterations: usize,
    /// Step shrink factor of the backtracking line search.
    pub damping: f64,
    /// `|f'|` beyond this is reported as blow-up.
    pub blow_up_slope: f64,
}

impl Default for JangConfig {
    fn default() -> Self {
        JangConfig {
            points: 401,
            tol: 1e-10,
            max_iterations: 50,
            damping: 0.5,
            blow_up_slope: 1e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JangSolution {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    /// `e₃(f) = f' / √g_rr` at `r_max`.
    pub f3_boundary: f64,
    pub residual_inf: f64,
    pub iterations: usize,
    pub used_shooting: bool,
    pub residual_history: Vec<f64>,
}

/// The radial operator and its partials in `f'` and `f''`.
fn operator(p: &RadialPoint, f1: f64, f2: f64) -> (f64, f64, f64) {
    let g = p.g_rr;
    let c = p.dg_rr / (2.0 * g);
    let w = (1.0 + f1 * f1 / g).sqrt();
    let (w2, w3) = (w * w, w * w * w);
    let q = if p.rho > 0.0 { p.drho / p.rho } else { 0.0 };
    let phi = (f2 - c * f1) / (g * w3) - p.p_rr / (g * w2) + 2.0 * q * f1 / (g * w) - 2.0 * p.p_tan;
    let dw = f1 / (g * w);
    let d1 = -c / (g * w3) - 3.0 * (f2 - c * f1) / (g * w * w3) * dw + 2.0 * p.p_rr / (g * w3) * dw
        + 2.0 * q / (g * w)
        - 2.0 * q * f1 / (g * w2) * dw;
    let d2 = 1.0 / (g * w3);
    (phi, d1, d2)
}

struct Discretization {
    r: Vec<f64>,
    pts: Vec<RadialPoint>,
    st: UniformStencils,
    tau: f64,
    inner: InnerBoundary,
}

impl Discretization {
    fn residual(&self, f: &[f64]) -> Vec<f64> {
        let n = self.r.len();
        let mut out = vec![0.0; n];
        out[0] = match self.inner {
            InnerBoundary::Regularity => self.st.first(f, 0),
            InnerBoundary::Dirichlet(v) => f[0] - v,
        };
        for i in 1..n - 1 {
            out[i] = operator(&self.pts[i], self.st.first(f, i), self.st.second(f, i)).0;
        }
        out[n - 1] = f[n - 1] - self.tau;
        out
    }

    fn jacobian(&self, f: &[f64]) -> DMatrix<f64> {
        let n = self.r.len();
        let mut j = DMatrix::zeros(n, n);
        match self.inner {
            InnerBoundary::Regularity => {
                for (k, w) in self.st.d1[0].iter().enumerate() {
                    j[(0, self.st.start[0] + k)] += w;
                }
            }
            InnerBoundary::Dirichlet(_) => j[(0, 0)] = 1.0,
        }
        for i in 1..n - 1 {
            let (_, d1, d2) = operator(&self.pts[i], self.st.first(f, i), self.st.second(f, i));
            let s = self.st.start[i];
            for k in 0..self.st.d1[i].len() {
                j[(i, s + k)] += d1 * self.st.d1[i][k] + d2 * self.st.d2[i][k];
            }
        }
        j[(n - 1, n - 1)] = 1.0;
        j
    }

    fn max_slope(&self, f: &[f64]) -> (f64, f64) {
        (0..self.r.len())
            .map(|i| (self.st.first(f, i).abs(), self.r[i]))
            .fold((0.0, self.r[0]), |a, b| if b.0 > a.0 { b } else { a })
    }
}

fn fmt_history(h: &[f64]) -> String {
    h.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Solves the radial Jang equation with `f(r_max) = τ_boundary`.
pub fn solve_jang_radial(
    data: &RadialInitialData,
    tau_boundary: f64,
    inner: InnerBoundary,
    config: &JangConfig,
) -> Result<JangSolution> {
    if config.points < 6 {
        return Err(QlmError::InvalidInput("Jang solver needs at least 6 points".into()));
    }
    if !(config.damping > 0.0 && config.damping < 1.0) {
        return Err(QlmError::InvalidInput("damping must lie in (0, 1)".into()));
    }
    let n = config.points;
    let h = (data.r_max - data.r_min) / (n - 1) as f64;
    let r: Vec<f64> = (0..n).map(|i| data.r_min + h * i as f64).collect();
    let pts = r.iter().map(|&x| data.at(x)).collect();
    let st = UniformStencils::new(&r);
    let disc = Discretization {
        r,
        pts,
        st,
        tau: tau_boundary,
        inner,
    };
    let start = match inner {
        InnerBoundary::Dirichlet(v) => disc.r.iter().map(|&x| v + (tau_boundary - v) * (x - data.r_min) / (data.r_max - data.r_min)).collect(),
        InnerBoundary::Regularity => vec![tau_boundary; n],
    };
    let mut history = Vec::new();
    match newton(&disc, start, config, &mut history) {
        Ok((f, its)) => finish(&disc, data, f, its, false, history),
        Err(e) => {
            debug!("Jang Newton failed ({e}); falling back to shooting");
            let guess = shoot(data, &disc, tau_boundary, inner, config)?;
            let (f, its) = newton(&disc, guess, config, &mut history).map_err(|_| QlmError::NoConvergence {
                solver: "Jang Newton",
                detail: format!("residual history {}", fmt_history(&history)),
            })?;
            finish(&disc, data, f, its, true, history)
        }
    }
}

fn finish(
    disc: &Discretization,
    data: &RadialInitialData,
    f: Vec<f64>,
    iterations: usize,
    used_shooting: bool,
    residual_history: Vec<f64>,
) -> Result<JangSolution> {
    let n = f.len();
    let residual_inf = inf_norm(&disc.residual(&f));
    let f3_boundary = disc.st.first(&f, n - 1) / data.at(data.r_max).g_rr.sqrt();
    Ok(JangSolution {
        r: disc.r.clone(),
        f,
        f3_boundary,
        residual_inf,
        iterations,
        used_shooting,
        residual_history,
    })
}

fn newton(
    disc: &Discretization,
    mut f: Vec<f64>,
    config: &JangConfig,
    history: &mut Vec<f64>,
) -> Result<(Vec<f64>, usize)> {
    let mut res = disc.residual(&f);
    let mut norm = inf_norm(&res);
    history.push(norm);
    for it in 0..=config.max_iterations {
        if norm <= config.tol {
            return Ok((f, it));
        }
        if it == config.max_iterations {
            break;
        }
        let j = disc.jacobian(&f);
        let rhs = DVector::from_iterator(res.len(), res.iter().map(|v| -v));
        let step = j.lu().solve(&rhs).ok_or_else(|| QlmError::NoConvergence {
            solver: "Jang Newton",
            detail: "singular Jacobian".into(),
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = f.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let tr = disc.residual(&trial);
            let tn = inf_norm(&tr);
            if tn.is_finite() && tn < norm {
                f = trial;
                res = tr;
                norm = tn;
                accepted = true;
                break;
            }
            t *= config.damping;
        }
        history.push(norm);
        let (slope, at) = disc.max_slope(&f);
        if slope > config.blow_up_slope {
            return Err(QlmError::JangBlowUp { radius: at, slope });
        }
        if !accepted {
            break;
        }
    }
    Err(QlmError::NoConvergence {
        solver: "Jang Newton",
        detail: format!("residual history {}", fmt_history(history)),
    })
}

/// Right side of `w' = F(r, w)` for `w = f'/√g_rr`.
fn w_prime(data: &RadialInitialData, r: f64, w: f64) -> f64 {
    let p = data.at(r);
    let sg = p.g_rr.sqrt();
    let big_w = (1.0 + w * w).sqrt();
    let rho_s = p.drho / sg;
    let term = if p.rho > 0.0 { 2.0 * rho_s * w / (p.rho * big_w) } else { 0.0 };
    sg * big_w.powi(3) * (p.p_rr / p.g_rr / (big_w * big_w) - term + 2.0 * p.p_tan)
}

fn integrate_w(data: &RadialInitialData, r: &[f64], w0: f64, blow_up: f64) -> Result<Vec<f64>> {
    let sub = 8;
    let mut w = vec![w0; r.len()];
    // near r = 0 the regular solution starts with w ≈ r (p_nn + 2 p_tan) / 3
    let mut cur = if r[0] == 0.0 {
        let p = data.at(0.0);
        let h = (r[1] - r[0]) * 1e-3;
        (w0, h, h * (p.p_rr / p.g_rr + 2.0 * p.p_tan) / 3.0 + w0)
    } else {
        (w0, 0.0, w0)
    };
    let mut x = r[0] + cur.1;
    cur.0 = cur.2;
    for i in 1..r.len() {
        let h = (r[i] - x) / sub as f64;
        for _ in 0..sub {
            let k1 = w_prime(data, x, cur.0);
            let k2 = w_prime(data, x + 0.5 * h, cur.0 + 0.5 * h * k1);
            let k3 = w_prime(data, x + 0.5 * h, cur.0 + 0.5 * h * k2);
            let k4 = w_prime(data, x + h, cur.0 + h * k3);
            cur.0 += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
            x += h;
            if !(cur.0.abs() <= blow_up) {
                return Err(QlmError::JangBlowUp {
                    radius: x,
                    slope: cur.0.abs(),
                });
            }
        }
        w[i] = cur.0;
    }
    Ok(w)
}

/// Integrates `f` inward from `f(r_max) = τ` given `w`.
fn f_from_w(data: &RadialInitialData, r: &[f64], w: &[f64], tau: f64) -> Vec<f64> {
    let n = r.len();
    let mut f = vec![tau; n];
    for i in (0..n - 1).rev() {
        let (a, b) = (data.at(r[i]).g_rr.sqrt() * w[i], data.at(r[i + 1]).g_rr.sqrt() * w[i + 1]);
        f[i] = f[i + 1] - 0.5 * (a + b) * (r[i + 1] - r[i]);
    }
    f
}

fn shoot(
    data: &RadialInitialData,
    disc: &Discretization,
    tau: f64,
    inner: InnerBoundary,
    config: &JangConfig,
) -> Result<Vec<f64>> {
    match inner {
        InnerBoundary::Regularity => {
            let w = integrate_w(data, &disc.r, 0.0, config.blow_up_slope)?;
            Ok(f_from_w(data, &disc.r, &w, tau))
        }
        InnerBoundary::Dirichlet(v) => {
            // secant on the inner slope so that f(r_min) = v
            let miss = |w0: f64| -> Result<(f64, Vec<f64>)> {
                let w = integrate_w(data, &disc.r, w0, config.blow_up_slope)?;
                let f = f_from_w(data, &disc.r, &w, tau);
                Ok((f[0] - v, f))
            };
            let (mut a, mut b) = (0.0, 0.1);
            let (mut fa, _) = miss(a)?;
            let (mut fb, mut best) = miss(b)?;
            for _ in 0..60 {
                if fb.abs() < 1e-12 || fb == fa {
                    break;
                }
                let c = b - fb * (b - a) / (fb - fa);
                a = b;
                fa = fb;
                b = c;
                let (fc, f) = miss(b)?;
                fb = fc;
                best = f;
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_symmetric_data_gives_constants() {
        for profile in [RadialProfile::Flat, RadialProfile::Schwarzschild { m: 1.0 }] {
            let data = RadialInitialData::new(3.0, 6.0, profile).unwrap();
            let sol = solve_jang_radial(&data, 0.7, InnerBoundary::Regularity, &JangConfig::default()).unwrap();
            assert!(sol.f.iter().all(|v| (v - 0.7).abs() < 1e-12));
            assert!(sol.residual_inf <= 1e-12);
            assert!(sol.f3_boundary.abs() < 1e-12);
        }
    }

    #[test]
    fn operator_partials_match_differences() {
        let p = RadialPoint {
            g_rr: 1.3,
            dg_rr: -0.2,
            rho: 2.0,
            drho: 0.9,
            p_rr: 0.1,
            p_tan: -0.05,
        };
        let (f1, f2, h) = (0.4, -0.3, 1e-6);
        let (_, d1, d2) = operator(&p, f1, f2);
        let n1 = (operator(&p, f1 + h, f2).0 - operator(&p, f1 - h, f2).0) / (2.0 * h);
        let n2 = (operator(&p, f1, f2 + h).0 - operator(&p, f1, f2 - h).0) / (2.0 * h);
        assert!((d1 - n1).abs() < 1e-8);
        assert!((d2 - n2).abs() < 1e-8);
    }

    #[test]
    fn constant_trace_solution_is_accurate() {
        let data = RadialInitialData::new(1.0, 2.0, RadialProfile::ConstantTrace { c: 0.1 }).unwrap();
        let sol = solve_jang_radial(&data, 0.0, InnerBoundary::Regularity, &JangConfig::default()).unwrap();
        assert!(sol.residual_inf <= 1e-8);
        assert!(sol.f3_boundary > 0.0);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(RadialInitialData::new(2.0, 1.0, RadialProfile::Flat).is_err());
        assert!(RadialInitialData::new(1.0, 3.0, RadialProfile::Schwarzschild { m: 1.0 }).is_err());
    }
}
