//! Extrinsic geometry of embedded spheres in Euclidean and Minkowski space.
//!
//! Minkowski vectors are stored as `[x, y, z, t]` with
//! `⟨a, b⟩ = a_x b_x + a_y b_y + a_z b_z − a_t b_t`.

use std::sync::Arc;

use log::warn;

use crate::embed::{EmbeddingR3, EmbeddingR31};
use crate::error::{QlmError, Result};
use crate::sphere::{
    differential, gradient, integrate, integrate_values, laplacian, norm_sq, pair, same_grid, trace,
    CovectorField, MetricField, Parity, ScalarField, SphereGrid, SymTensorField,
};

pub fn mdot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3]
}

/// Euclidean extrinsic data of `X̂` with respect to its outward normal.
#[derive(Debug, Clone)]
pub struct ExtrinsicDataR3 {
    pub metric: MetricField,
    /// `ĥ_ab = ⟨∂_a ν̂, ∂_b X̂⟩`.
    pub h: SymTensorField,
    pub k_hat: ScalarField,
    pub normal: [ScalarField; 3],
}

fn second_derivatives(grid: &SphereGrid, v: &[f64]) -> [Vec<f64>; 5] {
    let t = grid.d_colat(v, Parity::Even);
    let p = grid.d_lon(v);
    let tt = grid.d_colat(&t, Parity::Odd);
    let tp = grid.d_lon(&t);
    let pp = grid.d_lon(&p);
    [t, p, tt, tp, pp]
}

pub fn extrinsic_r3(x_hat: &EmbeddingR3) -> Result<ExtrinsicDataR3> {
    let metric = x_hat.induced_metric()?;
    let g = x_hat.grid();
    let n = g.len();
    let d: Vec<[Vec<f64>; 5]> = (0..3).map(|k| second_derivatives(g, x_hat.coord(k).values())).collect();
    let mut normal = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let u = [d[0][0][i], d[1][0][i], d[2][0][i]];
        let v = [d[0][1][i], d[1][1][i], d[2][1][i]];
        let c = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let len = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if !(len > 0.0) {
            return Err(QlmError::SingularMetric(g.location(i)));
        }
        for k in 0..3 {
            normal[k][i] = c[k] / len;
        }
    }
    // outward: ∫⟨ν̂, X̂ − centroid⟩ dv > 0
    let area = metric.area();
    let centroid: Vec<f64> = (0..3).map(|k| integrate_values(&metric, x_hat.coord(k).values()) / area).collect();
    let support: Vec<f64> = (0..n)
        .map(|i| (0..3).map(|k| normal[k][i] * (x_hat.coord(k).values()[i] - centroid[k])).sum())
        .collect();
    if integrate_values(&metric, &support) < 0.0 {
        for comp in normal.iter_mut() {
            comp.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let mut h = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        for (ab, slot) in [2usize, 3, 4].iter().enumerate() {
            h[ab][i] = -(0..3).map(|k| d[k][*slot][i] * normal[k][i]).sum::<f64>();
        }
    }
    let h = SymTensorField::from_raw(g, h);
    let k_hat = trace(&metric, &h);
    let [n1, n2, n3] = normal;
    Ok(ExtrinsicDataR3 {
        metric,
        h,
        k_hat,
        normal: [
            ScalarField::from_raw(g, n1),
            ScalarField::from_raw(g, n2),
            ScalarField::from_raw(g, n3),
        ],
    })
}

impl ExtrinsicDataR3 {
    /// `max |det ĥ / det σ̂ − K̂|` with `K̂` the intrinsic curvature of `σ̂`.
    pub fn gauss_equation_residual(&self) -> f64 {
        let k = crate::sphere::gauss_curvature(&self.metric);
        let det = crate::sphere::frame_determinant(&self.metric, &self.h);
        det.values().iter().zip(k.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn total_k_hat(&self) -> f64 {
        integrate_values(&self.metric, self.k_hat.values())
    }
}

/// `∫ k̂ dv̂` of a Euclidean embedding.
pub fn total_k_hat_via_projection(x_hat: &EmbeddingR3) -> Result<f64> {
    Ok(extrinsic_r3(x_hat)?.total_k_hat())
}

/// Mean curvature vector `H₀ = Δ_σ X` of a space-like embedding.
#[derive(Debug, Clone)]
pub struct MeanCurvatureR31 {
    pub sigma: MetricField,
    pub components: [ScalarField; 4],
    /// `⟨H₀, H₀⟩` after clamping roundoff-level values.
    pub norm_sq: ScalarField,
    pub norm: ScalarField,
    /// Nodes where `⟨H₀, H₀⟩ ≤ 0` beyond roundoff.
    pub non_spacelike: Vec<usize>,
}

/// `|⟨H₀,H₀⟩|` below this is treated as roundoff and clamped to the space-like side.
pub const SPACELIKE_CLAMP: f64 = 1e-12;

pub fn mean_curvature_vector_r31(x: &EmbeddingR31) -> Result<MeanCurvatureR31> {
    let sigma = x.induced_metric()?;
    let g = x.grid().clone();
    let mut comps = Vec::with_capacity(4);
    for k in 0..4 {
        comps.push(laplacian(&sigma, x.coord(k))?);
    }
    let n = g.len();
    let mut nsq = vec![0.0; n];
    let mut bad = Vec::new();
    let mut clamped = 0;
    for i in 0..n {
        let h = [comps[0].values()[i], comps[1].values()[i], comps[2].values()[i], comps[3].values()[i]];
        let v = mdot(&h, &h);
        nsq[i] = if v > 0.0 {
            v
        } else if v.abs() < SPACELIKE_CLAMP {
            clamped += 1;
            SPACELIKE_CLAMP
        } else {
            bad.push(i);
            v
        };
    }
    if clamped > 0 {
        warn!("clamped ⟨H₀,H₀⟩ to the space-like side at {clamped} node(s)");
    }
    let norm = nsq.iter().map(|v| v.max(0.0).sqrt()).collect();
    let [c0, c1, c2, c3]: [ScalarField; 4] = comps.try_into().expect("four components");
    Ok(MeanCurvatureR31 {
        sigma,
        components: [c0, c1, c2, c3],
        norm_sq: ScalarField::from_raw(&g, nsq),
        norm: ScalarField::from_raw(&g, norm),
        non_spacelike: bad,
    })
}

impl MeanCurvatureR31 {
    pub fn at(&self, i: usize) -> [f64; 4] {
        [
            self.components[0].values()[i],
            self.components[1].values()[i],
            self.components[2].values()[i],
            self.components[3].values()[i],
        ]
    }

    pub fn require_spacelike(&self) -> Result<()> {
        if let Some(&first) = self.non_spacelike.first() {
            return Err(QlmError::NonSpacelikeMeanCurvature {
                count: self.non_spacelike.len(),
                first: self.sigma.grid().location(first),
            });
        }
        Ok(())
    }
}

/// Orthonormal frame `(e₃, e₄)` of the normal bundle, `e₃` space-like,
/// `e₄` future time-like.
#[derive(Debug, Clone)]
pub struct NormalFrame {
    grid: Arc<SphereGrid>,
    pub e3: Vec<[f64; 4]>,
    pub e4: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameChoice {
    /// `e₃ = −H₀/|H₀|`.
    MeanCurvature,
    /// `ĕ₃ = (ν̂, 0)`, the outward normal of the projection.
    Projection,
}

/// Pushforward of `∇τ` (raised with the induced metric) as a vector in `R^{3,1}`.
fn pushed_gradient(x: &EmbeddingR31, sigma: &MetricField) -> Result<Vec<[f64; 4]>> {
    let (_, v) = gradient(sigma, x.time())?;
    let g = x.grid();
    let d: Vec<(Vec<f64>, Vec<f64>)> = (0..4)
        .map(|k| (g.d_colat(x.coord(k).values(), Parity::Even), g.d_lon(x.coord(k).values())))
        .collect();
    Ok((0..g.len())
        .map(|i| {
            let mut w = [0.0; 4];
            for k in 0..4 {
                w[k] = v.comp(0)[i] * d[k].0[i] + v.comp(1)[i] * d[k].1[i];
            }
            w
        })
        .collect())
}

/// Completes a space-like unit normal `e₃` with the future unit normal `e₄`.
fn complete_frame(grid: &Arc<SphereGrid>, e3: Vec<[f64; 4]>, grad: &[[f64; 4]]) -> Result<NormalFrame> {
    let mut e4 = Vec::with_capacity(e3.len());
    for (i, (a, gv)) in e3.iter().zip(grad).enumerate() {
        let mut t = *gv;
        t[3] += 1.0;
        let c = mdot(&t, a);
        for k in 0..4 {
            t[k] -= c * a[k];
        }
        let nn = -mdot(&t, &t);
        if !(nn > 0.0) {
            return Err(QlmError::FrameUndefined {
                node: grid.location(i),
                reason: "no time-like normal orthogonal to e3".into(),
            });
        }
        let s = if t[3] > 0.0 { 1.0 } else { -1.0 } / nn.sqrt();
        e4.push([t[0] * s, t[1] * s, t[2] * s, t[3] * s]);
    }
    Ok(NormalFrame {
        grid: grid.clone(),
        e3,
        e4,
    })
}

pub fn normal_frame(x: &EmbeddingR31, choice: FrameChoice) -> Result<NormalFrame> {
    let g = x.grid().clone();
    match choice {
        FrameChoice::MeanCurvature => {
            let h = mean_curvature_vector_r31(x)?;
            let grad = pushed_gradient(x, &h.sigma)?;
            let mut e3 = Vec::with_capacity(g.len());
            for i in 0..g.len() {
                let nsq = h.norm_sq.values()[i];
                if h.non_spacelike.contains(&i) || !(nsq > 0.0) {
                    return Err(QlmError::FrameUndefined {
                        node: g.location(i),
                        reason: format!("mean curvature vector not space-like (⟨H₀,H₀⟩ = {nsq:e})"),
                    });
                }
                let v = h.at(i);
                let s = -1.0 / nsq.sqrt();
                e3.push([v[0] * s, v[1] * s, v[2] * s, v[3] * s]);
            }
            complete_frame(&g, e3, &grad)
        }
        FrameChoice::Projection => {
            let sigma = x.induced_metric()?;
            let ext = extrinsic_r3(x.spatial())?;
            let grad = pushed_gradient(x, &sigma)?;
            let e3 = (0..g.len())
                .map(|i| {
                    [
                        ext.normal[0].values()[i],
                        ext.normal[1].values()[i],
                        ext.normal[2].values()[i],
                        0.0,
                    ]
                })
                .collect();
            complete_frame(&g, e3, &grad)
        }
    }
}

impl NormalFrame {
    /// Wraps node-wise normal vectors; no orthonormality check is made.
    pub fn from_vectors(grid: &Arc<SphereGrid>, e3: Vec<[f64; 4]>, e4: Vec<[f64; 4]>) -> NormalFrame {
        assert_eq!(e3.len(), grid.len());
        assert_eq!(e4.len(), grid.len());
        NormalFrame {
            grid: grid.clone(),
            e3,
            e4,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    /// `(cosh φ e₃ + sinh φ e₄, sinh φ e₃ + cosh φ e₄)`.
    pub fn boosted(&self, phi: &ScalarField) -> NormalFrame {
        let mut e3 = Vec::with_capacity(self.e3.len());
        let mut e4 = Vec::with_capacity(self.e3.len());
        for (i, (a, b)) in self.e3.iter().zip(&self.e4).enumerate() {
            let (ch, sh) = (phi.values()[i].cosh(), phi.values()[i].sinh());
            let mut p = [0.0; 4];
            let mut q = [0.0; 4];
            for k in 0..4 {
                p[k] = ch * a[k] + sh * b[k];
                q[k] = sh * a[k] + ch * b[k];
            }
            e3.push(p);
            e4.push(q);
        }
        NormalFrame {
            grid: self.grid.clone(),
            e3,
            e4,
        }
    }

    /// Connection one-form `α_{e₃}(∂_a) = ⟨∂_a e₃, e₄⟩`.
    pub fn connection_form(&self) -> CovectorField {
        let g = &self.grid;
        let n = g.len();
        let mut a1 = vec![0.0; n];
        let mut a2 = vec![0.0; n];
        for k in 0..4 {
            let comp: Vec<f64> = self.e3.iter().map(|v| v[k]).collect();
            let dt = g.d_colat(&comp, Parity::Even);
            let dp = g.d_lon(&comp);
            let sign = if k == 3 { -1.0 } else { 1.0 };
            for i in 0..n {
                a1[i] += sign * dt[i] * self.e4[i][k];
                a2[i] += sign * dp[i] * self.e4[i][k];
            }
        }
        CovectorField::from_raw(g, a1, a2)
    }
}

pub fn connection_form(x: &EmbeddingR31, choice: FrameChoice) -> Result<CovectorField> {
    Ok(normal_frame(x, choice)?.connection_form())
}

/// Lorentz-invariant data of a space-like embedding with time function `τ = t`.
#[derive(Debug, Clone)]
pub struct ExtrinsicDataR31 {
    pub sigma: MetricField,
    pub mean_curvature: MeanCurvatureR31,
    pub h0_norm: ScalarField,
    pub lap_tau: ScalarField,
    pub grad_tau_sq: ScalarField,
    /// Boost angle with `sinh θ = −Δτ / (|H₀| √(1+|∇τ|²))`.
    pub theta: ScalarField,
    pub alpha_h0: CovectorField,
    pub alpha_breve: CovectorField,
}

pub fn extrinsic_r31(x: &EmbeddingR31) -> Result<ExtrinsicDataR31> {
    let h = mean_curvature_vector_r31(x)?;
    h.require_spacelike()?;
    let sigma = h.sigma.clone();
    let tau = x.time();
    let lap_tau = laplacian(&sigma, tau)?;
    let grad_tau_sq = norm_sq(&sigma, &differential(tau));
    let theta = boost_angle(&h.norm, &lap_tau, &grad_tau_sq);
    let alpha_h0 = normal_frame(x, FrameChoice::MeanCurvature)?.connection_form();
    let alpha_breve = normal_frame(x, FrameChoice::Projection)?.connection_form();
    Ok(ExtrinsicDataR31 {
        sigma,
        h0_norm: h.norm.clone(),
        mean_curvature: h,
        lap_tau,
        grad_tau_sq,
        theta,
        alpha_h0,
        alpha_breve,
    })
}

/// `asinh(−Δτ / (|H| √(1+|∇τ|²)))` node-wise.
pub fn boost_angle(h_norm: &ScalarField, lap_tau: &ScalarField, grad_tau_sq: &ScalarField) -> ScalarField {
    let vals = (0..h_norm.values().len())
        .map(|i| (-lap_tau.values()[i] / (h_norm.values()[i] * (1.0 + grad_tau_sq.values()[i]).sqrt())).asinh())
        .collect();
    ScalarField::from_raw(h_norm.grid(), vals)
}

/// `∫ [√((Δτ)² + |H₀|²(1+|∇τ|²)) − ∇θ·∇τ − α_{e₃^{H₀}}(∇τ)] dv_σ`.
pub fn total_k_hat_via_sigma_formula(x: &EmbeddingR31, tau: &ScalarField) -> Result<f64> {
    if !same_grid(x.grid(), tau.grid()) {
        return Err(QlmError::GridMismatch);
    }
    if tau.values().iter().zip(x.time().values()).any(|(a, b)| a != b) {
        return Err(QlmError::InvalidInput("τ must be the time component of the embedding".into()));
    }
    let ext = extrinsic_r31(x)?;
    ext.total_k_hat_integral(tau)
}

impl ExtrinsicDataR31 {
    fn total_k_hat_integral(&self, tau: &ScalarField) -> Result<f64> {
        let (_, grad) = gradient(&self.sigma, tau)?;
        let dtheta = differential(&self.theta);
        let theta_dot = pair(&dtheta, &grad);
        let alpha_dot = pair(&self.alpha_h0, &grad);
        let n = self.sigma.grid().len();
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let lt = self.lap_tau.values()[i];
                let hn = self.h0_norm.values()[i];
                let gs = self.grad_tau_sq.values()[i];
                (lt * lt + hn * hn * (1.0 + gs)).sqrt() - theta_dot.values()[i] - alpha_dot.values()[i]
            })
            .collect();
        integrate(&self.sigma, &ScalarField::from_raw(self.sigma.grid(), vals))
    }
}
