//! Isometric embeddings of `(σ, τ)` into Minkowski space.
//!
//! The time function is split off: `σ̂ = σ + dτ²` is embedded in Euclidean
//! space by a Weyl solve and the result is lifted back as `X̂ + τ T₀`.

mod gauge;
mod weyl;

use std::sync::Arc;

use crate::error::{NodeLocation, QlmError, Result};
use crate::sphere::{
    differential, frame_determinant, gauss_curvature, hessian, norm_sq, same_grid, MetricField,
    Parity, ScalarField, SphereGrid, SymTensorField,
};

pub use gauge::apply_gauge;
pub use weyl::{solve_weyl, solve_weyl_from, WeylConfig, WeylSolveReport};

/// Embedding of the sphere in Euclidean 3-space.
#[derive(Debug, Clone)]
pub struct EmbeddingR3 {
    coords: [ScalarField; 3],
}

/// Space-like embedding into Minkowski space, components `(x, y, z, t)`.
#[derive(Debug, Clone)]
pub struct EmbeddingR31 {
    spatial: EmbeddingR3,
    time: ScalarField,
}

fn first_derivatives(grid: &SphereGrid, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (grid.d_colat(v, Parity::Even), grid.d_lon(v))
}

impl EmbeddingR3 {
    pub fn new(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self> {
        if !same_grid(x.grid(), y.grid()) || !same_grid(x.grid(), z.grid()) {
            return Err(QlmError::GridMismatch);
        }
        Ok(EmbeddingR3 { coords: [x, y, z] })
    }

    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        let pts: Vec<[f64; 3]> = (0..grid.len())
            .map(|i| {
                let (t, p) = grid.coords(i);
                f(t, p)
            })
            .collect();
        let c = |k: usize| ScalarField::from_raw(grid, pts.iter().map(|p| p[k]).collect());
        EmbeddingR3 {
            coords: [c(0), c(1), c(2)],
        }
    }

    /// Round sphere of radius `r` centred at the origin.
    pub fn round(grid: &Arc<SphereGrid>, r: f64) -> Self {
        Self::from_fn(grid, |t, p| [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.coords[0].grid()
    }

    pub fn coord(&self, k: usize) -> &ScalarField {
        &self.coords[k]
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        [
            self.coords[0].values()[i],
            self.coords[1].values()[i],
            self.coords[2].values()[i],
        ]
    }

    /// Induced metric `⟨dX̂, dX̂⟩` as a raw tensor (not checked for definiteness).
    pub fn induced_tensor(&self) -> SymTensorField {
        let g = self.grid();
        let n = g.len();
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for c in &self.coords {
            let (xt, xp) = first_derivatives(g, c.values());
            for i in 0..n {
                comps[0][i] += xt[i] * xt[i];
                comps[1][i] += xt[i] * xp[i];
                comps[2][i] += xp[i] * xp[i];
            }
        }
        SymTensorField::from_raw(g, comps)
    }

    pub fn induced_metric(&self) -> Result<MetricField> {
        MetricField::new(self.induced_tensor())
    }

    /// Applies `p ↦ R p + b`.
    pub fn transformed(&self, rot: &[[f64; 3]; 3], shift: [f64; 3]) -> EmbeddingR3 {
        let g = self.grid();
        let mut out = [vec![0.0; g.len()], vec![0.0; g.len()], vec![0.0; g.len()]];
        for i in 0..g.len() {
            let p = self.point(i);
            for (r, o) in out.iter_mut().enumerate() {
                o[i] = rot[r][0] * p[0] + rot[r][1] * p[1] + rot[r][2] * p[2] + shift[r];
            }
        }
        let [x, y, z] = out;
        EmbeddingR3 {
            coords: [
                ScalarField::from_raw(g, x),
                ScalarField::from_raw(g, y),
                ScalarField::from_raw(g, z),
            ],
        }
    }
}

impl EmbeddingR31 {
    pub fn new(spatial: EmbeddingR3, time: ScalarField) -> Result<Self> {
        if !same_grid(spatial.grid(), time.grid()) {
            return Err(QlmError::GridMismatch);
        }
        Ok(EmbeddingR31 { spatial, time })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.spatial.grid()
    }

    pub fn spatial(&self) -> &EmbeddingR3 {
        &self.spatial
    }

    pub fn time(&self) -> &ScalarField {
        &self.time
    }

    /// Component `k` in `(x, y, z, t)` order.
    pub fn coord(&self, k: usize) -> &ScalarField {
        if k < 3 {
            self.spatial.coord(k)
        } else {
            &self.time
        }
    }

    /// `[x, y, z, t]` at node `i`.
    pub fn point(&self, i: usize) -> [f64; 4] {
        let p = self.spatial.point(i);
        [p[0], p[1], p[2], self.time.values()[i]]
    }

    /// Induced metric `⟨dX, dX⟩` with signature `(−+++)`.
    pub fn induced_tensor(&self) -> SymTensorField {
        let g = self.grid();
        let spatial = self.spatial.induced_tensor().into_comps();
        let (tt, tp) = first_derivatives(g, self.time.values());
        let n = g.len();
        let c11 = (0..n).map(|i| spatial[0][i] - tt[i] * tt[i]).collect();
        let c12 = (0..n).map(|i| spatial[1][i] - tt[i] * tp[i]).collect();
        let c22 = (0..n).map(|i| spatial[2][i] - tp[i] * tp[i]).collect();
        SymTensorField::from_raw(g, [c11, c12, c22])
    }

    /// Fails with a singular-metric error where the surface is not space-like.
    pub fn induced_metric(&self) -> Result<MetricField> {
        MetricField::new(self.induced_tensor())
    }
}

/// `σ̂ = σ + dτ ⊗ dτ`.
pub fn project_metric(sigma: &MetricField, tau: &ScalarField) -> Result<MetricField> {
    if !same_grid(sigma.grid(), tau.grid()) {
        return Err(QlmError::GridMismatch);
    }
    let dt = differential(tau);
    let (t1, t2) = (dt.comp(0), dt.comp(1));
    let s = sigma.tensor();
    let n = sigma.grid().len();
    let c11 = (0..n).map(|i| s.comp(0)[i] + t1[i] * t1[i]).collect();
    let c12 = (0..n).map(|i| s.comp(1)[i] + t1[i] * t2[i]).collect();
    let c22 = (0..n).map(|i| s.comp(2)[i] + t2[i] * t2[i]).collect();
    MetricField::new(SymTensorField::from_raw(sigma.grid(), [c11, c12, c22]))
}

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub holds: bool,
    pub min_value: f64,
    pub worst_node: NodeLocation,
    /// `K + (1+|∇τ|²)⁻¹ det(∇²τ)` at every node.
    pub values: ScalarField,
}

struct Convexity {
    grad_sq: ScalarField,
    lhs: ScalarField,
}

fn convexity_terms(sigma: &MetricField, tau: &ScalarField) -> Result<Convexity> {
    if !same_grid(sigma.grid(), tau.grid()) {
        return Err(QlmError::GridMismatch);
    }
    let k = gauss_curvature(sigma);
    let grad_sq = norm_sq(sigma, &differential(tau));
    let det_hess = frame_determinant(sigma, &hessian(sigma, tau)?);
    let n = sigma.grid().len();
    let lhs = (0..n)
        .map(|i| k.values()[i] + det_hess.values()[i] / (1.0 + grad_sq.values()[i]))
        .collect();
    Ok(Convexity {
        grad_sq,
        lhs: ScalarField::from_raw(sigma.grid(), lhs),
    })
}

pub fn check_convexity_condition(sigma: &MetricField, tau: &ScalarField) -> Result<ConvexityReport> {
    let terms = convexity_terms(sigma, tau)?;
    let worst = terms.lhs.argmin();
    let min_value = terms.lhs.values()[worst];
    Ok(ConvexityReport {
        holds: min_value > 0.0,
        min_value,
        worst_node: sigma.grid().location(worst),
        values: terms.lhs,
    })
}

/// Gauss curvature of `σ + dτ²` expressed through `σ` and `τ` alone.
pub fn projected_gauss_curvature(sigma: &MetricField, tau: &ScalarField) -> Result<ScalarField> {
    let terms = convexity_terms(sigma, tau)?;
    Ok(terms.lhs.zip_map(&terms.grad_sq, |l, g| l / (1.0 + g)))
}

/// `X = X̂ + τ T₀`.
pub fn lift_to_minkowski(x_hat: &EmbeddingR3, tau: &ScalarField) -> Result<EmbeddingR31> {
    EmbeddingR31::new(x_hat.clone(), tau.clone())
}

/// Largest `|∇τ|` accepted before the surface is treated as nearly null.
pub const MAX_TAU_SLOPE: f64 = 1e6;

/// Space-like embedding of `σ` with time function `τ`: project, solve the
/// Weyl problem for `σ̂`, lift.
pub fn theorem_b(
    sigma: &MetricField,
    tau: &ScalarField,
    config: &WeylConfig,
) -> Result<(EmbeddingR31, WeylSolveReport)> {
    theorem_b_from(sigma, tau, None, config)
}

/// As [`theorem_b`], starting the Weyl continuation from `guess` when given.
pub fn theorem_b_from(
    sigma: &MetricField,
    tau: &ScalarField,
    guess: Option<&EmbeddingR3>,
    config: &WeylConfig,
) -> Result<(EmbeddingR31, WeylSolveReport)> {
    let conv = check_convexity_condition(sigma, tau)?;
    let slope = conv_slope(sigma, tau);
    if slope > MAX_TAU_SLOPE {
        return Err(QlmError::Precondition(format!(
            "|∇τ| reaches {slope:e}, beyond the accepted limit {MAX_TAU_SLOPE:e}"
        )));
    }
    if !conv.holds {
        return Err(QlmError::Precondition(format!(
            "convexity condition fails: minimum {:e} at {}",
            conv.min_value, conv.worst_node
        )));
    }
    let sigma_hat = project_metric(sigma, tau)?;
    let (x_hat, report) = match guess {
        Some(g) => solve_weyl_from(&sigma_hat, g, config)?,
        None => solve_weyl(&sigma_hat, config)?,
    };
    let x = lift_to_minkowski(&x_hat, tau)?;
    Ok((x, report))
}

fn conv_slope(sigma: &MetricField, tau: &ScalarField) -> f64 {
    norm_sq(sigma, &differential(tau)).values().iter().fold(0.0f64, |a, &b| a.max(b)).sqrt()
}

/// Max node-wise coordinate-component difference of two tensors.
pub fn tensor_deviation(a: &SymTensorField, b: &SymTensorField) -> f64 {
    (0..3)
        .flat_map(|c| a.comp(c).iter().zip(b.comp(c)).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
