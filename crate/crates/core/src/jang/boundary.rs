use crate::data::{BoundaryData, PhysicalSurfaceData};
use crate::embed::EmbeddingR31;
use crate::error::{QlmError, Result};
use crate::extrinsic::{extrinsic_r3, mdot, NormalFrame};
use crate::sphere::{differential, gradient, norm_sq, pair, same_grid, CovectorField, Parity, ScalarField};

#[derive(Debug, Clone)]
pub struct BoundaryTermData {
    /// Boost angle `φ` with `sinh φ √(1+|∇τ|²) = −f₃`.
    pub e3_prime_boost: ScalarField,
    /// `(1+|∇τ|²)^{-1/2} [√(1+|Df|²) k − f₃ tr P + P(e₃,∇τ) + ∇τ·∇φ]`.
    pub boundary_expression: ScalarField,
}

/// Evaluates the Jang boundary expression for the boundary normal derivative `f₃`.
pub fn boundary_expression(data: &PhysicalSurfaceData, tau: &ScalarField, f3: &ScalarField) -> Result<BoundaryTermData> {
    let b = data.boundary.as_ref().ok_or_else(|| {
        QlmError::IncompleteData("boundary expression needs k, tr P and P(e₃, ·) of the surface".into())
    })?;
    let g = data.sigma.grid();
    if !same_grid(g, tau.grid()) || !same_grid(g, f3.grid()) {
        return Err(QlmError::GridMismatch);
    }
    let (dtau, grad) = gradient(&data.sigma, tau)?;
    let gsq = norm_sq(&data.sigma, &dtau);
    let phi = ScalarField::from_raw(
        g,
        (0..g.len())
            .map(|i| (-f3.values()[i] / (1.0 + gsq.values()[i]).sqrt()).asinh())
            .collect(),
    );
    let p_grad = pair(&b.p_e3, &grad);
    let phi_grad = pair(&differential(&phi), &grad);
    let vals = (0..g.len())
        .map(|i| {
            let s = gsq.values()[i];
            let f = f3.values()[i];
            ((1.0 + s + f * f).sqrt() * b.k.values()[i] - f * b.tr_p.values()[i]
                + p_grad.values()[i]
                + phi_grad.values()[i])
                / (1.0 + s).sqrt()
        })
        .collect();
    Ok(BoundaryTermData {
        e3_prime_boost: phi,
        boundary_expression: ScalarField::from_raw(g, vals),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct GradientCondition {
    pub holds: bool,
    /// `min(k − |tr P|)`.
    pub margin: f64,
}

/// Sufficient condition `k > |tr P|` for a bounded normal derivative.
pub fn check_gradient_condition(k: &ScalarField, tr_p: &ScalarField) -> Result<GradientCondition> {
    if !same_grid(k.grid(), tr_p.grid()) {
        return Err(QlmError::GridMismatch);
    }
    let margin = k
        .values()
        .iter()
        .zip(tr_p.values())
        .map(|(a, b)| a - b.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(GradientCondition {
        holds: margin > 0.0,
        margin,
    })
}

/// Boundary data of a surface lying in the space-like graph `t = F(x)`,
/// given `slope(x) = DF(x)`. Returns the data and the frame `(e₃, e₄)` with
/// `e₄` the future unit normal of the slice and `e₃` the outward unit normal
/// of the surface inside it.
pub fn boundary_data_in_slice(
    x: &EmbeddingR31,
    slope: impl Fn([f64; 3]) -> [f64; 3],
) -> Result<(BoundaryData, NormalFrame)> {
    let g = x.grid().clone();
    let n = g.len();
    let sigma = x.induced_metric()?;
    let nu = extrinsic_r3(x.spatial())?.normal;
    let d: Vec<(Vec<f64>, Vec<f64>)> = (0..4)
        .map(|k| (g.d_colat(x.coord(k).values(), Parity::Even), g.d_lon(x.coord(k).values())))
        .collect();
    let tangent = |i: usize, a: usize| -> [f64; 4] {
        let mut v = [0.0; 4];
        for (k, dk) in d.iter().enumerate() {
            v[k] = if a == 0 { dk.0[i] } else { dk.1[i] };
        }
        v
    };
    let mut e3 = Vec::with_capacity(n);
    let mut e4 = Vec::with_capacity(n);
    for i in 0..n {
        let p = x.spatial().point(i);
        let s = slope(p);
        let s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
        if !(s2 < 1.0) {
            return Err(QlmError::FrameUndefined {
                node: g.location(i),
                reason: format!("slice is not space-like (|DF|² = {s2:e})"),
            });
        }
        let c = 1.0 / (1.0 - s2).sqrt();
        e4.push([s[0] * c, s[1] * c, s[2] * c, c]);
        let nv = [nu[0].values()[i], nu[1].values()[i], nu[2].values()[i]];
        let mut v = [nv[0], nv[1], nv[2], s[0] * nv[0] + s[1] * nv[1] + s[2] * nv[2]];
        let inv = sigma.inv_at(i);
        let t = [tangent(i, 0), tangent(i, 1)];
        let pr = [mdot(&v, &t[0]), mdot(&v, &t[1])];
        let up = [inv[0] * pr[0] + inv[1] * pr[1], inv[1] * pr[0] + inv[2] * pr[1]];
        for k in 0..4 {
            v[k] -= up[0] * t[0][k] + up[1] * t[1][k];
        }
        let vv = mdot(&v, &v);
        if !(vv > 0.0) {
            return Err(QlmError::FrameUndefined {
                node: g.location(i),
                reason: "normal inside the slice degenerates".into(),
            });
        }
        let sign = if mdot(&v, &[nv[0], nv[1], nv[2], 0.0]) > 0.0 { 1.0 } else { -1.0 };
        let norm = sign / vv.sqrt();
        e3.push([v[0] * norm, v[1] * norm, v[2] * norm, v[3] * norm]);
    }
    let deriv = |e: &[[f64; 4]]| -> Vec<[[f64; 4]; 2]> {
        let mut out = vec![[[0.0; 4]; 2]; n];
        for k in 0..4 {
            let comp: Vec<f64> = e.iter().map(|v| v[k]).collect();
            let dt = g.d_colat(&comp, Parity::Even);
            let dp = g.d_lon(&comp);
            for i in 0..n {
                out[i][0][k] = dt[i];
                out[i][1][k] = dp[i];
            }
        }
        out
    };
    let de3 = deriv(&e3);
    let de4 = deriv(&e4);
    let mut k_vals = vec![0.0; n];
    let mut trp_vals = vec![0.0; n];
    let mut pe = [vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let inv = sigma.inv_at(i);
        let t = [tangent(i, 0), tangent(i, 1)];
        let contract = |de: &[[f64; 4]; 2]| {
            let m = |a: usize, b: usize| mdot(&de[a], &t[b]);
            inv[0] * m(0, 0) + inv[1] * (m(0, 1) + m(1, 0)) + inv[2] * m(1, 1)
        };
        k_vals[i] = contract(&de3[i]);
        trp_vals[i] = contract(&de4[i]);
        for a in 0..2 {
            pe[a][i] = mdot(&de4[i][a], &e3[i]);
        }
    }
    let [p1, p2] = pe;
    let data = BoundaryData {
        k: ScalarField::new(&g, k_vals)?,
        tr_p: ScalarField::new(&g, trp_vals)?,
        p_e3: CovectorField::new(&g, p1, p2)?,
    };
    Ok((data, NormalFrame::from_vectors(&g, e3, e4)))
}
