use super::field::{check_finite, CovectorField, MetricField, ScalarField, SymTensorField, VectorField};
use super::grid::{same_grid, Parity};
use crate::error::{QlmError, Result};

fn ensure_same(metric: &MetricField, grid: &std::sync::Arc<super::SphereGrid>) -> Result<()> {
    if same_grid(metric.grid(), grid) {
        Ok(())
    } else {
        Err(QlmError::GridMismatch)
    }
}

/// Partial derivatives `∂_a f` of a scalar.
pub fn differential(f: &ScalarField) -> CovectorField {
    let g = f.grid();
    CovectorField::from_raw(g, g.d_colat(f.values(), Parity::Even), g.d_lon(f.values()))
}

/// `∂_a f` together with the raised vector `σ^{ab} ∂_b f`.
pub fn gradient(metric: &MetricField, f: &ScalarField) -> Result<(CovectorField, VectorField)> {
    ensure_same(metric, f.grid())?;
    check_finite(f.grid(), f.values(), "gradient input")?;
    let df = differential(f);
    let v = raise(metric, &df);
    Ok((df, v))
}

pub fn raise(metric: &MetricField, w: &CovectorField) -> VectorField {
    let [i11, i12, i22] = metric.inverse();
    let (w1, w2) = (w.comp(0), w.comp(1));
    let n = w1.len();
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    for i in 0..n {
        v1[i] = i11[i] * w1[i] + i12[i] * w2[i];
        v2[i] = i12[i] * w1[i] + i22[i] * w2[i];
    }
    VectorField::from_raw(w.grid(), v1, v2)
}

pub fn lower(metric: &MetricField, v: &VectorField) -> CovectorField {
    let (v1, v2) = (v.comp(0), v.comp(1));
    let n = v1.len();
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for i in 0..n {
        let [e, f, g] = metric.at(i);
        w1[i] = e * v1[i] + f * v2[i];
        w2[i] = f * v1[i] + g * v2[i];
    }
    CovectorField::from_raw(v.grid(), w1, w2)
}

/// `w(v)` node-wise.
pub fn pair(w: &CovectorField, v: &VectorField) -> ScalarField {
    let vals = (0..w.grid().len())
        .map(|i| w.comp(0)[i] * v.comp(0)[i] + w.comp(1)[i] * v.comp(1)[i])
        .collect();
    ScalarField::from_raw(w.grid(), vals)
}

/// `|w|²_σ` of a covector.
pub fn norm_sq(metric: &MetricField, w: &CovectorField) -> ScalarField {
    let vals = (0..w.grid().len())
        .map(|i| {
            let [a, b, c] = metric.inv_at(i);
            let [w1, w2] = w.at(i);
            a * w1 * w1 + 2.0 * b * w1 * w2 + c * w2 * w2
        })
        .collect();
    ScalarField::from_raw(w.grid(), vals)
}

/// `σ^{ab} u_a w_b`.
pub fn inner(metric: &MetricField, u: &CovectorField, w: &CovectorField) -> ScalarField {
    let vals = (0..w.grid().len())
        .map(|i| {
            let [a, b, c] = metric.inv_at(i);
            let [u1, u2] = u.at(i);
            let [w1, w2] = w.at(i);
            a * u1 * w1 + b * (u1 * w2 + u2 * w1) + c * u2 * w2
        })
        .collect();
    ScalarField::from_raw(w.grid(), vals)
}

/// Covariant Hessian `∇_a∇_b f = ∂_a∂_b f − Γ^c_ab ∂_c f`.
pub fn hessian(metric: &MetricField, f: &ScalarField) -> Result<SymTensorField> {
    ensure_same(metric, f.grid())?;
    check_finite(f.grid(), f.values(), "hessian input")?;
    let g = f.grid();
    let ft = g.d_colat(f.values(), Parity::Even);
    let fp = g.d_lon(f.values());
    let ftt = g.d_colat(&ft, Parity::Odd);
    let ftp = g.d_lon(&ft);
    let fpp = g.d_lon(&fp);
    let gam = &metric.cache().christoffel;
    let n = g.len();
    let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let second = [ftt[i], ftp[i], fpp[i]];
        for ab in 0..3 {
            comps[ab][i] = second[ab] - gam[0][ab][i] * ft[i] - gam[1][ab][i] * fp[i];
        }
    }
    Ok(SymTensorField::from_raw(g, comps))
}

/// `σ^{ab} T_ab`.
pub fn trace(metric: &MetricField, t: &SymTensorField) -> ScalarField {
    let vals = (0..t.grid().len())
        .map(|i| {
            let [a, b, c] = metric.inv_at(i);
            let [t11, t12, t22] = t.at(i);
            a * t11 + 2.0 * b * t12 + c * t22
        })
        .collect();
    ScalarField::from_raw(t.grid(), vals)
}

/// `det(T) / det(σ)`, the determinant of `T` in a σ-orthonormal frame.
pub fn frame_determinant(metric: &MetricField, t: &SymTensorField) -> ScalarField {
    let det = metric.det();
    let vals = (0..t.grid().len())
        .map(|i| {
            let [t11, t12, t22] = t.at(i);
            (t11 * t22 - t12 * t12) / det[i]
        })
        .collect();
    ScalarField::from_raw(t.grid(), vals)
}

pub fn laplacian(metric: &MetricField, f: &ScalarField) -> Result<ScalarField> {
    let h = hessian(metric, f)?;
    Ok(trace(metric, &h))
}

/// Gauss curvature from the Brioschi formula.
pub fn gauss_curvature(metric: &MetricField) -> ScalarField {
    let g = metric.grid();
    let t = metric.tensor();
    let c = metric.cache();
    let (e, f, gg) = (t.comp(0), t.comp(1), t.comp(2));
    let [[eu, fu, gu], [ev, fv, gv]] = &c.dmetric;
    let evv = g.d_lon(ev);
    let fuv = g.d_lon(fu);
    let guu = g.d_colat(gu, Parity::Odd);
    let n = g.len();
    let vals = (0..n)
        .map(|i| {
            let (e, f, gg) = (e[i], f[i], gg[i]);
            let a11 = -0.5 * evv[i] + fuv[i] - 0.5 * guu[i];
            let a12 = 0.5 * eu[i];
            let a13 = fu[i] - 0.5 * ev[i];
            let a21 = fv[i] - 0.5 * gu[i];
            let a31 = 0.5 * gv[i];
            let d1 = a11 * (e * gg - f * f) - a12 * (a21 * gg - f * a31) + a13 * (a21 * f - e * a31);
            let b12 = 0.5 * ev[i];
            let b13 = 0.5 * gu[i];
            let d2 = -b12 * (b12 * gg - f * b13) + b13 * (b12 * f - e * b13);
            let det = e * gg - f * f;
            (d1 - d2) / (det * det)
        })
        .collect();
    ScalarField::from_raw(g, vals)
}

/// `∫_Σ f dv_σ`.
pub fn integrate(metric: &MetricField, f: &ScalarField) -> Result<f64> {
    ensure_same(metric, f.grid())?;
    Ok(integrate_values(metric, f.values()))
}

pub(crate) fn integrate_values(metric: &MetricField, values: &[f64]) -> f64 {
    let dens = metric.density();
    let prod: Vec<f64> = values.iter().zip(dens).map(|(a, b)| a * b).collect();
    metric.grid().quadrature(&prod)
}

/// Metric divergence `(1/√σ) ∂_a(√σ v^a)`.
pub fn divergence(metric: &MetricField, v: &VectorField) -> Result<ScalarField> {
    ensure_same(metric, v.grid())?;
    check_finite(v.grid(), v.comp(0), "divergence input")?;
    check_finite(v.grid(), v.comp(1), "divergence input")?;
    let g = v.grid();
    let sq: Vec<f64> = metric.det().iter().map(|d| d.sqrt()).collect();
    let p1: Vec<f64> = sq.iter().zip(v.comp(0)).map(|(s, x)| s * x).collect();
    let p2: Vec<f64> = sq.iter().zip(v.comp(1)).map(|(s, x)| s * x).collect();
    // √σ carries odd parity, so √σ v^θ is even and √σ v^φ is odd
    let d1 = g.d_colat(&p1, Parity::Even);
    let d2 = g.d_lon(&p2);
    let vals = (0..g.len()).map(|i| (d1[i] + d2[i]) / sq[i]).collect();
    Ok(ScalarField::from_raw(g, vals))
}

/// `∇_a T^{ab}` of a symmetric contravariant tensor, returned as a vector.
pub fn tensor_divergence(metric: &MetricField, t_up: &SymTensorField) -> VectorField {
    let g = metric.grid();
    let n = g.len();
    let gam = &metric.cache().christoffel;
    let sq: Vec<f64> = metric.det().iter().map(|d| d.sqrt()).collect();
    let weighted = |c: usize| -> Vec<f64> { (0..n).map(|i| sq[i] * t_up.comp(c)[i]).collect() };
    let (w11, w12, w22) = (weighted(0), weighted(1), weighted(2));
    // b = θ: ∂_θ(√σ T^{θθ}) + ∂_φ(√σ T^{φθ}); parities: √σ T^11 odd, √σ T^12 even, √σ T^22 odd
    let d_b1 = {
        let a = g.d_colat(&w11, Parity::Odd);
        let b = g.d_lon(&w12);
        (0..n).map(|i| a[i] + b[i]).collect::<Vec<_>>()
    };
    let d_b2 = {
        let a = g.d_colat(&w12, Parity::Even);
        let b = g.d_lon(&w22);
        (0..n).map(|i| a[i] + b[i]).collect::<Vec<_>>()
    };
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    for i in 0..n {
        let t = t_up.at(i);
        // Γ^b_ac T^{ac}
        let gt = |b: usize| gam[b][0][i] * t[0] + 2.0 * gam[b][1][i] * t[1] + gam[b][2][i] * t[2];
        v1[i] = d_b1[i] / sq[i] + gt(0);
        v2[i] = d_b2[i] / sq[i] + gt(1);
    }
    VectorField::from_raw(g, v1, v2)
}
