//! Real spherical harmonics sampled on a [`SphereGrid`].

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use super::grid::{Parity, SphereGrid};
use super::ScalarField;
use crate::error::{QlmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Cos,
    Sin,
}

/// One basis function `P̄_lm(cos θ) · {cos, sin}(mφ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShMode {
    pub l: usize,
    pub m: usize,
    pub kind: Kind,
}

struct Column {
    l: usize,
    table: usize,
    cos_coef: usize,
    sin_coef: Option<usize>,
}

/// Orthonormal real harmonics of degree `l_min..=l_max`, with colatitude
/// derivatives, tabulated at the grid rings.
pub struct ShBasis {
    grid: Arc<SphereGrid>,
    l_max: usize,
    modes: Vec<ShMode>,
    p: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
    columns: Vec<Vec<Column>>,
    cos_tab: Vec<Vec<f64>>,
    sin_tab: Vec<Vec<f64>>,
}

/// Node values of a synthesized expansion and its coordinate derivatives.
#[derive(Debug, Clone, Default)]
pub struct Synthesis {
    pub value: Vec<f64>,
    pub d_colat: Vec<f64>,
    pub d_lon: Vec<f64>,
}

/// Normalized associated Legendre functions `P̄_lm(cos θ)` for `0 ≤ m ≤ l ≤ l_max`,
/// indexed `[m][l - m]`.
pub fn normalized_legendre(l_max: usize, theta: f64) -> Vec<Vec<f64>> {
    let (x, s) = (theta.cos(), theta.sin());
    let mut out: Vec<Vec<f64>> = (0..=l_max).map(|m| vec![0.0; l_max + 1 - m]).collect();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[m][0] = pmm;
        if m < l_max {
            out[m][1] = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        }
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[m][l - m] = a * (x * out[m][l - m - 1] - b * out[m][l - m - 2]);
        }
    }
    out
}

impl ShBasis {
    pub fn new(grid: &Arc<SphereGrid>, l_min: usize, l_max: usize) -> Result<Self> {
        if l_max > grid.max_resolved_degree() || l_min > l_max {
            return Err(QlmError::InvalidInput(format!(
                "harmonic degrees {l_min}..={l_max} not resolvable on a {}x{} grid",
                grid.n_colat(),
                grid.n_lon()
            )));
        }
        let nc = grid.n_colat();
        let legendre: Vec<Vec<Vec<f64>>> = grid
            .colat_nodes()
            .iter()
            .map(|&t| normalized_legendre(l_max, t))
            .collect();

        let mut modes = Vec::new();
        let mut p = Vec::new();
        let mut dp = Vec::new();
        let mut columns: Vec<Vec<Column>> = (0..=l_max).map(|_| Vec::new()).collect();
        for l in l_min..=l_max {
            for m in 0..=l {
                let norm = if m == 0 { 1.0 } else { 2f64.sqrt() };
                let profile: Vec<f64> = (0..nc).map(|j| norm * legendre[j][m][l - m]).collect();
                let parity = if m % 2 == 0 { Parity::Even } else { Parity::Odd };
                let dprofile = grid.d_colat_profile(&profile, parity);
                let table = p.len();
                p.push(profile);
                dp.push(dprofile);
                let cos_coef = modes.len();
                modes.push(ShMode { l, m, kind: Kind::Cos });
                let sin_coef = if m > 0 {
                    modes.push(ShMode { l, m, kind: Kind::Sin });
                    Some(modes.len() - 1)
                } else {
                    None
                };
                columns[m].push(Column {
                    l,
                    table,
                    cos_coef,
                    sin_coef,
                });
            }
        }
        let cos_tab = (0..=l_max)
            .map(|m| grid.lon_nodes().iter().map(|&ph| (m as f64 * ph).cos()).collect())
            .collect();
        let sin_tab = (0..=l_max)
            .map(|m| grid.lon_nodes().iter().map(|&ph| (m as f64 * ph).sin()).collect())
            .collect();
        Ok(ShBasis {
            grid: grid.clone(),
            l_max,
            modes,
            p,
            dp,
            columns,
            cos_tab,
            sin_tab,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ShMode] {
        &self.modes
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    /// Node values and first derivatives of `Σ c_k Y_k`.
    pub fn synthesize(&self, coeffs: &[f64], derivatives: bool) -> Synthesis {
        let (nc, nl) = (self.grid.n_colat(), self.grid.n_lon());
        let n = nc * nl;
        let mut out = Synthesis {
            value: vec![0.0; n],
            d_colat: if derivatives { vec![0.0; n] } else { Vec::new() },
            d_lon: if derivatives { vec![0.0; n] } else { Vec::new() },
        };
        let mut a = vec![0.0; nc];
        let mut b = vec![0.0; nc];
        let mut da = vec![0.0; nc];
        let mut db = vec![0.0; nc];
        for (m, cols) in self.columns.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            a.iter_mut().for_each(|v| *v = 0.0);
            b.iter_mut().for_each(|v| *v = 0.0);
            da.iter_mut().for_each(|v| *v = 0.0);
            db.iter_mut().for_each(|v| *v = 0.0);
            let mut any = false;
            for col in cols {
                let cc = coeffs[col.cos_coef];
                let cs = col.sin_coef.map_or(0.0, |k| coeffs[k]);
                if cc == 0.0 && cs == 0.0 {
                    continue;
                }
                any = true;
                let (pt, dpt) = (&self.p[col.table], &self.dp[col.table]);
                for j in 0..nc {
                    a[j] += cc * pt[j];
                    b[j] += cs * pt[j];
                    if derivatives {
                        da[j] += cc * dpt[j];
                        db[j] += cs * dpt[j];
                    }
                }
            }
            if !any {
                continue;
            }
            let (ct, st) = (&self.cos_tab[m], &self.sin_tab[m]);
            let mf = m as f64;
            for j in 0..nc {
                let row = j * nl;
                for k in 0..nl {
                    out.value[row + k] += a[j] * ct[k] + b[j] * st[k];
                    if derivatives {
                        out.d_colat[row + k] += da[j] * ct[k] + db[j] * st[k];
                        out.d_lon[row + k] += mf * (b[j] * ct[k] - a[j] * st[k]);
                    }
                }
            }
        }
        out
    }

    /// Adjoint of [`ShBasis::synthesize`]: the coefficient gradient of
    /// `Σ_i (g_v v + g_θ ∂_θ v + g_φ ∂_φ v)_i`. Empty slices are treated as zero.
    pub fn synthesize_adjoint(&self, g_value: &[f64], g_colat: &[f64], g_lon: &[f64]) -> Vec<f64> {
        let (nc, nl) = (self.grid.n_colat(), self.grid.n_lon());
        let mut out = vec![0.0; self.modes.len()];
        let mut ga = vec![0.0; nc];
        let mut gb = vec![0.0; nc];
        let mut gda = vec![0.0; nc];
        let mut gdb = vec![0.0; nc];
        for (m, cols) in self.columns.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            let (ct, st) = (&self.cos_tab[m], &self.sin_tab[m]);
            let mf = m as f64;
            for j in 0..nc {
                let row = j * nl;
                let (mut sa, mut sb, mut sda, mut sdb) = (0.0, 0.0, 0.0, 0.0);
                for k in 0..nl {
                    let (c, s) = (ct[k], st[k]);
                    if !g_value.is_empty() {
                        let gv = g_value[row + k];
                        sa += gv * c;
                        sb += gv * s;
                    }
                    if !g_colat.is_empty() {
                        let gt = g_colat[row + k];
                        sda += gt * c;
                        sdb += gt * s;
                    }
                    if !g_lon.is_empty() {
                        let gp = g_lon[row + k];
                        sa -= mf * gp * s;
                        sb += mf * gp * c;
                    }
                }
                ga[j] = sa;
                gb[j] = sb;
                gda[j] = sda;
                gdb[j] = sdb;
            }
            for col in cols {
                let (pt, dpt) = (&self.p[col.table], &self.dp[col.table]);
                let mut vc = 0.0;
                let mut vs = 0.0;
                for j in 0..nc {
                    vc += pt[j] * ga[j] + dpt[j] * gda[j];
                    vs += pt[j] * gb[j] + dpt[j] * gdb[j];
                }
                out[col.cos_coef] = vc;
                if let Some(k) = col.sin_coef {
                    out[k] = vs;
                }
            }
        }
        out
    }

    /// Quadrature projection of node values onto the basis.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let w = self.grid.quad_weights();
        let weighted: Vec<f64> = values.iter().zip(&w).map(|(v, w)| v * w).collect();
        self.synthesize_adjoint(&weighted, &[], &[])
    }

    /// Degree of each column, for scaling.
    pub fn degree_of(&self, k: usize) -> usize {
        self.modes[k].l
    }

    #[allow(dead_code)]
    fn column_degrees(&self) -> Vec<usize> {
        self.columns.iter().flat_map(|c| c.iter().map(|c| c.l)).collect()
    }
}

/// Random band-limited field: harmonic coefficients of degree
/// `1..=l_max` drawn uniformly, with decay `1/(1 + l)²`, then scaled to the
/// requested sup-norm.
pub fn random_field<R: Rng>(
    grid: &Arc<SphereGrid>,
    l_max: usize,
    sup_norm: f64,
    rng: &mut R,
) -> Result<ScalarField> {
    let basis = ShBasis::new(grid, 1, l_max)?;
    let coeffs: Vec<f64> = basis
        .modes()
        .iter()
        .map(|md| rng.gen_range(-1.0..1.0) / (1.0 + md.l as f64).powi(2))
        .collect();
    let v = basis.synthesize(&coeffs, false).value;
    let m = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    ScalarField::new(grid, v.iter().map(|x| x * sup_norm / m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn basis_is_orthonormal_under_quadrature() {
        let g = SphereGrid::new(12, 24).unwrap();
        let b = ShBasis::new(&g, 0, 6).unwrap();
        for k in 0..b.len() {
            let mut e = vec![0.0; b.len()];
            e[k] = 1.0;
            let v = b.synthesize(&e, false).value;
            let c = b.analyze(&v);
            for (i, ci) in c.iter().enumerate() {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((ci - expect).abs() < 1e-12, "mode {k} vs {i}: {ci}");
            }
        }
    }

    #[test]
    fn derivatives_match_grid_operators() {
        let g = SphereGrid::new(16, 32).unwrap();
        let b = ShBasis::new(&g, 0, 10).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = b.synthesize(&c, true);
        let dt = g.d_colat(&s.value, Parity::Even);
        let dp = g.d_lon(&s.value);
        for i in 0..g.len() {
            assert!((dt[i] - s.d_colat[i]).abs() < 1e-10);
            assert!((dp[i] - s.d_lon[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn adjoint_identity() {
        let g = SphereGrid::new(10, 20).unwrap();
        let b = ShBasis::new(&g, 1, 7).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let c: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gv: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gt: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gp: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = b.synthesize(&c, true);
        let lhs: f64 = (0..g.len())
            .map(|i| gv[i] * s.value[i] + gt[i] * s.d_colat[i] + gp[i] * s.d_lon[i])
            .sum();
        let adj = b.synthesize_adjoint(&gv, &gt, &gp);
        let rhs: f64 = adj.iter().zip(&c).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }
}
