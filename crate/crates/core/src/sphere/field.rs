use std::sync::{Arc, OnceLock};

use super::grid::{same_grid, Parity, SphereGrid};
use crate::error::{QlmError, Result};

pub(crate) fn check_finite(grid: &SphereGrid, values: &[f64], what: &str) -> Result<()> {
    if values.len() != grid.len() {
        return Err(QlmError::InvalidInput(format!(
            "{what}: expected {} values, got {}",
            grid.len(),
            values.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(QlmError::InvalidInput(format!(
            "{what}: non-finite value at {}",
            grid.location(i)
        )));
    }
    Ok(())
}

/// One real value per node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        check_finite(grid, &values, "scalar field")?;
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn constant(grid: &Arc<SphereGrid>, c: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<SphereGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: grid.sample(f),
        }
    }

    pub(crate) fn from_raw(grid: &Arc<SphereGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert!(same_grid(&self.grid, &other.grid));
        ScalarField::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// Covariant components `(w_θ, w_φ)` per node.
#[derive(Debug, Clone)]
pub struct CovectorField {
    grid: Arc<SphereGrid>,
    comps: [Vec<f64>; 2],
}

impl CovectorField {
    pub fn new(grid: &Arc<SphereGrid>, c1: Vec<f64>, c2: Vec<f64>) -> Result<Self> {
        check_finite(grid, &c1, "covector component 1")?;
        check_finite(grid, &c2, "covector component 2")?;
        Ok(CovectorField {
            grid: grid.clone(),
            comps: [c1, c2],
        })
    }

    pub fn zeros(grid: &Arc<SphereGrid>) -> Self {
        CovectorField {
            grid: grid.clone(),
            comps: [vec![0.0; grid.len()], vec![0.0; grid.len()]],
        }
    }

    pub(crate) fn from_raw(grid: &Arc<SphereGrid>, c1: Vec<f64>, c2: Vec<f64>) -> Self {
        CovectorField {
            grid: grid.clone(),
            comps: [c1, c2],
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn comp(&self, a: usize) -> &[f64] {
        &self.comps[a]
    }

    pub fn at(&self, i: usize) -> [f64; 2] {
        [self.comps[0][i], self.comps[1][i]]
    }

    pub fn sub(&self, other: &CovectorField) -> CovectorField {
        let c = |a: usize| -> Vec<f64> {
            self.comps[a]
                .iter()
                .zip(&other.comps[a])
                .map(|(x, y)| x - y)
                .collect()
        };
        CovectorField::from_raw(&self.grid, c(0), c(1))
    }

    pub fn scale(&self, s: &[f64]) -> CovectorField {
        let c = |a: usize| -> Vec<f64> {
            self.comps[a].iter().zip(s).map(|(x, y)| x * y).collect()
        };
        CovectorField::from_raw(&self.grid, c(0), c(1))
    }

    /// Parities of the two components.
    pub const PARITY: [Parity; 2] = [Parity::Odd, Parity::Even];
}

/// Contravariant components `(v^θ, v^φ)` per node.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<SphereGrid>,
    comps: [Vec<f64>; 2],
}

impl VectorField {
    pub fn new(grid: &Arc<SphereGrid>, c1: Vec<f64>, c2: Vec<f64>) -> Result<Self> {
        check_finite(grid, &c1, "vector component 1")?;
        check_finite(grid, &c2, "vector component 2")?;
        Ok(VectorField {
            grid: grid.clone(),
            comps: [c1, c2],
        })
    }

    pub(crate) fn from_raw(grid: &Arc<SphereGrid>, c1: Vec<f64>, c2: Vec<f64>) -> Self {
        VectorField {
            grid: grid.clone(),
            comps: [c1, c2],
        }
    }

    pub fn zeros(grid: &Arc<SphereGrid>) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()], vec![0.0; grid.len()])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn comp(&self, a: usize) -> &[f64] {
        &self.comps[a]
    }

    pub fn at(&self, i: usize) -> [f64; 2] {
        [self.comps[0][i], self.comps[1][i]]
    }

    pub fn axpy(&self, s: f64, other: &VectorField) -> VectorField {
        let c = |a: usize| -> Vec<f64> {
            self.comps[a]
                .iter()
                .zip(&other.comps[a])
                .map(|(x, y)| x + s * y)
                .collect()
        };
        VectorField::from_raw(&self.grid, c(0), c(1))
    }

    pub fn scale(&self, s: &[f64]) -> VectorField {
        let c = |a: usize| -> Vec<f64> {
            self.comps[a].iter().zip(s).map(|(x, y)| x * y).collect()
        };
        VectorField::from_raw(&self.grid, c(0), c(1))
    }

    pub const PARITY: [Parity; 2] = [Parity::Odd, Parity::Even];
}

/// Symmetric 2-tensor, components `(11, 12, 22)` with 1 = θ, 2 = φ.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    grid: Arc<SphereGrid>,
    comps: [Vec<f64>; 3],
}

impl SymTensorField {
    pub fn new(grid: &Arc<SphereGrid>, c11: Vec<f64>, c12: Vec<f64>, c22: Vec<f64>) -> Result<Self> {
        check_finite(grid, &c11, "tensor component 11")?;
        check_finite(grid, &c12, "tensor component 12")?;
        check_finite(grid, &c22, "tensor component 22")?;
        Ok(SymTensorField {
            grid: grid.clone(),
            comps: [c11, c12, c22],
        })
    }

    pub(crate) fn from_raw(grid: &Arc<SphereGrid>, comps: [Vec<f64>; 3]) -> Self {
        SymTensorField {
            grid: grid.clone(),
            comps,
        }
    }

    pub fn zeros(grid: &Arc<SphereGrid>) -> Self {
        let z = vec![0.0; grid.len()];
        Self::from_raw(grid, [z.clone(), z.clone(), z])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    /// Component by storage index 0 = 11, 1 = 12, 2 = 22.
    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn at(&self, i: usize) -> [f64; 3] {
        [self.comps[0][i], self.comps[1][i], self.comps[2][i]]
    }

    pub fn get(&self, i: usize, a: usize, b: usize) -> f64 {
        self.comps[a + b][i]
    }

    pub fn combine(&self, s: f64, other: &SymTensorField, t: f64) -> SymTensorField {
        let c = |k: usize| -> Vec<f64> {
            self.comps[k]
                .iter()
                .zip(&other.comps[k])
                .map(|(x, y)| s * x + t * y)
                .collect()
        };
        SymTensorField::from_raw(&self.grid, [c(0), c(1), c(2)])
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn into_comps(self) -> [Vec<f64>; 3] {
        self.comps
    }

    pub const PARITY: [Parity; 3] = [Parity::Even, Parity::Odd, Parity::Even];
}

/// Pointwise data derived from a metric, computed once on demand.
#[derive(Debug)]
pub(crate) struct MetricCache {
    pub det: Vec<f64>,
    pub inv: [Vec<f64>; 3],
    /// `√det σ / sin θ`: density of `dv_σ` relative to the round measure.
    pub density: Vec<f64>,
    /// `Γ^c_ab` indexed `[c][ab]` with `ab` in (11, 12, 22).
    pub christoffel: [[Vec<f64>; 3]; 2],
    /// First derivatives `∂_d σ_ab` indexed `[d][ab]`.
    pub dmetric: [[Vec<f64>; 3]; 2],
}

/// Riemannian metric on the grid, positive definite at every node.
#[derive(Debug, Clone)]
pub struct MetricField {
    tensor: SymTensorField,
    cache: Arc<OnceLock<MetricCache>>,
}

impl MetricField {
    pub fn new(tensor: SymTensorField) -> Result<Self> {
        for i in 0..tensor.grid.len() {
            let [e, f, g] = tensor.at(i);
            if !(e > 0.0 && e * g - f * f > 0.0) {
                return Err(QlmError::SingularMetric(tensor.grid.location(i)));
            }
        }
        Ok(MetricField {
            tensor,
            cache: Arc::new(OnceLock::new()),
        })
    }

    /// Round metric of radius `r`.
    pub fn round(grid: &Arc<SphereGrid>, r: f64) -> Self {
        let z = vec![0.0; grid.len()];
        let e = vec![r * r; grid.len()];
        let g = grid.sample(|t, _| r * r * t.sin() * t.sin());
        MetricField::new(SymTensorField::from_raw(grid, [e, z, g])).expect("round metric")
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.tensor.grid
    }

    pub fn tensor(&self) -> &SymTensorField {
        &self.tensor
    }

    pub fn at(&self, i: usize) -> [f64; 3] {
        self.tensor.at(i)
    }

    pub(crate) fn cache(&self) -> &MetricCache {
        self.cache.get_or_init(|| build_cache(&self.tensor))
    }

    pub fn det(&self) -> &[f64] {
        &self.cache().det
    }

    /// Inverse metric components `(σ^11, σ^12, σ^22)`.
    pub fn inverse(&self) -> [&[f64]; 3] {
        let c = self.cache();
        [&c.inv[0], &c.inv[1], &c.inv[2]]
    }

    pub fn inv_at(&self, i: usize) -> [f64; 3] {
        let c = self.cache();
        [c.inv[0][i], c.inv[1][i], c.inv[2][i]]
    }

    /// Area density relative to the round measure `sin θ dθ dφ`.
    pub fn density(&self) -> &[f64] {
        &self.cache().density
    }

    pub fn area(&self) -> f64 {
        self.tensor.grid.quadrature(self.density())
    }
}

fn build_cache(t: &SymTensorField) -> MetricCache {
    let grid = &t.grid;
    let n = grid.len();
    let mut det = vec![0.0; n];
    let mut inv = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut density = vec![0.0; n];
    let nl = grid.n_lon();
    for i in 0..n {
        let [e, f, g] = t.at(i);
        let d = e * g - f * f;
        det[i] = d;
        inv[0][i] = g / d;
        inv[1][i] = -f / d;
        inv[2][i] = e / d;
        density[i] = d.sqrt() / grid.sin_colat()[i / nl];
    }
    let dmetric: [[Vec<f64>; 3]; 2] = [
        [
            grid.d_colat(&t.comps[0], Parity::Even),
            grid.d_colat(&t.comps[1], Parity::Odd),
            grid.d_colat(&t.comps[2], Parity::Even),
        ],
        [
            grid.d_lon(&t.comps[0]),
            grid.d_lon(&t.comps[1]),
            grid.d_lon(&t.comps[2]),
        ],
    ];
    // Γ_{d,ab} = ½(∂_a σ_bd + ∂_b σ_ad − ∂_d σ_ab)
    let sym = |a: usize, b: usize| a + b;
    let mut christoffel: [[Vec<f64>; 3]; 2] = Default::default();
    for c in 0..2 {
        for ab in 0..3 {
            christoffel[c][ab] = vec![0.0; n];
        }
    }
    for i in 0..n {
        let dm = |d: usize, a: usize, b: usize| dmetric[d][sym(a, b)][i];
        let inv_ij = |a: usize, b: usize| inv[sym(a, b)][i];
        for (ab, (a, b)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
            let (a, b) = (*a, *b);
            let lower =
                |d: usize| 0.5 * (dm(a, b, d) + dm(b, a, d) - dm(d, a, b));
            let l0 = lower(0);
            let l1 = lower(1);
            for c in 0..2 {
                christoffel[c][ab][i] = inv_ij(c, 0) * l0 + inv_ij(c, 1) * l1;
            }
        }
    }
    MetricCache {
        det,
        inv,
        density,
        christoffel,
        dmetric,
    }
}
