use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{NodeLocation, QlmError, Result};

/// Behaviour of a coordinate component under the antipodal reflection of the
/// doubled colatitude circle, `(θ, φ) -> (-θ, φ + π)`.
///
/// Scalars and `φ`-indexed components are `Even`; every `θ` index flips the
/// sign. A product of components multiplies parities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Gauss–Legendre (in `cos θ`) by uniform-longitude product grid on the
/// sphere. No node sits on a pole.
///
/// Node order is colatitude-major: index `j * n_lon + k`.
pub struct SphereGrid {
    n_colat: usize,
    n_lon: usize,
    colat: Vec<f64>,
    cos_colat: Vec<f64>,
    sin_colat: Vec<f64>,
    lon: Vec<f64>,
    ring_weights: Vec<f64>,
    // d/dθ on samples of an even (cosine series) / odd (sine series) function
    d_even: DMatrix<f64>,
    d_odd: DMatrix<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphereGrid")
            .field("n_colat", &self.n_colat)
            .field("n_lon", &self.n_lon)
            .finish()
    }
}

/// Gauss–Legendre abscissae (descending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

impl SphereGrid {
    pub fn new(n_colat: usize, n_lon: usize) -> Result<Arc<SphereGrid>> {
        if n_colat < 8 {
            return Err(QlmError::InvalidInput(format!(
                "n_colat must be at least 8, got {n_colat}"
            )));
        }
        if n_lon < 8 || !n_lon.is_multiple_of(2) {
            return Err(QlmError::InvalidInput(format!(
                "n_lon must be even and at least 8, got {n_lon}"
            )));
        }
        let (x, w) = gauss_legendre(n_colat);
        let colat: Vec<f64> = x.iter().map(|v| v.acos()).collect();
        let sin_colat = colat.iter().map(|t| t.sin()).collect();
        let lon = (0..n_lon)
            .map(|k| 2.0 * PI * k as f64 / n_lon as f64)
            .collect();

        let n = n_colat;
        let basis = |odd: bool| {
            let mut b = DMatrix::zeros(n, n);
            let mut db = DMatrix::zeros(n, n);
            for j in 0..n {
                for k in 0..n {
                    if odd {
                        let kk = (k + 1) as f64;
                        b[(j, k)] = (kk * colat[j]).sin();
                        db[(j, k)] = kk * (kk * colat[j]).cos();
                    } else {
                        let kk = k as f64;
                        b[(j, k)] = (kk * colat[j]).cos();
                        db[(j, k)] = -kk * (kk * colat[j]).sin();
                    }
                }
            }
            (b, db)
        };
        let diff_matrix = |odd: bool| -> Result<DMatrix<f64>> {
            let (b, db) = basis(odd);
            // D = dB * B^{-1}, computed as (B^{-T} dB^T)^T
            let lu = b.transpose().lu();
            let sol = lu.solve(&db.transpose()).ok_or_else(|| {
                QlmError::InvalidInput("colatitude interpolation matrix is singular".into())
            })?;
            Ok(sol.transpose())
        };
        let d_even = diff_matrix(false)?;
        let d_odd = diff_matrix(true)?;

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_lon);
        let ifft = planner.plan_fft_inverse(n_lon);

        Ok(Arc::new(SphereGrid {
            n_colat,
            n_lon,
            cos_colat: x,
            colat,
            sin_colat,
            lon,
            ring_weights: w,
            d_even,
            d_odd,
            fft,
            ifft,
        }))
    }

    pub fn n_colat(&self) -> usize {
        self.n_colat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn len(&self) -> usize {
        self.n_colat * self.n_lon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn colat_nodes(&self) -> &[f64] {
        &self.colat
    }

    pub fn lon_nodes(&self) -> &[f64] {
        &self.lon
    }

    pub fn sin_colat(&self) -> &[f64] {
        &self.sin_colat
    }

    pub fn cos_colat(&self) -> &[f64] {
        &self.cos_colat
    }

    /// Gauss–Legendre weight of ring `j` (sums to 2 over rings).
    pub fn ring_weight(&self, j: usize) -> f64 {
        self.ring_weights[j]
    }

    /// Quadrature weight of node `i` for the round measure `sin θ dθ dφ`.
    pub fn quad_weight(&self, i: usize) -> f64 {
        self.ring_weights[i / self.n_lon] * 2.0 * PI / self.n_lon as f64
    }

    pub fn quad_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.quad_weight(i)).collect()
    }

    /// `(θ, φ)` of node `i`.
    pub fn coords(&self, i: usize) -> (f64, f64) {
        (self.colat[i / self.n_lon], self.lon[i % self.n_lon])
    }

    pub fn location(&self, i: usize) -> NodeLocation {
        let (colat, lon) = self.coords(i);
        NodeLocation {
            colat_index: i / self.n_lon,
            lon_index: i % self.n_lon,
            colat,
            lon,
        }
    }

    /// Evaluates `f(θ, φ)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (t, p) = self.coords(i);
                f(t, p)
            })
            .collect()
    }

    /// Largest degree whose spherical harmonics the grid resolves exactly in
    /// both directions.
    pub fn max_resolved_degree(&self) -> usize {
        (self.n_colat - 1).min(self.n_lon / 2 - 1)
    }

    fn ring_spectra(&self, values: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        for ring in buf.chunks_mut(self.n_lon) {
            self.fft.process(ring);
        }
        buf
    }

    fn ring_synthesis(&self, mut spectra: Vec<Complex<f64>>) -> Vec<f64> {
        let scale = 1.0 / self.n_lon as f64;
        for ring in spectra.chunks_mut(self.n_lon) {
            self.ifft.process(ring);
        }
        spectra.iter().map(|c| c.re * scale).collect()
    }

    fn signed_wavenumber(&self, m: usize) -> i64 {
        if m <= self.n_lon / 2 {
            m as i64
        } else {
            m as i64 - self.n_lon as i64
        }
    }

    /// Spectral `∂/∂φ` of node values.
    pub fn d_lon(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.len());
        // Constant rings differentiate to exactly zero.
        let shifted: Vec<f64> = values
            .chunks(self.n_lon)
            .flat_map(|ring| ring.iter().map(move |v| v - ring[0]))
            .collect();
        let mut spec = self.ring_spectra(&shifted);
        let nyquist = self.n_lon / 2;
        for ring in spec.chunks_mut(self.n_lon) {
            for (m, c) in ring.iter_mut().enumerate() {
                if m == nyquist {
                    *c = Complex::new(0.0, 0.0);
                } else {
                    let k = self.signed_wavenumber(m) as f64;
                    *c = Complex::new(-k * c.im, k * c.re);
                }
            }
        }
        self.ring_synthesis(spec)
    }

    /// Spectral `∂/∂θ` of node values of a component with the given parity.
    pub fn d_colat(&self, values: &[f64], parity: Parity) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.len());
        let spec = match parity {
            Parity::Even => self.ring_spectra(&values.iter().map(|v| v - values[0]).collect::<Vec<_>>()),
            Parity::Odd => self.ring_spectra(values),
        };
        let (nc, nl) = (self.n_colat, self.n_lon);
        let mut out = vec![Complex::new(0.0, 0.0); nc * nl];
        let mut col_re = vec![0.0; nc];
        let mut col_im = vec![0.0; nc];
        for m in 0..nl {
            let mode_parity = if self.signed_wavenumber(m) % 2 == 0 {
                parity
            } else {
                parity.flip()
            };
            let d = match mode_parity {
                Parity::Even => &self.d_even,
                Parity::Odd => &self.d_odd,
            };
            for j in 0..nc {
                let c = spec[j * nl + m];
                col_re[j] = c.re;
                col_im[j] = c.im;
            }
            for j in 0..nc {
                let mut re = 0.0;
                let mut im = 0.0;
                for k in 0..nc {
                    let djk = d[(j, k)];
                    re += djk * col_re[k];
                    im += djk * col_im[k];
                }
                out[j * nl + m] = Complex::new(re, im);
            }
        }
        self.ring_synthesis(out)
    }

    /// Applies the colatitude differentiation matrix for one ring profile of a
    /// fixed-parity function of `θ` alone.
    pub fn d_colat_profile(&self, profile: &[f64], parity: Parity) -> Vec<f64> {
        let d = match parity {
            Parity::Even => &self.d_even,
            Parity::Odd => &self.d_odd,
        };
        (0..self.n_colat)
            .map(|j| (0..self.n_colat).map(|k| d[(j, k)] * profile[k]).sum())
            .collect()
    }

    /// Quadrature of node values against the round measure.
    pub fn quadrature(&self, values: &[f64]) -> f64 {
        values
            .chunks(self.n_lon)
            .zip(&self.ring_weights)
            .map(|(ring, w)| w * ring.iter().sum::<f64>())
            .sum::<f64>()
            * 2.0
            * PI
            / self.n_lon as f64
    }
}

/// Two grids are the same grid when they are the same object, or have the
/// same shape (every grid of a given shape is identical).
pub fn same_grid(a: &Arc<SphereGrid>, b: &Arc<SphereGrid>) -> bool {
    Arc::ptr_eq(a, b) || (a.n_colat == b.n_colat && a.n_lon == b.n_lon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_round_measure() {
        for &(nc, nl) in &[(8, 8), (16, 32), (48, 96), (101, 64)] {
            let g = SphereGrid::new(nc, nl).unwrap();
            let total: f64 = g.quad_weights().iter().sum();
            assert!((total / (4.0 * PI) - 1.0).abs() <= 1e-12, "{nc}x{nl}: {total}");
        }
    }

    #[test]
    fn nodes_avoid_poles() {
        let g = SphereGrid::new(16, 32).unwrap();
        assert!(g.colat_nodes().iter().all(|&t| t > 0.0 && t < PI));
        assert!(g.colat_nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SphereGrid::new(7, 16).is_err());
        assert!(SphereGrid::new(8, 6).is_err());
        assert!(SphereGrid::new(8, 15).is_err());
    }

    #[test]
    fn colatitude_derivative_of_odd_component() {
        // sin θ cos φ is a scalar; its θ-derivative cos θ cos φ is odd
        let g = SphereGrid::new(16, 32).unwrap();
        let f = g.sample(|t, p| t.sin() * p.cos());
        let df = g.d_colat(&f, Parity::Even);
        let ddf = g.d_colat(&df, Parity::Odd);
        for i in 0..g.len() {
            let (t, p) = g.coords(i);
            assert!((df[i] - t.cos() * p.cos()).abs() < 1e-12);
            assert!((ddf[i] + t.sin() * p.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn longitude_derivative() {
        let g = SphereGrid::new(8, 16).unwrap();
        let f = g.sample(|t, p| t.sin() * (3.0 * p).sin());
        let df = g.d_lon(&f);
        for i in 0..g.len() {
            let (t, p) = g.coords(i);
            assert!((df[i] - 3.0 * t.sin() * (3.0 * p).cos()).abs() < 1e-12);
        }
    }
}
