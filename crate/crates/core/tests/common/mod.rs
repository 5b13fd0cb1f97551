//! Oracles shared by the integration tests. Everything here is computed
//! independently of the library's own quadrature and closed forms.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use qlm_core::embed::EmbeddingR3;
use qlm_core::sphere::SphereGrid;

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// `∫ H dA` of the ellipsoid `x²/a² + y²/b² + z²/c² = 1`, with `H` the sum
/// of principal curvatures.
///
/// With `g = (x/a², y/b², z/c²)` the area element of the angular
/// parametrization is `abc sin θ |g|` and `H = Σ1/aᵢ² / |g| − Σ gᵢ²/aᵢ² / |g|³`.
/// Simpson in θ, trapezoid in φ.
pub fn ellipsoid_total_h(a: f64, b: f64, c: f64) -> f64 {
    let ax = [a, b, c];
    let inv: f64 = ax.iter().map(|v| 1.0 / (v * v)).sum();
    let n_phi = 256;
    let ring = |t: f64| {
        let mut s = 0.0;
        for k in 0..n_phi {
            let p = 2.0 * PI * k as f64 / n_phi as f64;
            let x = [a * t.sin() * p.cos(), b * t.sin() * p.sin(), c * t.cos()];
            let g: Vec<f64> = (0..3).map(|i| x[i] / (ax[i] * ax[i])).collect();
            let g2: f64 = g.iter().map(|v| v * v).sum();
            let q: f64 = (0..3).map(|i| g[i] * g[i] / (ax[i] * ax[i])).sum();
            s += inv - q / g2;
        }
        s * 2.0 * PI / n_phi as f64
    };
    a * b * c * simpson(0.0, PI, 4000, |t| t.sin() * ring(t))
}

/// Liu–Yau type mass of the areal-radius-`r` sphere in the time-symmetric
/// Schwarzschild slice of mass `m` (G = 1): `r (1 − √(1 − 2m/r))`.
pub fn schwarzschild_mass(m: f64, r: f64) -> f64 {
    r * (1.0 - (1.0 - 2.0 * m / r).sqrt())
}

pub fn ellipsoid(grid: &Arc<SphereGrid>, a: f64, b: f64, c: f64) -> EmbeddingR3 {
    EmbeddingR3::from_fn(grid, |t, p| [a * t.sin() * p.cos(), b * t.sin() * p.sin(), c * t.cos()])
}

/// Rotation about the axis `n` (unit) by `angle`.
pub fn rotation(n: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let k = [[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let kk: f64 = (0..3).map(|l| k[i][l] * k[l][j]).sum();
            r[i][j] = if i == j { 1.0 } else { 0.0 } + s * k[i][j] + (1.0 - c) * kk;
        }
    }
    r
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
