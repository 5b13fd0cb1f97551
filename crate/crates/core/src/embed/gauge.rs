use nalgebra::{Matrix3, Vector3};

use super::EmbeddingR3;
use crate::error::Result;
use crate::sphere::integrate_values;

/// Fixes the rigid-motion freedom of `x`: area-weighted centroid at the
/// origin, second-moment axes along the coordinate axes with descending
/// eigenvalues. Axis signs follow the third moment, then the largest
/// component, and the frame is kept right-handed.
pub fn apply_gauge(x: &EmbeddingR3) -> Result<(EmbeddingR3, String)> {
    let metric = x.induced_metric()?;
    let area = metric.area();
    let g = x.grid();
    let mut centroid = [0.0; 3];
    for (k, c) in centroid.iter_mut().enumerate() {
        *c = integrate_values(&metric, x.coord(k).values()) / area;
    }
    let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let shifted = x.transformed(&identity, [-centroid[0], -centroid[1], -centroid[2]]);

    let mut m = Matrix3::zeros();
    for a in 0..3 {
        for b in a..3 {
            let prod: Vec<f64> = shifted
                .coord(a)
                .values()
                .iter()
                .zip(shifted.coord(b).values())
                .map(|(p, q)| p * q)
                .collect();
            let v = integrate_values(&metric, &prod) / area;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let ev: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let scale = ev[0].abs().max(f64::MIN_POSITIVE);
    if (ev[0] - ev[2]) <= 1e-10 * scale {
        return Ok((shifted, describe(centroid, false)));
    }

    let mut axes: Vec<Vector3<f64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    for axis in axes.iter_mut().take(2) {
        let proj: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = shifted.point(i);
                (axis[0] * p[0] + axis[1] * p[1] + axis[2] * p[2]).powi(3)
            })
            .collect();
        let skew = integrate_values(&metric, &proj) / area;
        let flip = if skew.abs() > 1e-8 * scale.powf(1.5) {
            skew < 0.0
        } else {
            let big = (0..3).max_by(|&i, &j| axis[i].abs().total_cmp(&axis[j].abs())).unwrap();
            axis[big] < 0.0
        };
        if flip {
            *axis = -*axis;
        }
    }
    axes[2] = axes[0].cross(&axes[1]);
    let mut rot = [[0.0; 3]; 3];
    for (r, axis) in axes.iter().enumerate() {
        for c in 0..3 {
            rot[r][c] = axis[c];
        }
    }
    Ok((shifted.transformed(&rot, [0.0; 3]), describe(centroid, true)))
}

fn describe(centroid: [f64; 3], rotated: bool) -> String {
    format!(
        "centroid ({:.3e}, {:.3e}, {:.3e}) moved to origin; {}",
        centroid[0],
        centroid[1],
        centroid[2],
        if rotated {
            "second-moment axes aligned, descending"
        } else {
            "isotropic second moment, no rotation"
        }
    )
}
