//! Physical surface data for which energies and masses are evaluated.

use crate::error::{QlmError, Result};
use crate::sphere::{same_grid, CovectorField, MetricField, ScalarField};

/// Extrinsic data of the surface inside a space-like hypersurface `Ω` it
/// bounds: mean curvature `k` w.r.t. the outward normal `e₃` tangent to `Ω`,
/// the tangential trace of the second fundamental form `p` of `Ω`, and the
/// mixed components `p(e₃, ∂_a)`.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub k: ScalarField,
    pub tr_p: ScalarField,
    pub p_e3: CovectorField,
}

/// `(σ, |H|, α_{ê₃})` of a space-like surface with space-like mean curvature,
/// `ê₃ = −H/|H|`.
#[derive(Debug, Clone)]
pub struct PhysicalSurfaceData {
    pub sigma: MetricField,
    pub h_norm: ScalarField,
    pub alpha_hat: CovectorField,
    pub provenance: String,
    pub boundary: Option<BoundaryData>,
}

impl PhysicalSurfaceData {
    pub fn new(
        sigma: MetricField,
        h_norm: ScalarField,
        alpha_hat: CovectorField,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let g = sigma.grid();
        if !same_grid(g, h_norm.grid()) || !same_grid(g, alpha_hat.grid()) {
            return Err(QlmError::GridMismatch);
        }
        Ok(PhysicalSurfaceData {
            sigma,
            h_norm,
            alpha_hat,
            provenance: provenance.into(),
            boundary: None,
        })
    }

    pub fn with_boundary(mut self, boundary: BoundaryData) -> Result<Self> {
        let g = self.sigma.grid();
        if !same_grid(g, boundary.k.grid()) || !same_grid(g, boundary.tr_p.grid()) || !same_grid(g, boundary.p_e3.grid())
        {
            return Err(QlmError::GridMismatch);
        }
        self.boundary = Some(boundary);
        Ok(self)
    }

    /// Rejects data whose mean curvature is not strictly positive.
    pub fn require_positive_mean_curvature(&self) -> Result<()> {
        let i = self.h_norm.argmin();
        let v = self.h_norm.values()[i];
        if !(v > 0.0) {
            return Err(QlmError::InvalidInput(format!(
                "|H| must be positive, found {v:e} at {}",
                self.sigma.grid().location(i)
            )));
        }
        Ok(())
    }
}
