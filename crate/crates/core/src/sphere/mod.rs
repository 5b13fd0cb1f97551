//! Discretized calculus on topological 2-spheres.
//!
//! Every field lives on a shared [`SphereGrid`]. Longitude derivatives are
//! spectral (FFT); colatitude derivatives interpolate each longitudinal mode
//! with a cosine or sine series on the doubled colatitude circle, chosen by
//! the component's [`Parity`].

mod field;
mod grid;
mod ops;
pub mod sh;

pub use field::{CovectorField, MetricField, ScalarField, SymTensorField, VectorField};
pub use grid::{gauss_legendre, same_grid, Parity, SphereGrid};
pub use ops::{
    differential, divergence, frame_determinant, gauss_curvature, gradient, hessian, inner,
    integrate, laplacian, lower, norm_sq, pair, raise, tensor_divergence, trace,
};
pub(crate) use ops::integrate_values;
