//! Periodic-box field arithmetic.

mod fft;
mod field;
mod grid;
pub mod interp;
pub mod norms;
pub mod ops;
pub mod snapshot;

pub use field::{RealField, SpectralField};
pub use grid::Grid;
pub use interp::eval_at_points;
pub use ops::{
    biot_savart, biot_savart_spectral, curl, dealias, dealiased_product, divergence,
    forward_transform, gradient, heat_propagate, inverse_transform, laplacian,
};
