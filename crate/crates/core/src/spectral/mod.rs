//! Periodic-torus discretisation: grid, Fourier fields and per-mode operators.

mod field;
mod grid;
pub mod ops;

pub use field::SpectralField;
pub use grid::Grid;
pub use ops::{divergence, gradient, laplacian, project_compressible, project_leray};
