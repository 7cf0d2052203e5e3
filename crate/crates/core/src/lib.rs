//! Pseudo-spectral simulation and verification toolkit for the
//! Euler–Navier-Stokes relaxation system and its Kramers-Smoluchowski–
//! Navier-Stokes limit on the periodic torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: torus grid, Fourier fields, differential operators and
//!   the Hodge/Leray projectors.
//! * [`littlewood_paley`]: dyadic blocks, homogeneous Besov norms, the
//!   ε-dependent low/high split and time-integrated (Chemin-Lerner) norms.
//! * [`models`]: state bundles, right-hand sides, damped modes, the Darcy
//!   velocity and energy/dissipation diagnostics.
//! * [`spectrum`]: exact eigenvalues and 2×2 propagators of the linearised
//!   compressible and incompressible blocks.
//! * [`integrator`]: exponential time differencing with exact per-mode
//!   linear flow.
//! * [`decay`]: continuous-frequency quadrature of linear semigroup norms
//!   and algebraic decay-rate fits.
//! * [`harness`]: experiment configuration, ε-sweeps, persistence and the
//!   self-test suite backing the `relaxflow` binary.
//!
//! Runnable tours of each capability live in the crate's `examples/`.

pub mod decay;
pub mod error;
pub mod fit;
pub mod harness;
pub mod integrator;
pub mod littlewood_paley;
pub mod models;
pub mod quadrature;
pub mod spectral;
pub mod spectrum;

pub use error::{Error, Result};
pub use spectral::{Grid, SpectralField};
