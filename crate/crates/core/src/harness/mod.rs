//! Experiment drivers, records and persistence.
//!
//! [`run`] dispatches on [`ExperimentConfig::kind`] and returns an
//! [`ExperimentRecord`] whose gates decide the exit status of the CLI.

pub mod config;
pub mod experiments;
pub mod initial_data;
pub mod record;
pub mod selftest;
pub mod snapshot;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run, run_converge, run_damped_modes, run_darcy, run_decay, run_selftest, run_spectrum, simulate};
pub use record::{ExperimentRecord, Gate};
pub use selftest::SelftestFixture;
pub use crate::fit::{fit_slope, SlopeFit};
