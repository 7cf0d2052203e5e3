//! Flat JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{InitialLayer, StepperConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Converge,
    Darcy,
    Damped,
    Spectrum,
    Decay,
    Selftest,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Darcy => "darcy",
            ExperimentKind::Damped => "damped",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Selftest => "selftest",
        }
    }
}

fn default_n() -> usize {
    128
}
fn default_length() -> f64 {
    8.0 * std::f64::consts::PI
}
fn default_mu() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    0.01
}
fn default_t_end() -> f64 {
    2.0
}
fn default_output_stride() -> f64 {
    20.0
}
fn default_cfl() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}
fn default_layer_multiple() -> f64 {
    20.0
}
fn default_layer_substeps() -> f64 {
    8.0
}
fn default_epsilons() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}
fn default_ceiling() -> f64 {
    0.25
}
fn default_m0() -> i32 {
    2
}
fn default_sigma1() -> f64 {
    -1.0
}
fn default_seed() -> u64 {
    7
}
fn default_data_cutoff() -> f64 {
    1.25
}
fn default_target() -> f64 {
    0.01
}
fn default_one() -> f64 {
    1.0
}
fn default_sigmas() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}
fn default_window() -> [f64; 2] {
    [10.0, 1000.0]
}
fn default_decay_samples() -> usize {
    40
}
fn default_decay_cutoff() -> f64 {
    1000.0
}
fn default_xi_range() -> [f64; 2] {
    [1e-2, 1e4]
}
fn default_spectrum_points() -> usize {
    200
}
fn default_random_samples() -> usize {
    10_000
}

/// Every experiment reads the same flat object; fields irrelevant to the
/// chosen `kind` are ignored. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,

    /// Modes per dimension.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Torus side length. The default `8π` puts the lowest frequency at `1/4`.
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,

    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Series records per unit time.
    #[serde(default = "default_output_stride")]
    pub output_stride: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    /// Resolve the initial relaxation layer with steps `ε²/layer_substeps`
    /// for a duration `layer_multiple·ε²`.
    #[serde(default = "default_true")]
    pub initial_layer: bool,
    #[serde(default = "default_layer_multiple")]
    pub layer_multiple: f64,
    #[serde(default = "default_layer_substeps")]
    pub layer_substeps: f64,

    #[serde(default = "default_epsilons")]
    pub epsilon_list: Vec<f64>,
    #[serde(default = "default_ceiling")]
    pub epsilon_ceiling: f64,
    #[serde(default = "default_m0")]
    pub m0: i32,
    /// Regularity index of the synthesised data and of decay profiles.
    #[serde(default = "default_sigma1")]
    pub sigma1: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,

    /// Largest frequency `|ξ|` carried by the initial data. The default keeps
    /// the data in `ε|ξ| ≤ 1/4` for every `ε ≤ 0.2`.
    #[serde(default = "default_data_cutoff")]
    pub data_cutoff: f64,
    /// Target for `max_ε (E₀ + δE₀)`.
    #[serde(default = "default_target")]
    pub amplitude_target: f64,
    /// Extra factor on the data amplitude (amplitude sanity sweeps).
    #[serde(default = "default_one")]
    pub amplitude_scale: f64,
    /// Prepared `w₀`, linear dynamics and limit symbols: a control run
    /// whose error must vanish to rounding.
    #[serde(default)]
    pub control: bool,
    /// Write final spectral states as binary snapshots.
    #[serde(default = "default_true")]
    pub snapshots: bool,

    #[serde(default = "default_sigmas")]
    pub sigma_list: Vec<f64>,
    #[serde(default = "default_window")]
    pub decay_window: [f64; 2],
    #[serde(default = "default_decay_samples")]
    pub decay_samples: usize,
    #[serde(default = "default_decay_cutoff")]
    pub decay_cutoff: f64,

    #[serde(default = "default_xi_range")]
    pub spectrum_xi_range: [f64; 2],
    #[serde(default = "default_spectrum_points")]
    pub spectrum_points: usize,
    /// Random symbol samples for residual checks.
    #[serde(default = "default_random_samples")]
    pub random_samples: usize,

    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `kind`, as if parsed from `{"kind": ...}`.
    pub fn new(kind: ExperimentKind) -> Self {
        let value = serde_json::json!({ "kind": kind });
        serde_json::from_value(value).expect("defaults are valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 8 || !self.n.is_power_of_two() {
            return bad(format!("n must be a power of two ≥ 8, got {}", self.n));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length must be positive, got {}", self.length));
        }
        if !(self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.epsilon_ceiling > 0.0 && self.epsilon_ceiling <= 1.0) {
            return bad(format!("epsilon_ceiling must lie in (0, 1], got {}", self.epsilon_ceiling));
        }
        if self.epsilon_list.is_empty() {
            return bad("epsilon_list is empty".into());
        }
        for &e in &self.epsilon_list {
            if !(e > 0.0 && e <= self.epsilon_ceiling) {
                return bad(format!("epsilon {e} outside (0, {}]", self.epsilon_ceiling));
            }
        }
        if self.epsilon_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("epsilon_list must be strictly decreasing: {:?}", self.epsilon_list));
        }
        if !(self.layer_multiple >= 0.0 && self.layer_substeps >= 1.0) {
            return bad("layer_multiple must be ≥ 0 and layer_substeps ≥ 1".into());
        }
        if !(self.sigma1 >= -1.0 && self.sigma1 < 0.0) {
            return bad(format!("sigma1 must lie in [−d/2, d/2 − 1) = [−1, 0), got {}", self.sigma1));
        }
        let fundamental = std::f64::consts::TAU / self.length;
        if !(self.data_cutoff >= fundamental) {
            return bad(format!("data_cutoff must be ≥ 2π/length = {fundamental}, got {}", self.data_cutoff));
        }
        if !(self.amplitude_target > 0.0 && self.amplitude_scale > 0.0) {
            return bad("amplitude_target and amplitude_scale must be positive".into());
        }
        if let Some(s) = self.sigma_list.iter().find(|&&s| s <= self.sigma1) {
            return bad(format!("sigma {s} must exceed sigma1 = {}", self.sigma1));
        }
        let [lo, hi] = self.decay_window;
        if !(lo > 0.0 && hi >= 10.0 * lo) {
            return bad(format!("decay_window [{lo}, {hi}] needs 0 < t_lo and t_hi ≥ 10 t_lo"));
        }
        if self.decay_samples < 3 || !(self.decay_cutoff > 0.0) {
            return bad("decay needs ≥ 3 samples and a positive cutoff".into());
        }
        let [xlo, xhi] = self.spectrum_xi_range;
        if !(xlo > 0.0 && xhi > xlo) || self.spectrum_points < 2 {
            return bad("spectrum needs 0 < xi_min < xi_max and ≥ 2 points".into());
        }
        self.stepper(self.epsilon_list[0]).validate()
    }

    /// Stepper settings for one ε, with the initial layer resolved when enabled.
    pub fn stepper(&self, epsilon: f64) -> StepperConfig {
        let mut cfg = StepperConfig::new(self.dt, self.t_end);
        cfg.output_stride = self.output_stride;
        cfg.cfl_safety = self.cfl_safety;
        if self.initial_layer && self.layer_multiple > 0.0 {
            let e2 = epsilon * epsilon;
            cfg.initial_layer = Some(InitialLayer { duration: self.layer_multiple * e2, dt: e2 / self.layer_substeps });
        }
        cfg
    }
}
