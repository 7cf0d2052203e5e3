//! Decay of the linear semigroups measured on continuous frequency.
//!
//! For radial data `f̂(ξ)` the quantity
//!
//! ```text
//! N(t)² = ∫₀^∞ |ξ|^{2σ} |A(t, ξ)|² |f̂(ξ)|² ξ^{d−1} dξ
//! ```
//!
//! is computed in the variable `s = ln ξ` by adaptive Gauss-Kronrod
//! quadrature. `A` is a linear combination of propagator entries applied to
//! data with equal weight in both slots of a block:
//!
//! | component               | semigroup        | amplitude                               |
//! |-------------------------|------------------|-----------------------------------------|
//! | `Scalar`                | heat             | `e^{−t|ξ|²}`                            |
//! | `Density`               | B₁, coupled      | `(Ĝ₁)₀₀ + (Ĝ₁)₀₁`                       |
//! | `CompressibleVelocity`  | B₁, coupled      | `(Ĝ₁)₁₀ + (Ĝ₁)₁₁`                       |
//! | `SolenoidalVelocity`    | B₂, coupled      | `(Ĝ₂)₀₀ + (Ĝ₂)₀₁`  (`Pw`)               |
//! | `FluidVelocity`         | B₂, coupled      | `(Ĝ₂)₁₀ + (Ĝ₂)₁₁`  (`u`)                |
//! | `RMode`                 | B₂, coupled      | `Pw − εu` from the two rows above       |
//! | `RelativeVelocity`      | coupled          | `|P^⊤w|² + |Pw − εu|²`, i.e. `w − εu`   |
//!
//! The coupled semigroup runs both blocks on the same data, so
//! `RelativeVelocity` measures the full relative velocity `w − εu` whose
//! compressible part comes from B₁ and solenoidal part from B₂.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_slope, SlopeFit};
use crate::littlewood_paley::standard_cutoff;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::spectrum::{propagator_b1, propagator_b2, SymbolPoint, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileShape {
    /// `|ξ|^{−(σ₁ + d/2)}` below the cutoff.
    PowerLaw,
    /// `e^{−|ξ|²}`, no cutoff.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub sigma1: f64,
    pub d: usize,
    pub cutoff_hi: f64,
    pub shape: ProfileShape,
}

/// Upper integration limit used for Gaussian data.
const GAUSSIAN_REACH: f64 = 9.0;

impl RadialProfile {
    pub fn power_law(sigma1: f64, d: usize, cutoff_hi: f64) -> Result<Self> {
        let dh = d as f64 / 2.0;
        if d < 2 {
            return Err(Error::OutOfRange { what: "dimension", detail: format!("d = {d} < 2") });
        }
        if !(sigma1 >= -dh && sigma1 < dh - 1.0) {
            return Err(Error::OutOfRange {
                what: "sigma1",
                detail: format!("{sigma1} not in [−d/2, d/2 − 1) = [{}, {})", -dh, dh - 1.0),
            });
        }
        if !(cutoff_hi > 0.0 && cutoff_hi.is_finite()) {
            return Err(Error::OutOfRange { what: "cutoff", detail: format!("{cutoff_hi}") });
        }
        Ok(Self { sigma1, d, cutoff_hi, shape: ProfileShape::PowerLaw })
    }

    pub fn gaussian(d: usize) -> Self {
        Self { sigma1: -(d as f64) / 2.0, d, cutoff_hi: GAUSSIAN_REACH, shape: ProfileShape::Gaussian }
    }

    /// Same profile one derivative rougher, `σ₁ − 1`, for density-difference data.
    pub fn lowered(&self) -> Self {
        Self { sigma1: self.sigma1 - 1.0, ..*self }
    }

    /// `|f̂(ξ)|² ξ^d`, the data weight in the logarithmic variable.
    fn log_weight(&self, xi: f64) -> f64 {
        match self.shape {
            ProfileShape::PowerLaw => {
                if xi > self.cutoff_hi {
                    0.0
                } else {
                    xi.powf(-2.0 * self.sigma1)
                }
            }
            ProfileShape::Gaussian => (-2.0 * xi * xi).exp() * xi.powi(self.d as i32),
        }
    }

    /// Exponent `κ` such that the data weight behaves like `ξ^{2κ−2σ}·ξ^{2σ}` near zero.
    fn low_exponent(&self, sigma: f64) -> f64 {
        match self.shape {
            ProfileShape::PowerLaw => sigma - self.sigma1,
            ProfileShape::Gaussian => sigma + self.d as f64 / 2.0,
        }
    }

    fn upper(&self) -> f64 {
        match self.shape {
            ProfileShape::PowerLaw => self.cutoff_hi,
            ProfileShape::Gaussian => GAUSSIAN_REACH,
        }
    }

    /// `2^{jσ₁}‖Δ̇_j f‖_{L²}` with the standard annulus profile.
    pub fn weighted_block_norm(&self, j: i32) -> Result<f64> {
        let scale = (j as f64).exp2();
        let lo = (0.75 * scale).ln();
        let hi = ((8.0 / 3.0) * scale).min(self.upper()).ln();
        if hi <= lo {
            return Ok(0.0);
        }
        let phi = |r: f64| standard_cutoff(0.5 * r) - standard_cutoff(r);
        let g = |s: f64| {
            let xi = s.exp();
            phi(xi / scale).powi(2) * self.log_weight(xi)
        };
        let r = integrate(g, lo, hi, &QuadratureOptions::default())?;
        Ok(scale.powf(self.sigma1) * r.value.max(0.0).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Semigroup {
    Heat,
    B1 { epsilon: f64 },
    B2 { epsilon: f64, mu: f64 },
    Coupled { epsilon: f64, mu: f64 },
}

impl Semigroup {
    pub fn name(&self) -> &'static str {
        match self {
            Semigroup::Heat => "heat",
            Semigroup::B1 { .. } => "b1",
            Semigroup::B2 { .. } => "b2",
            Semigroup::Coupled { .. } => "coupled",
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Semigroup::Heat => None,
            Semigroup::B1 { epsilon } | Semigroup::B2 { epsilon, .. } | Semigroup::Coupled { epsilon, .. } => {
                Some(epsilon)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Scalar,
    Density,
    CompressibleVelocity,
    SolenoidalVelocity,
    FluidVelocity,
    RMode,
    RelativeVelocity,
}

impl Component {
    pub fn name(&self) -> &'static str {
        match self {
            Component::Scalar => "scalar",
            Component::Density => "density",
            Component::CompressibleVelocity => "compressible_velocity",
            Component::SolenoidalVelocity => "solenoidal_velocity",
            Component::FluidVelocity => "fluid_velocity",
            Component::RMode => "r_mode",
            Component::RelativeVelocity => "relative_velocity",
        }
    }
}

fn row_sum(g: &nalgebra::Matrix2<C64>, row: usize) -> C64 {
    g[(row, 0)] + g[(row, 1)]
}

fn unsupported(semigroup: Semigroup, component: Component) -> Error {
    Error::OutOfRange {
        what: "component",
        detail: format!("{} is not defined for the {} semigroup", component.name(), semigroup.name()),
    }
}

fn check_supported(semigroup: Semigroup, component: Component) -> Result<()> {
    use Component::*;
    let ok = match semigroup {
        Semigroup::Heat => component == Scalar,
        Semigroup::B1 { .. } => matches!(component, Density | CompressibleVelocity),
        Semigroup::B2 { .. } => matches!(component, SolenoidalVelocity | FluidVelocity | RMode),
        Semigroup::Coupled { .. } => component != Scalar,
    };
    if ok {
        Ok(())
    } else {
        Err(unsupported(semigroup, component))
    }
}

/// `|A(t, ξ)|²` for a supported (semigroup, component) pair.
pub fn amplitude_sq(semigroup: Semigroup, component: Component, d: usize, t: f64, xi: f64) -> Result<f64> {
    check_supported(semigroup, component)?;
    let (epsilon, mu) = match semigroup {
        Semigroup::Heat => return Ok((-2.0 * t * xi * xi).exp()),
        Semigroup::B1 { epsilon } => (epsilon, 1.0),
        Semigroup::B2 { epsilon, mu } | Semigroup::Coupled { epsilon, mu } => (epsilon, mu),
    };
    let p = SymbolPoint::new(xi, epsilon, mu, d);
    let g1 = || propagator_b1(&p, t);
    let g2 = || propagator_b2(&p, t);
    let r_mode = |g: &nalgebra::Matrix2<C64>| (row_sum(g, 0) - row_sum(g, 1) * epsilon).norm_sqr();
    Ok(match component {
        Component::Scalar => unreachable!("rejected above"),
        Component::Density => row_sum(&g1(), 0).norm_sqr(),
        Component::CompressibleVelocity => row_sum(&g1(), 1).norm_sqr(),
        Component::SolenoidalVelocity => row_sum(&g2(), 0).norm_sqr(),
        Component::FluidVelocity => row_sum(&g2(), 1).norm_sqr(),
        Component::RMode => r_mode(&g2()),
        Component::RelativeVelocity => row_sum(&g1(), 1).norm_sqr() + r_mode(&g2()),
    })
}

/// Relative size of the neglected region `(0, ξ_lo)`.
const LOW_TAIL: f64 = 1e-14;

/// `‖Λ^σ A(t)f‖_{L²}` with the surface constant dropped.
pub fn semigroup_norm(
    profile: &RadialProfile,
    semigroup: Semigroup,
    component: Component,
    sigma: f64,
    t: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    check_supported(semigroup, component)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange { what: "time", detail: format!("t = {t}") });
    }
    let kappa = profile.low_exponent(sigma);
    if kappa <= 0.0 {
        return Err(Error::OutOfRange {
            what: "sigma",
            detail: format!("σ = {sigma} must exceed σ₁ = {}", profile.sigma1),
        });
    }
    let hi = profile.upper();
    // ∫₀^{ξ_lo} ξ^{2κ−1} dξ ≤ LOW_TAIL·(1+t)^{−κ}, the heat-like scale of the integral.
    let xi_lo = (LOW_TAIL.powf(1.0 / kappa) / (1.0 + t)).sqrt().min(0.5 * hi).max(1e-150);
    let g = |s: f64| {
        let xi = s.exp();
        let a = amplitude_sq(semigroup, component, profile.d, t, xi).unwrap_or(f64::NAN);
        xi.powf(2.0 * sigma) * profile.log_weight(xi) * a
    };
    let r = integrate(g, xi_lo.ln(), hi.ln(), opts)?;
    Ok(r.value.max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub sigma: f64,
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub samples: Vec<(f64, f64)>,
}

/// `samples` geometrically spaced times covering `[t_lo, t_hi]` inclusive.
pub fn geometric_times(window: (f64, f64), samples: usize) -> Vec<f64> {
    let (lo, hi) = window;
    if samples == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (samples - 1) as f64;
    (0..samples).map(|k| lo * (ratio * k as f64).exp()).collect()
}

/// Default fit window `[10, 10³]` with 40 samples.
pub const DEFAULT_WINDOW: (f64, f64) = (10.0, 1000.0);
pub const DEFAULT_SAMPLES: usize = 40;

/// Log-log slope of `semigroup_norm` over a geometric time window.
pub fn fit_decay(
    profile: &RadialProfile,
    semigroup: Semigroup,
    component: Component,
    sigma: f64,
    window: (f64, f64),
    samples: usize,
    opts: &QuadratureOptions,
) -> Result<DecayFit> {
    if !(window.0 > 0.0 && window.1 >= 10.0 * window.0) {
        return Err(Error::OutOfRange {
            what: "fit window",
            detail: format!("[{}, {}] must satisfy 0 < t_lo, t_hi ≥ 10 t_lo", window.0, window.1),
        });
    }
    if samples < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: samples });
    }
    let samples = geometric_times(window, samples)
        .into_par_iter()
        .map(|t| semigroup_norm(profile, semigroup, component, sigma, t, opts).map(|n| (t, n)))
        .collect::<Result<Vec<_>>>()?;
    let SlopeFit { slope, intercept, r2, .. } = fit_slope(&samples)?;
    Ok(DecayFit { sigma, window, slope, intercept, r2, samples })
}
