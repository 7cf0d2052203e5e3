//! Discrete energy, dissipation and initial-error functionals.
//!
//! All norms are `Ḃ^s_{2,1}` over resolvable blocks with `d = 2`, so the
//! critical indices are `d/2 − 1 = 0`, `d/2 = 1`, `d/2 + 1 = 2`. Intersections
//! `Ḃ^{s₁} ∩ Ḃ^{s₂}` are measured by the sum of both norms.

use serde::{Deserialize, Serialize};

use super::{damped_modes, darcy_velocity, EnsState, KsnsState};
use crate::error::Result;
use crate::littlewood_paley::{
    besov_from_blocks, BesovSpec, DyadicDecomposition, ThresholdConfig,
};
use crate::spectral::{project_leray, SpectralField};

const S_LOW: f64 = 0.0;
const S_MID: f64 = 1.0;
const S_HIGH: f64 = 2.0;

fn b21(dec: &DyadicDecomposition, f: &SpectralField, s: f64) -> f64 {
    besov_from_blocks(&dec.block_norms(f), &BesovSpec::b21(s))
}

/// Instantaneous ingredients of the energy/dissipation bookkeeping at one time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstantDiagnostics {
    pub time: f64,
    /// Terms of the energy functional before the sup in time:
    /// `‖a‖_{Ḃ⁰∩Ḃ¹}`, `‖u‖_{Ḃ⁰}`, `‖Pw‖^ℓ_{Ḃ⁰}`, `‖w‖^ℓ_{Ḃ¹}`, `ε‖w‖^h_{Ḃ²}`.
    pub energy_terms: [f64; 5],
    /// Integrands of the dissipation functional:
    /// `‖a‖_{Ḃ²}`, `‖a‖^ℓ_{Ḃ³}`, `‖u‖_{Ḃ²}`, `ε⁻¹‖w‖_{Ḃ¹}` (integrated in L²),
    /// `ε⁻¹‖w‖_{Ḃ²}`, `ε⁻²‖Z‖_{Ḃ¹}`, `ε⁻²‖R‖_{Ḃ⁰∩Ḃ¹}`.
    pub dissipation_terms: [f64; 7],
    /// `‖Z‖_{Ḃ¹}`.
    pub z_norm: f64,
    /// `‖R‖_{Ḃ⁰∩Ḃ¹}`.
    pub r_norm: f64,
    /// `‖ε⁻¹w − W*‖_{Ḃ¹ + Ḃ²}`.
    pub darcy_residual: f64,
}

impl InstantDiagnostics {
    pub fn evaluate(
        ens: &EnsState,
        ksns: &KsnsState,
        dec: &DyadicDecomposition,
        threshold: &ThresholdConfig,
        time: f64,
    ) -> Result<Self> {
        let eps = ens.epsilon;
        let low = threshold.low();
        let high = threshold.high();
        let a_blocks = dec.block_norms(&ens.a);
        let u_blocks = dec.block_norms(&ens.u);
        let w_blocks = dec.block_norms(&ens.w);
        let pw_blocks = dec.block_norms(&project_leray(&ens.w));
        let norm = |b, s| besov_from_blocks(b, &BesovSpec::b21(s));
        let banded = |b, s, band| besov_from_blocks(b, &BesovSpec::b21(s).with_band(band));

        let energy_terms = [
            norm(&a_blocks, S_LOW) + norm(&a_blocks, S_MID),
            norm(&u_blocks, S_LOW),
            banded(&pw_blocks, S_LOW, low),
            banded(&w_blocks, S_MID, low),
            eps * banded(&w_blocks, S_HIGH, high),
        ];

        let (z, r) = damped_modes(ens)?;
        let z_norm = b21(dec, &z, S_MID);
        let r_blocks = dec.block_norms(&r);
        let r_norm = norm(&r_blocks, S_LOW) + norm(&r_blocks, S_MID);
        let dissipation_terms = [
            norm(&a_blocks, S_HIGH),
            banded(&a_blocks, 3.0, low),
            norm(&u_blocks, S_HIGH),
            norm(&w_blocks, S_MID) / eps,
            norm(&w_blocks, S_HIGH) / eps,
            z_norm / (eps * eps),
            r_norm / (eps * eps),
        ];

        let residual = ens.w.scale(1.0 / eps).sub(&darcy_velocity(ksns)?);
        let darcy_residual = dec.sum_space_norm(&residual, S_MID, S_HIGH);

        Ok(Self { time, energy_terms, dissipation_terms, z_norm, r_norm, darcy_residual })
    }
}

/// One emitted diagnostics record: running functionals up to `time`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    pub time: f64,
    /// Discrete energy functional (sum of running sups of its terms).
    pub energy: f64,
    /// Instantaneous integrand of the dissipation functional.
    pub dissipation_increment: f64,
    /// Running dissipation functional.
    pub dissipation: f64,
    pub z_norm: f64,
    pub r_norm: f64,
    pub darcy_residual: f64,
}

/// Folds instantaneous diagnostics into running energy/dissipation functionals.
pub fn accumulate(instants: &[InstantDiagnostics]) -> Vec<DiagnosticsSample> {
    let mut out = Vec::with_capacity(instants.len());
    let mut sups = [0.0f64; 5];
    let mut integrals = [0.0f64; 7];
    for (k, inst) in instants.iter().enumerate() {
        for (s, &e) in sups.iter_mut().zip(&inst.energy_terms) {
            *s = s.max(e);
        }
        let d = &inst.dissipation_terms;
        if k > 0 {
            let prev = &instants[k - 1];
            let dt = inst.time - prev.time;
            for m in 0..7 {
                let (v0, v1) = (prev.dissipation_terms[m], d[m]);
                integrals[m] += if m == 3 { 0.5 * dt * (v0 * v0 + v1 * v1) } else { 0.5 * dt * (v0 + v1) };
            }
        }
        let dissipation = integrals
            .iter()
            .enumerate()
            .map(|(m, &v)| if m == 3 { v.sqrt() } else { v })
            .sum();
        out.push(DiagnosticsSample {
            time: inst.time,
            energy: sups.iter().sum(),
            dissipation_increment: d[0] + d[1] + d[2] + d[3] * d[3] + d[4] + d[5] + d[6],
            dissipation,
            z_norm: inst.z_norm,
            r_norm: inst.r_norm,
            darcy_residual: inst.darcy_residual,
        });
    }
    out
}

/// Diagnostics over paired snapshot series sampled at common `times`.
pub fn diagnostics(
    times: &[f64],
    ens: &[EnsState],
    ksns: &[KsnsState],
    dec: &DyadicDecomposition,
    threshold: &ThresholdConfig,
) -> Result<Vec<DiagnosticsSample>> {
    let instants = times
        .iter()
        .zip(ens.iter().zip(ksns))
        .map(|(&t, (e, k))| InstantDiagnostics::evaluate(e, k, dec, threshold, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(accumulate(&instants))
}

/// Size of the limit-system data, `‖a₀*‖_{Ḃ⁰∩Ḃ¹} + ‖u₀*‖_{Ḃ⁰}`.
pub fn e0(ksns: &KsnsState, dec: &DyadicDecomposition) -> f64 {
    b21(dec, &ksns.a, S_LOW) + b21(dec, &ksns.a, S_MID) + b21(dec, &ksns.u, S_LOW)
}

/// Initial error functional
/// `ε⁻¹‖a₀^ε − a₀*‖^ℓ_{Ḃ⁰} + ε⁻¹‖u₀^ε − u₀*‖_{Ḃ⁰} + ‖Pw₀‖^ℓ_{Ḃ⁰} + ‖w₀‖^ℓ_{Ḃ¹} + ε‖(a₀^ε, w₀)‖^h_{Ḃ²}`.
pub fn delta_e0(
    ens: &EnsState,
    ksns: &KsnsState,
    dec: &DyadicDecomposition,
    threshold: &ThresholdConfig,
) -> f64 {
    let eps = ens.epsilon;
    let low = threshold.low();
    let high = threshold.high();
    let banded = |f: &SpectralField, s: f64, band| {
        besov_from_blocks(&dec.block_norms(f), &BesovSpec::b21(s).with_band(band))
    };
    banded(&ens.a.sub(&ksns.a), S_LOW, low) / eps
        + b21(dec, &ens.u.sub(&ksns.u), S_LOW) / eps
        + banded(&project_leray(&ens.w), S_LOW, low)
        + banded(&ens.w, S_MID, low)
        + eps * (banded(&ens.a, S_HIGH, high) + banded(&ens.w, S_HIGH, high))
}
