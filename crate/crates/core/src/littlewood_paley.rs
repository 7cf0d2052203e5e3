//! Dyadic frequency decomposition and homogeneous Besov-type norms on the torus.
//!
//! The low-frequency cutoff `χ` is radial, equal to one on `|ξ| ≤ 3/4` and
//! zero for `|ξ| ≥ 4/3`; between the two radii it follows the C^∞ smoothstep
//! `S(t) = g(1−t)/(g(1−t)+g(t))` with `g(t) = e^{−1/t}`. The annulus profile
//! is `φ(ξ) = χ(ξ/2) − χ(ξ)`, supported in `3/4 ≤ |ξ| ≤ 8/3`, so that the
//! block multipliers telescope to an exact partition of unity.
//!
//! Only blocks resolvable on the grid are kept: `j_min = ⌊log₂(3/4 · 2π/L)⌋`
//! is the lowest block touching the fundamental frequency and `j_max` the
//! lowest index whose ball covers the corner mode. Every Besov number
//! reported by this module is therefore a truncated sum over
//! `j_min ≤ j ≤ j_max`.
//!
//! L² norms follow the grid convention `‖f‖² = L² Σ_k |f̂(k)|²`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

pub const RING_INNER: f64 = 3.0 / 4.0;
pub const RING_OUTER: f64 = 8.0 / 3.0;
pub const BALL_RADIUS: f64 = 4.0 / 3.0;

fn smooth_edge(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Standard radial low-frequency cutoff `χ(|ξ|)`.
pub fn standard_cutoff(r: f64) -> f64 {
    if r <= RING_INNER {
        return 1.0;
    }
    if r >= BALL_RADIUS {
        return 0.0;
    }
    let t = (r - RING_INNER) / (BALL_RADIUS - RING_INNER);
    let a = smooth_edge(1.0 - t);
    let b = smooth_edge(t);
    a / (a + b)
}

/// Summation exponent of the outer ℓ^r norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumExponent {
    One,
    Infinity,
}

/// Frequency band selected by a norm. `Low(J)` keeps blocks `j ≤ J`,
/// `High(J)` keeps `j ≥ J − 1`; the two overlap on two blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    All,
    Low(i32),
    High(i32),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub r: SumExponent,
    pub band: Band,
}

impl BesovSpec {
    pub fn new(s: f64, r: SumExponent, band: Band) -> Self {
        Self { s, r, band }
    }

    /// `Ḃ^s_{2,1}` over all resolvable blocks.
    pub fn b21(s: f64) -> Self {
        Self::new(s, SumExponent::One, Band::All)
    }

    pub fn with_band(self, band: Band) -> Self {
        Self { band, ..self }
    }
}

/// Time exponent of a Chemin-Lerner norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeExponent {
    One,
    Two,
    Infinity,
}

/// Relaxation parameter and offset fixing the frequency threshold
/// `J_ε = −⌊log₂ ε⌋ − m0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub epsilon: f64,
    pub m0: i32,
}

impl ThresholdConfig {
    pub const DEFAULT_M0: i32 = 2;

    pub fn new(epsilon: f64, m0: i32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::OutOfRange { what: "epsilon", detail: format!("{epsilon} not in (0, 1]") });
        }
        Ok(Self { epsilon, m0 })
    }

    pub fn j_eps(&self) -> i32 {
        -(self.epsilon.log2().floor() as i32) - self.m0
    }

    pub fn low(&self) -> Band {
        Band::Low(self.j_eps())
    }

    pub fn high(&self) -> Band {
        Band::High(self.j_eps())
    }
}

/// L² norms of the resolvable dyadic blocks of one field.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockNorms {
    pub j_min: i32,
    pub norms: Vec<f64>,
}

impl BlockNorms {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.norms.len() as i32 - 1
    }

    pub fn get(&self, j: i32) -> f64 {
        let off = j - self.j_min;
        if off < 0 || off as usize >= self.norms.len() {
            0.0
        } else {
            self.norms[off as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.norms.iter().enumerate().map(move |(i, &n)| (self.j_min + i as i32, n))
    }
}

/// Family of annulus multipliers `φ(2^{−j}ξ)`, `j_min ≤ j ≤ j_max`.
#[derive(Clone, Copy)]
pub struct DyadicDecomposition {
    j_min: i32,
    j_max: i32,
    cutoff: fn(f64) -> f64,
}

impl std::fmt::Debug for DyadicDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DyadicDecomposition")
            .field("j_min", &self.j_min)
            .field("j_max", &self.j_max)
            .finish()
    }
}

impl DyadicDecomposition {
    pub fn for_grid(grid: &Grid) -> Self {
        Self::with_cutoff(grid, standard_cutoff)
    }

    /// Decomposition built on an arbitrary radial cutoff profile. The
    /// partition-of-unity property only holds for admissible profiles.
    pub fn with_cutoff(grid: &Grid, cutoff: fn(f64) -> f64) -> Self {
        let j_min = (grid.fundamental() * RING_INNER).log2().floor() as i32;
        let j_max = (grid.max_xi_norm() * BALL_RADIUS).log2().ceil() as i32 - 1;
        Self { j_min, j_max, cutoff }
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn block_count(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn cutoff(&self, r: f64) -> f64 {
        (self.cutoff)(r)
    }

    /// Annulus profile `φ(r) = χ(r/2) − χ(r)`.
    pub fn profile(&self, r: f64) -> f64 {
        self.cutoff(0.5 * r) - self.cutoff(r)
    }

    pub fn multiplier(&self, j: i32, xi_norm: f64) -> f64 {
        self.profile(xi_norm * (-j as f64).exp2())
    }

    /// `Σ_{j_min ≤ j ≤ j_max} φ(2^{−j}ξ)`.
    pub fn partition_sum(&self, xi_norm: f64) -> f64 {
        (self.j_min..=self.j_max).map(|j| self.multiplier(j, xi_norm)).sum()
    }

    fn check_block(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::OutOfRange {
                what: "dyadic block",
                detail: format!("j = {j} outside [{}, {}]", self.j_min, self.j_max),
            });
        }
        Ok(())
    }

    fn check_band(&self, band: Band) -> Result<()> {
        match band {
            Band::All => Ok(()),
            Band::Low(j) | Band::High(j) => {
                if j < self.j_min || j > self.j_max + 1 {
                    Err(Error::OutOfRange {
                        what: "band threshold",
                        detail: format!("J = {j} outside [{}, {}]", self.j_min, self.j_max + 1),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Validates that `J_ε` lies in the resolvable block range.
    pub fn check_threshold(&self, threshold: &ThresholdConfig) -> Result<()> {
        self.check_band(threshold.low())
    }

    /// Dyadic block `Δ̇_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_block(j)?;
        let grid = Arc::clone(f.grid());
        Ok(f.map_modes(|i, z| z * self.multiplier(j, grid.xi_norm(i))))
    }

    /// L² norms of every resolvable block, in one pass over the modes.
    pub fn block_norms(&self, f: &SpectralField) -> BlockNorms {
        let grid = f.grid();
        let mut sq = vec![0.0; self.block_count()];
        for i in 1..grid.len() {
            let amp: f64 = f.components().iter().map(|c| c[i].norm_sqr()).sum();
            if amp == 0.0 {
                continue;
            }
            let r = grid.xi_norm(i);
            let lo = (r / RING_OUTER).log2().floor() as i32;
            let hi = (r / RING_INNER).log2().ceil() as i32;
            for j in lo.max(self.j_min)..=hi.min(self.j_max) {
                let m = self.multiplier(j, r);
                if m != 0.0 {
                    sq[(j - self.j_min) as usize] += m * m * amp;
                }
            }
        }
        let vol = grid.volume();
        BlockNorms { j_min: self.j_min, norms: sq.into_iter().map(|x| (vol * x).sqrt()).collect() }
    }

    /// `‖{2^{js}‖Δ̇_j f‖_{L²}}_j‖_{ℓ^r}` over the band selected by `spec`.
    pub fn besov_norm(&self, f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
        self.check_band(spec.band)?;
        Ok(besov_from_blocks(&self.block_norms(f), spec))
    }

    /// Splits `f = f^{ℓ,ε} + f^{h,ε}` with `f^{ℓ,ε} = Σ_{j ≤ J_ε−1} Δ̇_j f`.
    /// The zero mode is assigned to the low part.
    pub fn split_low_high(
        &self,
        f: &SpectralField,
        threshold: &ThresholdConfig,
    ) -> Result<(SpectralField, SpectralField)> {
        self.check_threshold(threshold)?;
        Ok(self.split_at(f, threshold.j_eps()))
    }

    /// Low part `χ(2^{−J}ξ) f̂` and its complement.
    pub fn split_at(&self, f: &SpectralField, j: i32) -> (SpectralField, SpectralField) {
        let grid = Arc::clone(f.grid());
        let scale = (-j as f64).exp2();
        let low = f.map_modes(|i, z| z * self.cutoff(grid.xi_norm(i) * scale));
        let high = f.sub(&low);
        (low, high)
    }

    /// Norm in the sum space `Ḃ^{s_lo}_{2,1} + Ḃ^{s_hi}_{2,1}` (`s_lo < s_hi`),
    /// minimised over splits `f = χ(2^{−J}·)f + (1 − χ(2^{−J}·))f`: the low
    /// part is measured in `Ḃ^{s_hi}` and the high part in `Ḃ^{s_lo}`.
    pub fn sum_space_norm(&self, f: &SpectralField, s_lo: f64, s_hi: f64) -> f64 {
        (self.j_min..=self.j_max + 1)
            .map(|j| {
                let (low, high) = self.split_at(f, j);
                besov_from_blocks(&self.block_norms(&low), &BesovSpec::b21(s_hi))
                    + besov_from_blocks(&self.block_norms(&high), &BesovSpec::b21(s_lo))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Chemin-Lerner norm `‖{2^{js}‖Δ̇_j f‖_{L^ρ_T(L²)}}‖_{ℓ^r}` of a sampled
    /// trajectory; time integrals use the trapezoidal rule on `times`.
    pub fn chemin_lerner_norm(
        &self,
        times: &[f64],
        series: &[SpectralField],
        spec: &BesovSpec,
        rho: TimeExponent,
    ) -> Result<f64> {
        self.check_band(spec.band)?;
        let blocks: Vec<BlockNorms> = series.iter().map(|f| self.block_norms(f)).collect();
        chemin_lerner_from_blocks(times, &blocks, spec, rho)
    }

    /// `‖ ‖f(t)‖_{Ḃ^s_{2,r}} ‖_{L^ρ_T}`, the time-outside counterpart of
    /// [`Self::chemin_lerner_norm`].
    pub fn time_outside_norm(
        &self,
        times: &[f64],
        series: &[SpectralField],
        spec: &BesovSpec,
        rho: TimeExponent,
    ) -> Result<f64> {
        self.check_band(spec.band)?;
        check_times(times, series.len(), 1)?;
        let values: Vec<f64> = series
            .iter()
            .map(|f| besov_from_blocks(&self.block_norms(f), spec))
            .collect();
        Ok(time_norm(times, &values, rho))
    }
}

fn in_band(j: i32, band: Band) -> bool {
    match band {
        Band::All => true,
        Band::Low(big_j) => j <= big_j,
        Band::High(big_j) => j >= big_j - 1,
    }
}

/// Aggregates precomputed block norms into a Besov norm.
pub fn besov_from_blocks(blocks: &BlockNorms, spec: &BesovSpec) -> f64 {
    let weighted = blocks
        .iter()
        .filter(|&(j, _)| in_band(j, spec.band))
        .map(|(j, n)| (spec.s * j as f64).exp2() * n);
    match spec.r {
        SumExponent::One => weighted.sum(),
        SumExponent::Infinity => weighted.fold(0.0, f64::max),
    }
}

fn check_times(times: &[f64], nseries: usize, needed: usize) -> Result<()> {
    if times.len() < needed || nseries < needed {
        return Err(Error::InsufficientSamples { needed, got: times.len().min(nseries) });
    }
    if times.len() != nseries {
        return Err(Error::DimensionMismatch { expected: times.len(), got: nseries });
    }
    Ok(())
}

/// Trapezoidal `L^ρ` norm in time of sampled nonnegative values. A single
/// sample spans no time, so only its `L^∞` norm is nonzero.
pub fn time_norm(times: &[f64], values: &[f64], rho: TimeExponent) -> f64 {
    let trapz = |f: &dyn Fn(f64) -> f64| -> f64 {
        times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (f(v[0]) + f(v[1])))
            .sum()
    };
    match rho {
        TimeExponent::One => trapz(&|v| v),
        TimeExponent::Two => trapz(&|v| v * v).sqrt(),
        TimeExponent::Infinity => values.iter().copied().fold(0.0, f64::max),
    }
}

/// Chemin-Lerner norm from per-sample block norms.
pub fn chemin_lerner_from_blocks(
    times: &[f64],
    blocks: &[BlockNorms],
    spec: &BesovSpec,
    rho: TimeExponent,
) -> Result<f64> {
    check_times(times, blocks.len(), 1)?;
    let first = &blocks[0];
    let per_block = first.iter().filter(|&(j, _)| in_band(j, spec.band)).map(|(j, _)| {
        let values: Vec<f64> = blocks.iter().map(|b| b.get(j)).collect();
        (spec.s * j as f64).exp2() * time_norm(times, &values, rho)
    });
    Ok(match spec.r {
        SumExponent::One => per_block.sum(),
        SumExponent::Infinity => per_block.fold(0.0, f64::max),
    })
}

/// Centred finite-difference time derivative of a sampled trajectory
/// (one-sided at the ends).
pub fn time_derivative_fd(times: &[f64], series: &[SpectralField]) -> Result<Vec<SpectralField>> {
    check_times(times, series.len(), 2)?;
    let n = series.len();
    Ok((0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            series[b].sub(&series[a]).scale(1.0 / (times[b] - times[a]))
        })
        .collect())
}

/// `‖∇Δ̇_j f‖ / (2^j ‖Δ̇_j f‖)` for every nonzero block; Bernstein places
/// each value in `[3/4, 8/3]`.
pub fn bernstein_ratios(dec: &DyadicDecomposition, f: &SpectralField) -> Vec<(i32, f64)> {
    let grid = f.grid();
    let mut out = Vec::new();
    for j in dec.j_min()..=dec.j_max() {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 1..grid.len() {
            let m = dec.multiplier(j, grid.xi_norm(i));
            if m == 0.0 {
                continue;
            }
            let amp: f64 = f.components().iter().map(|c| c[i].norm_sqr()).sum::<f64>() * m * m;
            num += grid.xi_norm_sq(i) * amp;
            den += amp;
        }
        if den > 0.0 {
            out.push((j, (num / den).sqrt() / (j as f64).exp2()));
        }
    }
    out
}

/// Ratio `‖f‖_{Ḃ^s_{2,1}} / (K ‖f‖_{Ḃ^{s₁}_{2,∞}}^θ ‖f‖_{Ḃ^{s₂}_{2,∞}}^{1−θ})` with
/// `s = θs₁ + (1−θ)s₂` and `K = 4/(θ(1−θ)(s₂−s₁))`.
pub fn interpolation_ratio(dec: &DyadicDecomposition, f: &SpectralField, s1: f64, s2: f64, theta: f64) -> f64 {
    let blocks = dec.block_norms(f);
    let s = theta * s1 + (1.0 - theta) * s2;
    let lhs = besov_from_blocks(&blocks, &BesovSpec::b21(s));
    let inf = |s| besov_from_blocks(&blocks, &BesovSpec::new(s, SumExponent::Infinity, Band::All));
    let k = 4.0 / (theta * (1.0 - theta) * (s2 - s1));
    lhs / (k * inf(s1).powf(theta) * inf(s2).powf(1.0 - theta))
}

/// A single-mode field `cos(k·x)` scaled to unit L² norm.
pub fn unit_cosine(grid: &Arc<Grid>, k: [i64; 2]) -> SpectralField {
    let mut f = SpectralField::scalar_zeros(grid);
    let n = grid.n() as i64;
    let idx = |k: [i64; 2]| (k[0].rem_euclid(n) * n + k[1].rem_euclid(n)) as usize;
    let amp = 0.5 / grid.volume().sqrt() * 2f64.sqrt();
    f.component_mut(0)[idx(k)] += Complex64::new(amp, 0.0);
    f.component_mut(0)[idx([-k[0], -k[1]])] += Complex64::new(amp, 0.0);
    f
}
