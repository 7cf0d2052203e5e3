//! Seeded band-limited initial data.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::littlewood_paley::{DyadicDecomposition, ThresholdConfig};
use crate::models::{delta_e0, e0, EnsState, KsnsState};
use crate::spectral::{gradient, project_leray, Grid, SpectralField};

/// Spectrum `|f̂(ξ)| = |ξ|^{−(σ₁ + d/2)}` for `0 < |ξ| ≤ cutoff`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataSpectrum {
    pub sigma1: f64,
    pub cutoff: f64,
}

impl DataSpectrum {
    fn amplitude(&self, xi: f64) -> f64 {
        if xi == 0.0 || xi > self.cutoff {
            0.0
        } else {
            xi.powf(-(self.sigma1 + Grid::DIM as f64 / 2.0))
        }
    }
}

/// Real mean-zero field with the given spectrum and uniformly random phases.
pub fn random_field(grid: &Arc<Grid>, spectrum: &DataSpectrum, ncomp: usize, rng: &mut impl Rng) -> SpectralField {
    let mut f = SpectralField::zeros(grid, ncomp);
    for m in 0..ncomp {
        let c = f.component_mut(m);
        for i in 0..grid.len() {
            let j = grid.mirror(i);
            if j <= i {
                continue;
            }
            let amp = spectrum.amplitude(grid.xi_norm(i));
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            if amp > 0.0 {
                let z = Complex64::from_polar(amp, theta);
                c[i] = z;
                c[j] = z.conj();
            }
        }
    }
    f.dealias();
    f
}

/// Unit-amplitude data shared by every ε of a sweep.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub a0: SpectralField,
    pub u0: SpectralField,
    pub w0: SpectralField,
}

impl InitialData {
    /// `a₀`, solenoidal `u₀` and an independent `w₀` of the same size.
    pub fn synthesize(grid: &Arc<Grid>, spectrum: &DataSpectrum, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a0 = random_field(grid, spectrum, 1, &mut rng);
        let u0 = project_leray(&random_field(grid, spectrum, 2, &mut rng));
        let w0 = random_field(grid, spectrum, 2, &mut rng);
        Self { a0, u0, w0 }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { a0: self.a0.scale(s), u0: self.u0.scale(s), w0: self.w0.scale(s) }
    }

    pub fn ksns(&self, mu: f64) -> KsnsState {
        KsnsState { a: self.a0.clone(), u: self.u0.clone(), mu }
    }

    /// Well-prepared data for one ε: `ρ₀^ε = ρ₀*`, `u₀^ε = u₀*` and the given `w₀`.
    pub fn ens(&self, epsilon: f64, mu: f64) -> EnsState {
        EnsState { a: self.a0.clone(), w: self.w0.clone(), u: self.u0.clone(), epsilon, mu }
    }

    /// Data with `w₀ = ε(u₀ − ∇a₀)`, the linearised Darcy relation.
    pub fn ens_prepared(&self, epsilon: f64, mu: f64) -> EnsState {
        let w = self.u0.sub(&gradient(&self.a0)).scale(epsilon);
        EnsState { a: self.a0.clone(), w, u: self.u0.clone(), epsilon, mu }
    }

    /// `max_ε (E₀ + δE₀)` at the current amplitude.
    pub fn data_size(&self, grid: &Grid, epsilons: &[f64], m0: i32, mu: f64, prepared: bool) -> Result<f64> {
        let dec = DyadicDecomposition::for_grid(grid);
        let ksns = self.ksns(mu);
        let size_e0 = e0(&ksns, &dec);
        epsilons.iter().try_fold(0.0f64, |acc, &eps| {
            let threshold = ThresholdConfig::new(eps, m0)?;
            let ens = if prepared { self.ens_prepared(eps, mu) } else { self.ens(eps, mu) };
            Ok(acc.max(size_e0 + delta_e0(&ens, &ksns, &dec, &threshold)))
        })
    }

    /// Rescales so that `max_ε (E₀ + δE₀) = target`; returns the data and the
    /// applied amplitude.
    pub fn normalized(
        &self,
        grid: &Grid,
        epsilons: &[f64],
        m0: i32,
        mu: f64,
        prepared: bool,
        target: f64,
    ) -> Result<(Self, f64)> {
        let size = self.data_size(grid, epsilons, m0, mu, prepared)?;
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::Config(format!("initial data has no resolvable content (size {size})")));
        }
        let amplitude = target / size;
        Ok((self.scaled(amplitude), amplitude))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::divergence;

    #[test]
    fn fields_are_real_mean_zero_and_band_limited() {
        let grid = Grid::unit(32).unwrap();
        let spec = DataSpectrum { sigma1: -1.0, cutoff: 4.0 };
        let d = InitialData::synthesize(&grid, &spec, 3);
        for f in [&d.a0, &d.u0, &d.w0] {
            assert!(f.hermitian_defect() < 1e-14);
            for m in 0..f.ncomp() {
                assert_eq!(f.mean(m), 0.0);
                for i in 0..grid.len() {
                    if grid.xi_norm(i) > 4.0 {
                        assert_eq!(f.component(m)[i], Complex64::default());
                    }
                }
            }
        }
        assert!(divergence(&d.u0).max_abs() < 1e-14);
        assert!(divergence(&d.w0).max_abs() > 1e-3);
    }

    #[test]
    fn seeds_are_reproducible() {
        let grid = Grid::unit(16).unwrap();
        let spec = DataSpectrum { sigma1: -0.5, cutoff: 3.0 };
        let a = InitialData::synthesize(&grid, &spec, 11);
        let b = InitialData::synthesize(&grid, &spec, 11);
        let c = InitialData::synthesize(&grid, &spec, 12);
        assert_eq!(a.a0, b.a0);
        assert_eq!(a.w0, b.w0);
        assert_ne!(a.a0, c.a0);
    }

    #[test]
    fn normalization_hits_target() {
        let grid = Grid::unit(32).unwrap();
        let spec = DataSpectrum { sigma1: -1.0, cutoff: 4.0 };
        let eps = [0.2, 0.1];
        let d = InitialData::synthesize(&grid, &spec, 5);
        let (scaled, amp) = d.normalized(&grid, &eps, 2, 1.0, false, 0.01).unwrap();
        assert!(amp > 0.0);
        let size = scaled.data_size(&grid, &eps, 2, 1.0, false).unwrap();
        assert!((size - 0.01).abs() < 1e-14);
    }
}
