use std::sync::Arc;

use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// Fourier-coefficient representation of a scalar or vector field on the torus.
///
/// `components` holds one coefficient array per vector component (one for a
/// scalar). When `real` is set the field represents a real-valued function
/// and its coefficients satisfy `c(−k) = conj(c(k))`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    components: Vec<Vec<Complex64>>,
    real: bool,
}

/// Equal when defined on the same torus with identical coefficients.
impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        let same_grid = Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.n() == other.grid.n() && self.grid.length() == other.grid.length());
        same_grid && self.real == other.real && self.components == other.components
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>, ncomp: usize) -> Self {
        Self {
            grid: Arc::clone(grid),
            components: vec![vec![Complex64::default(); grid.len()]; ncomp],
            real: true,
        }
    }

    pub fn scalar_zeros(grid: &Arc<Grid>) -> Self {
        Self::zeros(grid, 1)
    }

    pub fn vector_zeros(grid: &Arc<Grid>) -> Self {
        Self::zeros(grid, Grid::DIM)
    }

    pub fn from_coefficients(
        grid: &Arc<Grid>,
        components: Vec<Vec<Complex64>>,
        real: bool,
    ) -> Result<Self> {
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), got: c.len() });
            }
        }
        Ok(Self { grid: Arc::clone(grid), components, real })
    }

    /// Forward transform of real physical samples, one slice per component.
    pub fn transform_forward<S: AsRef<[f64]>>(grid: &Arc<Grid>, values: &[S]) -> Result<Self> {
        let components = values
            .iter()
            .map(|v| {
                let v = v.as_ref();
                if v.len() != grid.len() {
                    return Err(Error::DimensionMismatch { expected: grid.len(), got: v.len() });
                }
                let mut data: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                grid.fft_forward(&mut data);
                Ok(data)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut field = Self { grid: Arc::clone(grid), components, real: true };
        field.symmetrize();
        Ok(field)
    }

    /// Forward transform of complex samples; the result carries no reality flag.
    pub fn transform_forward_complex(grid: &Arc<Grid>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        let mut components = values;
        for c in components.iter_mut() {
            if c.len() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), got: c.len() });
            }
            grid.fft_forward(c);
        }
        Ok(Self { grid: Arc::clone(grid), components, real: false })
    }

    /// Samples a real function of position, one closure per component.
    pub fn from_fn<F>(grid: &Arc<Grid>, ncomp: usize, f: F) -> Self
    where
        F: Fn(usize, [f64; 2]) -> f64,
    {
        let values: Vec<Vec<f64>> = (0..ncomp)
            .map(|m| (0..grid.len()).map(|i| f(m, grid.point(i))).collect())
            .collect();
        Self::transform_forward(grid, &values).expect("sample count matches grid")
    }

    /// Physical-space samples of every component (real parts when `real` is set).
    pub fn transform_inverse(&self) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|c| {
                let mut data = c.clone();
                self.grid.fft_inverse(&mut data);
                data.into_iter().map(|z| z.re).collect()
            })
            .collect()
    }

    /// Complex physical-space samples.
    pub fn transform_inverse_complex(&self) -> Vec<Vec<Complex64>> {
        self.components
            .iter()
            .map(|c| {
                let mut data = c.clone();
                self.grid.fft_inverse(&mut data);
                data
            })
            .collect()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn component(&self, m: usize) -> &[Complex64] {
        &self.components[m]
    }

    pub fn component_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.components[m]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    /// Extracts component `m` as a scalar field.
    pub fn scalar_component(&self, m: usize) -> SpectralField {
        Self {
            grid: Arc::clone(&self.grid),
            components: vec![self.components[m].clone()],
            real: self.real,
        }
    }

    pub fn stack(parts: &[&SpectralField]) -> Result<SpectralField> {
        let grid = Arc::clone(parts[0].grid());
        let mut components = Vec::new();
        let mut real = true;
        for p in parts {
            if p.grid.len() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), got: p.grid.len() });
            }
            real &= p.real;
            components.extend(p.components.iter().cloned());
        }
        Ok(Self { grid, components, real })
    }

    pub fn map_modes<F>(&self, f: F) -> SpectralField
    where
        F: Fn(usize, Complex64) -> Complex64,
    {
        let components = self
            .components
            .iter()
            .map(|c| c.iter().enumerate().map(|(i, &z)| f(i, z)).collect())
            .collect();
        Self { grid: Arc::clone(&self.grid), components, real: self.real }
    }

    pub fn zip_with<F>(&self, other: &SpectralField, f: F) -> SpectralField
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        assert_eq!(self.ncomp(), other.ncomp(), "component count mismatch");
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Self { grid: Arc::clone(&self.grid), components, real: self.real && other.real }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        self.map_modes(|_, z| z * s)
    }

    /// `self += s · other`
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * s;
            }
        }
        self.real &= other.real;
    }

    /// Zeroes every mode outside the two-thirds band.
    pub fn dealias(&mut self) {
        let grid = Arc::clone(&self.grid);
        for c in self.components.iter_mut() {
            for (i, z) in c.iter_mut().enumerate() {
                if !grid.is_dealiased_mode(i) {
                    *z = Complex64::default();
                }
            }
        }
    }

    pub fn dealiased(mut self) -> SpectralField {
        self.dealias();
        self
    }

    /// Restores exact Hermitian symmetry for real fields.
    pub fn symmetrize(&mut self) {
        if !self.real {
            return;
        }
        let grid = Arc::clone(&self.grid);
        for c in self.components.iter_mut() {
            for i in 0..c.len() {
                let j = grid.mirror(i);
                if j < i {
                    continue;
                }
                if j == i {
                    c[i] = Complex64::new(c[i].re, 0.0);
                } else {
                    let avg = (c[i] + c[j].conj()) * 0.5;
                    c[i] = avg;
                    c[j] = avg.conj();
                }
            }
        }
    }

    /// Largest violation of `c(−k) = conj(c(k))` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for c in &self.components {
            for i in 0..c.len() {
                let j = self.grid.mirror(i);
                worst = worst.max((c[i] - c[j].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Spatial mean of component `m` (the zero mode).
    pub fn mean(&self, m: usize) -> f64 {
        self.components[m][0].re
    }

    /// `Σ_m Σ_k |c_m(k)|²`.
    pub fn coefficient_energy(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// L² norm over the torus, computed from coefficients.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coefficient_energy()).sqrt()
    }

    /// Max-norm of the physical samples over all components.
    pub fn sup_norm(&self) -> f64 {
        self.transform_inverse()
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Maximum absolute coefficient difference.
    pub fn max_diff(&self, other: &SpectralField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }
}
