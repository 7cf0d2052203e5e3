use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the two-dimensional torus `[0, L)²`.
///
/// Mode `(i1, i2)` of an `n × n` coefficient array is stored row-major at
/// `i1 * n + i2`; its signed wavenumber is `k = i` for `i ≤ n/2` and
/// `k = i − n` otherwise, so `k ∈ {−n/2+1, …, n/2}`. The angular frequency
/// is `ξ = 2πk/L`.
///
/// Coefficients are normalised so that `f(x) = Σ_k c_k e^{iξ·x}`, i.e. the
/// forward transform divides by `n²`. With this convention
/// `‖f‖²_{L²(torus)} = L² Σ_k |c_k|²`.
pub struct Grid {
    n: usize,
    length: f64,
    wavenumbers: Vec<i64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl Grid {
    /// Spatial dimension used by every simulation.
    pub const DIM: usize = 2;

    pub fn new(n: usize, length: f64) -> Result<Arc<Self>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "modes per dimension must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain length must be positive, got {length}"
            )));
        }
        let half = n / 2;
        let wavenumbers = (0..n)
            .map(|i| if i <= half { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            length,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    /// `n × n` grid on `[0, 2π)²`, where frequencies coincide with integer wavenumbers.
    pub fn unit(n: usize) -> Result<Arc<Self>> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        Self::DIM
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Torus volume `L²`.
    pub fn volume(&self) -> f64 {
        self.length * self.length
    }

    /// Smallest nonzero angular frequency `2π/L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    #[inline]
    pub fn wavenumber(&self, idx: usize) -> [i64; 2] {
        [self.wavenumbers[idx / self.n], self.wavenumbers[idx % self.n]]
    }

    #[inline]
    pub fn xi(&self, idx: usize) -> [f64; 2] {
        let k = self.wavenumber(idx);
        let s = self.fundamental();
        [s * k[0] as f64, s * k[1] as f64]
    }

    #[inline]
    pub fn xi_norm_sq(&self, idx: usize) -> f64 {
        let [x1, x2] = self.xi(idx);
        x1 * x1 + x2 * x2
    }

    #[inline]
    pub fn xi_norm(&self, idx: usize) -> f64 {
        self.xi_norm_sq(idx).sqrt()
    }

    /// Largest resolvable frequency magnitude (the corner mode).
    pub fn max_xi_norm(&self) -> f64 {
        self.fundamental() * (self.n / 2) as f64 * 2f64.sqrt()
    }

    /// Index of the mode `−k`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let (i1, i2) = (idx / self.n, idx % self.n);
        let m1 = (self.n - i1) % self.n;
        let m2 = (self.n - i2) % self.n;
        m1 * self.n + m2
    }

    /// Two-thirds rule: keeps `|k_m| ≤ n/3` in every direction, which also
    /// removes the Nyquist row and column.
    #[inline]
    pub fn is_dealiased_mode(&self, idx: usize) -> bool {
        let cut = self.n as f64 / 3.0;
        let [k1, k2] = self.wavenumber(idx);
        (k1.abs() as f64) <= cut && (k2.abs() as f64) <= cut
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h]
    }

    /// In-place 2D forward DFT, normalised by `1/n²`.
    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.forward);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// In-place unnormalised 2D inverse DFT (synthesis of `Σ c_k e^{iξ·x}`).
    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.inverse);
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // Rows are contiguous (second index).
        plan.process_with_scratch(data, &mut scratch);
        let mut column = vec![Complex64::default(); n];
        for i2 in 0..n {
            for i1 in 0..n {
                column[i1] = data[i1 * n + i2];
            }
            plan.process_with_scratch(&mut column, &mut scratch);
            for i1 in 0..n {
                data[i1 * n + i2] = column[i1];
            }
        }
    }
}
