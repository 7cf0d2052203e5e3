//! Per-mode differential operators and Hodge projectors.
//!
//! All operators act multiplicatively on Fourier coefficients and are exact
//! on trigonometric polynomials resolved by the grid.

use std::sync::Arc;

use num_complex::Complex64;

use super::{Grid, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn expect_scalar(f: &SpectralField, op: &str) {
    assert_eq!(f.ncomp(), 1, "{op} expects a scalar field");
}

fn expect_vector(v: &SpectralField, op: &str) {
    assert_eq!(v.ncomp(), Grid::DIM, "{op} expects a vector field");
}

/// `∇f`: component `m` of mode `k` is `i ξ_m f̂(k)`.
pub fn gradient(f: &SpectralField) -> SpectralField {
    expect_scalar(f, "gradient");
    let grid = f.grid();
    let c = f.component(0);
    let comps = (0..Grid::DIM)
        .map(|m| (0..grid.len()).map(|i| I * grid.xi(i)[m] * c[i]).collect())
        .collect();
    SpectralField::from_coefficients(grid, comps, f.is_real()).expect("shape preserved")
}

/// `div v = Σ_m i ξ_m v̂_m(k)`.
pub fn divergence(v: &SpectralField) -> SpectralField {
    expect_vector(v, "divergence");
    let grid = v.grid();
    let out = (0..grid.len())
        .map(|i| {
            let xi = grid.xi(i);
            I * (xi[0] * v.component(0)[i] + xi[1] * v.component(1)[i])
        })
        .collect();
    SpectralField::from_coefficients(grid, vec![out], v.is_real()).expect("shape preserved")
}

/// `Δf`: multiplies every mode of every component by `−|ξ|²`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = Arc::clone(f.grid());
    f.map_modes(|i, z| -grid.xi_norm_sq(i) * z)
}

/// `(−∂₂ψ, ∂₁ψ)`, a divergence-free field built from a stream function.
pub fn perp_gradient(psi: &SpectralField) -> SpectralField {
    let g = gradient(psi);
    let comps = vec![
        g.component(1).iter().map(|z| -z).collect(),
        g.component(0).to_vec(),
    ];
    SpectralField::from_coefficients(psi.grid(), comps, psi.is_real()).expect("shape preserved")
}

/// Per-mode Leray projector `P̂(k) = Id − ξξᵀ/|ξ|²`. The zero mode passes through.
pub fn project_leray(v: &SpectralField) -> SpectralField {
    project(v, false)
}

/// Compressible projector `Id − P`. It annihilates the zero mode.
pub fn project_compressible(v: &SpectralField) -> SpectralField {
    project(v, true)
}

fn project(v: &SpectralField, compressible: bool) -> SpectralField {
    expect_vector(v, "projection");
    let grid = v.grid();
    let n = grid.len();
    let mut c0 = Vec::with_capacity(n);
    let mut c1 = Vec::with_capacity(n);
    for i in 0..n {
        let (v0, v1) = (v.component(0)[i], v.component(1)[i]);
        let k2 = grid.xi_norm_sq(i);
        if k2 == 0.0 {
            if compressible {
                c0.push(Complex64::default());
                c1.push(Complex64::default());
            } else {
                c0.push(v0);
                c1.push(v1);
            }
            continue;
        }
        let [x0, x1] = grid.xi(i);
        let along = (x0 * v0 + x1 * v1) / k2;
        let (g0, g1) = (along * x0, along * x1);
        if compressible {
            c0.push(g0);
            c1.push(g1);
        } else {
            c0.push(v0 - g0);
            c1.push(v1 - g1);
        }
    }
    SpectralField::from_coefficients(grid, vec![c0, c1], v.is_real()).expect("shape preserved")
}

/// Pointwise combination of physical-space samples, transformed back and dealiased.
///
/// `f` receives the samples of every input component at one grid point
/// (concatenated across inputs in order) and writes `nout` outputs.
pub fn pointwise<F>(inputs: &[&SpectralField], nout: usize, f: F) -> SpectralField
where
    F: Fn(&[f64], &mut [f64]),
{
    let grid = Arc::clone(inputs[0].grid());
    let samples: Vec<Vec<f64>> = inputs.iter().flat_map(|x| x.transform_inverse()).collect();
    let mut outputs = vec![vec![0.0; grid.len()]; nout];
    let mut point_in = vec![0.0; samples.len()];
    let mut point_out = vec![0.0; nout];
    for i in 0..grid.len() {
        for (slot, s) in point_in.iter_mut().zip(&samples) {
            *slot = s[i];
        }
        f(&point_in, &mut point_out);
        for (o, &val) in outputs.iter_mut().zip(&point_out) {
            o[i] = val;
        }
    }
    SpectralField::transform_forward(&grid, &outputs)
        .expect("sample count matches grid")
        .dealiased()
}

/// Advective derivative `(v·∇)f` of every component of `f`, dealiased.
pub fn advect(v: &SpectralField, f: &SpectralField) -> SpectralField {
    expect_vector(v, "advect");
    let grads: Vec<SpectralField> = (0..f.ncomp()).map(|m| gradient(&f.scalar_component(m))).collect();
    let mut inputs: Vec<&SpectralField> = vec![v];
    inputs.extend(grads.iter());
    pointwise(&inputs, f.ncomp(), |p, out| {
        let (v0, v1) = (p[0], p[1]);
        for (m, o) in out.iter_mut().enumerate() {
            *o = v0 * p[2 + 2 * m] + v1 * p[3 + 2 * m];
        }
    })
}

/// Pointwise product of a scalar field with every component of `f`, dealiased.
pub fn multiply(s: &SpectralField, f: &SpectralField) -> SpectralField {
    expect_scalar(s, "multiply");
    pointwise(&[s, f], f.ncomp(), |p, out| {
        for (m, o) in out.iter_mut().enumerate() {
            *o = p[0] * p[1 + m];
        }
    })
}
