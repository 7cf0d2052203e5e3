//! State bundles and right-hand sides of the relaxation system and its limit.
//!
//! Writing `a = ρ − 1`, the relaxation system reads
//!
//! ```text
//! ∂_t a + ε⁻¹ w·∇a + ε⁻¹(1 + a) div w = 0
//! ∂_t w + ε⁻¹(1 + h(a))∇a + ε⁻²(w − εu) = −ε⁻¹ w·∇w,     h(a) = −a/(1 + a)
//! ∂_t u − μΔu + ∇P + ε⁻¹(1 + a)(εu − w) = −u·∇u,          div u = 0
//! ```
//!
//! and the limit system `∂_t a − Δa = −u·∇a`, `∂_t u − μΔu + ∇P = −u·∇u`.
//! Pressures are never stored: the velocity equations are Leray-projected.
//!
//! Nonlinear products are evaluated pseudo-spectrally and dealiased with the
//! two-thirds rule after every product.

pub mod diagnostics;

use crate::error::{Error, Result};
use crate::spectral::ops::{advect, multiply, pointwise};
use crate::spectral::{divergence, gradient, laplacian, project_compressible, project_leray, SpectralField};

pub use diagnostics::{delta_e0, e0, DiagnosticsSample, InstantDiagnostics};

/// Minimum admissible density `1 + a`.
pub const DENSITY_FLOOR: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct EnsState {
    pub a: SpectralField,
    pub w: SpectralField,
    pub u: SpectralField,
    pub epsilon: f64,
    pub mu: f64,
}

#[derive(Clone, Debug)]
pub struct KsnsState {
    pub a: SpectralField,
    pub u: SpectralField,
    pub mu: f64,
}

/// Time derivative of an [`EnsState`].
#[derive(Clone, Debug)]
pub struct EnsTendency {
    pub a: SpectralField,
    pub w: SpectralField,
    pub u: SpectralField,
}

/// Time derivative of a [`KsnsState`].
#[derive(Clone, Debug)]
pub struct KsnsTendency {
    pub a: SpectralField,
    pub u: SpectralField,
}

impl EnsState {
    pub fn equilibrium(grid: &std::sync::Arc<crate::Grid>, epsilon: f64, mu: f64) -> Self {
        Self {
            a: SpectralField::scalar_zeros(grid),
            w: SpectralField::vector_zeros(grid),
            u: SpectralField::vector_zeros(grid),
            epsilon,
            mu,
        }
    }

    /// Restores the discrete invariants: dealiased, solenoidal `u`, Hermitian symmetry.
    pub fn normalize(&mut self) {
        for f in [&mut self.a, &mut self.w] {
            f.dealias();
            f.symmetrize();
        }
        self.u = project_leray(&self.u).dealiased();
        self.u.symmetrize();
    }

    pub fn min_density(&self) -> f64 {
        min_density(&self.a)
    }
}

impl KsnsState {
    pub fn equilibrium(grid: &std::sync::Arc<crate::Grid>, mu: f64) -> Self {
        Self { a: SpectralField::scalar_zeros(grid), u: SpectralField::vector_zeros(grid), mu }
    }

    pub fn normalize(&mut self) {
        self.a.dealias();
        self.a.symmetrize();
        self.u = project_leray(&self.u).dealiased();
        self.u.symmetrize();
    }

    pub fn min_density(&self) -> f64 {
        min_density(&self.a)
    }
}

fn min_density(a: &SpectralField) -> f64 {
    a.transform_inverse()[0].iter().fold(f64::INFINITY, |m, &x| m.min(1.0 + x))
}

/// Fails when `1 + a < 1/2` anywhere on the grid.
pub fn check_density(a: &SpectralField) -> Result<()> {
    let min_density = min_density(a);
    if min_density < DENSITY_FLOOR || !min_density.is_finite() {
        return Err(Error::DensityFloor { min_density });
    }
    Ok(())
}

/// Pressure closure `h(a) = −a/(1 + a)`, evaluated pointwise.
pub fn closure_h(a: &SpectralField) -> Result<SpectralField> {
    check_density(a)?;
    Ok(pointwise(&[a], 1, |p, out| out[0] = -p[0] / (1.0 + p[0])))
}

/// Full right-hand side of the relaxation system.
pub fn rhs_ens(s: &EnsState) -> Result<EnsTendency> {
    check_density(&s.a)?;
    let eps = s.epsilon;
    let grad_a = gradient(&s.a);
    let div_w = divergence(&s.w);
    let a_rate = pointwise(&[&s.w, &grad_a, &s.a, &div_w], 1, |p, out| {
        out[0] = -(p[0] * p[2] + p[1] * p[3] + (1.0 + p[4]) * p[5]) / eps;
    });
    let grad_w0 = gradient(&s.w.scalar_component(0));
    let grad_w1 = gradient(&s.w.scalar_component(1));
    let w_rate = pointwise(&[&s.a, &grad_a, &s.w, &s.u, &grad_w0, &grad_w1], 2, |p, out| {
        let (a, ax, ay) = (p[0], p[1], p[2]);
        let (w0, w1, u0, u1) = (p[3], p[4], p[5], p[6]);
        let one_plus_h = 1.0 / (1.0 + a);
        let adv0 = w0 * p[7] + w1 * p[8];
        let adv1 = w0 * p[9] + w1 * p[10];
        out[0] = -one_plus_h * ax / eps - (w0 - eps * u0) / (eps * eps) - adv0 / eps;
        out[1] = -one_plus_h * ay / eps - (w1 - eps * u1) / (eps * eps) - adv1 / eps;
    });
    let lap_u = laplacian(&s.u);
    let adv_u = advect(&s.u, &s.u);
    let drag = pointwise(&[&s.a, &s.w, &s.u], 2, |p, out| {
        out[0] = (1.0 + p[0]) * (p[1] - eps * p[3]) / eps;
        out[1] = (1.0 + p[0]) * (p[2] - eps * p[4]) / eps;
    });
    let mut bracket = lap_u.scale(s.mu).sub(&adv_u);
    bracket.axpy(1.0, &drag);
    Ok(EnsTendency { a: a_rate, w: w_rate, u: project_leray(&bracket) })
}

/// Linear part of [`rhs_ens`] about the rest state.
pub fn ens_linear(s: &EnsState) -> EnsTendency {
    let eps = s.epsilon;
    let a = divergence(&s.w).scale(-1.0 / eps);
    let mut w = gradient(&s.a).scale(-1.0 / eps);
    w.axpy(-1.0 / (eps * eps), &s.w);
    w.axpy(1.0 / eps, &s.u);
    let mut bracket = laplacian(&s.u).scale(s.mu);
    bracket.axpy(1.0 / eps, &s.w);
    bracket.axpy(-1.0, &s.u);
    EnsTendency { a, w, u: project_leray(&bracket) }
}

/// Nonlinear remainder `rhs_ens − ens_linear`, assembled directly.
pub fn ens_nonlinear(s: &EnsState) -> Result<EnsTendency> {
    let h = closure_h(&s.a)?;
    let eps = s.epsilon;
    let grad_a = gradient(&s.a);
    let div_w = divergence(&s.w);
    let a = pointwise(&[&s.w, &grad_a, &s.a, &div_w], 1, |p, out| {
        out[0] = -(p[0] * p[2] + p[1] * p[3] + p[4] * p[5]) / eps;
    });
    let mut w = multiply(&h, &grad_a);
    w.axpy(1.0, &advect(&s.w, &s.w));
    let w = w.scale(-1.0 / eps);
    let drag = pointwise(&[&s.a, &s.w, &s.u], 2, |p, out| {
        out[0] = p[0] * (p[1] - eps * p[3]) / eps;
        out[1] = p[0] * (p[2] - eps * p[4]) / eps;
    });
    let u = project_leray(&drag.sub(&advect(&s.u, &s.u)));
    Ok(EnsTendency { a, w, u })
}

/// Right-hand side of the limit system.
pub fn rhs_ksns(s: &KsnsState) -> KsnsTendency {
    let lin = ksns_linear(s);
    let non = ksns_nonlinear(s);
    KsnsTendency { a: lin.a.add(&non.a), u: lin.u.add(&non.u) }
}

pub fn ksns_linear(s: &KsnsState) -> KsnsTendency {
    KsnsTendency { a: laplacian(&s.a), u: laplacian(&s.u).scale(s.mu) }
}

/// `(−u·∇a, −P(u·∇u))`.
pub fn ksns_nonlinear(s: &KsnsState) -> KsnsTendency {
    KsnsTendency {
        a: advect(&s.u, &s.a).scale(-1.0),
        u: project_leray(&advect(&s.u, &s.u)).scale(-1.0),
    }
}

/// Damped modes `Z = P^⊤w + ε(1 + h(a))∇a` and `R = Pw − εu`.
pub fn damped_modes(s: &EnsState) -> Result<(SpectralField, SpectralField)> {
    check_density(&s.a)?;
    let eps = s.epsilon;
    let grad_a = gradient(&s.a);
    let weighted = pointwise(&[&s.a, &grad_a], 2, |p, out| {
        out[0] = p[1] / (1.0 + p[0]);
        out[1] = p[2] / (1.0 + p[0]);
    });
    let mut z = project_compressible(&s.w);
    z.axpy(eps, &weighted);
    let mut r = project_leray(&s.w);
    r.axpy(-eps, &s.u);
    Ok((z, r))
}

/// `Y = −div((1 + a)(Z + R))`.
pub fn source_y(s: &EnsState) -> Result<SpectralField> {
    let (z, r) = damped_modes(s)?;
    let sum = z.add(&r);
    let flux = pointwise(&[&s.a, &sum], 2, |p, out| {
        out[0] = (1.0 + p[0]) * p[1];
        out[1] = (1.0 + p[0]) * p[2];
    });
    Ok(divergence(&flux).scale(-1.0))
}

/// Expanded form `−w·∇a − (1 + a) div w − εΔa + εu·∇a` of [`source_y`].
pub fn source_y_expanded(s: &EnsState) -> Result<SpectralField> {
    check_density(&s.a)?;
    let eps = s.epsilon;
    let grad_a = gradient(&s.a);
    let div_w = divergence(&s.w);
    let mut y = pointwise(&[&s.w, &s.u, &grad_a, &s.a, &div_w], 1, |p, out| {
        let (w0, w1, u0, u1, ax, ay, a, dw) = (p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
        out[0] = -(w0 * ax + w1 * ay) - (1.0 + a) * dw + eps * (u0 * ax + u1 * ay);
    });
    y.axpy(-eps, &laplacian(&s.a));
    Ok(y)
}

/// Velocity tendency in damped-mode form:
/// `μΔu − P(u·∇u) + ε⁻¹P(a(Z + R)) + ε⁻¹R`.
pub fn u_rate_damped_form(s: &EnsState) -> Result<SpectralField> {
    let (z, r) = damped_modes(s)?;
    let eps = s.epsilon;
    let coupling = multiply(&s.a, &z.add(&r));
    let mut out = laplacian(&s.u).scale(s.mu);
    out.axpy(-1.0, &project_leray(&advect(&s.u, &s.u)));
    out.axpy(1.0 / eps, &project_leray(&coupling));
    out.axpy(1.0 / eps, &r);
    Ok(out)
}

/// Right side of the density-error equation,
/// `Δδa − u^ε·∇δa − δu·∇a* + ε⁻¹Y`.
pub fn error_rhs_density(ens: &EnsState, ksns: &KsnsState) -> Result<SpectralField> {
    let da = ens.a.sub(&ksns.a);
    let du = ens.u.sub(&ksns.u);
    let y = source_y(ens)?;
    let mut out = laplacian(&da);
    out.axpy(-1.0, &advect(&ens.u, &da));
    out.axpy(-1.0, &advect(&du, &ksns.a));
    out.axpy(1.0 / ens.epsilon, &y);
    Ok(out)
}

/// Darcy velocity `W* = u* − ∇ρ*/ρ*`.
pub fn darcy_velocity(s: &KsnsState) -> Result<SpectralField> {
    check_density(&s.a)?;
    let grad_a = gradient(&s.a);
    Ok(pointwise(&[&s.a, &grad_a, &s.u], 2, |p, out| {
        out[0] = p[3] - p[1] / (1.0 + p[0]);
        out[1] = p[4] - p[2] / (1.0 + p[0]);
    }))
}
