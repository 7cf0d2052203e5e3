//! Exact spectra and propagators of the linearised relaxation system.
//!
//! After a Hodge split the linearisation around `(ρ, w, u) = (1, 0, 0)`
//! decouples, per frequency `ξ`, into two 2×2 blocks:
//!
//! * the compressible block acting on `(â, q)`, `q = ξ̂·ŵ`,
//!   `B₁ = [[0, i|ξ|/ε], [i|ξ|/ε, 1/ε²]]`, with characteristic polynomial
//!   `λ² + λ/ε² + |ξ|²/ε²`;
//! * the incompressible block acting on `(p, v)`, the components of `P̂ŵ`
//!   and `û` along `ξ̂^⊥`, `B₂ = [[1/ε², −1/ε], [−1/ε, 1 + μ|ξ|²]]`, with
//!   characteristic polynomial `λ² + (1/ε² + 1 + μ|ξ|²)λ + μ|ξ|²/ε²`.
//!
//! The remaining `d − 1` transverse directions of the compressible velocity
//! block relax at `λ₀ = −1/ε²`. Each mode evolves as `∂_t y + B y = 0`, so the
//! propagators are `e^{−tB}`.
//!
//! Branch labelling: `λ₁` (resp. `λ₃`) is the root with the smaller `|Re|`;
//! when the real parts tie, `λ₁` is the root with `Im ≥ 0`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<Complex64>;

/// `|1 − 4ε²|ξ|²|` below which the compressible block is treated as degenerate.
pub const DEGENERATE_DISCRIMINANT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolPoint {
    pub xi_norm: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub d: usize,
}

impl SymbolPoint {
    pub fn new(xi_norm: f64, epsilon: f64, mu: f64, d: usize) -> Self {
        Self { xi_norm, epsilon, mu, d }
    }

    /// `ε|ξ|`, the variable separating the two asymptotic regimes.
    pub fn scaled_frequency(&self) -> f64 {
        self.epsilon * self.xi_norm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolEigenSet {
    /// Multiplicity `d − 1`.
    pub lambda0: C64,
    pub lambda1: C64,
    pub lambda2: C64,
    /// Multiplicity `d` (as is `lambda4`).
    pub lambda3: C64,
    pub lambda4: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Low,
    High,
}

/// Roots of `λ² + bλ + c` ordered (slow, fast), plus their difference
/// `slow − fast = sqrt(disc)` computed without cancellation.
#[derive(Clone, Copy, Debug)]
struct RootPair {
    slow: C64,
    fast: C64,
    gap: C64,
}

fn quadratic_roots(b: f64, c: f64, disc: f64) -> RootPair {
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let fast = -0.5 * (b + sq);
        let slow = if fast != 0.0 { c / fast } else { 0.0 };
        RootPair { slow: C64::new(slow, 0.0), fast: C64::new(fast, 0.0), gap: C64::new(sq, 0.0) }
    } else {
        let im = 0.5 * (-disc).sqrt();
        RootPair {
            slow: C64::new(-0.5 * b, im),
            fast: C64::new(-0.5 * b, -im),
            gap: C64::new(0.0, 2.0 * im),
        }
    }
}

fn b1_coefficients(p: &SymbolPoint) -> (f64, f64, f64, f64) {
    let e2 = p.epsilon * p.epsilon;
    let x2 = p.xi_norm * p.xi_norm;
    let normalized = 1.0 - 4.0 * e2 * x2;
    (1.0 / e2, x2 / e2, normalized / (e2 * e2), normalized)
}

fn b2_coefficients(p: &SymbolPoint) -> (f64, f64, f64) {
    let inv = 1.0 / (p.epsilon * p.epsilon);
    let diag = 1.0 + p.mu * p.xi_norm * p.xi_norm;
    let b = inv + diag;
    let c = p.mu * p.xi_norm * p.xi_norm * inv;
    let disc = (inv - diag) * (inv - diag) + 4.0 * inv;
    (b, c, disc)
}

pub fn eigenvalues(p: &SymbolPoint) -> SymbolEigenSet {
    let (b1, c1, d1, _) = b1_coefficients(p);
    let (b2, c2, d2) = b2_coefficients(p);
    let comp = quadratic_roots(b1, c1, d1);
    let incomp = quadratic_roots(b2, c2, d2);
    SymbolEigenSet {
        lambda0: C64::new(-1.0 / (p.epsilon * p.epsilon), 0.0),
        lambda1: comp.slow,
        lambda2: comp.fast,
        lambda3: incomp.slow,
        lambda4: incomp.fast,
    }
}

/// Leading-order expansions in the low (`ε|ξ| ≤ 1/4`) and high (`ε|ξ| ≥ 4`) regimes.
pub fn asymptotic_eigenvalues(p: &SymbolPoint, regime: Regime) -> Result<SymbolEigenSet> {
    let e = p.epsilon;
    let e2 = e * e;
    let x = p.xi_norm;
    let x2 = x * x;
    let mu = p.mu;
    let real = |v: f64| C64::new(v, 0.0);
    match regime {
        Regime::Low => {
            if p.scaled_frequency() > 0.25 {
                return Err(Error::OutOfRange {
                    what: "low-frequency regime",
                    detail: format!("ε|ξ| = {} > 1/4", p.scaled_frequency()),
                });
            }
            Ok(SymbolEigenSet {
                lambda0: real(-1.0 / e2),
                lambda1: real(-x2),
                lambda2: real(-1.0 / e2 + x2),
                lambda3: real(-mu * x2 / (1.0 + e2)),
                lambda4: real(-(1.0 + 1.0 / e2) - mu * e2 * x2 / (1.0 + e2)),
            })
        }
        Regime::High => {
            if p.scaled_frequency() < 4.0 {
                return Err(Error::OutOfRange {
                    what: "high-frequency regime",
                    detail: format!("ε|ξ| = {} < 4", p.scaled_frequency()),
                });
            }
            Ok(SymbolEigenSet {
                lambda0: real(-1.0 / e2),
                lambda1: C64::new(-0.5 / e2, x / e),
                lambda2: C64::new(-0.5 / e2, -x / e),
                lambda3: real(-1.0 / e2),
                lambda4: real(-1.0 - mu * x2),
            })
        }
    }
}

/// Reduced compressible symbol acting on `(â, ξ̂·ŵ)`.
pub fn b1_matrix(p: &SymbolPoint) -> Mat2 {
    let off = C64::new(0.0, p.xi_norm / p.epsilon);
    Mat2::new(C64::new(0.0, 0.0), off, off, C64::new(1.0 / (p.epsilon * p.epsilon), 0.0))
}

/// Incompressible symbol acting on `(P̂ŵ, û)` along one transverse direction.
pub fn b2_matrix(p: &SymbolPoint) -> Mat2 {
    let inv_e = 1.0 / p.epsilon;
    Mat2::new(
        C64::new(inv_e * inv_e, 0.0),
        C64::new(-inv_e, 0.0),
        C64::new(-inv_e, 0.0),
        C64::new(1.0 + p.mu * p.xi_norm * p.xi_norm, 0.0),
    )
}

/// `(e^z − 1)` without cancellation for complex `z`.
pub fn expm1(z: C64) -> C64 {
    let em1 = z.re.exp_m1();
    let s = (0.5 * z.im).sin();
    C64::new(em1 * z.im.cos() - 2.0 * s * s, z.re.exp() * z.im.sin())
}

/// `φ₁(z) = (e^z − 1)/z`, with `φ₁(0) = 1`.
pub fn phi1(z: C64) -> C64 {
    if z == C64::new(0.0, 0.0) {
        C64::new(1.0, 0.0)
    } else {
        expm1(z) / z
    }
}

/// `sinh(z)/z` by series near the origin.
fn sinhc(z: C64) -> C64 {
    if z.norm() < 0.5 {
        let z2 = z * z;
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..12 {
            term *= z2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    } else {
        z.sinh() / z
    }
}

/// `e^{tM}` for a 2×2 generator `M` with eigenvalues `slow`, `fast` using the
/// Newton form `e^{t fast} I + Δ (M − fast I)`, `Δ` the divided difference
/// of `λ ↦ e^{tλ}`.
fn exp_generator(m: &Mat2, roots: RootPair, t: f64, degenerate: bool) -> Mat2 {
    let id = Mat2::identity();
    if degenerate {
        // Expansion about the mean root; reduces to the Jordan form
        // e^{tm}(I + t(M − mI)) as the gap closes.
        let mean = 0.5 * (roots.slow + roots.fast);
        let half = 0.5 * t * roots.gap;
        let em = (mean * t).exp();
        return id * (em * half.cosh()) + (m - id * mean) * (em * t * sinhc(half));
    }
    let dd = (roots.slow * t).exp() * t * phi1(-roots.gap * t);
    id * (roots.fast * t).exp() + (m - id * roots.fast) * dd
}

/// `Ĝ₁(t, ξ) = e^{−tB₁(ξ)}`.
pub fn propagator_b1(p: &SymbolPoint, t: f64) -> Mat2 {
    let (b, c, disc, normalized) = b1_coefficients(p);
    let roots = quadratic_roots(b, c, disc);
    exp_generator(&(-b1_matrix(p)), roots, t, normalized.abs() <= DEGENERATE_DISCRIMINANT)
}

/// `Ĝ₂(t, ξ) = e^{−tB₂(ξ)}`.
pub fn propagator_b2(p: &SymbolPoint, t: f64) -> Mat2 {
    let (b, c, disc) = b2_coefficients(p);
    exp_generator(&(-b2_matrix(p)), quadratic_roots(b, c, disc), t, false)
}

/// `|λ² + λ/ε² + |ξ|²/ε²|`.
pub fn char_residual_b1(p: &SymbolPoint, lambda: C64) -> f64 {
    let (b, c, _, _) = b1_coefficients(p);
    (lambda * lambda + lambda * b + c).norm()
}

/// `|λ² + (1/ε² + 1 + μ|ξ|²)λ + μ|ξ|²/ε²|`.
pub fn char_residual_b2(p: &SymbolPoint, lambda: C64) -> f64 {
    let (b, c, _) = b2_coefficients(p);
    (lambda * lambda + lambda * b + c).norm()
}

/// Characteristic-polynomial residuals of `λ₁…λ₄`, each scaled by `max(1, |λ|²)`.
pub fn scaled_char_residuals(p: &SymbolPoint, set: &SymbolEigenSet) -> [f64; 4] {
    let scale = |l: C64| l.norm_sqr().max(1.0);
    let b1 = |l: C64| char_residual_b1(p, l);
    let b2 = |l: C64| char_residual_b2(p, l);
    [
        b1(set.lambda1) / scale(set.lambda1),
        b1(set.lambda2) / scale(set.lambda2),
        b2(set.lambda3) / scale(set.lambda3),
        b2(set.lambda4) / scale(set.lambda4),
    ]
}

/// Relative defects of the root sums and products,
/// `λ₁ + λ₂ = −1/ε²`, `λ₁λ₂ = |ξ|²/ε²`, `λ₃ + λ₄ = −(1/ε² + 1 + μ|ξ|²)`,
/// `λ₃λ₄ = μ|ξ|²/ε²`. Zero products are compared absolutely.
pub fn vieta_defects(p: &SymbolPoint, set: &SymbolEigenSet) -> [f64; 4] {
    let (b1, c1, _, _) = b1_coefficients(p);
    let (b2, c2, _) = b2_coefficients(p);
    let rel = |got: C64, want: f64| (got - want).norm() / if want == 0.0 { 1.0 } else { want.abs() };
    [
        rel(set.lambda1 + set.lambda2, -b1),
        rel(set.lambda1 * set.lambda2, c1),
        rel(set.lambda3 + set.lambda4, -b2),
        rel(set.lambda3 * set.lambda4, c2),
    ]
}

