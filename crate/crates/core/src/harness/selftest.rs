//! Invariant suite run by the `selftest` experiment.
//!
//! Every check returns a [`Gate`]. The [`SelftestFixture`] hooks let tests
//! corrupt one ingredient and confirm that the matching check fails.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::experiments::random_symbol_point;
use super::initial_data::{random_field, DataSpectrum};
use super::record::Gate;
use crate::integrator::{drive, EnsStepper, KsnsStepper, StepperConfig};
use crate::littlewood_paley::{
    bernstein_ratios, interpolation_ratio, standard_cutoff, unit_cosine, DyadicDecomposition, RING_INNER, RING_OUTER,
};
use crate::models::{closure_h, damped_modes, source_y, source_y_expanded, EnsState, KsnsState};
use crate::spectral::ops::pointwise;
use crate::spectral::{divergence, gradient, project_compressible, project_leray, Grid, SpectralField};
use crate::spectrum::{eigenvalues, propagator_b1, propagator_b2, scaled_char_residuals, Mat2, SymbolPoint, C64};

/// Injection points for negative controls.
#[derive(Clone, Copy, Debug)]
pub struct SelftestFixture {
    /// Low-frequency cutoff used to build the dyadic multipliers.
    pub cutoff: fn(f64) -> f64,
    /// Relative perturbation applied to `λ₁` before residuals are taken.
    pub eigen_perturbation: f64,
    pub seed: u64,
}

impl Default for SelftestFixture {
    fn default() -> Self {
        Self { cutoff: standard_cutoff, eigen_perturbation: 0.0, seed: 7 }
    }
}

const N: usize = 64;
const MU: f64 = 1.0;

fn rng(fixture: &SelftestFixture, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fixture.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn small_field(grid: &Arc<Grid>, ncomp: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let f = random_field(grid, &DataSpectrum { sigma1: -1.0, cutoff: 3.0 }, ncomp, rng);
    f.scale(amplitude / f.sup_norm().max(f64::MIN_POSITIVE))
}

fn small_ens(grid: &Arc<Grid>, epsilon: f64, rng: &mut ChaCha8Rng) -> EnsState {
    EnsState {
        a: small_field(grid, 1, 0.01, rng),
        w: small_field(grid, 2, 0.01, rng),
        u: project_leray(&small_field(grid, 2, 0.01, rng)),
        epsilon,
        mu: MU,
    }
}

fn flat_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> SpectralField {
    random_field(grid, &DataSpectrum { sigma1: -1.0, cutoff: f64::INFINITY }, 1, rng)
}

fn projector_algebra(grid: &Arc<Grid>, fixture: &SelftestFixture) -> Gate {
    let v = flat_field(grid, &mut rng(fixture, 1));
    let v = SpectralField::stack(&[&v, &flat_field(grid, &mut rng(fixture, 2))]).expect("two scalars");
    let p = project_leray(&v);
    let q = project_compressible(&v);
    let scale = v.max_abs();
    let err = [
        project_leray(&p).max_diff(&p),
        project_compressible(&q).max_diff(&q),
        p.add(&q).max_diff(&v),
        project_leray(&q).max_abs(),
        divergence(&p).max_abs() / grid.max_xi_norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Gate::at_most("projector_algebra", err / scale, 1e-13)
}

fn partition_of_unity(grid: &Arc<Grid>, fixture: &SelftestFixture) -> Gate {
    let dec = DyadicDecomposition::with_cutoff(grid, fixture.cutoff);
    let err = (1..grid.len()).map(|i| (dec.partition_sum(grid.xi_norm(i)) - 1.0).abs()).fold(0.0, f64::max);
    Gate::at_most("partition_of_unity", err, 1e-12)
}

fn block_reconstruction(grid: &Arc<Grid>, fixture: &SelftestFixture) -> Gate {
    let dec = DyadicDecomposition::with_cutoff(grid, fixture.cutoff);
    let f = flat_field(grid, &mut rng(fixture, 3));
    let mut sum = SpectralField::scalar_zeros(grid);
    for j in dec.j_min()..=dec.j_max() {
        sum = sum.add(&dec.block(&f, j).expect("resolvable block"));
    }
    Gate::at_most("block_reconstruction", sum.max_diff(&f) / f.max_abs(), 1e-10)
}

fn bernstein(grid: &Arc<Grid>, fixture: &SelftestFixture) -> Gate {
    let dec = DyadicDecomposition::with_cutoff(grid, fixture.cutoff);
    let f = flat_field(grid, &mut rng(fixture, 4));
    // Worst ratio to the admissible interval, ≤ 1 when every block is inside.
    let worst = bernstein_ratios(&dec, &f)
        .into_iter()
        .map(|(_, r)| (RING_INNER / r).max(r / RING_OUTER))
        .fold(0.0, f64::max);
    Gate::at_most("bernstein", worst, 1.0)
}

fn interpolation(grid: &Arc<Grid>, fixture: &SelftestFixture) -> Gate {
    let dec = DyadicDecomposition::with_cutoff(grid, fixture.cutoff);
    let mut r = rng(fixture, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let sigma1 = r.gen_range(-2.0..1.0);
        let f = random_field(grid, &DataSpectrum { sigma1, cutoff: f64::INFINITY }, 1, &mut r);
        let s1 = r.gen_range(-1.0..0.5);
        let s2 = s1 + r.gen_range(0.25..2.0);
        let theta = r.gen_range(0.1..0.9);
        worst = worst.max(interpolation_ratio(&dec, &f, s1, s2, theta));
    }
    Gate::at_most("interpolation", worst, 10.0)
}

fn char_residuals(fixture: &SelftestFixture) -> Gate {
    let mut r = rng(fixture, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let p = random_symbol_point(&mut r, MU);
        let mut set = eigenvalues(&p);
        set.lambda1 *= 1.0 + fixture.eigen_perturbation;
        worst = scaled_char_residuals(&p, &set).into_iter().fold(worst, f64::max);
    }
    Gate::at_most("char_residual", worst, 1e-10)
}

/// Classical RK4 for `y' = −B y` with `steps` uniform steps.
pub fn rk4_propagator(b: &Mat2, t: f64, steps: usize) -> Mat2 {
    let h = t / steps as f64;
    let f = |y: &Mat2| -(b * y);
    let mut y = Mat2::identity();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&(y + k1 * C64::new(0.5 * h, 0.0)));
        let k3 = f(&(y + k2 * C64::new(0.5 * h, 0.0)));
        let k4 = f(&(y + k3 * C64::new(h, 0.0)));
        y += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
    }
    y
}

fn propagator_vs_ode() -> Gate {
    let cases = [(0.2, 0.5, 1.0), (0.1, 3.0, 0.5), (0.2, 10.0, 0.2), (0.1, 5.0, 0.3), (0.05, 1.0, 0.05)];
    let mut worst: f64 = 0.0;
    for (eps, xi, t) in cases {
        let p = SymbolPoint::new(xi, eps, MU, 2);
        for (exact, b) in [
            (propagator_b1(&p, t), crate::spectrum::b1_matrix(&p)),
            (propagator_b2(&p, t), crate::spectrum::b2_matrix(&p)),
        ] {
            let oracle = rk4_propagator(&b, t, 20_000);
            worst = worst.max((exact - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Gate::at_most("propagator_vs_ode", worst, 1e-8)
}

fn heat_analytic(grid: &Arc<Grid>) -> Gate {
    let k = [2, 1];
    let a0 = unit_cosine(grid, k);
    let xi2 = grid.fundamental().powi(2) * 5.0;
    let cfg = StepperConfig::new(0.05, 0.5);
    let mut stepper = KsnsStepper::new(grid, MU).linear_only();
    let state = KsnsState { a: a0.clone(), u: SpectralField::vector_zeros(grid), mu: MU };
    match drive(&mut stepper, state, &cfg, |_, _| Ok(())) {
        Ok((s, _)) => {
            let exact = a0.scale((-xi2 * 0.5).exp());
            Gate::at_most("heat_analytic", s.a.max_diff(&exact) / a0.max_abs(), 1e-12)
        }
        Err(_) => Gate::flag("heat_analytic", false),
    }
}

fn exact_linear_step(grid: &Arc<Grid>) -> Gate {
    let eps = 0.1;
    let k = [3, 1];
    let a0 = unit_cosine(grid, k);
    let xi = grid.fundamental() * 10f64.sqrt();
    let dt = 0.01;
    let mut stepper = EnsStepper::new(grid, eps, MU).linear_only();
    let state = EnsState {
        a: a0.clone(),
        w: SpectralField::vector_zeros(grid),
        u: SpectralField::vector_zeros(grid),
        epsilon: eps,
        mu: MU,
    };
    let cfg = StepperConfig::new(dt, dt);
    match drive(&mut stepper, state, &cfg, |_, _| Ok(())) {
        Ok((s, _)) => {
            let g = propagator_b1(&SymbolPoint::new(xi, eps, MU, 2), dt)[(0, 0)];
            let exact = a0.map_modes(|_, z| z * g);
            Gate::at_most("exact_linear_step", s.a.max_diff(&exact) / a0.max_abs(), 1e-12)
        }
        Err(_) => Gate::flag("exact_linear_step", false),
    }
}

fn damped_mode_reconstruction(grid: &Arc<Grid>, fixture: &SelftestFixture) -> Gate {
    let s = small_ens(grid, 0.1, &mut rng(fixture, 7));
    let result = (|| -> crate::Result<f64> {
        let (z, r) = damped_modes(&s)?;
        let h = closure_h(&s.a)?;
        let grad_a = gradient(&s.a);
        let weighted = pointwise(&[&h, &grad_a], 2, |p, out| {
            out[0] = (1.0 + p[0]) * p[1];
            out[1] = (1.0 + p[0]) * p[2];
        });
        let mut w = z.add(&r);
        w.axpy(s.epsilon, &s.u);
        w.axpy(-s.epsilon, &weighted);
        Ok(w.max_diff(&s.w) / s.w.max_abs())
    })();
    Gate::at_most("damped_mode_reconstruction", result.unwrap_or(f64::NAN), 1e-10)
}

fn source_double_expression(grid: &Arc<Grid>, fixture: &SelftestFixture) -> Gate {
    let s = small_ens(grid, 0.1, &mut rng(fixture, 8));
    let value = match (source_y(&s), source_y_expanded(&s)) {
        (Ok(a), Ok(b)) => a.max_diff(&b) / b.max_abs().max(f64::MIN_POSITIVE),
        _ => f64::NAN,
    };
    Gate::at_most("source_double_expression", value, 1e-9)
}

fn nonlinear_invariants(grid: &Arc<Grid>, fixture: &SelftestFixture) -> [Gate; 2] {
    let s = small_ens(grid, 0.1, &mut rng(fixture, 9));
    let mut stepper = EnsStepper::new(grid, s.epsilon, MU);
    let mut cfg = StepperConfig::new(0.01, 0.1);
    cfg.initial_layer = None;
    match drive(&mut stepper, s, &cfg, |_, _| Ok(())) {
        Ok((out, _)) => [
            Gate::at_most("mean_conservation", out.a.mean(0).abs(), 1e-14),
            Gate::at_most("divergence_free", divergence(&out.u).max_abs(), 1e-10),
        ],
        Err(_) => [Gate::flag("mean_conservation", false), Gate::flag("divergence_free", false)],
    }
}

/// Runs every check on a small grid.
pub fn run_checks(fixture: &SelftestFixture) -> Vec<Gate> {
    let grid = Grid::new(N, std::f64::consts::TAU).expect("valid selftest grid");
    let mut gates = vec![
        projector_algebra(&grid, fixture),
        partition_of_unity(&grid, fixture),
        block_reconstruction(&grid, fixture),
        bernstein(&grid, fixture),
        interpolation(&grid, fixture),
        char_residuals(fixture),
        propagator_vs_ode(),
        heat_analytic(&grid),
        exact_linear_step(&grid),
        damped_mode_reconstruction(&grid, fixture),
        source_double_expression(&grid, fixture),
    ];
    gates.extend(nonlinear_invariants(&grid, fixture));
    gates
}
