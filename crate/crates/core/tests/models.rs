mod common;

use std::f64::consts::TAU;
use std::sync::Arc;

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use relaxflow::integrator::{ens_linear_modal, EnsStepper};
use relaxflow::littlewood_paley::{besov_from_blocks, BesovSpec, DyadicDecomposition, ThresholdConfig};
use relaxflow::models::*;
use relaxflow::spectral::ops::perp_gradient;
use relaxflow::spectral::{divergence, gradient, project_compressible, project_leray};
use relaxflow::{Error, Grid, SpectralField};

fn random_ens(grid: &Arc<Grid>, eps: f64, amp: f64, seed: u64) -> EnsState {
    let mut r = rng(seed);
    let kmax = 2;
    EnsState {
        a: random_trig(grid, 1, kmax, amp, &mut r),
        w: random_trig(grid, 2, kmax, amp, &mut r),
        u: project_leray(&random_trig(grid, 2, kmax, amp, &mut r)),
        epsilon: eps,
        mu: 0.7,
    }
}

fn random_ksns(grid: &Arc<Grid>, amp: f64, seed: u64) -> KsnsState {
    let mut r = rng(seed);
    KsnsState {
        a: random_trig(grid, 1, 2, amp, &mut r),
        u: project_leray(&random_trig(grid, 2, 2, amp, &mut r)),
        mu: 0.7,
    }
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.max_diff(b) / b.max_abs().max(1e-300)
}

/// `x₁ → −x₁` with the first vector component flipped.
fn reflect(f: &SpectralField, vector: bool) -> SpectralField {
    let grid = Arc::clone(f.grid());
    let comps = f
        .components()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let sign = if vector && m == 0 { -1.0 } else { 1.0 };
            (0..grid.len())
                .map(|i| {
                    let k = grid.wavenumber(i);
                    sign * c[mode(&grid, [-k[0], k[1]])]
                })
                .collect()
        })
        .collect();
    SpectralField::from_coefficients(&grid, comps, true).unwrap()
}

#[test]
fn closure_examples() {
    let grid = Grid::new(64, 5.0).unwrap();
    let zero = SpectralField::scalar_zeros(&grid);
    assert_eq!(closure_h(&zero).unwrap().max_abs(), 0.0);
    let one = SpectralField::from_fn(&grid, 1, |_, _| 1.0);
    let h = closure_h(&one).unwrap();
    assert!(samples(&h, 0).iter().all(|&v| (v + 0.5).abs() < 1e-15));

    let k = TAU / grid.length();
    let a = SpectralField::from_fn(&grid, 1, |_, x| 0.1 * (k * x[0]).sin());
    let h = samples(&closure_h(&a).unwrap(), 0);
    let oracle: Vec<f64> = samples(&a, 0).iter().map(|a| -a / (1.0 + a)).collect();
    assert!(max_abs_diff(&h, &oracle) < 1e-12);

    let deep = SpectralField::from_fn(&grid, 1, |_, x| -0.6 * (k * x[0]).cos());
    assert!(matches!(closure_h(&deep), Err(Error::DensityFloor { .. })));
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let grid = Grid::unit(16).unwrap();
    let e = rhs_ens(&EnsState::equilibrium(&grid, 0.1, 1.0)).unwrap();
    assert_eq!(e.a.max_abs() + e.w.max_abs() + e.u.max_abs(), 0.0);
    let k = rhs_ksns(&KsnsState::equilibrium(&grid, 1.0));
    assert_eq!(k.a.max_abs() + k.u.max_abs(), 0.0);
}

#[test]
fn gradient_velocity_reduces_to_damped_euler() {
    let grid = Grid::new(32, 6.0).unwrap();
    let k = TAU / grid.length();
    let eps = 0.2;
    let amp = 1e-8;
    let phi = SpectralField::from_fn(&grid, 1, |_, x| amp * (k * (x[0] + 2.0 * x[1])).cos());
    let mut s = EnsState::equilibrium(&grid, eps, 1.0);
    s.w = gradient(&phi);
    let r = rhs_ens(&s).unwrap();
    assert!(rel(&r.a, &divergence(&s.w).scale(-1.0 / eps)) < 1e-7);
    assert!(rel(&r.w, &s.w.scale(-1.0 / (eps * eps))) < 1e-7);
    assert!(r.u.max_abs() <= 1e-7 * s.w.max_abs());
}

#[test]
fn frozen_velocity_linear_symbol_is_damped_euler() {
    // With u = 0 the linear tendency is ∂ₜa = −ε⁻¹div w, ∂ₜw = −ε⁻¹∇a − ε⁻²w.
    let grid = Grid::new(32, 9.0).unwrap();
    let mut s = random_ens(&grid, 0.15, 1.0, 3);
    s.u = SpectralField::vector_zeros(&grid);
    let lin = ens_linear(&s);
    let eps = s.epsilon;
    assert!(rel(&lin.a, &divergence(&s.w).scale(-1.0 / eps)) < 1e-14);
    let mut w = gradient(&s.a).scale(-1.0 / eps);
    w.axpy(-1.0 / (eps * eps), &s.w);
    assert!(rel(&lin.w, &w) < 1e-14);
}

#[test]
fn modal_symbol_action_matches_field_operators() {
    let grid = Grid::new(32, 11.0).unwrap();
    for eps in [0.5, 0.1, 0.02] {
        let mut s = random_ens(&grid, eps, 1.0, 11);
        s.a.dealias();
        s.w.dealias();
        s.u = s.u.dealiased();
        let stepper = EnsStepper::new(&grid, eps, s.mu);
        let modal = ens_linear_modal(&stepper, &s);
        let direct = ens_linear(&s);
        assert!(rel(&modal.a, &direct.a) < 1e-12);
        assert!(rel(&modal.w, &direct.w) < 1e-12);
        assert!(rel(&modal.u, &direct.u) < 1e-12);
    }
}

/// Physical-space evaluation of the relaxation right-hand side with
/// fourth-order differences; the velocity bracket is projected spectrally.
fn fd_rhs_ens(s: &EnsState) -> [Vec<f64>; 5] {
    let grid = s.a.grid();
    let (n, h, eps) = (grid.n(), grid.spacing(), s.epsilon);
    let a = samples(&s.a, 0);
    let w = s.w.transform_inverse();
    let u = s.u.transform_inverse();
    let d = |f: &[f64], dir| fd4(f, n, h, dir);
    let (ax, ay) = (d(&a, 0), d(&a, 1));
    let dw: Vec<[Vec<f64>; 2]> = w.iter().map(|c| [d(c, 0), d(c, 1)]).collect();
    let du: Vec<[Vec<f64>; 2]> = u.iter().map(|c| [d(c, 0), d(c, 1)]).collect();
    let lu: Vec<Vec<f64>> = u.iter().map(|c| fd4_laplacian(c, n, h)).collect();
    let len = n * n;
    let mut at = vec![0.0; len];
    let mut wt = [vec![0.0; len], vec![0.0; len]];
    let mut bracket = [vec![0.0; len], vec![0.0; len]];
    for i in 0..len {
        let div_w = dw[0][0][i] + dw[1][1][i];
        at[i] = -(w[0][i] * ax[i] + w[1][i] * ay[i] + (1.0 + a[i]) * div_w) / eps;
        let grad = [ax[i], ay[i]];
        for m in 0..2 {
            let adv_w = w[0][i] * dw[m][0][i] + w[1][i] * dw[m][1][i];
            wt[m][i] = -grad[m] / ((1.0 + a[i]) * eps) - (w[m][i] - eps * u[m][i]) / (eps * eps) - adv_w / eps;
            let adv_u = u[0][i] * du[m][0][i] + u[1][i] * du[m][1][i];
            bracket[m][i] = s.mu * lu[m][i] - adv_u + (1.0 + a[i]) * (w[m][i] - eps * u[m][i]) / eps;
        }
    }
    let ut = project_leray(&SpectralField::transform_forward(grid, &bracket).unwrap()).transform_inverse();
    let [w0, w1] = wt;
    let mut ut = ut.into_iter();
    [at, w0, w1, ut.next().unwrap(), ut.next().unwrap()]
}

fn spectral_rhs_samples(s: &EnsState) -> [Vec<f64>; 5] {
    let r = rhs_ens(s).unwrap();
    let w = r.w.transform_inverse();
    let u = r.u.transform_inverse();
    [samples(&r.a, 0), w[0].clone(), w[1].clone(), u[0].clone(), u[1].clone()]
}

#[test]
fn rhs_matches_finite_difference_oracle() {
    let mut errors = Vec::new();
    for n in [64, 128] {
        let grid = Grid::new(n, TAU).unwrap();
        let s = random_ens(&grid, 0.3, 0.05, 21);
        let fd = fd_rhs_ens(&s);
        let sp = spectral_rhs_samples(&s);
        let scale = sp.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = fd.iter().zip(&sp).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max) / scale;
        errors.push(err);
    }
    assert!(errors[1] < 1e-5, "{errors:?}");
    assert!((errors[0] / errors[1]).log2() > 3.7, "{errors:?}");
}

#[test]
fn limit_system_reductions() {
    let grid = Grid::new(64, TAU).unwrap();
    let mut s = random_ksns(&grid, 0.3, 5);
    s.u = SpectralField::vector_zeros(&grid);
    let r = rhs_ksns(&s);
    assert!(rel(&r.a, &relaxflow::spectral::laplacian(&s.a)) < 1e-14);
    assert_eq!(r.u.max_abs(), 0.0);

    // Taylor–Green velocity: u·∇u is a gradient, so the tendency is μΔu.
    let psi = SpectralField::from_fn(&grid, 1, |_, x| 0.2 * x[0].sin() * x[1].sin());
    let u = perp_gradient(&psi);
    let s = KsnsState { a: SpectralField::scalar_zeros(&grid), u: u.clone(), mu: 0.4 };
    let r = rhs_ksns(&s);
    let n = grid.n();
    for (m, comp) in u.transform_inverse().iter().enumerate() {
        let want: Vec<f64> = fd4_laplacian(comp, n, grid.spacing()).iter().map(|v| 0.4 * v).collect();
        assert!(max_abs_diff(&samples(&r.u, m), &want) < 1e-6);
    }
    assert!(r.a.max_abs() < 1e-15);
}

#[test]
fn damped_mode_examples() {
    let grid = Grid::new(32, 7.0).unwrap();
    let eps = 0.1;
    let mut s = random_ens(&grid, eps, 0.05, 8);
    s.a = SpectralField::scalar_zeros(&grid);
    s.w = SpectralField::vector_zeros(&grid);
    let (z, r) = damped_modes(&s).unwrap();
    assert_eq!(z.max_abs(), 0.0);
    assert!(r.max_diff(&s.u.scale(-eps)) < 1e-15);

    s.w = s.u.scale(eps);
    let (z, r) = damped_modes(&s).unwrap();
    assert!(z.max_abs() < 1e-16 && r.max_abs() < 1e-16);
    assert!(source_y(&s).unwrap().max_abs() < 1e-15);
    assert!(source_y(&EnsState::equilibrium(&grid, eps, 1.0)).unwrap().max_abs() == 0.0);
}

#[test]
fn damped_modes_reconstruct_relative_velocity() {
    let grid = Grid::new(64, 9.0).unwrap();
    for seed in 0..4 {
        let s = random_ens(&grid, 0.07, 0.05, 30 + seed);
        let (z, r) = damped_modes(&s).unwrap();
        // Z + R = w − εu + ε∇a/(1 + a).
        let weighted = pointwise_grad_over_density(&s.a);
        let mut want = s.w.sub(&s.u.scale(s.epsilon));
        want.axpy(s.epsilon, &weighted);
        assert!(z.add(&r).max_diff(&want) <= 1e-10 * want.max_abs());
        assert!(project_leray(&z).max_diff(&project_leray(&weighted.scale(s.epsilon))) <= 1e-10 * z.max_abs());
        assert!(project_compressible(&r).max_abs() <= 1e-12);
    }
}

fn pointwise_grad_over_density(a: &SpectralField) -> SpectralField {
    let grid = a.grid();
    let av = samples(a, 0);
    let g = gradient(a).transform_inverse();
    let out: Vec<Vec<f64>> = g.iter().map(|c| c.iter().zip(&av).map(|(g, a)| g / (1.0 + a)).collect()).collect();
    SpectralField::transform_forward(grid, &out).unwrap().dealiased()
}

#[test]
fn source_term_two_expressions_agree() {
    let grid = Grid::new(64, 8.0).unwrap();
    for seed in 0..5 {
        let s = random_ens(&grid, 0.05 + 0.05 * seed as f64, 0.08, 60 + seed);
        let y = source_y(&s).unwrap();
        let expanded = source_y_expanded(&s).unwrap();
        assert!(y.max_diff(&expanded) <= 1e-9 * expanded.max_abs().max(1.0));
    }
}

#[test]
fn damped_form_of_velocity_equation_agrees() {
    let grid = Grid::new(64, 8.0).unwrap();
    for seed in 0..3 {
        let s = random_ens(&grid, 0.1, 0.05, 80 + seed);
        let direct = rhs_ens(&s).unwrap().u;
        let damped = u_rate_damped_form(&s).unwrap();
        assert!(damped.max_diff(&direct) <= 1e-9 * direct.max_abs());
    }
}

#[test]
fn error_system_identity() {
    let grid = Grid::new(64, 8.0).unwrap();
    for seed in 0..4 {
        let ens = random_ens(&grid, 0.1, 0.05, 90 + seed);
        let ksns = random_ksns(&grid, 0.05, 190 + seed);
        let lhs = rhs_ens(&ens).unwrap().a.sub(&rhs_ksns(&ksns).a);
        let rhs = error_rhs_density(&ens, &ksns).unwrap();
        assert!(lhs.max_diff(&rhs) <= 1e-9 * lhs.max_abs().max(1.0), "seed {seed}");
    }
}

#[test]
fn darcy_velocity_examples() {
    let grid = Grid::new(64, 6.0).unwrap();
    let rest = KsnsState::equilibrium(&grid, 1.0);
    assert_eq!(darcy_velocity(&rest).unwrap().max_abs(), 0.0);

    let k = TAU / grid.length();
    let a = SpectralField::from_fn(&grid, 1, |_, x| 0.1 * (k * x[0]).sin());
    let s = KsnsState { a: a.clone(), u: SpectralField::vector_zeros(&grid), mu: 1.0 };
    let w = darcy_velocity(&s).unwrap();
    let oracle: Vec<f64> = grid_points(&grid)
        .map(|x| -0.1 * k * (k * x[0]).cos() / (1.0 + 0.1 * (k * x[0]).sin()))
        .collect();
    assert!(max_abs_diff(&samples(&w, 0), &oracle) < 1e-12);
    assert!(samples(&w, 1).iter().all(|v| v.abs() < 1e-14));

    let u = project_leray(&random_trig(&grid, 2, 4, 0.2, &mut rng(4)));
    let s = KsnsState { a: SpectralField::scalar_zeros(&grid), u: u.clone(), mu: 1.0 };
    assert!(darcy_velocity(&s).unwrap().max_diff(&u) < 1e-15);
}

fn grid_points(grid: &Grid) -> impl Iterator<Item = [f64; 2]> + '_ {
    (0..grid.len()).map(|i| grid.point(i))
}

#[test]
fn diagnostics_vanish_at_rest() {
    let grid = Grid::new(32, 25.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let th = ThresholdConfig::new(0.1, 2).unwrap();
    let ens = vec![EnsState::equilibrium(&grid, 0.1, 1.0); 3];
    let ksns = vec![KsnsState::equilibrium(&grid, 1.0); 3];
    let out = diagnostics::diagnostics(&[0.0, 0.5, 1.0], &ens, &ksns, &dec, &th).unwrap();
    for d in out {
        assert_eq!(d.energy + d.dissipation + d.z_norm + d.r_norm + d.darcy_residual, 0.0);
    }
    assert_eq!(delta_e0(&ens[0], &ksns[0], &dec, &th), 0.0);
}

#[test]
fn prepared_data_initial_error_drops_density_and_velocity_mismatch() {
    use relaxflow::harness::initial_data::{DataSpectrum, InitialData};
    let grid = Grid::new(64, 8.0 * std::f64::consts::PI).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let data = InitialData::synthesize(&grid, &DataSpectrum { sigma1: -1.0, cutoff: 1.0 }, 5);
    for eps in [0.2, 0.1] {
        let th = ThresholdConfig::new(eps, 2).unwrap();
        let ens = data.ens_prepared(eps, 1.0);
        let ksns = data.ksns(1.0);
        let blocks = |f: &SpectralField, s, band| besov_from_blocks(&dec.block_norms(f), &BesovSpec::b21(s).with_band(band));
        // The ε⁻¹ mismatch terms vanish; what is left are the w₀ terms and the high-frequency tail.
        let expect = blocks(&project_leray(&ens.w), 0.0, th.low())
            + blocks(&ens.w, 1.0, th.low())
            + eps * (blocks(&ens.a, 2.0, th.high()) + blocks(&ens.w, 2.0, th.high()));
        let got = delta_e0(&ens, &ksns, &dec, &th);
        assert!((got - expect).abs() <= 1e-14 * expect, "eps {eps}: {got} vs {expect}");
    }
}

#[test]
fn single_snapshot_sup_norms_are_instantaneous() {
    let grid = Grid::new(32, 25.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let th = ThresholdConfig::new(0.1, 2).unwrap();
    let ens = random_ens(&grid, 0.1, 0.01, 3);
    let ksns = random_ksns(&grid, 0.01, 4);
    let inst = InstantDiagnostics::evaluate(&ens, &ksns, &dec, &th, 0.0).unwrap();
    let acc = diagnostics::accumulate(std::slice::from_ref(&inst));
    assert_eq!(acc[0].energy, inst.energy_terms.iter().sum::<f64>());
    assert_eq!(acc[0].dissipation, 0.0);
}

#[test]
fn density_floor_aborts_evaluation() {
    let grid = Grid::unit(16).unwrap();
    let mut s = EnsState::equilibrium(&grid, 0.1, 1.0);
    s.a = SpectralField::from_fn(&grid, 1, |_, x| -0.7 * x[0].cos());
    assert!(matches!(rhs_ens(&s), Err(Error::DensityFloor { .. })));
    assert!(matches!(damped_modes(&s), Err(Error::DensityFloor { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_and_solenoidality_of_tendencies(seed in any::<u64>(), eps in 0.02f64..0.25) {
        let grid = Grid::new(16, 5.0).unwrap();
        let mut s = random_ens(&grid, eps, 0.02, seed);
        s.a.component_mut(0)[0] = C64::new(0.03, 0.0);
        let r = rhs_ens(&s).unwrap();
        prop_assert!(r.a.mean(0).abs() <= 1e-14);
        prop_assert!(divergence(&r.u).max_abs() <= 1e-10 * r.u.max_abs().max(1.0));
        let k = rhs_ksns(&random_ksns(&grid, 0.02, seed ^ 1));
        prop_assert!(k.a.mean(0).abs() <= 1e-14);
        prop_assert!(divergence(&k.u).max_abs() <= 1e-10 * k.u.max_abs().max(1.0));
    }

    #[test]
    fn reflection_commutes_with_rhs(seed in any::<u64>(), eps in 0.02f64..0.25) {
        let grid = Grid::new(16, 4.0).unwrap();
        let s = random_ens(&grid, eps, 0.02, seed);
        let mirrored = EnsState {
            a: reflect(&s.a, false),
            w: reflect(&s.w, true),
            u: reflect(&s.u, true),
            ..s.clone()
        };
        let r = rhs_ens(&s).unwrap();
        let rm = rhs_ens(&mirrored).unwrap();
        let scale = r.a.max_abs().max(r.w.max_abs()).max(r.u.max_abs());
        prop_assert!(rm.a.max_diff(&reflect(&r.a, false)) <= 1e-10 * scale);
        prop_assert!(rm.w.max_diff(&reflect(&r.w, true)) <= 1e-10 * scale);
        prop_assert!(rm.u.max_diff(&reflect(&r.u, true)) <= 1e-10 * scale);

        let k = random_ksns(&grid, 0.02, seed ^ 7);
        let km = KsnsState { a: reflect(&k.a, false), u: reflect(&k.u, true), mu: k.mu };
        let rk = rhs_ksns(&k);
        let rkm = rhs_ksns(&km);
        prop_assert!(rkm.a.max_diff(&reflect(&rk.a, false)) <= 1e-10 * rk.a.max_abs().max(1.0));
        prop_assert!(rkm.u.max_diff(&reflect(&rk.u, true)) <= 1e-10 * rk.u.max_abs().max(1.0));
    }
}
