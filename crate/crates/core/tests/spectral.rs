mod common;

use std::f64::consts::{PI, TAU};

use common::*;
use proptest::prelude::*;
use relaxflow::spectral::ops::perp_gradient;
use relaxflow::spectral::{divergence, gradient, laplacian, project_compressible, project_leray};
use relaxflow::{Grid, SpectralField};

#[test]
fn constant_maps_to_zero_mode() {
    let grid = Grid::new(16, 3.0).unwrap();
    let f = SpectralField::from_fn(&grid, 1, |_, _| 1.0);
    assert!((f.components()[0][0].re - 1.0).abs() < 1e-15);
    let rest = f.components()[0][1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(rest < 1e-15);
}

#[test]
fn single_sine_has_two_conjugate_modes() {
    let grid = Grid::new(16, 5.0).unwrap();
    let l = grid.length();
    let f = SpectralField::from_fn(&grid, 1, |_, x| (TAU * x[0] / l).sin());
    let plus = mode(&grid, [1, 0]);
    let minus = mode(&grid, [-1, 0]);
    let c = &f.components()[0];
    assert!((c[plus] - num_complex::Complex64::new(0.0, -0.5)).norm() < 1e-15);
    assert!((c[minus] - c[plus].conj()).norm() < 1e-15);
    for (i, z) in c.iter().enumerate() {
        if i != plus && i != minus {
            assert!(z.norm() < 1e-15, "mode {i} = {z}");
        }
    }
}

#[test]
fn forward_transform_matches_direct_dft() {
    let n = 8;
    let grid = Grid::new(n, 2.0).unwrap();
    let mut r = rng(1);
    let values: Vec<f64> = (0..n * n).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect();
    let f = SpectralField::transform_forward(&grid, &[&values]).unwrap();
    let oracle = naive_dft(&values, n);
    let err = f.components()[0].iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-15, "dft mismatch {err}");
    let back = f.transform_inverse();
    assert!(max_abs_diff(&back[0], &values) < 1e-12);
}

#[test]
fn parseval_with_volume_normalisation() {
    let grid = Grid::new(32, 7.0).unwrap();
    let f = random_trig(&grid, 2, 5, 1.0, &mut rng(2));
    let h2 = grid.spacing().powi(2);
    let phys: f64 = f.transform_inverse().iter().flatten().map(|x| x * x * h2).sum();
    assert!((phys.sqrt() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
}

#[test]
fn gradient_of_sine_and_constant() {
    let grid = Grid::new(16, 3.0).unwrap();
    let k = TAU / grid.length();
    let f = SpectralField::from_fn(&grid, 1, |_, x| (k * x[0]).sin());
    let expect = SpectralField::from_fn(&grid, 2, |m, x| if m == 0 { k * (k * x[0]).cos() } else { 0.0 });
    assert!(gradient(&f).max_diff(&expect) <= 1e-12 * expect.max_abs());
    let c = SpectralField::from_fn(&grid, 1, |_, _| 2.5);
    assert!(gradient(&c).max_abs() < 1e-15);
    assert!(laplacian(&c).max_abs() < 1e-15);
    let lap = SpectralField::from_fn(&grid, 1, |_, x| -k * k * (k * x[0]).sin());
    assert!(laplacian(&f).max_diff(&lap) <= 1e-12 * lap.max_abs());
}

#[test]
fn gradient_agrees_with_fourth_order_differences() {
    let mut errors = Vec::new();
    for n in [64, 128] {
        let grid = Grid::new(n, TAU).unwrap();
        let f = random_trig(&grid, 1, 3, 0.3, &mut rng(3));
        let g = gradient(&f);
        let vals = samples(&f, 0);
        let mut worst: f64 = 0.0;
        for dir in 0..2 {
            worst = worst.max(max_abs_diff(&fd4(&vals, n, grid.spacing(), dir), &samples(&g, dir)));
        }
        errors.push(worst);
    }
    assert!(errors[0] < 1e-3, "{errors:?}");
    let order = (errors[0] / errors[1]).log2();
    assert!(order > 3.8, "observed order {order}");
}

#[test]
fn divergence_agrees_with_fourth_order_differences() {
    let n = 128;
    let grid = Grid::new(n, TAU).unwrap();
    let v = random_trig(&grid, 2, 3, 0.3, &mut rng(4));
    let d0 = fd4(&samples(&v, 0), n, grid.spacing(), 0);
    let d1 = fd4(&samples(&v, 1), n, grid.spacing(), 1);
    let fd: Vec<f64> = d0.iter().zip(&d1).map(|(a, b)| a + b).collect();
    assert!(max_abs_diff(&fd, &samples(&divergence(&v), 0)) < 1e-4);
}

#[test]
fn divergence_of_gradient_is_laplacian() {
    let grid = Grid::new(32, 4.0).unwrap();
    let f = random_trig(&grid, 1, 6, 1.0, &mut rng(5));
    let lap = laplacian(&f);
    assert!(divergence(&gradient(&f)).max_diff(&lap) <= 1e-12 * lap.max_abs());
}

#[test]
fn stream_fields_are_solenoidal() {
    let grid = Grid::new(32, PI).unwrap();
    let psi = random_trig(&grid, 1, 6, 1.0, &mut rng(6));
    let v = perp_gradient(&psi);
    assert!(divergence(&v).max_abs() < 1e-12 * v.max_abs().max(1.0));
    assert!(project_leray(&v).max_diff(&v) < 1e-12);
    assert!(project_compressible(&v).max_abs() < 1e-12);
}

#[test]
fn gradients_are_annihilated_by_leray() {
    let grid = Grid::new(32, 2.0).unwrap();
    let f = random_trig(&grid, 1, 6, 1.0, &mut rng(7));
    let g = gradient(&f);
    assert!(project_leray(&g).max_abs() < 1e-12 * g.max_abs());
    assert!(project_compressible(&g).max_diff(&g) < 1e-12 * g.max_abs());
}

#[test]
fn leray_keeps_mean_velocity() {
    let grid = Grid::unit(16).unwrap();
    let v = SpectralField::from_fn(&grid, 2, |m, _| if m == 0 { 0.3 } else { -1.2 });
    let p = project_leray(&v);
    assert!((p.mean(0) - 0.3).abs() < 1e-15 && (p.mean(1) + 1.2).abs() < 1e-15);
    assert!(project_compressible(&v).max_abs() < 1e-15);
}

fn field_strategy() -> impl Strategy<Value = (u64, usize, f64)> {
    (any::<u64>(), prop::sample::select(vec![8usize, 16, 32]), 0.5f64..20.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projector_algebra((seed, n, len) in field_strategy()) {
        let grid = Grid::new(n, len).unwrap();
        let v = random_trig(&grid, 2, (n / 4) as i64, 1.0, &mut rng(seed));
        let p = project_leray(&v);
        let q = project_compressible(&v);
        let scale = v.max_abs();
        prop_assert!(p.add(&q).max_diff(&v) <= 1e-14 * scale);
        prop_assert!(project_leray(&p).max_diff(&p) <= 1e-14 * scale);
        prop_assert!(project_compressible(&p).max_abs() <= 1e-14 * scale);
        prop_assert!(project_leray(&q).max_abs() <= 1e-14 * scale);
    }

    #[test]
    fn round_trip_and_hermitian((seed, n, len) in field_strategy()) {
        let grid = Grid::new(n, len).unwrap();
        let f = random_trig(&grid, 1, (n / 4) as i64, 1.0, &mut rng(seed));
        let back = SpectralField::transform_forward(&grid, &f.transform_inverse()).unwrap();
        prop_assert!(back.max_diff(&f) < 1e-12);
        prop_assert!(f.hermitian_defect() == 0.0);
    }

    #[test]
    fn derivatives_exact_on_single_modes(k1 in -3i64..=3, k2 in -3i64..=3, len in 0.5f64..20.0) {
        let grid = Grid::new(16, len).unwrap();
        let b = TAU / len;
        let f = SpectralField::from_fn(&grid, 1, |_, x| (b * (k1 as f64 * x[0] + k2 as f64 * x[1])).cos());
        let expect = SpectralField::from_fn(&grid, 2, |m, x| {
            let k = if m == 0 { k1 } else { k2 } as f64;
            -b * k * (b * (k1 as f64 * x[0] + k2 as f64 * x[1])).sin()
        });
        let g = gradient(&f);
        prop_assert!(g.max_diff(&expect) <= 1e-12 * (b * 3.0).max(1.0));
    }
}
