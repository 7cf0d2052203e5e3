mod common;

use common::*;
use proptest::prelude::*;
use relaxflow::littlewood_paley::*;
use relaxflow::{Grid, SpectralField};

/// Independent copy of the documented cutoff: smooth transition on [3/4, 4/3].
fn chi(r: f64) -> f64 {
    let edge = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    if r <= 0.75 {
        1.0
    } else if r >= 4.0 / 3.0 {
        0.0
    } else {
        let t = (r - 0.75) / (4.0 / 3.0 - 0.75);
        edge(1.0 - t) / (edge(1.0 - t) + edge(t))
    }
}

/// `Σ_j 2^{js} ‖Δ_j f‖` evaluated mode by mode from the definition.
fn besov_oracle(f: &SpectralField, s: f64, j_range: (i32, i32)) -> f64 {
    let grid = f.grid();
    (j_range.0..=j_range.1)
        .map(|j| {
            let sq: f64 = (1..grid.len())
                .map(|i| {
                    let r = grid.xi_norm(i) * (-j as f64).exp2();
                    let phi = chi(r / 2.0) - chi(r);
                    f.components().iter().map(|c| (phi * c[i].norm()).powi(2)).sum::<f64>()
                })
                .sum();
            (s * j as f64).exp2() * (grid.volume() * sq).sqrt()
        })
        .sum()
}

fn random_mean_zero(grid: &std::sync::Arc<Grid>, seed: u64) -> SpectralField {
    let mut f = random_trig(grid, 1, (grid.n() / 3) as i64, 1.0, &mut rng(seed));
    f.component_mut(0)[0] = Default::default();
    f
}

#[test]
fn partition_of_unity_on_resolvable_frequencies() {
    for (n, len) in [(32, std::f64::consts::TAU), (64, 3.0), (128, 80.0)] {
        let grid = Grid::new(n, len).unwrap();
        let dec = DyadicDecomposition::for_grid(&grid);
        for i in 1..grid.len() {
            let s = dec.partition_sum(grid.xi_norm(i));
            assert!((s - 1.0).abs() <= 1e-12, "n={n} mode {i}: {s}");
        }
    }
}

#[test]
fn blocks_vanish_away_from_their_annulus() {
    let grid = Grid::unit(64).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    // |ξ| = √2 sits where only φ(ξ) is nonzero.
    let f = unit_cosine(&grid, [1, 1]);
    for j in dec.j_min()..=dec.j_max() {
        let b = dec.block(&f, j).unwrap();
        if j == 0 {
            assert!(b.max_diff(&f) < 1e-15);
        } else {
            assert!(b.max_abs() == 0.0, "block {j}");
        }
    }
    // A mode on an annulus boundary still leaves |j − j₀| ≥ 2 empty.
    let g = unit_cosine(&grid, [5, 0]);
    for j in dec.j_min()..=dec.j_max() {
        if (j - 2).abs() >= 2 {
            assert_eq!(dec.block(&g, j).unwrap().max_abs(), 0.0, "block {j}");
        }
    }
}

#[test]
fn zero_field_has_zero_blocks_and_norms() {
    let grid = Grid::unit(32).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let f = SpectralField::scalar_zeros(&grid);
    assert!(dec.block_norms(&f).norms.iter().all(|&n| n == 0.0));
    for s in [-1.0, 0.0, 2.5] {
        assert_eq!(dec.besov_norm(&f, &BesovSpec::b21(s)).unwrap(), 0.0);
    }
}

#[test]
fn blocks_reconstruct_mean_zero_fields() {
    let grid = Grid::new(64, 10.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    for seed in 0..5 {
        let f = random_mean_zero(&grid, seed);
        let mut sum = SpectralField::scalar_zeros(&grid);
        for j in dec.j_min()..=dec.j_max() {
            sum = sum.add(&dec.block(&f, j).unwrap());
        }
        assert!(sum.max_diff(&f) <= 1e-10, "seed {seed}");
    }
}

#[test]
fn unit_block_norm_examples() {
    let grid = Grid::unit(64).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let f = unit_cosine(&grid, [1, 1]);
    assert!((f.l2_norm() - 1.0).abs() < 1e-14);
    let b = |s| dec.besov_norm(&f, &BesovSpec::b21(s)).unwrap();
    assert!((b(0.0) - 1.0).abs() < 1e-14);
    assert!((b(2.0) - 1.0).abs() < 1e-14);

    // A mode straddling two annuli: the value lies in [2^{-2}, 2^{2}] and
    // matches the definition evaluated directly.
    let g = unit_cosine(&grid, [1, 0]);
    let v = dec.besov_norm(&g, &BesovSpec::b21(2.0)).unwrap();
    assert!((0.25..=4.0).contains(&v));
    let oracle = besov_oracle(&g, 2.0, (dec.j_min(), dec.j_max()));
    assert!((v - oracle).abs() <= 1e-13 * oracle, "{v} vs {oracle}");
}

#[test]
fn besov_norm_matches_definition_on_random_fields() {
    let grid = Grid::new(32, 9.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    for seed in 0..4 {
        let f = random_mean_zero(&grid, 100 + seed);
        for s in [-1.0, 0.0, 0.5, 1.0] {
            let v = dec.besov_norm(&f, &BesovSpec::b21(s)).unwrap();
            let oracle = besov_oracle(&f, s, (dec.j_min(), dec.j_max()));
            assert!((v - oracle).abs() <= 1e-12 * oracle);
        }
    }
}

#[test]
fn chemin_lerner_constant_and_decaying_series() {
    let grid = Grid::new(32, 12.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let f0 = random_mean_zero(&grid, 9);
    let spec = BesovSpec::b21(0.0);
    let base = dec.besov_norm(&f0, &spec).unwrap();

    let t_end = 2.0;
    let times: Vec<f64> = (0..=20).map(|k| k as f64 * t_end / 20.0).collect();
    let constant = vec![f0.clone(); times.len()];
    let inf = dec.chemin_lerner_norm(&times, &constant, &spec, TimeExponent::Infinity).unwrap();
    assert!((inf - base).abs() <= 1e-14 * base);
    let one = dec.chemin_lerner_norm(&times, &constant, &spec, TimeExponent::One).unwrap();
    assert!((one - t_end * base).abs() <= 1e-12 * base);

    let dt = 1e-3;
    let times: Vec<f64> = (0..=(t_end / dt).round() as usize).map(|k| k as f64 * dt).collect();
    let series: Vec<_> = times.iter().map(|&t| f0.scale((-t).exp())).collect();
    let one = dec.chemin_lerner_norm(&times, &series, &spec, TimeExponent::One).unwrap();
    let exact = (1.0 - (-t_end).exp()) * base;
    assert!((one - exact).abs() <= 1e-3 * exact);

    // A single snapshot: the sup-in-time norm is the instantaneous norm.
    let single = dec.chemin_lerner_norm(&[0.0], &[f0.clone()], &spec, TimeExponent::Infinity).unwrap();
    assert!((single - base).abs() <= 1e-14 * base);
}

#[test]
fn threshold_index_and_low_high_split() {
    let th = ThresholdConfig::new(1.0 / 64.0, 2).unwrap();
    assert_eq!(th.j_eps(), 4);
    assert_eq!(ThresholdConfig::new(0.1, 2).unwrap().j_eps(), 2);
    assert!(ThresholdConfig::new(0.0, 2).is_err());
    assert!(ThresholdConfig::new(1.5, 2).is_err());

    let grid = Grid::unit(64).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    // |ξ| = 3 lies only in block 1 = J_ε − 3.
    let f = unit_cosine(&grid, [3, 0]);
    let (low, high) = dec.split_low_high(&f, &th).unwrap();
    assert_eq!(high.max_abs(), 0.0);
    assert!(low.max_diff(&f) == 0.0);
}

#[test]
fn low_part_obeys_frequency_localised_bound() {
    let grid = Grid::unit(64).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    for (k, eps) in [(0u64, 1.0 / 64.0), (1, 1.0 / 16.0), (2, 0.1)] {
        let th = ThresholdConfig::new(eps, 2).unwrap();
        let f = random_mean_zero(&grid, 40 + k);
        let (low, _) = dec.split_low_high(&f, &th).unwrap();
        let j = th.j_eps() as f64;
        for (s, sp) in [(1.0, 0.5), (0.0, 1.0), (2.0, 2.0)] {
            let lhs = dec.besov_norm(&low, &BesovSpec::b21(s)).unwrap();
            let rhs = (j * sp).exp2() * dec.besov_norm(&low, &BesovSpec::b21(s - sp)).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12), "eps {eps} s {s}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn band_sums_bracket_the_full_norm() {
    let grid = Grid::new(64, 20.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let f = random_mean_zero(&grid, 77);
    for eps in [0.2, 0.1, 0.05] {
        let th = ThresholdConfig::new(eps, 2).unwrap();
        let spec = BesovSpec::b21(0.0);
        let all = dec.besov_norm(&f, &spec).unwrap();
        let lo = dec.besov_norm(&f, &spec.with_band(th.low())).unwrap();
        let hi = dec.besov_norm(&f, &spec.with_band(th.high())).unwrap();
        assert!(lo + hi >= all * (1.0 - 1e-14) && lo + hi <= 2.0 * all);
    }
}

#[test]
fn bernstein_ratios_stay_in_ring() {
    let grid = Grid::new(64, 11.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    for seed in 0..20 {
        let f = random_mean_zero(&grid, 500 + seed);
        for (j, r) in bernstein_ratios(&dec, &f) {
            assert!((RING_INNER..=RING_OUTER).contains(&r), "seed {seed} block {j}: {r}");
        }
    }
}

#[test]
fn interpolation_inequality_on_thousand_fields() {
    let grid = Grid::new(32, 16.0).unwrap();
    let dec = DyadicDecomposition::for_grid(&grid);
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let f = random_mean_zero(&grid, rand::Rng::gen(&mut r));
        let s1 = rand::Rng::gen_range(&mut r, -1.5..0.5);
        let s2 = s1 + rand::Rng::gen_range(&mut r, 0.25..2.0);
        let theta = rand::Rng::gen_range(&mut r, 0.1..0.9);
        worst = worst.max(interpolation_ratio(&dec, &f, s1, s2, theta));
    }
    // The ratio already includes the profile factor 4; allow ten times that.
    assert!(worst <= 10.0, "worst interpolation ratio {worst}");
}

#[test]
fn corrupted_profile_breaks_partition() {
    fn bad(r: f64) -> f64 {
        standard_cutoff(r) * 0.9
    }
    let grid = Grid::unit(32).unwrap();
    let dec = DyadicDecomposition::with_cutoff(&grid, bad);
    let worst = (1..grid.len()).map(|i| (dec.partition_sum(grid.xi_norm(i)) - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_sums_to_one(xi in 0.2f64..180.0) {
        let grid = Grid::unit(256).unwrap();
        let dec = DyadicDecomposition::for_grid(&grid);
        prop_assume!(xi >= grid.fundamental() && xi <= grid.max_xi_norm());
        prop_assert!((dec.partition_sum(xi) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn profile_supported_in_ring(r in 0.0f64..4.0) {
        let grid = Grid::unit(16).unwrap();
        let dec = DyadicDecomposition::for_grid(&grid);
        let p = dec.profile(r);
        prop_assert!((0.0..=1.0).contains(&p));
        if !(RING_INNER..=RING_OUTER).contains(&r) {
            prop_assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn besov_norm_is_homogeneous(seed in any::<u64>(), c in -5.0f64..5.0, s in -1.0f64..1.5) {
        let grid = Grid::new(16, 7.0).unwrap();
        let dec = DyadicDecomposition::for_grid(&grid);
        let f = random_mean_zero(&grid, seed);
        let spec = BesovSpec::b21(s);
        let a = dec.besov_norm(&f.scale(c), &spec).unwrap();
        let b = c.abs() * dec.besov_norm(&f, &spec).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }
}
