#![allow(dead_code)]

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relaxflow::{Grid, SpectralField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real trigonometric polynomial with random coefficients on `|k|∞ ≤ kmax`,
/// built in physical space so the spectral code is not involved.
pub fn random_trig(grid: &Arc<Grid>, ncomp: usize, kmax: i64, amp: f64, rng: &mut impl Rng) -> SpectralField {
    let mut terms = Vec::new();
    for m in 0..ncomp {
        for k1 in -kmax..=kmax {
            for k2 in 0..=kmax {
                if k2 == 0 && k1 <= 0 {
                    continue;
                }
                let c = amp * rng.gen_range(-1.0..1.0);
                let s = amp * rng.gen_range(-1.0..1.0);
                terms.push((m, [k1 as f64, k2 as f64], c, s));
            }
        }
    }
    let base = TAU / grid.length();
    SpectralField::from_fn(grid, ncomp, |m, x| {
        terms
            .iter()
            .filter(|t| t.0 == m)
            .map(|&(_, k, c, s)| {
                let ph = base * (k[0] * x[0] + k[1] * x[1]);
                c * ph.cos() + s * ph.sin()
            })
            .sum()
    })
}

/// Physical samples of component `m`.
pub fn samples(f: &SpectralField, m: usize) -> Vec<f64> {
    f.transform_inverse()[m].clone()
}

/// Direct `O(n⁴)` DFT with the `1/n²` normalisation.
pub fn naive_dft(values: &[f64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::default(); n * n];
    for k1 in 0..n {
        for k2 in 0..n {
            let mut acc = C64::default();
            for j1 in 0..n {
                for j2 in 0..n {
                    let ph = -TAU * ((k1 * j1 + k2 * j2) % n) as f64 / n as f64;
                    acc += values[j1 * n + j2] * C64::from_polar(1.0, ph);
                }
            }
            out[k1 * n + k2] = acc / (n * n) as f64;
        }
    }
    out
}

/// Fourth-order centred difference along direction `dir` on the periodic grid.
pub fn fd4(values: &[f64], n: usize, h: f64, dir: usize) -> Vec<f64> {
    let at = |i: usize, j: usize, s: isize| {
        let (mut a, mut b) = (i as isize, j as isize);
        if dir == 0 {
            a += s;
        } else {
            b += s;
        }
        let n = n as isize;
        values[(a.rem_euclid(n) * n + b.rem_euclid(n)) as usize]
    };
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (-at(i, j, 2) + 8.0 * at(i, j, 1) - 8.0 * at(i, j, -1) + at(i, j, -2)) / (12.0 * h);
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(y)` for a complex vector.
pub fn dopri<F>(f: F, y0: &[C64], t_end: f64, rtol: f64, atol: f64) -> Vec<C64>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).min(1e-6).max(1e-14);
    if t_end == 0.0 {
        return y;
    }
    let mut k1 = f(&y);
    while t < t_end {
        h = h.min(t_end - t);
        let mut ks = vec![k1.clone()];
        for row in C.iter() {
            let stage: Vec<C64> = (0..dim)
                .map(|i| y[i] + h * ks.iter().zip(row).map(|(k, &c)| k[i] * c).sum::<C64>())
                .collect();
            ks.push(f(&stage));
        }
        let y_new: Vec<C64> =
            (0..dim).map(|i| y[i] + h * ks.iter().zip(&C[5]).map(|(k, &c)| k[i] * c).sum::<C64>()).collect();
        let k7 = f(&y_new);
        ks.push(k7.clone());
        let err = (0..dim)
            .map(|i| {
                let e = h * ks.iter().zip(&E).map(|(k, &c)| k[i] * c).sum::<C64>();
                let sc = atol + rtol * y[i].norm().max(y_new[i].norm());
                (e.norm() / sc).powi(2)
            })
            .sum::<f64>()
            / dim as f64;
        let err = err.sqrt();
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    y
}

/// Mode index of wavenumber `k`.
pub fn mode(grid: &Grid, k: [i64; 2]) -> usize {
    let n = grid.n() as i64;
    (k[0].rem_euclid(n) * n + k[1].rem_euclid(n)) as usize
}

/// Fourth-order centred Laplacian on the periodic grid.
pub fn fd4_laplacian(values: &[f64], n: usize, h: f64) -> Vec<f64> {
    let at = |i: isize, j: isize| {
        let n = n as isize;
        values[(i.rem_euclid(n) * n + j.rem_euclid(n)) as usize]
    };
    let mut out = vec![0.0; n * n];
    for i in 0..n as isize {
        for j in 0..n as isize {
            let c = at(i, j);
            let dx = -at(i + 2, j) + 16.0 * at(i + 1, j) - 30.0 * c + 16.0 * at(i - 1, j) - at(i - 2, j);
            let dy = -at(i, j + 2) + 16.0 * at(i, j + 1) - 30.0 * c + 16.0 * at(i, j - 1) - at(i, j - 2);
            out[(i * n as isize + j) as usize] = (dx + dy) / (12.0 * h * h);
        }
    }
    out
}
