//! Globally adaptive 7/15-point Gauss-Kronrod quadrature on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of equal panels the interval is cut into before adapting.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 0.0, initial_panels: 64, max_panels: 20_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Kronrod estimate of `∫|f|`, the scale of the rounding error.
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut m = WGK[7] * fc.abs();
    for i in 0..7 {
        let x = h * XGK[i];
        let (fl, fr) = (f(c - x), f(c + x));
        k += WGK[i] * (fl + fr);
        m += WGK[i] * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (fl + fr);
        }
    }
    Panel { a, b, value: k * h, error: ((k - g) * h).abs(), magnitude: m * h.abs() }
}

/// `∫_a^b f`, refining the panel with the largest error estimate until the
/// total estimate drops below `max(abs_tol, rel_tol·|I|)` or reaches the
/// rounding level of the integrand.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Quadrature(format!("invalid interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, error: 0.0, evaluations: 0, panels: 0 });
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: BinaryHeap<Panel> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            kronrod(&f, lo, hi)
        })
        .collect();
    let mut evaluations = 15 * n0;
    loop {
        // Sums are recomputed rather than updated so that cancellation in
        // running totals cannot stall convergence.
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let magnitude: f64 = panels.iter().map(|p| p.magnitude).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs()).max(ROUNDING * magnitude);
        if error <= target {
            return Ok(QuadratureResult { value, error, evaluations, panels: panels.len() });
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence after {} panels: estimate {value:e}, error {error:e}",
                panels.len()
            )));
        }
        // Split a batch of the worst panels per pass to amortise the sums.
        let batch = (panels.len() / 16).max(1);
        for _ in 0..batch {
            let p = panels.pop().expect("nonempty");
            let mid = 0.5 * (p.a + p.b);
            if !(mid > p.a && mid < p.b) {
                return Err(Error::Quadrature(format!("panel [{}, {}] cannot be split further", p.a, p.b)));
            }
            panels.push(kronrod(&f, p.a, mid));
            panels.push(kronrod(&f, mid, p.b));
            evaluations += 30;
        }
    }
}

/// Relative rounding level below which error estimates are not meaningful.
const ROUNDING: f64 = 100.0 * f64::EPSILON;
