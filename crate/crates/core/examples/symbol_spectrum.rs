//! Eigenvalues of the linearized symbols across the two frequency regimes.

use relaxflow::spectrum::{eigenvalues, propagator_b1, scaled_char_residuals, SymbolPoint};

fn main() {
    let (eps, mu) = (0.1, 1.0);
    println!("{:>10} {:>24} {:>24} {:>10}", "xi", "lambda1", "lambda3", "residual");
    for k in 0..13 {
        let xi = 10f64.powf(-2.0 + 0.5 * k as f64);
        let p = SymbolPoint::new(xi, eps, mu, 2);
        let e = eigenvalues(&p);
        let res = scaled_char_residuals(&p, &e).into_iter().fold(0.0, f64::max);
        println!(
            "{xi:>10.3e} {:>11.4e}{:>+12.4e}i {:>11.4e}{:>+12.4e}i {res:>10.1e}",
            e.lambda1.re, e.lambda1.im, e.lambda3.re, e.lambda3.im
        );
    }

    // Heat-like behaviour at low frequency: the density entry tracks e^{-ξ²t}.
    let p = SymbolPoint::new(0.5, eps, mu, 2);
    for t in [0.5, 2.0, 8.0] {
        let g = propagator_b1(&p, t);
        println!("t = {t}: G11 = {:.6}, heat = {:.6}", g[(0, 0)].re, (-0.25 * t).exp());
    }
}
