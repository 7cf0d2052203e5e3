//! Time decay of the linear semigroups from frequency-space quadrature.

use relaxflow::decay::{fit_decay, Component, RadialProfile, Semigroup, DEFAULT_SAMPLES, DEFAULT_WINDOW};
use relaxflow::quadrature::QuadratureOptions;

fn main() -> relaxflow::Result<()> {
    let profile = RadialProfile::power_law(-1.0, 2, 1000.0)?;
    let opts = QuadratureOptions::default();
    let (eps, mu) = (0.1, 1.0);
    let cases = [
        ("heat", Semigroup::Heat, Component::Scalar),
        ("density", Semigroup::B1 { epsilon: eps }, Component::Density),
        ("fluid velocity", Semigroup::B2 { epsilon: eps, mu }, Component::FluidVelocity),
        ("w - eps u", Semigroup::Coupled { epsilon: eps, mu }, Component::RelativeVelocity),
    ];
    for sigma in [0.0, 0.5, 1.0] {
        println!("sigma = {sigma} (heat rate {:.3})", -(sigma + 1.0) / 2.0);
        for (label, sg, comp) in cases {
            let fit = fit_decay(&profile, sg, comp, sigma, DEFAULT_WINDOW, DEFAULT_SAMPLES, &opts)?;
            println!("  {label:<15} slope {:+.4}  r2 {:.6}", fit.slope, fit.r2);
        }
    }
    Ok(())
}
