//! Littlewood-Paley blocks and homogeneous Besov norms of a test field.

use relaxflow::littlewood_paley::{bernstein_ratios, BesovSpec, DyadicDecomposition, ThresholdConfig};
use relaxflow::{Grid, SpectralField};

fn main() -> relaxflow::Result<()> {
    let grid = Grid::new(128, 8.0 * std::f64::consts::PI)?;
    let dec = DyadicDecomposition::for_grid(&grid);
    println!("blocks j = {}..={}", dec.j_min(), dec.j_max());

    // Two bumps in frequency: one near |ξ| = 1/2, one near |ξ| = 4.
    let f = SpectralField::from_fn(&grid, 1, |_, x| (0.5 * x[0]).cos() + 0.1 * (4.0 * x[1]).sin());
    for (j, n) in dec.block_norms(&f).iter() {
        if n > 1e-12 {
            println!("  block {j:>3}: {n:.4e}");
        }
    }
    for s in [-1.0, 0.0, 1.0, 2.0] {
        println!("B^{s}_2,1 norm = {:.5}", dec.besov_norm(&f, &BesovSpec::b21(s))?);
    }

    let t = ThresholdConfig::new(0.25, 2)?;
    let (lo, hi) = dec.split_low_high(&f, &t)?;
    println!("J_eps = {}: low {:.4e}, high {:.4e}", t.j_eps(), lo.l2_norm(), hi.l2_norm());

    let norms = dec.block_norms(&f);
    for (j, r) in bernstein_ratios(&dec, &f) {
        if norms.get(j) < 1e-12 {
            continue;
        }
        println!("  |grad D_j f| / (2^j |D_j f|) at j = {j}: {r:.3}");
    }
    Ok(())
}
