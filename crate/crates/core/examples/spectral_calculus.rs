//! Derivatives and the Leray projector on a periodic grid.

use std::f64::consts::TAU;

use relaxflow::spectral::{divergence, gradient, laplacian, project_compressible, project_leray};
use relaxflow::{Grid, SpectralField};

fn main() -> relaxflow::Result<()> {
    let grid = Grid::new(64, TAU)?;

    // sin(x) cos(2y): gradient and Laplacian are known in closed form.
    let f = SpectralField::from_fn(&grid, 1, |_, x| x[0].sin() * (2.0 * x[1]).cos());
    let lap = laplacian(&f);
    let want = f.scale(-5.0);
    println!("laplacian error      {:.2e}", lap.max_diff(&want));
    println!("div grad - laplacian {:.2e}", divergence(&gradient(&f)).max_diff(&lap));

    // A velocity with both a gradient part and a rotational part.
    let v = SpectralField::from_fn(&grid, 2, |m, x| {
        let grad = if m == 0 { x[0].cos() } else { 0.0 };
        let rot = if m == 0 { x[1].sin() } else { x[0].sin() };
        grad + rot
    });
    let p = project_leray(&v);
    let q = project_compressible(&v);
    println!("div of Leray part    {:.2e}", divergence(&p).max_abs());
    println!("P + Q - I            {:.2e}", p.add(&q).max_diff(&v));
    println!("P applied twice      {:.2e}", project_leray(&p).max_diff(&p));
    Ok(())
}
