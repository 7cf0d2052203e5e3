//! Z and R are damped at rate 1/ε² and their time integrals scale like ε².

use relaxflow::harness::initial_data::{DataSpectrum, InitialData};
use relaxflow::integrator::{integrate, EnsStepper, StepperConfig};
use relaxflow::models::damped_modes;
use relaxflow::Grid;

fn main() -> relaxflow::Result<()> {
    let grid = Grid::new(32, 8.0 * std::f64::consts::PI)?;
    let data = InitialData::synthesize(&grid, &DataSpectrum { sigma1: -1.0, cutoff: 1.25 }, 7).scaled(0.01);
    for eps in [0.2, 0.1, 0.05] {
        let state = data.ens(eps, 1.0);
        let mut cfg = StepperConfig::new(eps * eps / 4.0, 0.5);
        cfg.output_stride = 100.0;
        let mut z_int = 0.0;
        let mut r_int = 0.0;
        let mut last = 0.0;
        let traj = integrate(&mut EnsStepper::new(&grid, eps, 1.0), state, &cfg, |t, s| {
            let (z, r) = damped_modes(s).expect("density stays positive");
            z_int += (t - last) * z.l2_norm();
            r_int += (t - last) * r.l2_norm();
            last = t;
            None
        });
        println!("eps {eps:<5} ∫|Z| {z_int:.4e}  ∫|R| {r_int:.4e}  ({} steps)", traj.accepted_steps);
    }
    Ok(())
}
