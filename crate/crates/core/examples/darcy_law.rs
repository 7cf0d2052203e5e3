//! The rescaled relative velocity w/ε approaches the Darcy velocity.

use relaxflow::harness::{run_darcy, ExperimentConfig, ExperimentKind};

fn main() -> relaxflow::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Darcy);
    cfg.n = 32;
    cfg.t_end = 0.5;
    cfg.epsilon_list = vec![0.2, 0.1, 0.05];
    let rec = run_darcy(&cfg)?;
    for r in &rec.runs {
        println!("eps {:<6} time-integrated Darcy residual {:.4e}", r.epsilon, r.darcy_l1);
    }
    print!("{}", rec.report());
    Ok(())
}
