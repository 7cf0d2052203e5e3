//! Relaxation system against its limit for a decreasing sequence of ε.
//!
//! Runs on a small grid so it finishes in seconds; the binary runs the
//! full-size study.

use relaxflow::harness::{run_converge, ExperimentConfig, ExperimentKind};

fn main() -> relaxflow::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Converge);
    cfg.n = 32;
    cfg.t_end = 0.5;
    cfg.epsilon_list = vec![0.2, 0.1, 0.05];
    let rec = run_converge(&cfg)?;
    for r in &rec.runs {
        println!("eps {:<6} steps {:>4}  sup err {:.4e}", r.epsilon, r.accepted_steps, r.err_sup_b0);
    }
    if let Some(fit) = rec.slope("err_sup_b0") {
        println!("slope {:.3} (r2 {:.4})", fit.slope, fit.r2);
    }
    print!("{}", rec.report());
    Ok(())
}
