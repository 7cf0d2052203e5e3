//! Invariant checks across every module, then a deliberately broken variant.

use relaxflow::harness::selftest::run_checks;
use relaxflow::harness::SelftestFixture;

fn main() {
    let gates = run_checks(&SelftestFixture::default());
    for g in &gates {
        println!("{}", g.describe());
    }

    let broken = SelftestFixture { eigen_perturbation: 1e-6, ..Default::default() };
    let caught = run_checks(&broken).into_iter().filter(|g| !g.passed).map(|g| g.name).collect::<Vec<_>>();
    println!("perturbed eigenvalues flagged by: {caught:?}");
}
