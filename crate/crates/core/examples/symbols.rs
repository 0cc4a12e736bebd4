//! Evaluate two-grid convergence factors of every registered problem at its
//! known optimum, next to the smoothing factor where one is defined.
//!
//! ```bash
//! cargo run --release --example symbols
//! ```

use lfa_tune::fourier::{rho_psi_on_grid, smoothing_factor};
use lfa_tune::cli::default_report_ntheta;
use lfa_tune::problems::registry;

pub fn run() -> lfa_tune::Result<()> {
    println!("{:<22} {:>28} {:>10} {:>10} {:>10}", "problem", "params", "rho_psi*", "expected", "mu");
    for problem in registry() {
        let Some(reference) = &problem.reference else { continue };
        let ntheta = default_report_ntheta(&problem.name);
        let rho = rho_psi_on_grid(&problem, &reference.params, ntheta)?;
        let mu = smoothing_factor(&problem, &reference.params, ntheta).ok().filter(|m| m.is_finite() && *m > 0.0);
        let params: Vec<String> = reference.params.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "{:<22} {:>28} {:>10.5} {:>10.5} {:>10}",
            problem.name,
            params.join(", "),
            rho,
            reference.rho,
            mu.map_or("-".into(), |m| format!("{m:.5}"))
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
