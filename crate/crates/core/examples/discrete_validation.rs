//! Run 100 discrete two-grid cycles on a 1D mesh and compare the measured
//! convergence factors with the LFA prediction.
//!
//! ```bash
//! cargo run --release --example discrete_validation
//! ```

use lfa_tune::fourier::rho_psi_on_grid;
use lfa_tune::mgvalidate::{measure_convergence, Boundary, CycleVariant, Grid1D};
use lfa_tune::problem_by_name;

pub fn run() -> lfa_tune::Result<()> {
    let cases: [(&str, &[f64], f64); 7] = [
        ("laplace1d-p1", &[0.4], 1.0 / 64.0),
        ("laplace1d-p1", &[0.5], 1.0 / 64.0),
        ("laplace1d-p1", &[2.0 / 3.0], 1.0 / 64.0),
        ("laplace1d-p1", &[0.8], 1.0 / 64.0),
        ("laplace1d-p1", &[1.2], 1.0 / 64.0),
        ("laplace1d-p1-2sweep", &[1.0, 0.5], 1.0 / 64.0),
        ("laplace1d-p1-c3", &[0.72, 2.30], 1.0 / 243.0),
    ];
    for (name, p, h) in cases {
        let lfa = rho_psi_on_grid(&problem_by_name(name, Default::default())?, p, 33)?;
        for boundary in [Boundary::Dirichlet, Boundary::Periodic] {
            let rep = measure_convergence(CycleVariant::for_problem(name)?, p, Grid1D::new(h, boundary)?, 42)?;
            let flag = if rep.diverged {
                "diverged"
            } else if rep.floor_hit {
                "floor"
            } else {
                ""
            };
            println!(
                "{name:<20} {p:<20?} {boundary:<9} lfa {lfa:.4}  rho_m1 {:.4}  rho_m2 {:.4} {flag}",
                rep.rho_m1, rep.rho_m2
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
