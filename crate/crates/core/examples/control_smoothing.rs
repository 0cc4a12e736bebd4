//! Smoothing analysis for the 3D optimal-control system with collective
//! Jacobi relaxation. The smoothing factor depends on p1 only; its minimum
//! sits at p1 = 16/19 with value 17/19 for every regularization weight.
//!
//! ```bash
//! cargo run --release --example control_smoothing
//! ```

use lfa_tune::fourier::{rho_psi_on_grid, smoothing_factor};
use lfa_tune::problems::control3d_q1;

const NTHETA: usize = 9;

pub fn run() -> lfa_tune::Result<()> {
    for beta in [1e-6, 1e-4, 1e-2, 1.0] {
        let problem = control3d_q1(beta, 1.0 / 64.0)?;
        let (mut best_p, mut best_mu) = (0.0, f64::INFINITY);
        for k in 0..=40 {
            let p1 = 0.7 + 0.3 * k as f64 / 40.0;
            let mu = smoothing_factor(&problem, &[p1, 1.0], NTHETA)?;
            if mu < best_mu {
                (best_p, best_mu) = (p1, mu);
            }
        }
        let rho = rho_psi_on_grid(&problem, &[0.842, 1.527], NTHETA)?;
        println!("beta {beta:>6.0e}: min mu = {best_mu:.5} at p1 = {best_p:.4}; two-grid rho at (0.842, 1.527) = {rho:.4}");
    }
    println!("16/19 = {:.4}, 17/19 = {:.5}", 16.0 / 19.0, 17.0 / 19.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
