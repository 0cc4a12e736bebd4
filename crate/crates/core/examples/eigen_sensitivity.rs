//! Dominant eigenpair of a two-grid symbol and the derivative of its
//! modulus with respect to the parameters, checked against central
//! differences.
//!
//! ```bash
//! cargo run --release --example eigen_sensitivity
//! ```

use lfa_tune::eigen::{dominant_pair, rho_gradient};
use lfa_tune::{problem_by_name, EvalCounter, Frequency, GradientMode};

pub fn run() -> lfa_tune::Result<()> {
    let problem = problem_by_name("stokes-mac-uzawa", Default::default())?;
    let p = [0.9, 1.1, 0.3];
    let theta = Frequency::new(vec![0.7, -1.2])?;
    let e = problem.error_symbol(&p, &theta)?;
    let pair = dominant_pair(&e)?;
    println!("symbol size {}x{}, dominant eigenvalue {:.6}", e.nrows(), e.ncols(), pair.value);
    let counter = EvalCounter::new();
    let analytic = rho_gradient(&problem, &p, &theta, GradientMode::Analytic, &counter)?;
    let fd = rho_gradient(&problem, &p, &theta, GradientMode::CentralDiff(1e-6), &counter)?;
    for (j, (a, f)) in analytic.grad.iter().zip(&fd.grad).enumerate() {
        println!("d rho / d p{}: analytic {a:+.8}, central {f:+.8}", j + 1);
    }
    println!("differences charged {} evaluations", counter.count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
