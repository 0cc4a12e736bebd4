//! Minimize the maximum over three fixed frequencies for the two-sweep
//! Laplace method. From the symmetric start the run stays on the diagonal
//! and stops at the saddle p1 = p2 = 2/3, where ρ = 1/9.
//!
//! ```bash
//! cargo run --release --example fixed_inner
//! ```

use lfa_tune::fourier::rho_psi_on_grid;
use lfa_tune::optim::{fixed_inner_minimize, FixedInnerOptions};
use lfa_tune::{problem_by_name, EvalCounter, GradientMode};

pub fn run() -> lfa_tune::Result<()> {
    let problem = problem_by_name("laplace1d-p1-2sweep", Default::default())?;
    let counter = EvalCounter::new();
    let mut opts = FixedInnerOptions::new(3, GradientMode::Analytic);
    opts.budget = Some(1500);
    let out = fixed_inner_minimize(&problem, &problem.initial, &opts, &counter)?;
    let rho = rho_psi_on_grid(&problem, &out.params, 33)?;
    println!(
        "p = ({:.4}, {:.4}), Psi on 3 frequencies = {:.5}, on 33 = {:.5}, {} evaluations",
        out.params[0], out.params[1], out.objective, rho, out.fevals
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
