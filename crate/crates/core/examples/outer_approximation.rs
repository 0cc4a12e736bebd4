//! Outer approximation on the Braess–Sarazin smoother for MAC Stokes, with
//! analytic gradients and derivative-free. The cut set grows until the
//! inner maximizer finds nothing worse than the current model.
//!
//! ```bash
//! cargo run --release --example outer_approximation
//! ```

use lfa_tune::fourier::rho_psi_on_grid;
use lfa_tune::optim::{outer_approx_minimize, OuterApproxOptions};
use lfa_tune::{problem_by_name, EvalCounter, GradientMode};

pub fn run() -> lfa_tune::Result<()> {
    let problem = problem_by_name("stokes-mac-bsr", Default::default())?;
    for mode in [GradientMode::Analytic, GradientMode::None] {
        let counter = EvalCounter::new();
        let mut opts = OuterApproxOptions::new(mode);
        opts.budget = Some(2000);
        let out = outer_approx_minimize(&problem, &problem.initial, &opts, &counter)?;
        let p = &out.run.params;
        println!(
            "{mode:>8}: p = ({:.3}, {:.3}, {:.3}), rho_psi* = {:.4}, {} cuts, {} rounds, {} evaluations{}",
            p[0],
            p[1],
            p[2],
            rho_psi_on_grid(&problem, p, 33)?,
            out.cuts.len(),
            out.iterations,
            out.run.fevals,
            if out.run.incomplete { " (budget hit)" } else { "" }
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
