//! Exhaustive parameter scan of the 1D P1 Laplace two-grid method with
//! 20 weights on (0, 1] and 32 sampled frequencies.
//!
//! ```bash
//! cargo run --release --example brute_force
//! ```

use lfa_tune::optim::{brute_force, BruteForceOptions, GridRule};
use lfa_tune::problems::ParamBox;
use lfa_tune::{problem_by_name, EvalCounter};

pub fn run() -> lfa_tune::Result<()> {
    let problem = problem_by_name("laplace1d-p1", Default::default())?;
    let opts = BruteForceOptions {
        bounds: Some(ParamBox::uniform(1, 0.0, 1.0)),
        rule: GridRule::UpperAligned,
        ..BruteForceOptions::new(20, 32)
    };
    let counter = EvalCounter::new();
    let result = brute_force(&problem, &opts, &counter)?;
    println!("p = {:.2}, rho = {:.4}, {} evaluations", result.params[0], result.rho, result.fevals);
    for r in result.trace.records() {
        println!("  after {:>4} evaluations: p = {:.2}, rho = {:.4}", r.fevals, r.candidate[0], r.objective);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
