//! The stationarity measure σ: the least-norm convex combination of Ψ
//! gradients sampled around a point. It vanishes at the kink optimum of the
//! 1D Laplace method and equals the slope elsewhere.
//!
//! ```bash
//! cargo run --release --example stationarity
//! ```

use lfa_tune::optim::sigma_stationarity;
use lfa_tune::{problem_by_name, EvalCounter};

pub fn run() -> lfa_tune::Result<()> {
    let cases: [(&str, &[f64]); 5] = [
        ("laplace1d-p1", &[2.0 / 3.0]),
        ("laplace1d-p1", &[0.5]),
        ("laplace1d-p1-2sweep", &[1.0, 0.5]),
        ("laplace1d-p1-c3", &[0.741, 2.249]),
        ("stokes-mac-bsr", &[1.0, 1.25, 0.8]),
    ];
    for (name, p) in cases {
        let problem = problem_by_name(name, Default::default())?;
        let rep = sigma_stationarity(&problem, p, 33, &EvalCounter::new())?;
        println!("{name:<20} {p:?}: sigma = {:.3e} ({} fallbacks)", rep.sigma, rep.fallbacks);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lfa_tune::Result<()> {
    run()
}
