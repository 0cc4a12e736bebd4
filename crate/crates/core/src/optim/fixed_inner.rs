//! Minimize Ψ over a fixed frequency grid.

use super::bfgs::{bfgs_minimize, BfgsOptions};
use super::gradient_sampling::{gradient_sampling_minimize, GsOptions};
use super::objective::{FrequencySetObjective, GradientCost, Objective};
use super::OptOutcome;
use crate::counter::EvalCounter;
use crate::eigen::GradientMode;
use crate::error::{Error, Result};
use crate::fourier::{sample_frequency_grid, FrequencyRegion};
use crate::problems::ProblemSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedInnerOptions {
    /// Frequencies per dimension of the fixed low grid.
    pub ntheta: usize,
    pub mode: GradientMode,
    /// BFGS phase run before gradient sampling; `None` skips it.
    pub bfgs: Option<BfgsOptions>,
    pub gs: GsOptions,
    /// Absolute cap on the counter, shared by both phases.
    pub budget: Option<u64>,
}

impl FixedInnerOptions {
    pub fn new(ntheta: usize, mode: GradientMode) -> Self {
        // After BFGS the sampling phase only polishes, so it starts from a small radius.
        let gs = GsOptions { eps0: 1e-4, nu0: 1e-6, normalize_direction: false, ..GsOptions::default() };
        Self { ntheta, mode, bfgs: Some(BfgsOptions::default()), gs, budget: None }
    }
}

/// Minimize `p ↦ max_{θ ∈ grid} ρ(Ẽ(p, θ))` for a fixed guarded grid of
/// `ntheta^d` low frequencies: BFGS first, then gradient sampling from the
/// BFGS point.
///
/// Each objective call charges `ntheta^d`. Central-difference gradients
/// difference the whole grid maximum and so charge `2n · ntheta^d`.
pub fn fixed_inner_minimize(
    problem: &ProblemSpec,
    p0: &[f64],
    opts: &FixedInnerOptions,
    counter: &EvalCounter,
) -> Result<OptOutcome> {
    problem.check_len(p0)?;
    if opts.mode == GradientMode::None {
        return Err(Error::InvalidArgument("fixed-inner needs gradients; use outer-approx for derivative-free runs".into()));
    }
    let freqs = sample_frequency_grid(FrequencyRegion::low(problem.coarsening), problem.dim, opts.ntheta)?;
    let mut obj = FrequencySetObjective::new(problem, freqs, opts.mode, GradientCost::WholeSet, counter);
    let mut trace = super::Trace::default();
    let start = counter.count();
    let mut p = p0.to_vec();
    if !super::affordable(counter, opts.budget, obj.subgradient_cost(&p)) {
        return Err(Error::BudgetExhausted { budget: opts.budget.unwrap_or(0), fevals: 0, best: None });
    }
    if let Some(b) = &opts.bfgs {
        let b = BfgsOptions { budget: opts.budget, ..b.clone() };
        let first = bfgs_minimize(&mut obj, &p, &problem.bounds, &b, counter)?;
        trace.extend(&first.trace);
        p = first.params.clone();
        if first.incomplete {
            return Ok(OptOutcome { trace, fevals: counter.count() - start, fallbacks: obj.fallbacks(), ..first });
        }
    }
    let gs = GsOptions { budget: opts.budget, ..opts.gs.clone() };
    let second = gradient_sampling_minimize(&mut obj, &p, &problem.bounds, &gs, counter)?;
    trace.extend(&second.trace);
    Ok(OptOutcome { trace, fevals: counter.count() - start, fallbacks: obj.fallbacks(), ..second })
}
