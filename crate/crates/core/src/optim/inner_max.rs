//! Approximate global maximization of `ρ(Ẽ(p, ·))` over the low frequencies.

use rayon::prelude::*;

use crate::counter::EvalCounter;
use crate::error::{Error, Result};
use crate::fourier::{argmax_lowest, guard_frequency, rho_values, sample_frequency_grid, Frequency, FrequencyRegion};
use crate::problems::ProblemSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerMaxOptions {
    /// Seed grid points per dimension.
    pub seeds_per_dim: usize,
    /// Number of best seeds refined by local ascent.
    pub refine_top: usize,
    /// Refinement stops once the coordinate step falls below this.
    pub min_step: f64,
    /// Evaluation cap shared with the calling optimizer.
    pub budget: Option<u64>,
}

impl Default for InnerMaxOptions {
    fn default() -> Self {
        Self { seeds_per_dim: 5, refine_top: 3, min_step: 1e-5, budget: None }
    }
}

/// Coordinate ascent from `start` within `[-w, w]^d`: probe `±step` along each
/// axis, keep improvements, halve the step after a pass without one.
#[allow(clippy::too_many_arguments)]
fn ascend(
    problem: &ProblemSpec,
    p: &[f64],
    start: &Frequency,
    value: f64,
    step0: f64,
    w: f64,
    min_step: f64,
    allowance: u64,
) -> Result<(Frequency, f64, u64)> {
    let mut x = start.components().to_vec();
    let mut best = value;
    let mut step = step0;
    let mut evals = 0;
    'outer: while step >= min_step {
        let mut improved = false;
        for j in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] = (y[j] + sign * step).clamp(-w, w);
                if y[j] == x[j] {
                    continue;
                }
                if evals == allowance {
                    break 'outer;
                }
                let ty = guard_frequency(&Frequency::new(y.clone())?);
                let r = problem.rho(p, &ty)?;
                evals += 1;
                if r > best {
                    best = r;
                    x = ty.components().to_vec();
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((Frequency::new(x)?, best, evals))
}

/// Multistart local maximization of `ρ(Ẽ(p, θ))` over the closed low box.
///
/// Seeds are a guarded `seeds_per_dim^d` grid plus `extra_seeds`; the best
/// `refine_top` seeds are refined by coordinate ascent. Every spectral
/// radius is charged. With a budget, the seeds must fit into what is left
/// (otherwise [`Error::BudgetExhausted`]) and the remainder is split evenly
/// between the refinements.
pub fn inner_maximize(
    problem: &ProblemSpec,
    p: &[f64],
    extra_seeds: &[Frequency],
    opts: &InnerMaxOptions,
    counter: &EvalCounter,
) -> Result<(Frequency, f64)> {
    let region = FrequencyRegion::low(problem.coarsening);
    let w = region.low_half_width();
    let mut seeds = sample_frequency_grid(region, problem.dim, opts.seeds_per_dim.max(1))?;
    seeds.extend(extra_seeds.iter().cloned());
    let fevals = counter.count();
    let left = opts.budget.map(|b| b.saturating_sub(fevals));
    if left.is_some_and(|l| l < seeds.len() as u64) {
        return Err(Error::BudgetExhausted { budget: opts.budget.unwrap_or(0), fevals, best: None });
    }
    let values = rho_values(problem, p, &seeds, counter)?;
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(opts.refine_top.max(1));

    let allowance = left.map_or(u64::MAX, |l| (l - seeds.len() as u64) / order.len() as u64);
    let spacing = 2.0 * w / (opts.seeds_per_dim.max(2) - 1) as f64;
    let refined: Vec<(Frequency, f64, u64)> = order
        .par_iter()
        .map(|&i| ascend(problem, p, &seeds[i], values[i], spacing / 2.0, w, opts.min_step, allowance))
        .collect::<Result<_>>()?;
    counter.charge(refined.iter().map(|r| r.2).sum());
    let vals: Vec<f64> = refined.iter().map(|r| r.1).collect();
    let best = argmax_lowest(&vals);
    let best_seed = argmax_lowest(&values);
    if best_seed.value > best.value {
        return Ok((seeds[best_seed.argmax].clone(), best_seed.value));
    }
    Ok((refined[best.argmax].0.clone(), best.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{laplace1d_p1, Weights};
    use std::f64::consts::PI;

    #[test]
    fn finds_the_active_frequency() {
        let pr = laplace1d_p1(1, 0, Weights::Shared).unwrap();
        let (t, r) = inner_maximize(&pr, &[0.9], &[], &InnerMaxOptions::default(), &EvalCounter::new()).unwrap();
        // |1 - 2p| is attained as θ → 0, where the high harmonic sees the full relaxation.
        assert!((r - 0.8).abs() < 1e-9);
        assert!(t.components()[0].abs() < 1e-3);

        let (t, r) = inner_maximize(&pr, &[0.4], &[], &InnerMaxOptions::default(), &EvalCounter::new()).unwrap();
        assert!((r - 0.6).abs() < 1e-9);
        assert!((t.components()[0].abs() - PI / 2.0).abs() < 1e-6);
    }
}
