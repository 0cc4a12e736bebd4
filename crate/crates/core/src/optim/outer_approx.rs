//! Outer approximation: alternate minimization over a growing frequency cut
//! set with an approximate global maximization over all low frequencies.

use super::gradient_sampling::{compass_minimize, gradient_sampling_minimize, CompassOptions, GsOptions};
use super::inner_max::{inner_maximize, InnerMaxOptions};
use super::objective::{FrequencySetObjective, GradientCost, Objective};
use super::{affordable, exhausted, OptOutcome, Trace};
use crate::counter::EvalCounter;
use crate::eigen::GradientMode;
use crate::error::{Error, Result};
use crate::fourier::{guard_frequency, Frequency};
use crate::problems::{low_corner, ProblemSpec};

/// Minimum distance between two members of a cut set.
pub const CUT_SEPARATION: f64 = 1e-10;

/// Growing set of distinct frequencies `U_k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyCutSet {
    members: Vec<Frequency>,
}

impl FrequencyCutSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `theta` unless it lies within [`CUT_SEPARATION`] of a member; reports whether it was added.
    pub fn insert(&mut self, theta: Frequency) -> bool {
        if self.members.iter().any(|m| m.distance(&theta) <= CUT_SEPARATION) {
            return false;
        }
        self.members.push(theta);
        true
    }

    pub fn members(&self) -> &[Frequency] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterApproxOptions {
    pub mode: GradientMode,
    /// A new cut is needed only if the inner maximum beats the cut-set value by more than this.
    pub tol_add: f64,
    pub max_outer: usize,
    pub gs: GsOptions,
    pub compass: CompassOptions,
    pub inner: InnerMaxOptions,
    /// Absolute cap on the counter, shared by all stages.
    pub budget: Option<u64>,
}

impl OuterApproxOptions {
    pub fn new(mode: GradientMode) -> Self {
        Self {
            mode,
            tol_add: 1e-4,
            max_outer: 50,
            gs: GsOptions::default(),
            compass: CompassOptions::default(),
            inner: InnerMaxOptions::default(),
            budget: None,
        }
    }
}

/// Outcome of [`outer_approx_minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct OuterApproxOutcome {
    pub run: OptOutcome,
    pub cuts: FrequencyCutSet,
    /// `Ψ_{U_K}(p̂)` over the final cut set.
    pub cut_value: f64,
    /// Inner maximum `ρ(Ẽ(p̂, θ̂))` found at the last iterate.
    pub inner_value: f64,
    pub iterations: usize,
    /// Stopped because no new cut was needed.
    pub converged: bool,
}

/// Minimize `Ψ` by outer approximation starting from `U_0 = {0, (π/c, ..., π/c)}` (guarded).
///
/// Each round minimizes `Ψ_{U_k}` from the previous iterate (gradient
/// sampling, or compass search when `mode` is derivative-free), then
/// maximizes `ρ(Ẽ(p_k, ·))` over the low box. The run ends once the maximum
/// exceeds `Ψ_{U_k}(p_k)` by at most `tol_add`, after `max_outer` rounds or on
/// budget exhaustion.
pub fn outer_approx_minimize(
    problem: &ProblemSpec,
    p0: &[f64],
    opts: &OuterApproxOptions,
    counter: &EvalCounter,
) -> Result<OuterApproxOutcome> {
    problem.check_len(p0)?;
    let start = counter.count();
    let mut cuts = FrequencyCutSet::new();
    cuts.insert(guard_frequency(&Frequency::zero(problem.dim)));
    cuts.insert(low_corner(problem));

    let mut p = problem.bounds.project(p0);
    let mut trace = Trace::default();
    let mut fallbacks = 0;
    let mut incomplete = false;
    let mut converged = false;
    let mut cut_value = f64::INFINITY;
    let mut inner_value = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_outer {
        iterations += 1;
        let mut obj = FrequencySetObjective::new(
            problem,
            cuts.members().to_vec(),
            opts.mode,
            GradientCost::ArgmaxFrequency,
            counter,
        );
        if !affordable(counter, opts.budget, obj.subgradient_cost(&p)) {
            incomplete = true;
            break;
        }
        let sub = match opts.mode {
            GradientMode::None => {
                let c = CompassOptions { budget: opts.budget, ..opts.compass.clone() };
                compass_minimize(&mut obj, &p, &problem.bounds, &c, counter)?
            }
            _ => {
                let g = GsOptions { budget: opts.budget, seed: opts.gs.seed.wrapping_add(iterations as u64), ..opts.gs.clone() };
                gradient_sampling_minimize(&mut obj, &p, &problem.bounds, &g, counter)?
            }
        };
        fallbacks += obj.fallbacks();
        trace.extend(&sub.trace);
        p = sub.params;
        cut_value = sub.objective;
        if sub.incomplete || exhausted(counter, opts.budget) {
            incomplete = true;
            break;
        }
        let inner = InnerMaxOptions { budget: opts.budget, ..opts.inner.clone() };
        let (theta, rho) = match inner_maximize(problem, &p, cuts.members(), &inner, counter) {
            Ok(r) => r,
            Err(Error::BudgetExhausted { .. }) => {
                incomplete = true;
                break;
            }
            Err(e) => return Err(e),
        };
        inner_value = rho;
        trace.push(counter.count(), &p, rho.max(cut_value));
        if rho <= cut_value + opts.tol_add {
            converged = true;
            break;
        }
        if !cuts.insert(theta) {
            converged = true;
            break;
        }
        if exhausted(counter, opts.budget) {
            incomplete = true;
            break;
        }
    }
    let objective = if inner_value.is_finite() { inner_value.max(cut_value) } else { cut_value };
    Ok(OuterApproxOutcome {
        run: OptOutcome { params: p, objective, trace, fevals: counter.count() - start, incomplete, fallbacks },
        cuts,
        cut_value,
        inner_value,
        iterations,
        converged,
    })
}
