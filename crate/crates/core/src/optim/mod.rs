//! Minimizers for `Ψ(p) = max_θ ρ(Ẽ(p, θ))` and the stationarity certificate.
//!
//! All solvers charge an [`EvalCounter`] once per single-frequency spectral
//! radius; analytic gradients are free, central differences are not.

mod bfgs;
mod brute_force;
mod fixed_inner;
mod gradient_sampling;
mod inner_max;
mod min_norm;
mod objective;
mod outer_approx;
mod sigma;

pub use bfgs::{bfgs_minimize, BfgsOptions};
pub use brute_force::{brute_force, parameter_grid, BruteForceOptions, BruteForceResult, GridRule};
pub use fixed_inner::{fixed_inner_minimize, FixedInnerOptions};
pub use gradient_sampling::{compass_minimize, gradient_sampling_minimize, CompassOptions, GsOptions};
pub use inner_max::{inner_maximize, InnerMaxOptions};
pub use min_norm::{min_norm_point, MinNormPoint, KKT_TOL};
pub use objective::{FnObjective, FrequencySetObjective, GradientCost, Objective};
pub use outer_approx::{outer_approx_minimize, FrequencyCutSet, OuterApproxOptions, OuterApproxOutcome, CUT_SEPARATION};
pub use sigma::{sigma_stationarity, SigmaReport, SIGMA_OFFSET};

use serde::{Deserialize, Serialize};

use crate::counter::EvalCounter;

/// One accepted iterate: evaluations spent so far, the candidate and the solver's own objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub fevals: u64,
    pub candidate: Vec<f64>,
    pub objective: f64,
}

/// Iterate history with strictly increasing evaluation counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    /// Append a record; one with the same count as the last replaces it.
    pub fn push(&mut self, fevals: u64, candidate: &[f64], objective: f64) {
        let rec = TraceRecord { fevals, candidate: candidate.to_vec(), objective };
        match self.records.last_mut() {
            Some(last) if last.fevals >= fevals => *last = TraceRecord { fevals: last.fevals, ..rec },
            _ => self.records.push(rec),
        }
    }

    pub fn extend(&mut self, other: &Trace) {
        for r in &other.records {
            self.push(r.fevals, &r.candidate, r.objective);
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Solver family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BruteForce,
    FixedInner,
    OuterApprox,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::BruteForce => "brute-force",
            Method::FixedInner => "fixed-inner",
            Method::OuterApprox => "outer-approx",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "brute-force" => Ok(Method::BruteForce),
            "fixed-inner" => Ok(Method::FixedInner),
            "outer-approx" => Ok(Method::OuterApprox),
            _ => Err(crate::Error::InvalidArgument(format!(
                "method `{s}`: expected brute-force, fixed-inner or outer-approx"
            ))),
        }
    }
}

/// Result of an iterative minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptOutcome {
    pub params: Vec<f64>,
    /// Solver-internal objective at `params`.
    pub objective: f64,
    pub trace: Trace,
    /// Evaluations charged by this run.
    pub fevals: u64,
    /// Stopped on the evaluation budget rather than a convergence test.
    pub incomplete: bool,
    /// Gradients that fell back to central differences.
    pub fallbacks: u64,
}

pub(crate) fn exhausted(counter: &EvalCounter, budget: Option<u64>) -> bool {
    budget.is_some_and(|b| counter.count() >= b)
}

/// Whether `cost` more evaluations stay within the budget.
pub(crate) fn affordable(counter: &EvalCounter, budget: Option<u64>, cost: u64) -> bool {
    budget.is_none_or(|b| counter.count() + cost <= b)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
