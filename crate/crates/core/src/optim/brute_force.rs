//! Exhaustive minimax over tensor grids of parameters and frequencies.

use rayon::prelude::*;

use super::Trace;
use crate::counter::EvalCounter;
use crate::error::{Error, Result};
use crate::fourier::{sample_frequency_grid, Frequency, FrequencyRegion};
use crate::problems::{ParamBox, ProblemSpec};

/// Placement of the `Np` points per parameter on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridRule {
    /// Equally spaced with both ends included.
    #[default]
    Linspace,
    /// `a + k(b - a)/Np` for `k = 1..=Np`: the lower end is skipped.
    UpperAligned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptions {
    /// Points per parameter.
    pub np: usize,
    /// Frequencies per dimension.
    pub ntheta: usize,
    /// Search box; defaults to the problem's.
    pub bounds: Option<ParamBox>,
    pub rule: GridRule,
    /// Absolute cap on the counter.
    pub budget: Option<u64>,
}

impl BruteForceOptions {
    pub fn new(np: usize, ntheta: usize) -> Self {
        Self { np, ntheta, bounds: None, rule: GridRule::Linspace, budget: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub params: Vec<f64>,
    pub rho: f64,
    /// Evaluations charged by this call.
    pub fevals: u64,
    /// Each new best point, stamped with the evaluations charged once its row is complete.
    pub trace: Trace,
}

fn axis(a: f64, b: f64, np: usize, rule: GridRule) -> Vec<f64> {
    match rule {
        GridRule::Linspace => crate::fourier::linspace(a, b, np),
        GridRule::UpperAligned => (1..=np).map(|k| a + (b - a) * k as f64 / np as f64).collect(),
    }
}

/// Parameter grid in scan order: the first parameter is the outermost loop.
pub fn parameter_grid(bounds: &ParamBox, np: usize, rule: GridRule) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> =
        bounds.lower.iter().zip(&bounds.upper).map(|(&a, &b)| axis(a, b, np, rule)).collect();
    let n = axes.len();
    let total = np.pow(n as u32);
    (0..total)
        .map(|idx| (0..n).map(|j| axes[j][(idx / np.pow((n - 1 - j) as u32)) % np]).collect())
        .collect()
}

fn psi_sequential(problem: &ProblemSpec, p: &[f64], freqs: &[Frequency]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for t in freqs {
        let r = problem.rho(p, t)?;
        if r > best {
            best = r;
        }
    }
    Ok(best)
}

/// Minimize Ψ over `np^n` parameter points with Ψ taken over `ntheta^d`
/// guarded low frequencies.
///
/// The first minimizer in scan order wins ties. Charges exactly
/// `np^n · ntheta^d` evaluations; when the budget cannot cover the full scan
/// the affordable prefix is scanned and [`Error::BudgetExhausted`] carries the
/// best point found.
pub fn brute_force(problem: &ProblemSpec, opts: &BruteForceOptions, counter: &EvalCounter) -> Result<BruteForceResult> {
    if opts.np < 2 || opts.ntheta < 2 {
        return Err(Error::InvalidArgument(format!(
            "brute force needs np >= 2 and ntheta >= 2, got np={} ntheta={}",
            opts.np, opts.ntheta
        )));
    }
    let bounds = opts.bounds.clone().unwrap_or_else(|| problem.bounds.clone());
    if bounds.dim() != problem.n_params() {
        return Err(Error::InvalidArgument(format!(
            "box has {} parameters, problem {} has {}",
            bounds.dim(),
            problem.name,
            problem.n_params()
        )));
    }
    let freqs = sample_frequency_grid(FrequencyRegion::low(problem.coarsening), problem.dim, opts.ntheta)?;
    let grid = parameter_grid(&bounds, opts.np, opts.rule);
    let per_point = freqs.len() as u64;
    let affordable = match opts.budget {
        Some(b) => (b.saturating_sub(counter.count()) / per_point).min(grid.len() as u64) as usize,
        None => grid.len(),
    };
    let start = counter.count();
    let values: Vec<f64> = grid[..affordable]
        .par_iter()
        .map(|p| psi_sequential(problem, p, &freqs))
        .collect::<Result<_>>()?;
    counter.charge(affordable as u64 * per_point);

    let mut best: Option<(usize, f64)> = None;
    let mut trace = Trace::default();
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
            trace.push(start + (i as u64 + 1) * per_point, &grid[i], v);
        }
    }
    let fevals = counter.count() - start;
    if affordable < grid.len() {
        return Err(Error::BudgetExhausted {
            budget: opts.budget.unwrap_or(0),
            fevals,
            best: best.map(|(i, v)| (grid[i].clone(), v)),
        });
    }
    let (i, rho) = best.expect("grid is non-empty");
    Ok(BruteForceResult { params: grid[i].clone(), rho, fevals, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{laplace1d_p1, Weights};

    #[test]
    fn grid_order_and_rules() {
        let b = ParamBox::uniform(2, 0.0, 1.0);
        let g = parameter_grid(&b, 3, GridRule::Linspace);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[1], vec![0.0, 0.5]);
        assert_eq!(g[3], vec![0.5, 0.0]);
        let u = parameter_grid(&ParamBox::uniform(1, 0.0, 1.0), 4, GridRule::UpperAligned);
        assert_eq!(u, vec![vec![0.25], vec![0.5], vec![0.75], vec![1.0]]);
    }

    #[test]
    fn degenerate_box_returns_its_point() {
        let pr = laplace1d_p1(1, 0, Weights::Shared).unwrap();
        let mut o = BruteForceOptions::new(2, 2);
        o.bounds = Some(ParamBox::uniform(1, 2.0 / 3.0, 2.0 / 3.0));
        let r = brute_force(&pr, &o, &EvalCounter::new()).unwrap();
        assert_eq!(r.params, vec![2.0 / 3.0]);
        assert_eq!(r.fevals, 4);
    }

    #[test]
    fn budget_yields_partial_best() {
        let pr = laplace1d_p1(1, 0, Weights::Shared).unwrap();
        let mut o = BruteForceOptions::new(10, 5);
        o.budget = Some(23);
        match brute_force(&pr, &o, &EvalCounter::new()) {
            Err(Error::BudgetExhausted { fevals, best: Some((p, _)), .. }) => {
                assert_eq!(fevals, 20);
                assert!(p[0] <= 1.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
