//! BFGS with a weak Wolfe line search, used on nonsmooth objectives as a fast first phase.

use super::min_norm::min_norm_point;
use super::objective::Objective;
use super::{affordable, exhausted, norm, OptOutcome, Trace};
use crate::counter::EvalCounter;
use crate::error::Result;
use crate::problems::ParamBox;

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Armijo constant.
    pub c1: f64,
    /// Curvature constant of the weak Wolfe condition.
    pub c2: f64,
    pub max_line_steps: usize,
    /// Stop when the least-norm element of recent nearby gradients falls below this.
    pub grad_tol: f64,
    /// Radius within which earlier iterates count as nearby.
    pub neighborhood: f64,
    /// How many nearby gradients enter the stationarity test.
    pub history: usize,
    /// Absolute cap on the counter.
    pub budget: Option<u64>,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            c1: 1e-4,
            c2: 0.5,
            max_line_steps: 40,
            grad_tol: 1e-6,
            neighborhood: 1e-4,
            history: 10,
            budget: None,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(h: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    h.iter().map(|row| dot(row, v)).collect()
}

enum LineSearch {
    Accepted(Vec<f64>, f64, Vec<f64>),
    Failed,
    OutOfBudget,
}

/// Bracketing line search for `f(x + td) ≤ f + c1 t gᵀd` and `g(x + td)ᵀd ≥ c2 gᵀd`,
/// with trial points projected onto the box.
#[allow(clippy::too_many_arguments)]
fn weak_wolfe(
    obj: &mut dyn Objective,
    x: &[f64],
    f: f64,
    slope: f64,
    d: &[f64],
    bounds: &ParamBox,
    opts: &BfgsOptions,
    counter: &EvalCounter,
) -> Result<LineSearch> {
    let (mut lo, mut hi, mut t) = (0.0, f64::INFINITY, 1.0);
    for _ in 0..opts.max_line_steps {
        let y = bounds.project(&x.iter().zip(d).map(|(a, b)| a + t * b).collect::<Vec<_>>());
        if !affordable(counter, opts.budget, obj.subgradient_cost(&y)) {
            return Ok(LineSearch::OutOfBudget);
        }
        let (fy, gy) = obj.value_and_subgradient(&y)?;
        if !(fy <= f + opts.c1 * t * slope) {
            hi = t;
        } else if dot(&gy, d) < opts.c2 * slope && y != bounds.project(&y.iter().zip(d).map(|(a, b)| a + b).collect::<Vec<_>>()) {
            lo = t;
        } else {
            return Ok(LineSearch::Accepted(y, fy, gy));
        }
        t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo.max(0.5) };
    }
    Ok(LineSearch::Failed)
}

/// BFGS from `p0` with the identity as initial inverse Hessian.
///
/// Stops on a failed line search, when recent gradients from iterates
/// within `neighborhood` of the current one have a convex combination of
/// norm at most `grad_tol`, after `max_iters` or on budget exhaustion.
pub fn bfgs_minimize(
    objective: &mut dyn Objective,
    p0: &[f64],
    bounds: &ParamBox,
    opts: &BfgsOptions,
    counter: &EvalCounter,
) -> Result<OptOutcome> {
    let start = counter.count();
    let n = objective.dim();
    let mut x = bounds.project(p0);
    let (mut f, mut g) = objective.value_and_subgradient(&x)?;
    let mut trace = Trace::default();
    trace.push(counter.count(), &x, f);
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut recent: Vec<(Vec<f64>, Vec<f64>)> = vec![(x.clone(), g.clone())];
    let mut incomplete = false;

    for _ in 0..opts.max_iters {
        if exhausted(counter, opts.budget) {
            incomplete = true;
            break;
        }
        let d: Vec<f64> = mat_vec(&h, &g).iter().map(|v| -v).collect();
        let slope = dot(&g, &d);
        if !(slope < 0.0) {
            break;
        }
        let (y, fy, gy) = match weak_wolfe(objective, &x, f, slope, &d, bounds, opts, counter)? {
            LineSearch::Accepted(y, fy, gy) => (y, fy, gy),
            LineSearch::Failed => break,
            LineSearch::OutOfBudget => {
                incomplete = true;
                break;
            }
        };
        let s: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 0.0 {
            // H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy = mat_vec(&h, &yv);
            let yhy = dot(&yv, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        x = y;
        f = fy;
        g = gy;
        trace.push(counter.count(), &x, f);

        recent.retain(|(q, _)| norm(&q.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()) <= opts.neighborhood);
        recent.push((x.clone(), g.clone()));
        if recent.len() > opts.history {
            recent.remove(0);
        }
        let grads: Vec<Vec<f64>> = recent.iter().map(|r| r.1.clone()).collect();
        if min_norm_point(&grads)?.norm() <= opts.grad_tol {
            break;
        }
    }
    Ok(OptOutcome {
        params: x,
        objective: f,
        trace,
        fevals: counter.count() - start,
        incomplete,
        fallbacks: objective.fallbacks(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnObjective;

    #[test]
    fn rosenbrock_converges() {
        let mut obj = FnObjective::new(2, |p: &[f64]| {
            let (a, b) = (p[0], p[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            (f, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)])
        });
        let out = bfgs_minimize(
            &mut obj,
            &[-1.2, 1.0],
            &ParamBox::uniform(2, -5.0, 5.0),
            &BfgsOptions { max_iters: 500, grad_tol: 1e-8, ..Default::default() },
            &EvalCounter::new(),
        )
        .unwrap();
        assert!((out.params[0] - 1.0).abs() < 1e-4 && (out.params[1] - 1.0).abs() < 1e-4, "{:?}", out.params);
    }

    #[test]
    fn nonsmooth_max_of_lines() {
        let mut obj = FnObjective::new(1, |p: &[f64]| {
            let (a, b) = ((1.0 - 2.0 * p[0]).abs(), (1.0 - p[0]).abs());
            if a >= b {
                (a, vec![-2.0 * (1.0 - 2.0 * p[0]).signum()])
            } else {
                (b, vec![-(1.0 - p[0]).signum()])
            }
        });
        let out = bfgs_minimize(&mut obj, &[0.1], &ParamBox::uniform(1, 0.0, 2.5), &BfgsOptions::default(), &EvalCounter::new()).unwrap();
        assert!((out.params[0] - 2.0 / 3.0).abs() < 1e-4, "{:?}", out.params);
    }
}
