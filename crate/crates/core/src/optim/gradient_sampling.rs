//! Gradient sampling and compass search on box-constrained nonsmooth objectives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::min_norm::min_norm_point;
use super::objective::Objective;
use super::{affordable, norm, OptOutcome, Trace};
use crate::counter::EvalCounter;
use crate::error::Result;
use crate::problems::ParamBox;

/// Gradient-sampling settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GsOptions {
    /// Initial sampling radius.
    pub eps0: f64,
    /// Stop once the radius drops below this.
    pub eps_min: f64,
    /// Factor applied to radius and stationarity target on each shrink.
    pub shrink: f64,
    /// Initial stationarity target for the min-norm hull element.
    pub nu0: f64,
    /// Armijo constant.
    pub c1: f64,
    pub max_backtracks: usize,
    pub max_shrinks: usize,
    /// First trial step along the descent direction.
    pub initial_step: f64,
    /// Step along `-g/|g|` (the default) or along `-g` itself; the latter keeps
    /// steps short near stationary points.
    pub normalize_direction: bool,
    pub seed: u64,
    /// Absolute cap on the shared counter.
    pub budget: Option<u64>,
    /// Cap on sampling iterations, for use as an inexact subsolver.
    pub max_iters: Option<usize>,
}

impl Default for GsOptions {
    fn default() -> Self {
        Self {
            eps0: 0.1,
            eps_min: 1e-6,
            shrink: 0.1,
            nu0: 1e-2,
            c1: 1e-4,
            max_backtracks: 30,
            max_shrinks: 50,
            initial_step: 1.0,
            normalize_direction: true,
            seed: 0,
            budget: None,
            max_iters: None,
        }
    }
}

/// Uniform sample from the ball of radius `r` around `x`.
fn ball_sample(rng: &mut ChaCha8Rng, x: &[f64], r: f64) -> Vec<f64> {
    let n = x.len();
    let dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let len = norm(&dir).max(f64::MIN_POSITIVE);
    let u: f64 = rng.random();
    let rad = r * u.powf(1.0 / n as f64);
    x.iter().zip(&dir).map(|(xi, di)| xi + rad * di / len).collect()
}

/// Minimize a nonsmooth objective by gradient sampling.
///
/// Each iteration gathers subgradients at the current point and at `2n`
/// points sampled in the ε-ball, takes the least-norm element `g` of their
/// convex hull, and either shrinks ε (when `|g| ≤ ν` or the line search
/// fails) or takes an Armijo step along `-g/|g|` (or `-g`). Iterates are
/// projected onto the box.
pub fn gradient_sampling_minimize(
    objective: &mut dyn Objective,
    p0: &[f64],
    bounds: &ParamBox,
    opts: &GsOptions,
    counter: &EvalCounter,
) -> Result<OptOutcome> {
    let start_count = counter.count();
    let n = objective.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trace = Trace::default();
    let mut x = bounds.project(p0);
    let (mut f, mut g) = objective.value_and_subgradient(&x)?;
    trace.push(counter.count(), &x, f);

    let mut eps = opts.eps0;
    let mut nu = opts.nu0;
    let mut shrinks = 0;
    let mut iters = 0;
    let mut incomplete = false;
    let do_shrink = |eps: &mut f64, nu: &mut f64, shrinks: &mut usize| {
        *eps *= opts.shrink;
        *nu *= opts.shrink;
        *shrinks += 1;
    };

    'outer: while eps >= opts.eps_min && shrinks < opts.max_shrinks {
        if opts.max_iters.is_some_and(|m| iters >= m) {
            break;
        }
        iters += 1;
        let mut grads = Vec::with_capacity(2 * n + 1);
        grads.push(g.clone());
        for _ in 0..2 * n {
            let y = bounds.project(&ball_sample(&mut rng, &x, eps));
            if !affordable(counter, opts.budget, objective.subgradient_cost(&y)) {
                incomplete = true;
                break 'outer;
            }
            grads.push(objective.value_and_subgradient(&y)?.1);
        }
        let hull = min_norm_point(&grads)?;
        let gnorm = hull.norm();
        if gnorm <= nu {
            do_shrink(&mut eps, &mut nu, &mut shrinks);
            continue;
        }
        let scale = if opts.normalize_direction { gnorm } else { 1.0 };
        let dir: Vec<f64> = hull.point.iter().map(|v| -v / scale).collect();
        let mut t = opts.initial_step;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let y = bounds.project(&x.iter().zip(&dir).map(|(a, d)| a + t * d).collect::<Vec<_>>());
            let step = norm(&y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            if step == 0.0 {
                break;
            }
            if !affordable(counter, opts.budget, objective.value_cost(&y)) {
                incomplete = true;
                break 'outer;
            }
            let fy = objective.value(&y)?;
            if fy <= f - opts.c1 * step * gnorm {
                accepted = Some((y, fy));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((y, fy)) if !affordable(counter, opts.budget, objective.subgradient_cost(&y)) => {
                x = y;
                f = fy;
                trace.push(counter.count(), &x, f);
                incomplete = true;
                break;
            }
            Some((y, fy)) => {
                let (fy2, gy) = objective.value_and_subgradient(&y)?;
                debug_assert_eq!(fy, fy2);
                x = y;
                f = fy2.min(fy);
                g = gy;
                trace.push(counter.count(), &x, f);
            }
            None => do_shrink(&mut eps, &mut nu, &mut shrinks),
        }
    }
    Ok(OptOutcome {
        params: x,
        objective: f,
        trace,
        fevals: counter.count() - start_count,
        incomplete,
        fallbacks: objective.fallbacks(),
    })
}

/// Compass-search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CompassOptions {
    pub initial_step: f64,
    pub min_step: f64,
    /// Sufficient decrease constant `c` in `f(y) < f(x) - c·s²`.
    pub decrease: f64,
    pub budget: Option<u64>,
}

impl Default for CompassOptions {
    fn default() -> Self {
        Self { initial_step: 0.25, min_step: 1e-5, decrease: 1e-8, budget: None }
    }
}

/// Derivative-free compass search: poll `±s·e_i`, move on sufficient decrease, halve `s` otherwise.
pub fn compass_minimize(
    objective: &mut dyn Objective,
    p0: &[f64],
    bounds: &ParamBox,
    opts: &CompassOptions,
    counter: &EvalCounter,
) -> Result<OptOutcome> {
    let start_count = counter.count();
    let n = objective.dim();
    let mut trace = Trace::default();
    let mut x = bounds.project(p0);
    let mut f = objective.value(&x)?;
    trace.push(counter.count(), &x, f);
    let mut s = opts.initial_step;
    let mut incomplete = false;
    'outer: while s >= opts.min_step {
        let mut moved = false;
        for k in 0..2 * n {
            let (i, sign) = (k / 2, if k % 2 == 0 { 1.0 } else { -1.0 });
            let mut y = x.clone();
            y[i] += sign * s;
            let y = bounds.project(&y);
            if y == x {
                continue;
            }
            if !affordable(counter, opts.budget, objective.value_cost(&y)) {
                incomplete = true;
                break 'outer;
            }
            let fy = objective.value(&y)?;
            if fy < f - opts.decrease * s * s {
                x = y;
                f = fy;
                trace.push(counter.count(), &x, f);
                moved = true;
                break;
            }
        }
        if !moved {
            s *= 0.5;
        }
    }
    Ok(OptOutcome {
        params: x,
        objective: f,
        trace,
        fevals: counter.count() - start_count,
        incomplete,
        fallbacks: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnObjective;

    #[test]
    fn scalar_outer_function_reaches_two_thirds() {
        let mut obj = FnObjective::new(1, |p: &[f64]| {
            let (a, b) = ((1.0 - 2.0 * p[0]).abs(), (1.0 - p[0]).abs());
            if a >= b {
                (a, vec![-2.0 * (1.0 - 2.0 * p[0]).signum()])
            } else {
                (b, vec![-(1.0 - p[0]).signum()])
            }
        });
        let out = gradient_sampling_minimize(
            &mut obj,
            &[0.1],
            &ParamBox::uniform(1, 0.0, 2.5),
            &GsOptions::default(),
            &EvalCounter::new(),
        )
        .unwrap();
        assert!((out.params[0] - 2.0 / 3.0).abs() < 1e-3, "{:?}", out.params);
        assert!((out.objective - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn smooth_quadratic_and_abs() {
        let mut q = FnObjective::new(2, |p: &[f64]| (p[0] * p[0] + p[1] * p[1], vec![2.0 * p[0], 2.0 * p[1]]));
        let b = ParamBox::uniform(2, -1.0, 1.0);
        let out = gradient_sampling_minimize(&mut q, &[0.5, 0.5], &b, &GsOptions::default(), &EvalCounter::new()).unwrap();
        assert!(norm(&out.params) < 1e-4, "{:?}", out.params);

        let mut a = FnObjective::new(1, |p: &[f64]| (p[0].abs(), vec![if p[0] >= 0.0 { 1.0 } else { -1.0 }]));
        let out = gradient_sampling_minimize(&mut a, &[0.3], &ParamBox::uniform(1, -1.0, 1.0), &GsOptions::default(), &EvalCounter::new())
            .unwrap();
        assert!(out.params[0].abs() < 1e-3);
    }

    #[test]
    fn objective_values_never_increase() {
        let mut obj = FnObjective::new(2, |p: &[f64]| {
            let a = (p[0] - 0.3).abs() + 2.0 * (p[1] + 0.2).abs();
            (a, vec![(p[0] - 0.3).signum(), 2.0 * (p[1] + 0.2).signum()])
        });
        let out = gradient_sampling_minimize(&mut obj, &[1.0, 1.0], &ParamBox::uniform(2, -2.0, 2.0), &GsOptions::default(), &EvalCounter::new())
            .unwrap();
        for w in out.trace.records().windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-14);
        }
    }

    #[test]
    fn compass_finds_kink_minimum() {
        let mut obj = FnObjective::new(2, |p: &[f64]| ((p[0] - 1.0).abs() + (p[1] - 0.5).abs(), vec![]));
        let out = compass_minimize(&mut obj, &[0.5, 0.5], &ParamBox::uniform(2, 0.0, 2.5), &CompassOptions::default(), &EvalCounter::new())
            .unwrap();
        assert!((out.params[0] - 1.0).abs() < 1e-4 && (out.params[1] - 0.5).abs() < 1e-4);
    }
}
