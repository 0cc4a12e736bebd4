//! Sampled-gradient stationarity measure.

use super::min_norm::min_norm_point;
use crate::counter::EvalCounter;
use crate::eigen::{rho_gradient, GradientMode};
use crate::error::Result;
use crate::fourier::{psi, sample_frequency_grid, FrequencyRegion};
use crate::problems::ProblemSpec;

/// Offset of the `2n` neighbors `p ± δ e_j`.
pub const SIGMA_OFFSET: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaReport {
    /// Norm of the least-norm element of the gradients' convex hull.
    pub sigma: f64,
    /// Gradients that fell back to central differences.
    pub fallbacks: usize,
    /// Gradient at `p` followed by those at `p + δe_1, p - δe_1, ...`.
    pub gradients: Vec<Vec<f64>>,
}

/// `σ(p)`: min-norm hull element of ∇Ψ at `p` and its `2n` axis neighbors,
/// with Ψ over the guarded `ntheta^d` low grid and analytic argmax gradients.
pub fn sigma_stationarity(problem: &ProblemSpec, p: &[f64], ntheta: usize, counter: &EvalCounter) -> Result<SigmaReport> {
    problem.check_len(p)?;
    let freqs = sample_frequency_grid(FrequencyRegion::low(problem.coarsening), problem.dim, ntheta)?;
    let mut points = vec![p.to_vec()];
    for j in 0..p.len() {
        for sign in [1.0, -1.0] {
            let mut q = p.to_vec();
            q[j] += sign * SIGMA_OFFSET;
            points.push(q);
        }
    }
    let mut gradients = Vec::with_capacity(points.len());
    let mut fallbacks = 0;
    for q in &points {
        let v = psi(problem, q, &freqs, counter)?;
        let g = rho_gradient(problem, q, &freqs[v.argmax], GradientMode::Analytic, counter)?;
        fallbacks += g.fell_back as usize;
        gradients.push(g.grad);
    }
    let sigma = min_norm_point(&gradients)?.norm();
    Ok(SigmaReport { sigma, fallbacks, gradients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{laplace1d_p1, Weights};

    #[test]
    fn laplace_optimum_and_nonstationary_point() {
        let pr = laplace1d_p1(1, 0, Weights::Shared).unwrap();
        let s = sigma_stationarity(&pr, &[2.0 / 3.0], 33, &EvalCounter::new()).unwrap();
        assert!(s.sigma <= 1e-12, "{s:?}");
        let s = sigma_stationarity(&pr, &[0.5], 33, &EvalCounter::new()).unwrap();
        assert!((s.sigma - 1.0).abs() < 1e-6, "{s:?}");
    }
}
