//! Independent oracles shared by the oracle tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use lfa_tune::eigen::eigenvalues;
use lfa_tune::linalg::ComplexMatrix;
use lfa_tune::problems::{ParamBox, ProblemSpec};
use lfa_tune::Frequency;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Straight nested loops over parameters and frequencies, no early exit.
pub fn nested_loop_search(problem: &ProblemSpec, bounds: &ParamBox, np: usize, ntheta: usize) -> (Vec<f64>, f64, u64) {
    let w = PI / problem.coarsening as f64;
    let thetas: Vec<f64> = (0..ntheta)
        .map(|k| -w + 2.0 * w * k as f64 / (ntheta - 1) as f64)
        .map(|t| if t.abs() < 1e-9 { 1e-7 } else { t })
        .collect();
    let axis = |j: usize| -> Vec<f64> {
        let (a, b) = (bounds.lower[j], bounds.upper[j]);
        (0..np).map(|k| a + (b - a) * k as f64 / (np - 1) as f64).collect()
    };
    let mut best = (Vec::new(), f64::INFINITY);
    let mut evals = 0;
    let mut visit = |p: Vec<f64>| {
        let mut worst = f64::NEG_INFINITY;
        let mut point = |theta: Vec<f64>| {
            let r = problem.rho(&p, &Frequency::new(theta).unwrap()).unwrap();
            evals += 1;
            if r > worst {
                worst = r;
            }
        };
        match problem.dim {
            1 => thetas.iter().for_each(|&t| point(vec![t])),
            _ => {
                for &t2 in &thetas {
                    for &t1 in &thetas {
                        point(vec![t1, t2]);
                    }
                }
            }
        }
        if worst < best.1 {
            best = (p, worst);
        }
    };
    match problem.n_params() {
        1 => axis(0).into_iter().for_each(|a| visit(vec![a])),
        2 => {
            for a in axis(0) {
                for b in axis(1) {
                    visit(vec![a, b]);
                }
            }
        }
        _ => {
            for a in axis(0) {
                for b in axis(1) {
                    for c in axis(2) {
                        visit(vec![a, b, c]);
                    }
                }
            }
        }
    }
    (best.0, best.1, evals)
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Smallest singular value of `A - λI`, from nalgebra's SVD.
pub fn shifted_sigma_min(a: &ComplexMatrix, lambda: Complex64) -> f64 {
    let n = a.nrows();
    let shifted = a - ComplexMatrix::identity(n, n) * lambda;
    shifted.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// A dominant eigenvalue is accepted when no other eigenvalue (other than a
/// conjugate twin) comes within `gap` of it in value or in modulus.
pub fn simple_dominant(e: &ComplexMatrix, gap: f64) -> bool {
    let eigs = eigenvalues(e).unwrap();
    let rho = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dom = *eigs.iter().find(|z| z.norm() == rho).unwrap();
    let mut twins = 0;
    for z in &eigs {
        if (z - dom).norm() < gap {
            twins += 1;
        } else if (z.norm() - rho).abs() < gap && (z - dom.conj()).norm() > 1e-9 {
            return false;
        }
    }
    twins == 1 && rho > gap
}

pub fn random_point(rng: &mut ChaCha8Rng, problem: &ProblemSpec) -> (Vec<f64>, Frequency) {
    let p: Vec<f64> = (0..problem.n_params()).map(|_| rng.random_range(0.2..2.0)).collect();
    let w = PI / problem.coarsening as f64;
    let theta = Frequency::new((0..problem.dim).map(|_| rng.random_range(-w..w)).collect()).unwrap();
    (p, theta)
}

/// Whether `x·g ≥ |x|² - tol` for every `g`.
pub fn wolfe_criterion_holds(point: &[f64], vectors: &[Vec<f64>], tol: f64) -> bool {
    let xx: f64 = point.iter().map(|x| x * x).sum();
    vectors.iter().all(|g| point.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() >= xx - tol)
}
