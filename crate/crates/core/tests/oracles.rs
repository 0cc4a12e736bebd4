//! Independent reimplementations checked against the library.

mod common;

use lfa_tune::eigen::{dominant_pair, eigenvalues, rho_gradient, spectral_radius};
use lfa_tune::linalg::{frobenius, ComplexMatrix};
use lfa_tune::optim::{brute_force, min_norm_point, sigma_stationarity, BruteForceOptions};
use lfa_tune::problems::{registry, ParamBox};
use lfa_tune::{problem_by_name, EvalCounter, GradientMode};
use nalgebra::DMatrix;
use num_complex::Complex64;
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_brute_force(name: &str, lo: f64, hi: f64, np: usize, ntheta: usize) {
    let problem = problem_by_name(name, Default::default()).unwrap();
    let bounds = ParamBox::uniform(problem.n_params(), lo, hi);
    let (p, rho, evals) = nested_loop_search(&problem, &bounds, np, ntheta);
    let counter = EvalCounter::new();
    let opts = BruteForceOptions { bounds: Some(bounds), ..BruteForceOptions::new(np, ntheta) };
    let got = brute_force(&problem, &opts, &counter).unwrap();
    assert_eq!(got.params, p, "{name} np={np} ntheta={ntheta}");
    assert_eq!(got.rho.to_bits(), rho.to_bits());
    assert_eq!(got.fevals, evals);
    assert_eq!(counter.count(), evals);
}

#[test]
fn brute_force_matches_nested_loops_on_tied_grids() {
    // The two-sweep objective is symmetric in its weights, so mirrored grid
    // points tie and scan order decides.
    check_brute_force("laplace1d-p1", 0.0, 4.0 / 3.0, 9, 9);
    check_brute_force("laplace1d-p1-2sweep", 0.0, 2.0, 9, 5);
    check_brute_force("stokes-mac-uzawa", 0.5, 1.5, 3, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brute_force_matches_nested_loops(
        which in 0usize..3,
        lo in 0.0f64..0.8,
        width in 0.2f64..2.0,
        np in 2usize..=10,
        ntheta in 2usize..=9,
    ) {
        let name = ["laplace1d-p1", "laplace1d-p1-2sweep", "laplace1d-p1-c3"][which];
        check_brute_force(name, lo, lo + width, np, ntheta);
    }

    #[test]
    fn min_norm_point_satisfies_wolfe_criterion(
        vectors in (1usize..6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), 1..14))
    ) {
        let r = min_norm_point(&vectors).unwrap();
        prop_assert!(wolfe_criterion_holds(&r.point, &vectors, 1e-10));
        prop_assert!(r.coeffs.iter().all(|&l| l >= 0.0));
        prop_assert!((r.coeffs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // The point is the stated combination.
        for (k, xk) in r.point.iter().enumerate() {
            let comb: f64 = r.coeffs.iter().zip(&vectors).map(|(l, g)| l * g[k]).sum();
            prop_assert!((comb - xk).abs() < 1e-9);
        }
    }

    #[test]
    fn sigma_is_a_norm_and_vanishes_across_a_kink(p in 0.05f64..2.4) {
        let problem = problem_by_name("laplace1d-p1", Default::default()).unwrap();
        let s = sigma_stationarity(&problem, &[p], 9, &EvalCounter::new()).unwrap().sigma;
        prop_assert!(s >= 0.0);
        let both = min_norm_point(&[vec![p + 0.1], vec![-p]]).unwrap();
        prop_assert!(both.norm() <= 1e-12);
    }
}

#[test]
fn eigenpairs_of_random_complex_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let n = 1 + case % 36;
        let a = random_complex_matrix(&mut rng, n);
        let tol = 1e-10 * frobenius(&a);
        let eigs = eigenvalues(&a).unwrap();
        assert_eq!(eigs.len(), n);
        let trace: Complex64 = (0..n).map(|i| a[(i, i)]).sum();
        assert!((eigs.iter().sum::<Complex64>() - trace).norm() <= tol * n as f64, "trace, n = {n}");
        for &l in &eigs {
            assert!(shifted_sigma_min(&a, l) <= tol, "n = {n}, λ = {l}");
        }
        let pair = dominant_pair(&a).unwrap();
        let x = &pair.right;
        let y = pair.left.as_ref().unwrap();
        assert!((&a * x - x * pair.value).norm() <= tol * x.norm());
        assert!((a.transpose() * y - y * pair.value).norm() <= tol * y.norm());
        assert!((pair.value.norm() - spectral_radius(&a).unwrap()).abs() <= tol);
    }
}

#[test]
fn defective_and_real_structured_matrices() {
    let jordan = ComplexMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)],
    );
    let e = eigenvalues(&jordan).unwrap();
    assert!(e.iter().all(|z| (z - 0.5).norm() < 1e-7));
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]).map(|v: f64| Complex64::new(v, 0.0));
    assert!((spectral_radius(&rot).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn analytic_gradients_match_central_differences() {
    for problem in registry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut accepted = 0;
        let mut tries = 0;
        while accepted < 50 {
            tries += 1;
            assert!(tries < 2000, "{}: too few simple points", problem.name);
            let (p, theta) = random_point(&mut rng, &problem);
            let e = problem.error_symbol(&p, &theta).unwrap();
            if !simple_dominant(&e, 1e-3) {
                continue;
            }
            let counter = EvalCounter::new();
            let a = rho_gradient(&problem, &p, &theta, GradientMode::Analytic, &counter).unwrap();
            assert!(!a.fell_back);
            assert_eq!(counter.count(), 0, "analytic gradients are free");
            let fd = rho_gradient(&problem, &p, &theta, GradientMode::CentralDiff(1e-6), &counter).unwrap();
            assert_eq!(counter.count(), 2 * p.len() as u64);
            for (x, y) in a.grad.iter().zip(&fd.grad) {
                assert!((x - y).abs() <= 1e-4, "{} at {p:?}, {theta:?}: {x} vs {y}", problem.name);
            }
            accepted += 1;
        }
    }
}

#[test]
fn reference_optima_reproduce_their_values() {
    for problem in registry() {
        let r = problem.reference.clone().unwrap();
        let ntheta = if problem.dim == 3 { 9 } else { 33 };
        let got = lfa_tune::fourier::rho_psi_on_grid(&problem, &r.params, ntheta).unwrap();
        assert!((got - r.rho).abs() < 5e-3, "{}: {got} vs {}", problem.name, r.rho);
    }
}
