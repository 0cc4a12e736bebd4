//! Discrete two-grid measurements against the Fourier predictions.

use lfa_tune::fourier::rho_psi_star;
use lfa_tune::mgvalidate::{measure_convergence, Boundary, CycleVariant, Grid1D, TwoGridHierarchy};
use lfa_tune::problems::Weights;
use lfa_tune::problem_by_name;
use proptest::prelude::*;

fn laplace() -> CycleVariant {
    CycleVariant::for_problem("laplace1d-p1").unwrap()
}

#[test]
fn lfa_predicts_measured_factors() {
    let problem = problem_by_name("laplace1d-p1", Default::default()).unwrap();
    for p in [0.4, 0.5, 2.0 / 3.0, 0.8] {
        let lfa = rho_psi_star(&problem, &[p]).unwrap();
        let rep = measure_convergence(laplace(), &[p], Grid1D::new(1.0 / 64.0, Boundary::Dirichlet).unwrap(), 42).unwrap();
        assert!((rep.rho_m2 - lfa).abs() <= 0.02, "p = {p}: measured {} vs {lfa}", rep.rho_m2);
        assert!(!rep.diverged);
    }
}

#[test]
fn divergence_beyond_one() {
    let rep = measure_convergence(laplace(), &[1.2], Grid1D::new(1.0 / 64.0, Boundary::Dirichlet).unwrap(), 42).unwrap();
    assert!(rep.diverged);
    assert!(rep.rho_m2 > 1.0);
}

#[test]
fn two_sweep_optimum_is_a_direct_solver() {
    let v = CycleVariant::for_problem("laplace1d-p1-2sweep").unwrap();
    for boundary in [Boundary::Dirichlet, Boundary::Periodic] {
        let rep = measure_convergence(v, &[1.0, 0.5], Grid1D::new(1.0 / 64.0, boundary).unwrap(), 42).unwrap();
        assert!(rep.floor_hit);
        assert!(rep.defect_norms.len() <= 3, "{boundary}: {} cycles", rep.defect_norms.len() - 1);
        assert!(rep.rho_m2 < 1e-10);
    }
}

#[test]
fn mesh_independence() {
    let at = |h: f64| measure_convergence(laplace(), &[2.0 / 3.0], Grid1D::new(h, Boundary::Dirichlet).unwrap(), 5).unwrap().rho_m2;
    assert!((at(1.0 / 64.0) - at(1.0 / 128.0)).abs() <= 0.02);
}

#[test]
fn coarsening_by_three_on_both_boundaries() {
    let v = CycleVariant::Coarsen3;
    for boundary in [Boundary::Dirichlet, Boundary::Periodic] {
        let rep = measure_convergence(v, &[0.72, 2.30], Grid1D::new(1.0 / 243.0, boundary).unwrap(), 42).unwrap();
        assert!((rep.rho_m2 - 0.42).abs() <= 0.03, "{boundary}: {}", rep.rho_m2);
    }
}

#[test]
fn coarse_correction_alone_is_a_projection() {
    let v = CycleVariant::Laplace { pre_sweeps: 0, post_sweeps: 0, weights: Weights::Shared };
    for boundary in [Boundary::Dirichlet, Boundary::Periodic] {
        let hier = TwoGridHierarchy::new(v, Grid1D::new(1.0 / 32.0, boundary).unwrap()).unwrap();
        let n = hier.fine.nrows();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = match boundary {
            // Consistent right-hand side for the singular periodic problem.
            Boundary::Periodic => {
                let mean = b.iter().sum::<f64>() / n as f64;
                b.iter().map(|x| x - mean).collect()
            }
            Boundary::Dirichlet => b,
        };
        let u0: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).cos()).collect();
        let once = hier.two_grid_cycle(&[0.0], &b, &u0).unwrap();
        let twice = hier.two_grid_cycle(&[0.0], &b, &once).unwrap();
        let scale = once.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in once.iter().zip(&twice) {
            assert!((x - y).abs() <= 1e-10 * scale.max(1.0), "{boundary}");
        }
    }
}

#[test]
fn unsupported_problems_are_rejected() {
    assert!(CycleVariant::for_problem("stokes-mac-bsr").is_err());
    assert!(Grid1D::new(1.0 / 3.0 + 1e-3, Boundary::Dirichlet).is_err());
    assert!(Grid1D::new(0.5, Boundary::Dirichlet).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn seeds_determine_reports(seed in any::<u64>(), p in 0.2f64..1.0) {
        let grid = Grid1D::new(1.0 / 32.0, Boundary::Periodic).unwrap();
        let a = measure_convergence(laplace(), &[p], grid, seed).unwrap();
        let b = measure_convergence(laplace(), &[p], grid, seed).unwrap();
        prop_assert_eq!(
            a.defect_norms.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.defect_norms.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reported_ratios_follow_the_defects(seed in 0u64..100, p in 0.3f64..0.9) {
        let rep = measure_convergence(laplace(), &[p], Grid1D::new(1.0 / 16.0, Boundary::Dirichlet).unwrap(), seed).unwrap();
        let d = &rep.defect_norms;
        let k = d.len() - 1;
        prop_assert!(k == 100 || rep.floor_hit);
        prop_assert_eq!(rep.rho_m2, d[k] / d[k - 1]);
        prop_assert!((rep.rho_m1 - (d[k] / d[0]).powf(1.0 / k as f64)).abs() <= 1e-15);
        prop_assert!(d.iter().all(|x| x.is_finite() && *x > 0.0));
    }
}
