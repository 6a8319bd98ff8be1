mod common;

use std::sync::Arc;

use fredholm_bvp::boundary::{BoundaryOperator, BoundaryTerm};
use fredholm_bvp::fredholm::{characteristic_matrix_from, fredholm_report, kernel_basis_functions};
use fredholm_bvp::limits::{
    finite_rank_instability_demo, run_sequence, PerturbationSequence, SobolevNorm, DEFAULT_CONVERGENCE_TOL,
};
use fredholm_bvp::linalg::{max_abs, real_matrix, SortedSvd};
use fredholm_bvp::ode_core::{
    fundamental_solutions, solve_inhomogeneous_cauchy, CoefficientFunction, DifferentialSystem, IntegratorConfig,
    Interval,
};
use fredholm_bvp::solver::{BvpStatus, PreparedProblem, SolverConfig};
use fredholm_bvp::{CMatrix, CVector, Error, C64};
use rand::Rng;

fn unit() -> Interval {
    Interval::new(0.0, 1.0).unwrap()
}

#[test]
fn index_identity_on_random_problems() {
    let mut rng = common::rng(3);
    let cfg = IntegratorConfig::default();
    for case in 0..15 {
        let (m, r): (usize, usize) = [(1, 1), (2, 1), (1, 2), (2, 2), (1, 3)][case % 5];
        let rm = r * m;
        let l = [rm.saturating_sub(1).max(1), rm, rm + 1][case % 3];
        let sys = Arc::new(common::random_system(&mut rng, unit(), m, r, 1));
        let b = common::random_boundary(&mut rng, unit(), l, m, r, 1, None, case % 2 == 0);
        let fset = fundamental_solutions(&sys, &cfg).unwrap();
        let rep = fredholm_report(&characteristic_matrix_from(&fset, &b, &cfg, 1e-10).unwrap());
        assert_eq!(rep.index, rm as i64 - l as i64);
        assert_eq!(rep.dim_ker as i64 - rep.dim_coker as i64, rep.index);
    }
}

/// Null-space dimension of `q -> B(y_q)` with `y_q` the homogeneous Cauchy solution with data `q`.
fn brute_force_kernel_dim(sys: &Arc<DifferentialSystem>, b: &BoundaryOperator) -> usize {
    let rm = sys.rm();
    let zero = CoefficientFunction::zeros(sys.m(), 1);
    let mut n = CMatrix::zeros(b.l(), rm);
    for j in 0..rm {
        let mut e = CVector::zeros(rm);
        e[j] = C64::new(1.0, 0.0);
        let y = solve_inhomogeneous_cauchy(sys, &zero, &e, &IntegratorConfig::default()).unwrap();
        n.set_column(j, &b.apply_to_function(&y, sys.interval(), 1e-10).unwrap());
    }
    let svd = SortedSvd::new(&n);
    let scale = svd.max_singular_value().max(1.0);
    rm - svd.rank_above(1e-7 * scale)
}

#[test]
fn kernel_dimension_matches_brute_force() {
    let mut rng = common::rng(4);
    let cfg = IntegratorConfig::default();
    for case in 0..8 {
        let (m, r) = [(1, 1), (2, 1), (1, 2), (2, 2)][case % 4];
        let rm = r * m;
        let l = rng.random_range(1..=rm + 1);
        let rho = rng.random_range(0..=l.min(rm));
        let sys = Arc::new(common::random_system(&mut rng, unit(), m, r, 1));
        let b = common::random_boundary(&mut rng, unit(), l, m, r, 1, Some(rho), case % 2 == 1);
        let fset = fundamental_solutions(&sys, &cfg).unwrap();
        let mat = characteristic_matrix_from(&fset, &b, &cfg, 1e-10).unwrap();
        let rep = fredholm_report(&mat);
        assert_eq!(rep.dim_ker, brute_force_kernel_dim(&sys, &b), "case {case}");
        for y in kernel_basis_functions(&fset, &mat, &rep).unwrap() {
            for t in unit().grid(21) {
                assert!(max_abs(&y.ode_residual(t).unwrap()) <= 1e-8);
            }
            assert!(b.apply_to_trajectory(&y, 1e-10).unwrap().norm() <= 1e-8);
        }
    }
}

#[test]
fn consistent_random_problems_are_solved() {
    let mut rng = common::rng(5);
    for case in 0..6 {
        let (m, r) = [(1, 1), (2, 1), (1, 2)][case % 3];
        let rm = r * m;
        let l = [rm, rm + 1][case % 2];
        let sys = Arc::new(common::random_system(&mut rng, unit(), m, r, 0));
        let b = common::random_boundary(&mut rng, unit(), l, m, r, 0, None, false);
        let prepared = PreparedProblem::new(sys.clone(), b.clone(), SolverConfig::default()).unwrap();
        let f = CoefficientFunction::polynomial(
            0.0,
            vec![
                common::rand_matrix(&mut rng, m, 1, 1.0),
                common::rand_matrix(&mut rng, m, 1, 1.0),
            ],
        )
        .unwrap();
        // c from a known solution, so the problem is consistent even when l > rm
        let q0 = CVector::from_fn(rm, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.0));
        let y0 = solve_inhomogeneous_cauchy(&sys, &f, &q0, &IntegratorConfig::default()).unwrap();
        let c = b.apply_to_function(&y0, unit(), 1e-10).unwrap();
        let sol = prepared.solve(&f, &c).unwrap();
        assert!(!matches!(sol.status, BvpStatus::Inconsistent(_)), "case {case}");
        let y = sol.particular.as_ref().unwrap();
        for t in unit().grid(51) {
            assert!(max_abs(&y.ode_residual(t).unwrap()) <= 1e-7);
        }
        assert!((b.apply_to_function(y, unit(), 1e-10).unwrap() - &c).norm() <= 1e-7);
        assert_eq!(sol.status == BvpStatus::Unique, prepared.report().invertible);
    }
}

#[test]
fn coefficient_perturbation_converges_at_rate_one() {
    let a = real_matrix(2, 2, &[0.5, 1.0, -0.3, 0.2]);
    let e = real_matrix(2, 2, &[1.0, -0.5, 0.25, 1.0]) * C64::new(1e-5, 0.0);
    let sys = Arc::new(DifferentialSystem::constant(unit(), 1, vec![a]).unwrap());
    let b = BoundaryOperator::new(
        2,
        2,
        1,
        1,
        vec![
            BoundaryTerm::Point {
                point: 0.0,
                order: 0.0,
                alpha: real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            },
            BoundaryTerm::Point {
                point: 1.0,
                order: 0.0,
                alpha: real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            },
        ],
    )
    .unwrap();
    let seq = PerturbationSequence {
        system: sys,
        boundary: b,
        coefficient_deltas: Some(vec![CoefficientFunction::Constant(e)]),
        boundary_delta: None,
        rate: 1.0,
        k_values: vec![2, 4, 8, 16, 32, 64],
    };
    let rep = run_sequence(
        &seq,
        &SobolevNorm::new(1, 2.0).unwrap(),
        &SolverConfig::default(),
        DEFAULT_CONVERGENCE_TOL,
    )
    .unwrap();
    assert!(
        rep.matrices_converge,
        "{:?}",
        rep.rows.iter().map(|r| r.char_matrix_gap).collect::<Vec<_>>()
    );
    let rate = rep.fitted_rate.unwrap();
    assert!((-1.3..=-0.7).contains(&rate), "{rate}");
    assert!(rep.semicontinuity_holds);
    for w in rep.rows.windows(2) {
        assert!(w[1].fundsol_gaps[0] < w[0].fundsol_gaps[0]);
        assert!(w[1].coeff_norm_gaps[0] < w[0].coeff_norm_gaps[0]);
    }
}

#[test]
fn rank_drop_fixture_is_semicontinuous() {
    let a = real_matrix(2, 2, &[0.1, 0.0, 0.2, 0.3]);
    let sys = Arc::new(DifferentialSystem::constant(unit(), 0, vec![a]).unwrap());
    let b = BoundaryOperator::new(
        2,
        2,
        1,
        0,
        vec![BoundaryTerm::Point {
            point: 0.0,
            order: 0.0,
            alpha: real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]),
        }],
    )
    .unwrap();
    let db = BoundaryOperator::new(
        2,
        2,
        1,
        0,
        vec![BoundaryTerm::Point {
            point: 1.0,
            order: 0.0,
            alpha: real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        }],
    )
    .unwrap();
    let seq = PerturbationSequence {
        system: sys,
        boundary: b,
        coefficient_deltas: None,
        boundary_delta: Some(db),
        rate: 1.0,
        k_values: vec![1, 2, 4, 8, 16],
    };
    let rep = run_sequence(
        &seq,
        &SobolevNorm::new(0, 2.0).unwrap(),
        &SolverConfig::default(),
        DEFAULT_CONVERGENCE_TOL,
    )
    .unwrap();
    assert_eq!(rep.base.rank, 1);
    assert!(rep.threshold_reached && rep.semicontinuity_holds);
    assert!(rep
        .rows
        .iter()
        .all(|r| r.dim_ker <= rep.base.dim_ker && r.dim_coker <= rep.base.dim_coker));
    assert!(rep.rows.iter().all(|r| r.index == 0));
}

#[test]
fn instability_on_tall_rank_deficient_fixture() {
    let sys = Arc::new(DifferentialSystem::constant(unit(), 0, vec![CMatrix::zeros(2, 2)]).unwrap());
    let alpha = real_matrix(3, 2, &[1.0, 2.0, 0.5, 1.0, -1.0, -2.0]);
    let b = BoundaryOperator::new(
        3,
        2,
        1,
        0,
        vec![BoundaryTerm::Point {
            point: 0.0,
            order: 0.0,
            alpha,
        }],
    )
    .unwrap();
    let demo = finite_rank_instability_demo(&sys, &b, 1e-6, &SolverConfig::default()).unwrap();
    assert_eq!((demo.before.rank, demo.before.dim_coker), (1, 2));
    assert_eq!((demo.after.rank, demo.after.dim_coker), (2, 1));
    assert_eq!(demo.before.index, demo.after.index);
    assert!(
        (demo.perturbation_norm - 1e-6).abs() <= 1e-14,
        "{}",
        demo.perturbation_norm
    );

    let full = BoundaryOperator::cauchy(2, 1, 0, 0.0).unwrap();
    assert!(matches!(
        finite_rank_instability_demo(&sys, &full, 1e-6, &SolverConfig::default()),
        Err(Error::NotApplicable(_))
    ));
}
