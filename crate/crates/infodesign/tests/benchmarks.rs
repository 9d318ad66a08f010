mod common;

use infodesign::applications::bertrand::{self, MarketParams};
use infodesign::applications::{investment, persuasion};
use infodesign::benchmarks::*;
use infodesign::certification::{dual_value, obedience_residuals};
use infodesign::{LinearContract, QuadraticGame};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn bertrand_no_information_prices() {
    let g = bertrand::bertrand_game(&MarketParams::example(0.0)).unwrap();
    let s = no_info_equilibrium(&g).unwrap();
    for i in 0..2 {
        assert!((s.a0[i] / 3.0 - 6.0 / 5.0).abs() < 1e-12);
        assert!((s.a0[i] - 18.0 / 5.0).abs() < 1e-12);
    }
    assert_eq!(s.r.amax(), 0.0);
}

#[test]
fn bertrand_full_information_coefficients() {
    let g = bertrand::bertrand_game(&MarketParams::example(0.4)).unwrap();
    let s = full_info_equilibrium(&g).unwrap();
    assert!((s.r[(0, 0)] - 48.0 / 55.0).abs() < 1e-12);
    assert!((s.r[(1, 1)] - 48.0 / 55.0).abs() < 1e-12);
    assert!((s.r[(0, 1)] - 18.0 / 55.0).abs() < 1e-12);
    assert!((s.r[(1, 0)] - 18.0 / 55.0).abs() < 1e-12);
    let (m, c) = obedience_residuals(&g, &s).unwrap();
    assert!(m.amax() < 1e-12 && c.amax() < 1e-12);
}

#[test]
fn investment_benchmarks() {
    let g = investment::investment_game(&investment::InvestmentParams::new(2, 1.0, 0.5)).unwrap();
    let s = no_info_equilibrium(&g).unwrap();
    assert!((s.a0 - DVector::from_element(2, 1.0 / 3.0)).amax() < 1e-14);
    for n in 1..=6 {
        let g = investment::investment_game(&investment::InvestmentParams::new(n, 1.0, 0.5)).unwrap();
        let fi = full_info_equilibrium(&g).unwrap();
        assert!(fi.r.iter().all(|v| (v - 1.0 / (n as f64 + 1.0)).abs() < 1e-14));
    }
}

#[test]
fn zero_intercepts_and_no_state_loading() {
    let mut r = common::rng(3);
    let g = common::random_game(&mut r);
    let z = QuadraticGame::new(
        DVector::zeros(g.n_players()),
        DMatrix::zeros(g.n_players(), g.state_dim()),
        g.c_mat().clone(),
        g.b_hat().clone(),
        g.b_hat_mat().clone(),
        g.c_hat().clone(),
        g.sigma().clone(),
    )
    .unwrap();
    let ni = no_info_equilibrium(&z).unwrap();
    let fi = full_info_equilibrium(&z).unwrap();
    assert_eq!(ni.a0.amax(), 0.0);
    assert!((ni.r - fi.r).amax() < 1e-15);
}

#[test]
fn identity_designer() {
    let g = QuadraticGame::new(
        DVector::zeros(2),
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2) * 2.0,
        DVector::zeros(2),
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2),
    )
    .unwrap();
    match first_best(&g) {
        FirstBest::Optimal { r, .. } => assert!((r - DMatrix::identity(2, 2)).amax() < 1e-15),
        FirstBest::Unbounded => panic!("bounded"),
    }
}

#[test]
fn bertrand_first_best_threshold() {
    let p = MarketParams::example(0.0);
    assert!((bertrand::delta_fb(&p) - 0.75).abs() < 1e-15);
    for d in [0.76, 0.8, 0.9, 1.0] {
        let g = bertrand::bertrand_game(&p.with_delta(d)).unwrap();
        assert_eq!(first_best(&g), FirstBest::Unbounded, "delta {d}");
    }
    for d in [0.0, 0.3, 0.74] {
        let g = bertrand::bertrand_game(&p.with_delta(d)).unwrap();
        assert!(matches!(first_best(&g), FirstBest::Optimal { .. }), "delta {d}");
    }
}

#[test]
fn investment_aggregate_first_best() {
    for n in 1..=5 {
        let p = investment::InvestmentParams::new(n, 0.7, 1.1);
        let g = investment::investment_game(&p).unwrap();
        let s = first_best(&g).structure().expect("kernel-reduced first best");
        assert!((s.r.sum() - 0.5).abs() < 1e-12, "n {n}");
        assert!((s.a0.sum() - 0.35).abs() < 1e-12, "n {n}");
        // the first-best value is v* plus the value of full information to a single agent
        let v = g.expected_designer_value(&s).unwrap();
        assert!((v - (0.7f64 * 0.7 / 4.0 + 1.1 / 4.0)).abs() < 1e-12);
        let (_, _, vstar) = investment::closed_form_values(&p);
        assert!(v >= vstar - 1e-12);
    }
}

#[test]
fn first_best_dominates_certified_values() {
    let g = bertrand::bertrand_game(&MarketParams::example(0.2)).unwrap();
    let fb = g.expected_designer_value(&first_best(&g).structure().unwrap()).unwrap();
    let opt = bertrand::bertrand_optimum(&MarketParams::example(0.2)).unwrap();
    assert!(fb >= opt.report.primal_value);
    let fi = g.expected_designer_value(&full_info_equilibrium(&g).unwrap()).unwrap();
    assert!(opt.report.primal_value >= fi - 1e-12);

    let p = persuasion::PersuasionParams::comovement(3, 1.0, 0.4);
    let g = persuasion::comovement_game(&p).unwrap();
    // the co-movement designer form J − I is indefinite
    assert_eq!(first_best(&g), FirstBest::Unbounded);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn full_information_is_obedient(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_game(&mut r);
        let s = full_info_equilibrium(&g).unwrap();
        let (m, c) = obedience_residuals(&g, &s).unwrap();
        let scale = 1.0 + g.b_mat().norm().powi(2) * g.sigma().norm() + g.b().norm();
        prop_assert!(m.amax() <= 1e-12 * scale && c.amax() <= 1e-12 * scale);
    }

    #[test]
    fn null_dual_is_first_best_value(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_game(&mut r);
        let n = g.n_players();
        // replace Ĉ by a random PD matrix
        let a = common::uniform_mat(&mut r, n, n, 1.0);
        let c_hat = &a * a.transpose() + DMatrix::identity(n, n) * r.gen_range(0.1..2.0);
        let g = QuadraticGame::new(
            g.b().clone(), g.b_mat().clone(), g.c_mat().clone(),
            g.b_hat().clone(), g.b_hat_mat().clone(), c_hat, g.sigma().clone(),
        ).unwrap();
        let fb = g.expected_designer_value(&first_best(&g).structure().unwrap()).unwrap();
        let d = dual_value(&g, &LinearContract::null(n)).unwrap();
        prop_assert!((fb - d).abs() <= 1e-9 * (1.0 + fb.abs()));
        if let Some(s) = common::random_obedient_structure(&mut r, &g) {
            prop_assert!(g.expected_designer_value(&s).unwrap() <= fb + 1e-9 * (1.0 + fb.abs()));
        }
    }
}
