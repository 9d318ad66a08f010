mod common;

use infodesign::applications::{investment, persuasion};
use infodesign::benchmarks;
use infodesign::montecarlo::{mc_designer_value, McConfig};
use infodesign::{LinearGaussianStructure, QuadraticGame};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn fd_check(g: &QuadraticGame, a: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..g.n_players() {
        let h = 1e-3 * (1.0 + a[i].abs());
        let mut ap = a.clone();
        let mut am = a.clone();
        ap[i] += h;
        am[i] -= h;
        let fd = (g.player_payoff(&ap, w, i).unwrap() - g.player_payoff(&am, w, i).unwrap()) / (2.0 * h);
        let mu = g.marginal_utility(a, w, i).unwrap();
        let terms = g.b()[i].abs()
            + (g.b_mat().row(i) * w)[(0, 0)].abs()
            + (0..g.n_players()).map(|j| (g.c_mat()[(i, j)] * a[j]).abs()).sum::<f64>();
        worst = worst.max((fd - mu).abs() / mu.abs().max(terms).max(1e-300));
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn marginal_utility_matches_finite_difference(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_game(&mut r);
        let a = common::uniform_vec(&mut r, g.n_players(), 5.0);
        let w = common::uniform_vec(&mut r, g.state_dim(), 3.0);
        prop_assert!(fd_check(&g, &a, &w) <= 1e-8);
    }

    #[test]
    fn full_information_zeroes_marginal_utility(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_game(&mut r);
        let fi = benchmarks::full_info_equilibrium(&g).unwrap();
        let w = common::uniform_vec(&mut r, g.state_dim(), 3.0);
        let a = fi.recommended_action(&w, &DVector::zeros(g.n_players())).unwrap();
        let mu = g.marginal_utilities(&a, &w).unwrap();
        let scale = 1.0 + g.b().norm() + g.b_mat().norm() * w.norm();
        prop_assert!(mu.amax() <= 1e-12 * scale);
    }
}

#[test]
fn potential_form_for_symmetric_c() {
    let mut r = common::rng(11);
    for _ in 0..50 {
        let g = common::random_game(&mut r);
        if (g.c_mat() - g.c_mat().transpose()).amax() > 0.0 {
            continue;
        }
        let a = common::uniform_vec(&mut r, g.n_players(), 2.0);
        let w = common::uniform_vec(&mut r, g.state_dim(), 2.0);
        let pot = |a: &DVector<f64>| a.dot(&(g.b() + g.b_mat() * &w)) - 0.5 * a.dot(&(g.c_mat() * a));
        for i in 0..g.n_players() {
            let h = 1e-3;
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[i] += h;
            am[i] -= h;
            let fd = (pot(&ap) - pot(&am)) / (2.0 * h);
            let mu = g.marginal_utility(&a, &w, i).unwrap();
            assert!((fd - mu).abs() <= 1e-8 * (1.0 + mu.abs()));
        }
    }
}

#[test]
fn investment_marginal_utility_example() {
    let g = investment::investment_game(&investment::InvestmentParams::new(2, 0.0, 1.0)).unwrap();
    assert_eq!(g.c_mat(), &DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]));
    let mu = g.marginal_utility(&DVector::zeros(2), &DVector::from_element(1, 1.0), 0).unwrap();
    assert_eq!(mu, 1.0);
}

#[test]
fn designer_payoff_examples() {
    let g = persuasion::polarization_game(&persuasion::PersuasionParams::polarization(2, 0.0, 1.0)).unwrap();
    let w = DVector::from_element(1, 0.7);
    assert_eq!(g.designer_payoff(&DVector::zeros(2), &w).unwrap(), 0.0);
    assert_eq!(g.designer_payoff(&DVector::from_vec(vec![1.0, -1.0]), &w).unwrap(), 8.0);
    let gi = investment::investment_game(&investment::InvestmentParams::new(3, 0.0, 1.0)).unwrap();
    // centered state s = θ with E[θ] = 0; A = θ/2 split evenly
    for theta in [-2.0, 0.5, 3.0] {
        let a = DVector::from_element(3, theta / 6.0);
        let v = gi.designer_payoff(&a, &DVector::from_element(1, theta)).unwrap();
        assert!((v - theta * theta / 4.0).abs() < 1e-14);
    }
}

#[test]
fn recommended_action_examples() {
    let s = LinearGaussianStructure::deterministic(DVector::from_vec(vec![1.0, 2.0]), DMatrix::zeros(2, 1)).unwrap();
    for w in [-1.0, 0.0, 4.0] {
        let a = s.recommended_action(&DVector::from_element(1, w), &DVector::zeros(2)).unwrap();
        assert_eq!(a, s.a0);
    }
    let p = persuasion::PersuasionParams::polarization(2, 0.0, 1.0);
    let cg = persuasion::coordinated_gaussian(&p).unwrap();
    // ε' = (ε₁ − ε₂): actions ω/2 ± ε', noise covariance σ²/4·[[1,−1],[−1,1]]
    let noise = DVector::from_vec(vec![0.3, -0.3]);
    let a = cg.recommended_action(&DVector::from_element(1, 2.0), &noise).unwrap();
    assert!((a - DVector::from_vec(vec![1.3, 0.7])).amax() < 1e-15);
    assert!((cg.xi[(0, 0)] - 0.25).abs() < 1e-15);
    assert!((cg.xi[(0, 1)] + 0.25).abs() < 1e-15);
    assert!(cg.recommended_action(&DVector::zeros(2), &noise).is_err());
}

#[test]
fn expected_value_examples() {
    let g = persuasion::polarization_game(&persuasion::PersuasionParams::polarization(2, 0.0, 1.0)).unwrap();
    let null = LinearGaussianStructure::deterministic(DVector::zeros(2), DMatrix::zeros(2, 1)).unwrap();
    assert_eq!(g.expected_designer_value(&null).unwrap(), 0.0);
    let p = investment::InvestmentParams::new(2, 1.0, 1.0);
    let gi = investment::investment_game(&p).unwrap();
    let ni = benchmarks::no_info_equilibrium(&gi).unwrap();
    assert!((gi.expected_designer_value(&ni).unwrap() - 2.0 / 9.0).abs() < 1e-15);
    let pp = persuasion::PersuasionParams::polarization(2, 0.0, 1.0);
    let sel = persuasion::selective_informing(&pp, 1).unwrap();
    assert!((g.expected_designer_value(&sel).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn expected_value_matches_monte_carlo() {
    let mut r = common::rng(5);
    let mut checked = 0;
    while checked < 6 {
        let g = common::random_game(&mut r);
        let Some(s) = common::random_obedient_structure(&mut r, &g) else { continue };
        let exact = g.expected_designer_value(&s).unwrap();
        let est = mc_designer_value(&g, &s, &McConfig::new(r.gen(), 1_000_000)).unwrap();
        assert!((est.estimate - exact).abs() <= 4.0 * est.std_error + 1e-12, "{exact} vs {est:?}");
        checked += 1;
    }
}
