#![allow(dead_code)]

use infodesign::{LinearGaussianStructure, QuadraticGame};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_mat(r: &mut ChaCha8Rng, rows: usize, cols: usize, s: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| (r.gen::<f64>() * 2.0 - 1.0) * s)
}

pub fn uniform_vec(r: &mut ChaCha8Rng, n: usize, s: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| (r.gen::<f64>() * 2.0 - 1.0) * s)
}

/// Random game with `C` positive definite (possibly asymmetric), `Ĉ` of any
/// inertia and `Σ` possibly rank-deficient.
pub fn random_game(r: &mut ChaCha8Rng) -> QuadraticGame {
    let n = r.gen_range(1..=4);
    let k = r.gen_range(1..=3);
    let a = uniform_mat(r, n, n, 1.0);
    let mut c = &a * a.transpose() + DMatrix::identity(n, n) * r.gen_range(0.3..2.0);
    if r.gen_bool(0.3) {
        let skew = uniform_mat(r, n, n, 0.3);
        c += &skew - skew.transpose();
    }
    let l = uniform_mat(r, k, k, 1.0);
    let mut sigma = &l * l.transpose();
    if k > 1 && r.gen_bool(0.2) {
        let v = uniform_mat(r, k, 1, 1.0);
        sigma = &v * v.transpose();
    }
    let h = uniform_mat(r, n, n, 1.0);
    let c_hat = (&h + h.transpose()) * 0.5;
    QuadraticGame::new(
        uniform_vec(r, n, 2.0),
        uniform_mat(r, n, k, 2.0),
        c,
        uniform_vec(r, n, 2.0),
        uniform_mat(r, n, k, 2.0),
        c_hat,
        sigma,
    )
    .expect("random game is valid")
}

/// Linear equilibrium of private noisy signals `sᵢ = hᵢᵀω + νᵢ`: `aᵢ = a₀ᵢ + kᵢsᵢ`
/// with `(C∘S)k = (BᵢΣhᵢ)ᵢ`, `S = HΣHᵀ + diag(ν)`. Obedient by construction.
pub fn random_obedient_structure(r: &mut ChaCha8Rng, g: &QuadraticGame) -> Option<LinearGaussianStructure> {
    let (n, k) = (g.n_players(), g.state_dim());
    let h = uniform_mat(r, n, k, 1.5);
    let nu = DVector::from_fn(n, |_, _| if r.gen_bool(0.25) { 0.0 } else { r.gen_range(0.01..2.0) });
    let sig = g.sigma();
    let s = &h * sig * h.transpose() + DMatrix::from_diagonal(&nu);
    let cs = g.c_mat().component_mul(&s);
    let rhs = DVector::from_fn(n, |i, _| (g.b_mat().row(i) * sig * h.row(i).transpose())[(0, 0)]);
    let kk = cs.lu().solve(&rhs)?;
    let kd = DMatrix::from_diagonal(&kk);
    let a0 = g.c_mat().clone().lu().solve(g.b())?;
    let xi = &kd * DMatrix::from_diagonal(&nu) * &kd;
    LinearGaussianStructure::new(a0, &kd * h, xi).ok()
}
