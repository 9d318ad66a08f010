//! Co-movement with an `N`-dimensional state, `Σᵢᵢ = 1`, `Σᵢⱼ = 1 − Δ²`, where each
//! player predicts its own component. For `Δ > 0` the optimal structure is a
//! deterministic function of the state, indexed by the root `q*(Δ)`.

use nalgebra::{DMatrix, DVector};

use super::ones;
use crate::error::{Error, Result};
use crate::game::{LinearContract, LinearGaussianStructure, QuadraticGame};
use crate::linalg;

/// `h(q) = 2/(q+N) − 1/(q−ρ) − 1/(q+(N−1)ρ) + 1/(q−ρ+Δ²ρ(N−1))`.
pub fn root_equation(n: usize, rho: f64, delta: f64, q: f64) -> f64 {
    let nf = n as f64;
    2.0 / (q + nf) - 1.0 / (q - rho) - 1.0 / (q + (nf - 1.0) * rho) + 1.0 / (q - rho + delta * delta * rho * (nf - 1.0))
}

/// Limit slope of `(q*(Δ) − ρ)/Δ` as `Δ → 0`.
pub fn gamma_slope(n: usize, rho: f64) -> f64 {
    let nf = n as f64;
    (rho * rho * nf * (nf - 1.0) * (nf + rho) / (rho * (2.0 * nf - 1.0) - nf)).sqrt()
}

/// Bisection for the root of `h` on `(ρ, ρ + 10³)`.
pub fn q_star(n: usize, rho: f64, delta: f64) -> Result<f64> {
    let mut lo = rho + 1e-15 * (1.0 + rho);
    let mut hi = rho + 1e3;
    let f = |q| root_equation(n, rho, delta, q);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::RootNotBracketed { lo: rho, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone)]
pub struct PerturbedComovement {
    pub game: QuadraticGame,
    pub q_star: f64,
    pub structure: LinearGaussianStructure,
    pub contract: LinearContract,
}

pub fn state_covariance(n: usize, delta: f64) -> DMatrix<f64> {
    ones(n) * (1.0 - delta * delta) + DMatrix::identity(n, n) * (delta * delta)
}

pub fn perturbed_comovement(n: usize, rho: f64, delta: f64) -> Result<PerturbedComovement> {
    if n < 2 {
        return Err(Error::InvalidParams("need at least two players".into()));
    }
    let nf = n as f64;
    if !(rho >= nf / (2.0 * nf - 1.0)) || !rho.is_finite() {
        return Err(Error::InvalidParams("need rho >= N/(2N-1)".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParams("need delta in (0, 1]".into()));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let game = QuadraticGame::new(
        DVector::zeros(n),
        &id * 2.0,
        &id * 2.0,
        DVector::zeros(n),
        &id / nf,
        (ones(n) - &id) * (2.0 * rho / (nf * nf)),
        state_covariance(n, delta),
    )?;
    let q = q_star(n, rho, delta)?;
    let m = &id * q + (ones(n) - &id) * rho;
    let r = linalg::solve_checked(&m, &(&id * ((q + nf) / 2.0)))?;
    let structure = LinearGaussianStructure::deterministic(DVector::zeros(n), r)?;
    let contract = LinearContract { x0: DVector::zeros(n), x: DVector::from_element(n, q / (2.0 * nf * nf)) };
    Ok(PerturbedComovement { game, q_star: q, structure, contract })
}
