//! Investment with congestion: `uᵢ = r(θ − A)aᵢ` with normalized project quality
//! `θ = ω/r − c` and total investment `A = Σⱼaⱼ`, so `C = r(I + J)`.
//! The designer collects total profit `v = A(θ − A)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{coordinated_noise_covariance, ones};
use crate::error::{Error, Result};
use crate::game::{LinearContract, LinearGaussianStructure, QuadraticGame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestmentParams {
    pub n_players: usize,
    /// Congestion rate.
    pub r: f64,
    /// Opportunity cost; enters only through the normalized quality.
    pub c: f64,
    pub theta_mean: f64,
    pub theta_var: f64,
}

impl InvestmentParams {
    pub fn new(n: usize, theta_mean: f64, theta_var: f64) -> Self {
        InvestmentParams { n_players: n, r: 1.0, c: 0.0, theta_mean, theta_var }
    }

    pub fn with_prior(&self, theta_mean: f64, theta_var: f64) -> Self {
        InvestmentParams { theta_mean, theta_var, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_players < 1 {
            return Err(Error::InvalidParams("need at least one player".into()));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidParams("r must be positive".into()));
        }
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidParams("c must be nonnegative".into()));
        }
        if !(self.theta_var >= 0.0) || !self.theta_var.is_finite() || !self.theta_mean.is_finite() {
            return Err(Error::InvalidParams("theta moments must be finite with nonnegative variance".into()));
        }
        Ok(())
    }
}

pub fn investment_game(p: &InvestmentParams) -> Result<QuadraticGame> {
    p.validate()?;
    let n = p.n_players;
    let r = p.r;
    QuadraticGame::new(
        DVector::from_element(n, r * p.theta_mean),
        DMatrix::from_element(n, 1, r),
        (DMatrix::identity(n, n) + ones(n)) * r,
        DVector::from_element(n, p.theta_mean),
        DMatrix::from_element(n, 1, 1.0),
        ones(n) * 2.0,
        DMatrix::from_element(1, 1, p.theta_var),
    )
}

/// Reveal θ to player 1 only.
pub fn selective_informing(p: &InvestmentParams, n_informed: usize) -> Result<LinearGaussianStructure> {
    p.validate()?;
    if n_informed != 1 {
        return Err(Error::Inadmissible(format!("investment informs exactly one player, got {n_informed}")));
    }
    let n = p.n_players;
    let a0 = DVector::from_element(n, p.theta_mean / (n as f64 + 1.0));
    let r = DMatrix::from_fn(n, 1, |i, _| if i == 0 { 0.5 } else { 0.0 });
    LinearGaussianStructure::deterministic(a0, r)
}

/// Variance of each i.i.d. `εᵢ` that keeps the symmetric structure obedient.
pub fn noise_variance(p: &InvestmentParams) -> f64 {
    let n = p.n_players as f64;
    (n - 1.0).powi(2) * p.theta_var / (4.0 * n.powi(3))
}

pub fn coordinated_gaussian(p: &InvestmentParams) -> Result<LinearGaussianStructure> {
    p.validate()?;
    let n = p.n_players;
    let nf = n as f64;
    LinearGaussianStructure::new(
        DVector::from_element(n, p.theta_mean / (nf + 1.0)),
        DMatrix::from_element(n, 1, 1.0 / (2.0 * nf)),
        coordinated_noise_covariance(n, noise_variance(p)),
    )
}

/// Constant contract; depends on the prior only through `E[θ]`.
pub fn investment_contract(p: &InvestmentParams) -> LinearContract {
    let n = p.n_players as f64;
    let x0 = -(n - 1.0) * p.theta_mean / (p.r * (n + 1.0).powi(2));
    LinearContract::constant(DVector::from_element(p.n_players, x0))
}

/// `(v^NI, v^FI, v*)` in closed form.
pub fn closed_form_values(p: &InvestmentParams) -> (f64, f64, f64) {
    let n = p.n_players as f64;
    let k = n / (n + 1.0).powi(2);
    let ni = k * p.theta_mean * p.theta_mean;
    (ni, ni + k * p.theta_var, ni + p.theta_var / 4.0)
}
