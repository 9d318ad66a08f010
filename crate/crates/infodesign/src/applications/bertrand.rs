//! Differentiated Bertrand duopoly with demand `q = θ + Wp`, `W = [[η, ξ], [ξ, η]]`,
//! quadratic production cost `c q²`, and a designer weighting consumer surplus by
//! `δ` and profits by `1 − δ`. Actions are prices; the state is the demand shock
//! `θ − θ̄ ~ N(0, σ²I)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certification;
use crate::error::{Error, Result};
use crate::game::QuadraticGame;
use crate::solver;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub c: f64,
    pub theta_bar: f64,
    pub sigma2: f64,
    pub eta: f64,
    pub xi: f64,
    pub delta: f64,
}

impl MarketParams {
    /// `c = 1, θ̄ = 3, σ² = 1, η = −1, ξ = ½`.
    pub fn example(delta: f64) -> Self {
        MarketParams { c: 1.0, theta_bar: 3.0, sigma2: 1.0, eta: -1.0, xi: 0.5, delta }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        MarketParams { delta, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.c, self.theta_bar, self.sigma2, self.eta, self.xi, self.delta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite market parameter".into()));
        }
        if self.eta >= 0.0 {
            return Err(Error::InvalidParams("eta must be negative".into()));
        }
        if self.xi.abs() >= self.eta.abs() {
            return Err(Error::InvalidParams("need |xi| < |eta|".into()));
        }
        if self.sigma2 <= 0.0 {
            return Err(Error::InvalidParams("sigma2 must be positive".into()));
        }
        if self.c < 0.0 {
            return Err(Error::InvalidParams("c must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParams("delta must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn w(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.eta, self.xi, self.xi, self.eta])
    }
}

pub fn bertrand_game(p: &MarketParams) -> Result<QuadraticGame> {
    p.validate()?;
    let (c, eta, xi, d) = (p.c, p.eta, p.xi, p.delta);
    let k = 1.0 - 2.0 * c * eta;
    let w = p.w();
    let i2 = DMatrix::<f64>::identity(2, 2);
    let ones = DVector::from_element(2, p.theta_bar);
    let own = -2.0 * eta * (1.0 - c * eta);
    let c_mat = DMatrix::from_row_slice(2, 2, &[own, -xi * k, -xi * k, own]);
    let profit_lin = &i2 - &w * (2.0 * c);
    let b_hat = -&ones * d + &profit_lin * &ones * (1.0 - d);
    let b_hat_mat = -&i2 * d + &profit_lin * (1.0 - d);
    let c_hat = &w * d + (&w * -2.0 + &w * &w * (2.0 * c)) * (1.0 - d);
    QuadraticGame::new(
        &ones * k,
        &i2 * k,
        c_mat,
        b_hat,
        b_hat_mat,
        c_hat,
        &i2 * p.sigma2,
    )
    .map_err(|e| match e {
        Error::NotPositiveDefinite(_) => Error::InvalidParams("player interaction matrix is not positive definite".into()),
        other => other,
    })
}

/// Coefficients `(b₀, …, b₄)` of the certificate quartic `f(x)` on the diagonal
/// `x₁ = x₂ = x`; `f` is sixteen times the residual numerator per unit variance.
pub fn bertrand_quartic(p: &MarketParams) -> Result<[f64; 5]> {
    let g = bertrand_game(p)?;
    let poly = solver::diagonal_residual_polynomial(&g)?;
    let s = 16.0 / p.sigma2;
    let c = poly.padded(5);
    Ok([c[0] * s, c[1] * s, c[2] * s, c[3] * s, c[4] * s])
}

/// Consumer-surplus weight at which `Ĉ + 2D(x(δ))C` loses rank.
pub fn critical_delta(p: &MarketParams) -> f64 {
    let (c, eta, xi) = (p.c, p.eta, p.xi);
    let a = xi.abs();
    let t = 4.0 * c * c * eta * (eta + a).powi(2);
    let num = t - 6.0 * c * eta * eta - 8.0 * c * eta * a - 2.0 * c * xi * xi + 2.0 * eta;
    let den = t - 8.0 * c * eta * eta - 10.0 * c * eta * a - 2.0 * c * xi * xi + 5.0 * eta + a;
    num / den
}

/// Weight above which the designer's direct-control problem is unbounded.
pub fn delta_fb(p: &MarketParams) -> f64 {
    let s = 2.0 * p.c * (-p.eta - p.xi.abs());
    (2.0 + s) / (3.0 + s)
}

/// Diagonal multiplier at `δ = δ^cr`, where `Q(x)` is exactly singular.
pub fn critical_multiplier(p: &MarketParams) -> f64 {
    let (c, eta) = (p.c, p.eta);
    let a = p.xi.abs();
    let d = critical_delta(p);
    (eta + a) * (2.0 * c * d * (eta + a) - 2.0 * c * (eta + a) - 3.0 * d + 2.0)
        / (2.0 * (2.0 * c * eta * eta + 2.0 * c * eta * a - 2.0 * eta - a))
}

/// Certified optimum at one δ.
#[derive(Debug, Clone)]
pub struct BertrandOptimum {
    pub x: f64,
    pub structure: crate::game::LinearGaussianStructure,
    pub contract: crate::game::LinearContract,
    pub report: certification::CertificationReport,
}

/// Solve, build and certify; the first root in lexicographic order is used.
pub fn bertrand_optimum(p: &MarketParams) -> Result<BertrandOptimum> {
    let g = bertrand_game(p)?;
    let roots = solver::solve_certificate(&g, &solver::SolverOptions::default())?;
    let x = roots[0].clone();
    let (structure, contract) = certification::certificate_pair(&g, &x)?;
    let report = certification::certify(&g, &structure, &contract)?;
    Ok(BertrandOptimum { x: x[0], structure, contract, report })
}
