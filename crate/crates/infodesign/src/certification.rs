//! Obedience (implementability by information), dual concavity and best-response
//! matching (implementability by incentives), and the duality-gap verdict.
//!
//! For a linear contract `λᵢ = x0ᵢ + xᵢaᵢ` the dual payoff `v + Σλᵢu̇ᵢ` is
//! `aᵀ(m + Mω) − ½aᵀQa + x0ᵀ(b + Bω)` with
//! `Q = sym(Ĉ + 2D(x)C)`, `m = b̂ + D(x)b − Cᵀx0`, `M = B̂ + D(x)B`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{LinearContract, LinearGaussianStructure, QuadraticGame};
use crate::linalg::{self, SymSpectrum, EIG_REL_TOL};

/// Quadratic form of the dual agent's problem for slopes `x`.
pub fn dual_quadratic(game: &QuadraticGame, x: &DVector<f64>) -> DMatrix<f64> {
    let dc = linalg::diag(x) * game.c_mat();
    linalg::sym(&(game.c_hat() + dc * 2.0))
}

/// Linear coefficients `(m, M)` of the dual payoff.
pub fn dual_linear_terms(game: &QuadraticGame, contract: &LinearContract) -> (DVector<f64>, DMatrix<f64>) {
    let d = linalg::diag(&contract.x);
    let m = game.b_hat() + &d * game.b() - game.c_mat().transpose() * &contract.x0;
    let big_m = game.b_hat_mat() + &d * game.b_mat();
    (m, big_m)
}

/// `(Ca₀ − b, [(CᵢR − Bᵢ)ΣRᵢᵀ + CᵢΞ·ᵢ]ᵢ)`.
pub fn obedience_residuals(game: &QuadraticGame, s: &LinearGaussianStructure) -> Result<(DVector<f64>, DVector<f64>)> {
    game.check_structure(s)?;
    let c = game.c_mat();
    let mean = c * &s.a0 - game.b();
    let gap = c * &s.r - game.b_mat();
    let gs = &gap * game.sigma();
    let cx = c * &s.xi;
    let n = game.n_players();
    let cov = DVector::from_fn(n, |i, _| gs.row(i).dot(&s.r.row(i)) + cx[(i, i)]);
    Ok((mean, cov))
}

/// Magnitudes against which the obedience residuals are compared.
pub fn obedience_scales(game: &QuadraticGame, s: &LinearGaussianStructure) -> (f64, f64) {
    let c = game.c_mat().norm();
    let r = s.r.norm();
    let sig = game.sigma().norm();
    let mean = 1.0 + c * s.a0.norm() + game.b().norm();
    let cov = 1.0 + c * r * r * sig + game.b_mat().norm() * r * sig + c * s.xi.norm();
    (mean, cov)
}

/// Condition (i) residual as a function of the multiplier: `gᵢ(x) = (CᵢR(x) − Bᵢ)ΣR(x)ᵢᵀ`.
pub fn certificate_residual(game: &QuadraticGame, x: &DVector<f64>) -> Result<DVector<f64>> {
    let r = responsiveness_from_multiplier(game, x)?;
    let s = LinearGaussianStructure { a0: DVector::zeros(game.n_players()), r, xi: DMatrix::zeros(game.n_players(), game.n_players()) };
    Ok(obedience_residuals(game, &s)?.1)
}

/// `R = Q(x)⁻¹(B̂ + D(x)B)`.
pub fn responsiveness_from_multiplier(game: &QuadraticGame, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    if x.len() != game.n_players() {
        return Err(Error::Dimension("multiplier length differs from n_players".into()));
    }
    let q = dual_quadratic(game, x);
    let big_m = game.b_hat_mat() + linalg::diag(x) * game.b_mat();
    linalg::solve_checked(&q, &big_m)
}

/// Smallest eigenvalue of `Q(x)`.
pub fn dual_concavity_margin(game: &QuadraticGame, x: &DVector<f64>) -> f64 {
    linalg::min_eigenvalue(&dual_quadratic(game, x))
}

/// Offsets `x₀` making the dual best-response intercept equal `a0_target`:
/// solves `Cᵀx₀ = b̂ + D(x)b − Q(x)a0_target`.
pub fn constant_offset(game: &QuadraticGame, x: &DVector<f64>, a0_target: &DVector<f64>) -> Result<DVector<f64>> {
    let n = game.n_players();
    if x.len() != n || a0_target.len() != n {
        return Err(Error::Dimension("multiplier or target length differs from n_players".into()));
    }
    let q = dual_quadratic(game, x);
    let rhs = game.b_hat() + linalg::diag(x) * game.b() - q * a0_target;
    linalg::solve_vec_checked(&game.c_mat().transpose(), &rhs)
}

/// Dual value `E[sup_a (v + Σλᵢu̇ᵢ)]`; `+∞` when the inner problem is unbounded.
pub fn dual_value(game: &QuadraticGame, contract: &LinearContract) -> Result<f64> {
    game.check_contract(contract)?;
    let q = dual_quadratic(game, &contract.x);
    let sp = SymSpectrum::new(&q);
    if !sp.is_psd() {
        return Ok(f64::INFINITY);
    }
    let (m, big_m) = dual_linear_terms(game, contract);
    let root = linalg::psd_sqrt(game.sigma(), "sigma")?;
    let mr = &big_m * root;
    if !sp.contains(&DMatrix::from_column_slice(m.len(), 1, m.as_slice())) || !sp.contains(&mr) {
        return Ok(f64::INFINITY);
    }
    let quad_m = m.dot(&(&sp.pinv * &m));
    let quad_state = (mr.transpose() * &sp.pinv * &mr).trace();
    Ok(0.5 * quad_m + 0.5 * quad_state + contract.x0.dot(game.b()))
}

/// Largest relative violation of "the structure is a dual best response":
/// `Q a₀ = m`, `(QR − M)Σ = 0`, `QΞ = 0`.
pub fn best_response_mismatch(game: &QuadraticGame, s: &LinearGaussianStructure, contract: &LinearContract) -> Result<f64> {
    game.check_structure(s)?;
    game.check_contract(contract)?;
    let q = dual_quadratic(game, &contract.x);
    let (m, big_m) = dual_linear_terms(game, contract);
    let qn = q.norm();
    let sig = game.sigma();
    let mean = (&q * &s.a0 - &m).norm() / (1.0 + qn * s.a0.norm() + m.norm());
    let slope = ((&q * &s.r - &big_m) * sig).norm() / (1.0 + (qn * s.r.norm() + big_m.norm()) * sig.norm());
    let noise = (&q * &s.xi).norm() / (1.0 + qn * s.xi.norm());
    Ok(mean.max(slope).max(noise))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Certified,
    ObedienceFailed,
    ConcavityFailed,
    GapNonzero,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub mean_residual: Vec<f64>,
    pub covariance_residuals: Vec<f64>,
    pub pd_margin: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    /// Relative tolerance on obedience residuals.
    pub residual_tol: f64,
    /// Relative tolerance on best-response matching.
    pub response_tol: f64,
    /// `|gap| ≤ gap_tol · max(1, |V^P|)`.
    pub gap_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { residual_tol: 1e-9, response_tol: 1e-8, gap_tol: 1e-6 }
    }
}

pub fn certify(game: &QuadraticGame, s: &LinearGaussianStructure, contract: &LinearContract) -> Result<CertificationReport> {
    certify_with(game, s, contract, &CertifyOptions::default())
}

pub fn certify_with(
    game: &QuadraticGame,
    s: &LinearGaussianStructure,
    contract: &LinearContract,
    opts: &CertifyOptions,
) -> Result<CertificationReport> {
    let (mean, cov) = obedience_residuals(game, s)?;
    let (mean_scale, cov_scale) = obedience_scales(game, s);
    let q = dual_quadratic(game, &contract.x);
    let pd_margin = linalg::min_eigenvalue(&q);
    let primal = game.expected_designer_value(s)?;
    let dual = dual_value(game, contract)?;
    let gap = dual - primal;
    let obedient = mean.amax() <= opts.residual_tol * mean_scale && cov.amax() <= opts.residual_tol * cov_scale;
    let verdict = if !obedient {
        Verdict::ObedienceFailed
    } else if pd_margin < -EIG_REL_TOL * q.norm() || !dual.is_finite() {
        Verdict::ConcavityFailed
    } else if best_response_mismatch(game, s, contract)? > opts.response_tol
        || gap.abs() > opts.gap_tol * primal.abs().max(1.0)
    {
        Verdict::GapNonzero
    } else {
        Verdict::Certified
    };
    Ok(CertificationReport {
        mean_residual: mean.iter().copied().collect(),
        covariance_residuals: cov.iter().copied().collect(),
        pd_margin,
        primal_value: primal,
        dual_value: dual,
        gap,
        verdict,
    })
}

/// Noise-free structure and contract generated by a multiplier:
/// `a₀ = C⁻¹b`, `R = R(x)`, and offsets reproducing `a₀`.
pub fn certificate_pair(game: &QuadraticGame, x: &DVector<f64>) -> Result<(LinearGaussianStructure, LinearContract)> {
    let a0 = linalg::solve_vec_checked(game.c_mat(), game.b())?;
    let r = responsiveness_from_multiplier(game, x)?;
    let x0 = constant_offset(game, x, &a0)?;
    Ok((LinearGaussianStructure::deterministic(a0, r)?, LinearContract::new(x0, x.clone())?))
}
