//! Reference structures: no information, full information, first best.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::game::{LinearGaussianStructure, QuadraticGame};
use crate::linalg::{self, SymSpectrum};

/// Players act on the prior: `a₀ = C⁻¹b`, `R = 0`.
pub fn no_info_equilibrium(game: &QuadraticGame) -> Result<LinearGaussianStructure> {
    let a0 = linalg::solve_vec_checked(game.c_mat(), game.b())?;
    LinearGaussianStructure::deterministic(a0, DMatrix::zeros(game.n_players(), game.state_dim()))
}

/// Complete-information equilibrium: `a₀ = C⁻¹b`, `R = C⁻¹B`.
pub fn full_info_equilibrium(game: &QuadraticGame) -> Result<LinearGaussianStructure> {
    let a0 = linalg::solve_vec_checked(game.c_mat(), game.b())?;
    let r = linalg::solve_checked(game.c_mat(), game.b_mat())?;
    LinearGaussianStructure::deterministic(a0, r)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FirstBest {
    /// Maximizer of the designer's payoff under direct control
    /// (minimum-norm when `Ĉ` is only semidefinite).
    Optimal { a0: DVector<f64>, r: DMatrix<f64> },
    Unbounded,
}

impl FirstBest {
    pub fn structure(&self) -> Option<LinearGaussianStructure> {
        match self {
            FirstBest::Optimal { a0, r } => LinearGaussianStructure::deterministic(a0.clone(), r.clone()).ok(),
            FirstBest::Unbounded => None,
        }
    }
}

pub fn first_best(game: &QuadraticGame) -> FirstBest {
    let sp = SymSpectrum::new(game.c_hat());
    if !sp.is_psd() {
        return FirstBest::Unbounded;
    }
    let bh = DMatrix::from_column_slice(game.n_players(), 1, game.b_hat().as_slice());
    let root = match linalg::psd_sqrt(game.sigma(), "sigma") {
        Ok(l) => l,
        Err(_) => return FirstBest::Unbounded,
    };
    if !sp.contains(&bh) || !sp.contains(&(game.b_hat_mat() * root)) {
        return FirstBest::Unbounded;
    }
    FirstBest::Optimal { a0: &sp.pinv * game.b_hat(), r: &sp.pinv * game.b_hat_mat() }
}
