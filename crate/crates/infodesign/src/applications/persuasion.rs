//! First-order persuasion: players predict a scalar state, `uᵢ = −(aᵢ − ω)²`.
//! The designer either polarizes predictions, `v = Σᵢⱼ(aᵢ − aⱼ)²`, or trades off
//! co-movement of the average prediction with the state against miscoordination,
//! `v = (1/N)Σᵢaᵢω − (ρ/N²)Σ_{i≠j}aᵢaⱼ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{coordinated_noise_covariance, ones};
use crate::error::{Error, Result};
use crate::game::{LinearContract, LinearGaussianStructure, QuadraticGame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PersuasionMode {
    Polarization,
    /// `ratio = Some((p, q))` declares `ρ = p/q` exactly.
    CoMovement { rho: f64, ratio: Option<(u64, u64)> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersuasionParams {
    pub n_players: usize,
    pub omega_bar: f64,
    pub sigma2: f64,
    pub mode: PersuasionMode,
}

impl PersuasionParams {
    pub fn polarization(n: usize, omega_bar: f64, sigma2: f64) -> Self {
        PersuasionParams { n_players: n, omega_bar, sigma2, mode: PersuasionMode::Polarization }
    }

    pub fn comovement(n: usize, sigma2: f64, rho: f64) -> Self {
        PersuasionParams { n_players: n, omega_bar: 0.0, sigma2, mode: PersuasionMode::CoMovement { rho, ratio: None } }
    }

    /// Co-movement with `ρ = p/q` given exactly.
    pub fn comovement_ratio(n: usize, sigma2: f64, p: u64, q: u64) -> Self {
        PersuasionParams {
            n_players: n,
            omega_bar: 0.0,
            sigma2,
            mode: PersuasionMode::CoMovement { rho: p as f64 / q as f64, ratio: Some((p, q)) },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_players < 2 {
            return Err(Error::InvalidParams("need at least two players".into()));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() || !self.omega_bar.is_finite() {
            return Err(Error::InvalidParams("sigma2 must be positive and finite".into()));
        }
        if let PersuasionMode::CoMovement { rho, ratio } = self.mode {
            if !(rho >= 0.0) || !rho.is_finite() {
                return Err(Error::InvalidParams("rho must be nonnegative".into()));
            }
            if let Some((p, q)) = ratio {
                if q == 0 || (p as f64 / q as f64 - rho).abs() > 1e-12 * (1.0 + rho) {
                    return Err(Error::InvalidParams("rho ratio inconsistent".into()));
                }
            }
            if self.omega_bar != 0.0 {
                return Err(Error::InvalidParams("co-movement requires a zero state mean".into()));
            }
        }
        Ok(())
    }
}

/// `ρ` at and below which full information is optimal under co-movement.
pub fn comovement_threshold(n: usize) -> f64 {
    n as f64 / (2.0 * n as f64 - 1.0)
}

fn players(p: &PersuasionParams) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = p.n_players;
    (
        DVector::from_element(n, 2.0 * p.omega_bar),
        DMatrix::from_element(n, 1, 2.0),
        DMatrix::identity(n, n) * 2.0,
    )
}

pub fn polarization_game(p: &PersuasionParams) -> Result<QuadraticGame> {
    p.validate()?;
    let n = p.n_players;
    let (b, bm, c) = players(p);
    let c_hat = (DMatrix::identity(n, n) * n as f64 - ones(n)) * -4.0;
    QuadraticGame::new(b, bm, c, DVector::zeros(n), DMatrix::zeros(n, 1), c_hat, DMatrix::from_element(1, 1, p.sigma2))
}

pub fn comovement_game(p: &PersuasionParams) -> Result<QuadraticGame> {
    p.validate()?;
    let rho = match p.mode {
        PersuasionMode::CoMovement { rho, .. } => rho,
        PersuasionMode::Polarization => return Err(Error::InvalidParams("not a co-movement parameter set".into())),
    };
    let n = p.n_players;
    let nf = n as f64;
    let (b, bm, c) = players(p);
    let c_hat = (ones(n) - DMatrix::identity(n, n)) * (2.0 * rho / (nf * nf));
    QuadraticGame::new(
        b,
        bm,
        c,
        DVector::zeros(n),
        DMatrix::from_element(n, 1, 1.0 / nf),
        c_hat,
        DMatrix::from_element(1, 1, p.sigma2),
    )
}

pub fn persuasion_game(p: &PersuasionParams) -> Result<QuadraticGame> {
    match p.mode {
        PersuasionMode::Polarization => polarization_game(p),
        PersuasionMode::CoMovement { .. } => comovement_game(p),
    }
}

/// Number of fully informed players in the selective-informing structure.
pub fn informed_count(p: &PersuasionParams) -> Result<usize> {
    p.validate()?;
    let n = p.n_players;
    match p.mode {
        PersuasionMode::Polarization => {
            if n % 2 == 0 {
                Ok(n / 2)
            } else {
                Err(Error::Inadmissible(format!("polarization needs an even number of players, got {n}")))
            }
        }
        PersuasionMode::CoMovement { rho, ratio } => {
            if rho < comovement_threshold(n) {
                return Err(Error::Inadmissible(format!("rho = {rho} is below N/(2N-1); full information is optimal")));
            }
            // N* = N/(2ρ) + 1/2
            if let Some((pp, q)) = ratio {
                let num = n as u128 * q as u128 + pp as u128;
                let den = 2 * pp as u128;
                if pp > 0 && num % den == 0 {
                    return Ok((num / den) as usize);
                }
                return Err(Error::Inadmissible(format!("N* = ({num})/({den}) is not an integer")));
            }
            let ns = n as f64 / (2.0 * rho) + 0.5;
            let r = ns.round();
            if (ns - r).abs() <= 1e-9 && r >= 1.0 {
                Ok(r as usize)
            } else {
                Err(Error::Inadmissible(format!("N* = {ns} is not an integer")))
            }
        }
    }
}

/// Inform the first `n_informed` players fully (`aᵢ = ω`), leave the rest at the prior mean.
pub fn selective_informing(p: &PersuasionParams, n_informed: usize) -> Result<LinearGaussianStructure> {
    let expected = informed_count(p)?;
    if n_informed != expected {
        return Err(Error::Inadmissible(format!("expected {expected} informed players, got {n_informed}")));
    }
    let n = p.n_players;
    let r = DMatrix::from_fn(n, 1, |i, _| if i < n_informed { 1.0 } else { 0.0 });
    LinearGaussianStructure::deterministic(DVector::from_element(n, p.omega_bar), r)
}

/// Variance of each i.i.d. `εᵢ` in the coordinated-Gaussian structure.
pub fn noise_variance(p: &PersuasionParams) -> f64 {
    let n = p.n_players as f64;
    match p.mode {
        PersuasionMode::Polarization => (n - 1.0) / (4.0 * n) * p.sigma2,
        PersuasionMode::CoMovement { rho, .. } => {
            (n - 1.0) * (n + rho) * ((2.0 * n - 1.0) * rho - n) * p.sigma2 / (4.0 * rho * rho * n.powi(3))
        }
    }
}

/// Symmetric structure with negatively correlated noises whose loadings sum to zero.
pub fn coordinated_gaussian(p: &PersuasionParams) -> Result<LinearGaussianStructure> {
    p.validate()?;
    let n = p.n_players;
    let nf = n as f64;
    let slope = match p.mode {
        PersuasionMode::Polarization => 0.5,
        PersuasionMode::CoMovement { rho, .. } => {
            if rho < comovement_threshold(n) {
                return Err(Error::Inadmissible(format!("rho = {rho} is below N/(2N-1); full information is optimal")));
            }
            1.0 / (2.0 * rho) + 1.0 / (2.0 * nf)
        }
    };
    let var = noise_variance(p).max(0.0);
    LinearGaussianStructure::new(
        DVector::from_element(n, p.omega_bar),
        DMatrix::from_element(n, 1, slope),
        coordinated_noise_covariance(n, var),
    )
}

/// Linear contract certifying the aggregate-action condition.
pub fn persuasion_contract(p: &PersuasionParams) -> LinearContract {
    let n = p.n_players;
    let nf = n as f64;
    match p.mode {
        PersuasionMode::Polarization => {
            LinearContract { x0: DVector::from_element(n, -nf * p.omega_bar), x: DVector::from_element(n, nf) }
        }
        PersuasionMode::CoMovement { rho, .. } => {
            LinearContract { x0: DVector::zeros(n), x: DVector::from_element(n, rho / (2.0 * nf * nf)) }
        }
    }
}

/// Full information with the contract that certifies it when `ρ ≤ N/(2N−1)`.
pub fn comovement_full_information(p: &PersuasionParams) -> Result<(LinearGaussianStructure, LinearContract)> {
    let game = comovement_game(p)?;
    let rho = match p.mode {
        PersuasionMode::CoMovement { rho, .. } => rho,
        PersuasionMode::Polarization => unreachable!(),
    };
    let n = p.n_players;
    let nf = n as f64;
    if rho > comovement_threshold(n) * (1.0 + 1e-12) {
        return Err(Error::Inadmissible(format!("rho = {rho} exceeds N/(2N-1); full information is not optimal")));
    }
    let s = crate::benchmarks::full_info_equilibrium(&game)?;
    let x = 1.0 / (2.0 * nf) - rho * (nf - 1.0) / (nf * nf);
    Ok((s, LinearContract { x0: DVector::zeros(n), x: DVector::from_element(n, x) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarization_designer_matrix() {
        let g = polarization_game(&PersuasionParams::polarization(2, 0.0, 1.0)).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[-4.0, 4.0, 4.0, -4.0]);
        assert!((g.c_hat() - expect).amax() < 1e-15);
        let a = DVector::from_vec(vec![1.0, -1.0]);
        assert_eq!(g.designer_payoff(&a, &DVector::zeros(1)).unwrap(), 8.0);
    }

    #[test]
    fn admissibility() {
        assert!(matches!(informed_count(&PersuasionParams::polarization(3, 0.0, 1.0)), Err(Error::Inadmissible(_))));
        assert_eq!(informed_count(&PersuasionParams::polarization(4, 0.0, 1.0)).unwrap(), 2);
        // N = 3, ρ = 3/5 = N/(2N−1): N* = 3
        assert_eq!(informed_count(&PersuasionParams::comovement_ratio(3, 1.0, 3, 5)).unwrap(), 3);
        // N = 3, ρ = 1: N* = 2
        assert_eq!(informed_count(&PersuasionParams::comovement_ratio(3, 1.0, 1, 1)).unwrap(), 2);
        assert!(informed_count(&PersuasionParams::comovement_ratio(3, 1.0, 2, 1)).is_err());
        assert_eq!(informed_count(&PersuasionParams::comovement(5, 1.0, 5.0 / 3.0)).unwrap(), 2);
    }

    #[test]
    fn noise_vanishes_at_threshold() {
        let p = PersuasionParams::comovement(4, 1.0, comovement_threshold(4));
        assert!(noise_variance(&p).abs() < 1e-15);
    }

    #[test]
    fn comovement_rejects_nonzero_mean() {
        let mut p = PersuasionParams::comovement(3, 1.0, 2.0);
        p.omega_bar = 1.0;
        assert!(comovement_game(&p).is_err());
    }
}
