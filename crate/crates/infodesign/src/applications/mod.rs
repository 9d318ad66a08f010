//! Application builders: differentiated Bertrand duopoly, first-order persuasion,
//! investment with congestion, and the multidimensional co-movement perturbation.

pub mod bertrand;
pub mod investment;
pub mod perturbation;
pub mod persuasion;

use nalgebra::DMatrix;

/// Noise loadings `ε ↦ εᵢ − (1/(N−1))Σ_{j≠i}εⱼ`; rows sum to zero.
pub fn coordinated_noise_loadings(n: usize) -> DMatrix<f64> {
    if n < 2 {
        return DMatrix::zeros(n, n);
    }
    let m = (n - 1) as f64;
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { -1.0 / m })
}

/// `Ξ = σ²_ε L Lᵀ` for i.i.d. `ε` with variance `var`.
pub fn coordinated_noise_covariance(n: usize, var: f64) -> DMatrix<f64> {
    let l = coordinated_noise_loadings(n);
    &l * l.transpose() * var
}

pub(crate) fn ones(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(n, n, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loadings_rows_sum_to_zero() {
        for n in 2..7 {
            let l = coordinated_noise_loadings(n);
            for i in 0..n {
                assert!(l.row(i).sum().abs() < 1e-15);
            }
            let xi = coordinated_noise_covariance(n, 1.0);
            assert!((xi[(0, 0)] - n as f64 / (n - 1) as f64).abs() < 1e-14);
        }
    }
}
