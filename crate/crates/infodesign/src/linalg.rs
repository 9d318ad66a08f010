//! Small dense helpers on top of nalgebra: symmetric spectra, scale-relative
//! definiteness tests, range-restricted pseudo-inverses and guarded solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue threshold for PD/PSD decisions.
pub const EIG_REL_TOL: f64 = 1e-10;
/// Condition number above which a linear system is treated as singular.
pub const COND_LIMIT: f64 = 1e12;
/// Relative tolerance for "lies in the range of Q".
pub const RANGE_REL_TOL: f64 = 1e-8;

pub fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn norm(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

pub fn diag(x: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(x)
}

/// Smallest eigenvalue of the symmetric part.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(sym(m)).eigenvalues.min()
}

pub fn is_pd(m: &DMatrix<f64>) -> bool {
    min_eigenvalue(m) > EIG_REL_TOL * norm(m)
}

pub fn is_psd(m: &DMatrix<f64>) -> bool {
    min_eigenvalue(m) >= -EIG_REL_TOL * norm(m)
}

pub fn is_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Spectral data of a symmetric matrix split into range and kernel.
#[derive(Debug, Clone)]
pub struct SymSpectrum {
    pub min_eig: f64,
    pub scale: f64,
    /// Pseudo-inverse restricted to the range (kernel eigenvalues dropped).
    pub pinv: DMatrix<f64>,
    /// Orthonormal basis of the numerical kernel, one column per direction.
    pub kernel: DMatrix<f64>,
}

impl SymSpectrum {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let s = sym(m);
        let n = s.nrows();
        let scale = norm(&s);
        let eig = SymmetricEigen::new(s);
        let tol = EIG_REL_TOL * scale;
        let mut pinv = DMatrix::zeros(n, n);
        let mut kernel_cols = Vec::new();
        for k in 0..n {
            let lam = eig.eigenvalues[k];
            let v = eig.eigenvectors.column(k);
            if lam.abs() <= tol {
                kernel_cols.push(v.into_owned());
            } else {
                pinv += (v * v.transpose()) / lam;
            }
        }
        let kernel = if kernel_cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&kernel_cols)
        };
        let min_eig = if n == 0 { f64::INFINITY } else { eig.eigenvalues.min() };
        SymSpectrum { min_eig, scale, pinv, kernel }
    }

    pub fn is_psd(&self) -> bool {
        self.min_eig >= -EIG_REL_TOL * self.scale
    }

    pub fn is_pd(&self) -> bool {
        self.min_eig > EIG_REL_TOL * self.scale
    }

    /// True when every column of `v` is orthogonal to the kernel up to a relative tolerance.
    pub fn contains(&self, v: &DMatrix<f64>) -> bool {
        if self.kernel.ncols() == 0 {
            return true;
        }
        let leak = self.kernel.transpose() * v;
        leak.norm() <= RANGE_REL_TOL * v.norm()
    }
}

/// Factor `L` with `L Lᵀ = M` for a PSD matrix, clamping tiny negative eigenvalues.
pub fn psd_sqrt(m: &DMatrix<f64>, name: &'static str) -> Result<DMatrix<f64>> {
    let s = sym(m);
    let n = s.nrows();
    let tol = EIG_REL_TOL * norm(&s);
    let eig = SymmetricEigen::new(s);
    let mut l = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam < -tol {
            return Err(Error::NotPositiveSemidefinite(name));
        }
        let r = lam.max(0.0).sqrt();
        l.set_column(k, &(eig.eigenvectors.column(k) * r));
    }
    Ok(l)
}

pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Solve `A X = rhs`, refusing numerically singular `A`.
pub fn solve_checked(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cond = condition_number(a);
    if !(cond <= COND_LIMIT) {
        return Err(Error::SingularSystem { cond });
    }
    a.clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::SingularSystem { cond: f64::INFINITY })
}

pub fn solve_vec_checked(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let m = solve_checked(a, &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
    Ok(m.column(0).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_of_all_ones() {
        let j = DMatrix::from_element(3, 3, 1.0);
        let sp = SymSpectrum::new(&j);
        assert_eq!(sp.kernel.ncols(), 2);
        assert!(sp.is_psd() && !sp.is_pd());
        let ones = DMatrix::from_element(3, 1, 1.0);
        assert!(sp.contains(&ones));
        let e1 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert!(!sp.contains(&e1));
        let back = &j * &sp.pinv * &ones;
        assert!((back - ones).norm() < 1e-12);
    }

    #[test]
    fn sqrt_of_rank_deficient() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let l = psd_sqrt(&m, "m").unwrap();
        assert!((&l * l.transpose() - &m).norm() < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(psd_sqrt(&bad, "bad").is_err());
    }

    #[test]
    fn singular_solve_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let r = DMatrix::identity(2, 2);
        assert!(matches!(solve_checked(&a, &r), Err(Error::SingularSystem { .. })));
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let x = solve_checked(&a, &r).unwrap();
        assert!((&a * x - r).norm() < 1e-14);
    }

    #[test]
    fn definiteness_thresholds() {
        assert!(is_pd(&DMatrix::identity(2, 2)));
        assert!(!is_pd(&DMatrix::zeros(2, 2)));
        assert!(is_psd(&DMatrix::zeros(2, 2)));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-13]);
        assert!(is_psd(&m) && !is_pd(&m));
    }
}
