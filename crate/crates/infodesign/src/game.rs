//! Problem instance and candidate-structure data model.
//!
//! Player i's marginal utility is `u̇ᵢ = bᵢ + Bᵢ·ω − Cᵢ·a`, the designer's payoff is
//! `v = aᵀ(b̂ + B̂ω) − ½ aᵀĈa`, and the state is `ω ~ N(0, Σ)`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, EIG_REL_TOL};

fn check_finite(m: &DMatrix<f64>, name: &'static str) -> Result<()> {
    if linalg::is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

fn check_finite_vec(v: &DVector<f64>, name: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

fn check_shape(m: &DMatrix<f64>, r: usize, c: usize, name: &str) -> Result<()> {
    if m.nrows() != r || m.ncols() != c {
        return Err(Error::Dimension(format!(
            "{name} is {}x{}, expected {r}x{c}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_len(v: &DVector<f64>, n: usize, name: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension(format!("{name} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

/// Symmetrize, warning when the input was visibly asymmetric.
fn symmetrized(m: DMatrix<f64>, name: &str) -> DMatrix<f64> {
    let asym = (&m - m.transpose()).norm() * 0.5;
    if asym > EIG_REL_TOL * m.norm() {
        warn!("{name} is asymmetric (|M - Mᵀ|/2 = {asym:.3e}); using (M + Mᵀ)/2");
    }
    linalg::sym(&m)
}

/// Quadratic payoffs with a centered Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGame {
    n: usize,
    k: usize,
    b: DVector<f64>,
    b_mat: DMatrix<f64>,
    c_mat: DMatrix<f64>,
    b_hat: DVector<f64>,
    b_hat_mat: DMatrix<f64>,
    c_hat: DMatrix<f64>,
    sigma: DMatrix<f64>,
}

impl QuadraticGame {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        b: DVector<f64>,
        b_mat: DMatrix<f64>,
        c_mat: DMatrix<f64>,
        b_hat: DVector<f64>,
        b_hat_mat: DMatrix<f64>,
        c_hat: DMatrix<f64>,
        sigma: DMatrix<f64>,
    ) -> Result<Self> {
        let n = b.len();
        let k = sigma.nrows();
        if n == 0 || k == 0 {
            return Err(Error::Dimension("need at least one player and one state component".into()));
        }
        check_shape(&b_mat, n, k, "B")?;
        check_shape(&c_mat, n, n, "C")?;
        check_len(&b_hat, n, "b_hat")?;
        check_shape(&b_hat_mat, n, k, "B_hat")?;
        check_shape(&c_hat, n, n, "C_hat")?;
        check_shape(&sigma, k, k, "sigma")?;
        check_finite_vec(&b, "b")?;
        check_finite(&b_mat, "B")?;
        check_finite(&c_mat, "C")?;
        check_finite_vec(&b_hat, "b_hat")?;
        check_finite(&b_hat_mat, "B_hat")?;
        check_finite(&c_hat, "C_hat")?;
        check_finite(&sigma, "sigma")?;
        if !linalg::is_pd(&c_mat) {
            return Err(Error::NotPositiveDefinite("C"));
        }
        let c_hat = symmetrized(c_hat, "C_hat");
        let sigma = symmetrized(sigma, "sigma");
        if !linalg::is_psd(&sigma) {
            return Err(Error::NotPositiveSemidefinite("sigma"));
        }
        Ok(QuadraticGame { n, k, b, b_mat, c_mat, b_hat, b_hat_mat, c_hat, sigma })
    }

    pub fn n_players(&self) -> usize {
        self.n
    }
    pub fn state_dim(&self) -> usize {
        self.k
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn b_mat(&self) -> &DMatrix<f64> {
        &self.b_mat
    }
    pub fn c_mat(&self) -> &DMatrix<f64> {
        &self.c_mat
    }
    pub fn b_hat(&self) -> &DVector<f64> {
        &self.b_hat
    }
    pub fn b_hat_mat(&self) -> &DMatrix<f64> {
        &self.b_hat_mat
    }
    pub fn c_hat(&self) -> &DMatrix<f64> {
        &self.c_hat
    }
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Same designer, players' (b, B, C) multiplied by `k > 0`.
    pub fn scale_players(&self, k: f64) -> Result<Self> {
        QuadraticGame::new(
            &self.b * k,
            &self.b_mat * k,
            &self.c_mat * k,
            self.b_hat.clone(),
            self.b_hat_mat.clone(),
            self.c_hat.clone(),
            self.sigma.clone(),
        )
    }

    /// Same players, different state covariance.
    pub fn with_sigma(&self, sigma: DMatrix<f64>) -> Result<Self> {
        QuadraticGame::new(
            self.b.clone(),
            self.b_mat.clone(),
            self.c_mat.clone(),
            self.b_hat.clone(),
            self.b_hat_mat.clone(),
            self.c_hat.clone(),
            sigma,
        )
    }

    fn check_action(&self, a: &DVector<f64>, omega: &DVector<f64>) -> Result<()> {
        check_len(a, self.n, "action")?;
        check_len(omega, self.k, "state")
    }

    pub fn check_structure(&self, s: &LinearGaussianStructure) -> Result<()> {
        check_len(&s.a0, self.n, "a0")?;
        check_shape(&s.r, self.n, self.k, "R")?;
        check_shape(&s.xi, self.n, self.n, "xi")
    }

    pub fn check_contract(&self, c: &LinearContract) -> Result<()> {
        check_len(&c.x0, self.n, "x0")?;
        check_len(&c.x, self.n, "x")
    }

    /// `u̇ᵢ = bᵢ + Bᵢ·ω − Cᵢ·a`.
    pub fn marginal_utility(&self, a: &DVector<f64>, omega: &DVector<f64>, i: usize) -> Result<f64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        self.check_action(a, omega)?;
        Ok(self.b[i] + self.b_mat.row(i).dot(&omega.transpose()) - self.c_mat.row(i).dot(&a.transpose()))
    }

    /// All marginal utilities at once.
    pub fn marginal_utilities(&self, a: &DVector<f64>, omega: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_action(a, omega)?;
        Ok(&self.b + &self.b_mat * omega - &self.c_mat * a)
    }

    /// `uᵢ = aᵢ(bᵢ + Bᵢω) − ½Cᵢᵢaᵢ² − aᵢ Σ_{j≠i} Cᵢⱼaⱼ`, whose derivative in `aᵢ` is `u̇ᵢ`.
    pub fn player_payoff(&self, a: &DVector<f64>, omega: &DVector<f64>, i: usize) -> Result<f64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        self.check_action(a, omega)?;
        let ai = a[i];
        let mut cross = 0.0;
        for j in 0..self.n {
            if j != i {
                cross += self.c_mat[(i, j)] * a[j];
            }
        }
        let base = self.b[i] + self.b_mat.row(i).dot(&omega.transpose());
        Ok(ai * base - 0.5 * self.c_mat[(i, i)] * ai * ai - ai * cross)
    }

    /// `v = aᵀ(b̂ + B̂ω) − ½ aᵀĈa`.
    pub fn designer_payoff(&self, a: &DVector<f64>, omega: &DVector<f64>) -> Result<f64> {
        self.check_action(a, omega)?;
        let lin = &self.b_hat + &self.b_hat_mat * omega;
        Ok(a.dot(&lin) - 0.5 * a.dot(&(&self.c_hat * a)))
    }

    /// Exact `E[v]` under the Gaussian law induced by `s`.
    pub fn expected_designer_value(&self, s: &LinearGaussianStructure) -> Result<f64> {
        self.check_structure(s)?;
        let a0 = &s.a0;
        let cross = (&self.b_hat_mat * &self.sigma * s.r.transpose()).trace();
        let second = s.action_covariance(&self.sigma);
        Ok(self.b_hat.dot(a0) + cross - 0.5 * (a0.dot(&(&self.c_hat * a0)) + (&self.c_hat * second).trace()))
    }
}

/// Direct recommendation `a = a₀ + Rω + ε` with `ε ~ N(0, Ξ)` independent of ω.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianStructure {
    pub a0: DVector<f64>,
    pub r: DMatrix<f64>,
    pub xi: DMatrix<f64>,
}

impl LinearGaussianStructure {
    pub fn new(a0: DVector<f64>, r: DMatrix<f64>, xi: DMatrix<f64>) -> Result<Self> {
        let n = a0.len();
        check_shape(&xi, n, n, "xi")?;
        if r.nrows() != n {
            return Err(Error::Dimension(format!("R has {} rows, expected {n}", r.nrows())));
        }
        check_finite_vec(&a0, "a0")?;
        check_finite(&r, "R")?;
        check_finite(&xi, "xi")?;
        let xi = symmetrized(xi, "xi");
        if !linalg::is_psd(&xi) {
            return Err(Error::NotPositiveSemidefinite("xi"));
        }
        Ok(LinearGaussianStructure { a0, r, xi })
    }

    /// Noise-free structure.
    pub fn deterministic(a0: DVector<f64>, r: DMatrix<f64>) -> Result<Self> {
        let n = a0.len();
        Self::new(a0, r, DMatrix::zeros(n, n))
    }

    pub fn n_players(&self) -> usize {
        self.a0.len()
    }

    pub fn state_dim(&self) -> usize {
        self.r.ncols()
    }

    /// `RΣRᵀ + Ξ`.
    pub fn action_covariance(&self, sigma: &DMatrix<f64>) -> DMatrix<f64> {
        &self.r * sigma * self.r.transpose() + &self.xi
    }

    /// `a₀ + Rω + noise`.
    pub fn recommended_action(&self, omega: &DVector<f64>, noise: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(omega, self.r.ncols(), "state")?;
        check_len(noise, self.a0.len(), "noise")?;
        Ok(&self.a0 + &self.r * omega + noise)
    }
}

/// Dual contract `λᵢ(aᵢ) = x0ᵢ + xᵢ aᵢ`, weighting the players' marginal utilities
/// so that the dual payoff is `v + Σᵢ λᵢ u̇ᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearContract {
    pub x0: DVector<f64>,
    pub x: DVector<f64>,
}

impl LinearContract {
    pub fn new(x0: DVector<f64>, x: DVector<f64>) -> Result<Self> {
        if x0.len() != x.len() {
            return Err(Error::Dimension("x0 and x lengths differ".into()));
        }
        check_finite_vec(&x0, "x0")?;
        check_finite_vec(&x, "x")?;
        Ok(LinearContract { x0, x })
    }

    pub fn null(n: usize) -> Self {
        LinearContract { x0: DVector::zeros(n), x: DVector::zeros(n) }
    }

    pub fn constant(x0: DVector<f64>) -> Self {
        let n = x0.len();
        LinearContract { x0, x: DVector::zeros(n) }
    }
}

// ---------------------------------------------------------------- JSON

/// Matrix in JSON: row-major flat array or nested rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixJson {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl MatrixJson {
    fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut out = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.push(m[(i, j)]);
            }
        }
        MatrixJson::Flat(out)
    }

    /// Rows are fixed by the caller; columns inferred when `cols` is `None`.
    fn into_matrix(self, rows: usize, cols: Option<usize>, name: &str) -> std::result::Result<DMatrix<f64>, String> {
        let flat: Vec<f64> = match self {
            MatrixJson::Flat(v) => v,
            MatrixJson::Nested(rs) => {
                if rs.len() != rows {
                    return Err(format!("{name}: {} rows, expected {rows}", rs.len()));
                }
                let w = rs.first().map_or(0, |r| r.len());
                if rs.iter().any(|r| r.len() != w) {
                    return Err(format!("{name}: ragged rows"));
                }
                rs.into_iter().flatten().collect()
            }
        };
        if rows == 0 {
            return Err(format!("{name}: zero rows"));
        }
        let cols = match cols {
            Some(c) => c,
            None => flat.len() / rows,
        };
        if flat.len() != rows * cols {
            return Err(format!("{name}: {} entries, expected {rows}x{cols}", flat.len()));
        }
        Ok(DMatrix::from_row_slice(rows, cols, &flat))
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GameJson {
    n_players: usize,
    state_dim: usize,
    b: Vec<f64>,
    B: MatrixJson,
    C: MatrixJson,
    b_hat: Vec<f64>,
    B_hat: MatrixJson,
    C_hat: MatrixJson,
    sigma: MatrixJson,
}

impl Serialize for QuadraticGame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GameJson {
            n_players: self.n,
            state_dim: self.k,
            b: self.b.iter().copied().collect(),
            B: MatrixJson::from_matrix(&self.b_mat),
            C: MatrixJson::from_matrix(&self.c_mat),
            b_hat: self.b_hat.iter().copied().collect(),
            B_hat: MatrixJson::from_matrix(&self.b_hat_mat),
            C_hat: MatrixJson::from_matrix(&self.c_hat),
            sigma: MatrixJson::from_matrix(&self.sigma),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadraticGame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let g = GameJson::deserialize(d)?;
        let (n, k) = (g.n_players, g.state_dim);
        if g.b.len() != n || g.b_hat.len() != n {
            return Err(D::Error::custom("b / b_hat length differs from n_players"));
        }
        let conv = |m: MatrixJson, r, c, name| m.into_matrix(r, Some(c), name).map_err(D::Error::custom);
        let game = QuadraticGame::new(
            DVector::from_vec(g.b),
            conv(g.B, n, k, "B")?,
            conv(g.C, n, n, "C")?,
            DVector::from_vec(g.b_hat),
            conv(g.B_hat, n, k, "B_hat")?,
            conv(g.C_hat, n, n, "C_hat")?,
            conv(g.sigma, k, k, "sigma")?,
        );
        game.map_err(D::Error::custom)
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize, Deserialize)]
struct StructureJson {
    a0: Vec<f64>,
    R: MatrixJson,
    xi: MatrixJson,
}

impl Serialize for LinearGaussianStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StructureJson {
            a0: self.a0.iter().copied().collect(),
            R: MatrixJson::from_matrix(&self.r),
            xi: MatrixJson::from_matrix(&self.xi),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearGaussianStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let s = StructureJson::deserialize(d)?;
        let n = s.a0.len();
        let r = s.R.into_matrix(n, None, "R").map_err(D::Error::custom)?;
        let xi = s.xi.into_matrix(n, Some(n), "xi").map_err(D::Error::custom)?;
        LinearGaussianStructure::new(DVector::from_vec(s.a0), r, xi).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ContractJson {
    x0: Vec<f64>,
    x: Vec<f64>,
}

impl Serialize for LinearContract {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ContractJson { x0: self.x0.iter().copied().collect(), x: self.x.iter().copied().collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearContract {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let c = ContractJson::deserialize(d)?;
        LinearContract::new(DVector::from_vec(c.x0), DVector::from_vec(c.x)).map_err(D::Error::custom)
    }
}
