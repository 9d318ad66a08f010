//! Search for multipliers `x` satisfying condition (i) with a positive-definite
//! dual quadratic form.
//!
//! Two-player games that are invariant under swapping the players take an exact
//! path: on the diagonal `x = (t, t)` the residual times `det Q(t)²` is a quartic in
//! `t`. Everything else uses damped Newton from a grid of starts.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::certification::{certificate_residual, dual_quadratic};
use crate::error::{Error, Result};
use crate::game::QuadraticGame;
use crate::linalg;
use crate::poly::Poly;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Integer starts range over `{−grid_radius, …, grid_radius}`.
    pub grid_radius: i32,
    /// Additional fractional starts, used on the diagonal.
    pub fractional_starts: Vec<f64>,
    /// Margins within `boundary_tol·‖Q‖` of zero count as boundary roots.
    pub boundary_tol: f64,
    /// Use the exact diagonal quartic for swap-symmetric two-player games.
    pub exact_symmetric_path: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 50,
            grid_radius: 10,
            fractional_starts: vec![-0.5, -0.25, -0.1, -0.05, -0.01, 0.01, 0.05, 0.1, 0.25, 0.5],
            boundary_tol: 1e-7,
            exact_symmetric_path: true,
        }
    }
}

fn swap(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 })
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm())
}

/// Two players whose payoffs are unchanged by exchanging them (and, for `K = 2`,
/// possibly the state components as well).
pub fn is_swap_symmetric(game: &QuadraticGame) -> bool {
    if game.n_players() != 2 {
        return false;
    }
    let p = swap(2);
    let k = game.state_dim();
    let col = |v: &DVector<f64>| DMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let players = close(&(&p * col(game.b())), &col(game.b()))
        && close(&(&p * game.c_mat() * &p), game.c_mat())
        && close(&(&p * col(game.b_hat())), &col(game.b_hat()))
        && close(&(&p * game.c_hat() * &p), game.c_hat());
    if !players {
        return false;
    }
    let mut state_perms = vec![DMatrix::identity(k, k)];
    if k == 2 {
        state_perms.push(swap(2));
    }
    state_perms.iter().any(|pk| {
        close(&(&p * game.b_mat() * pk), game.b_mat())
            && close(&(&p * game.b_hat_mat() * pk), game.b_hat_mat())
            && close(&(pk * game.sigma() * pk), game.sigma())
    })
}

/// Numerator of player 1's condition-(i) residual on the diagonal `x = (t, t)`:
/// `g₁(t,t)·det Q(t)²`, a polynomial of degree at most four.
pub fn diagonal_residual_polynomial(game: &QuadraticGame) -> Result<Poly> {
    if game.n_players() != 2 {
        return Err(Error::Dimension("diagonal polynomial needs two players".into()));
    }
    let ch = game.c_hat();
    let c = game.c_mat();
    let cs = c + c.transpose();
    let q = |i: usize, j: usize| Poly::linear(ch[(i, j)], cs[(i, j)]);
    let det = q(0, 0).mul(&q(1, 1)).sub(&q(0, 1).mul(&q(1, 0)));
    let adj = [[q(1, 1), q(0, 1).scale(-1.0)], [q(1, 0).scale(-1.0), q(0, 0)]];
    let k = game.state_dim();
    let (bh, b) = (game.b_hat_mat(), game.b_mat());
    // Rn = adj(Q)·(B̂ + tB), entrywise polynomials.
    let m = |i: usize, s: usize| Poly::linear(bh[(i, s)], b[(i, s)]);
    let rn: Vec<Vec<Poly>> = (0..2)
        .map(|i| (0..k).map(|s| adj[i][0].mul(&m(0, s)).add(&adj[i][1].mul(&m(1, s)))).collect())
        .collect();
    // (C₁·Rn − det·B₁) Σ Rn₁ᵀ
    let lhs: Vec<Poly> = (0..k)
        .map(|s| {
            Poly::constant(c[(0, 0)])
                .mul(&rn[0][s])
                .add(&Poly::constant(c[(0, 1)]).mul(&rn[1][s]))
                .sub(&det.scale(b[(0, s)]))
        })
        .collect();
    let sig = game.sigma();
    let mut out = Poly::constant(0.0);
    for s in 0..k {
        for u in 0..k {
            out = out.add(&lhs[s].mul(&rn[0][u]).scale(sig[(s, u)]));
        }
    }
    Ok(Poly(out.padded(5)))
}

enum Candidate {
    Interior(DVector<f64>),
    Boundary(DVector<f64>),
    Rejected,
}

fn classify(game: &QuadraticGame, x: &DVector<f64>, tol: f64) -> Candidate {
    let q = dual_quadratic(game, x);
    let margin = linalg::min_eigenvalue(&q);
    let band = tol * q.norm();
    if margin > band {
        Candidate::Interior(x.clone())
    } else if margin >= -band {
        Candidate::Boundary(x.clone())
    } else {
        Candidate::Rejected
    }
}

fn residual_tol(game: &QuadraticGame) -> f64 {
    1e-11 * (1.0 + game.b_mat().norm().powi(2) * game.sigma().norm())
}

fn lex_sort(v: &mut Vec<DVector<f64>>) {
    v.sort_by(|a, b| {
        a.iter().zip(b.iter()).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    v.dedup_by(|a, b| (&*a - &*b).amax() <= 1e-7 * (1.0 + b.amax()));
}

fn finish(game: &QuadraticGame, cands: Vec<DVector<f64>>, best_residual: f64, tol: f64) -> Result<Vec<DVector<f64>>> {
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for x in cands {
        match classify(game, &x, tol) {
            Candidate::Interior(x) => interior.push(x),
            Candidate::Boundary(x) => boundary.push(x),
            Candidate::Rejected => {}
        }
    }
    lex_sort(&mut interior);
    lex_sort(&mut boundary);
    if !interior.is_empty() {
        Ok(interior)
    } else if !boundary.is_empty() {
        Err(Error::CriticalPoint { roots: boundary.iter().map(|x| x.iter().copied().collect()).collect() })
    } else {
        Err(Error::NotFound { best_residual })
    }
}

fn exact_symmetric(game: &QuadraticGame, opts: &SolverOptions) -> Result<Vec<DVector<f64>>> {
    let p = diagonal_residual_polynomial(game)?;
    let mut cands = Vec::new();
    let mut best = f64::INFINITY;
    for t in p.real_roots() {
        let x = DVector::from_element(2, t);
        // Roots where Q(t) is singular are artifacts of clearing the denominator,
        // unless they sit on the PD boundary, which `finish` reports separately.
        match certificate_residual(game, &x) {
            Ok(g) => {
                best = best.min(g.norm());
                cands.push(x);
            }
            Err(Error::SingularSystem { .. }) => {
                if linalg::min_eigenvalue(&dual_quadratic(game, &x)).abs() <= opts.boundary_tol * dual_quadratic(game, &x).norm() {
                    cands.push(x);
                }
            }
            Err(e) => return Err(e),
        }
    }
    finish(game, cands, best, opts.boundary_tol)
}

fn residual_norm(game: &QuadraticGame, x: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let g = certificate_residual(game, x).ok()?;
    let n = g.norm();
    n.is_finite().then_some((g, n))
}

fn jacobian(game: &QuadraticGame, x: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    // Shrink the step near the PD boundary, where R(x) bends sharply.
    let q = dual_quadratic(game, x);
    let shrink = (10.0 * linalg::min_eigenvalue(&q).abs() / q.norm().max(f64::MIN_POSITIVE)).clamp(1e-4, 1.0);
    for c in 0..n {
        let h = 1e-6 * shrink * (1.0 + x[c].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[c] += h;
        xm[c] -= h;
        let gp = certificate_residual(game, &xp).ok()?;
        let gm = certificate_residual(game, &xm).ok()?;
        j.set_column(c, &((gp - gm) / (2.0 * h)));
    }
    Some(j)
}

/// Newton stalls next to a root lying on the PD boundary, because R(x) is not
/// smooth there. Stalled points with a small residual are projected onto the
/// boundary along the gradient of the smallest eigenvalue of Q.
fn boundary_landing(game: &QuadraticGame, x: &DVector<f64>, gn: f64, opts: &SolverOptions) -> Option<DVector<f64>> {
    let qn = dual_quadratic(game, x).norm();
    if gn > 1e-4 * (1.0 + qn) {
        return None;
    }
    let c = game.c_mat();
    let mut y = x.clone();
    for _ in 0..20 {
        let eig = linalg::sym(&dual_quadratic(game, &y)).symmetric_eigen();
        let k = eig.eigenvalues.imin();
        let lam = eig.eigenvalues[k];
        if lam.abs() <= 1e-15 * qn {
            break;
        }
        let v = eig.eigenvectors.column(k);
        let cv = c * v;
        let grad = DVector::from_fn(y.len(), |i, _| 2.0 * v[i] * cv[i]);
        let gg = grad.norm_squared();
        if gg == 0.0 {
            return None;
        }
        y -= grad * (lam / gg);
    }
    ((&y - x).amax() <= 1e-4 * (1.0 + x.amax()) && matches!(classify(game, &y, opts.boundary_tol), Candidate::Boundary(_)))
        .then_some(y)
}

/// Damped Newton from `start`; returns the end point and its residual norm.
fn newton(game: &QuadraticGame, start: DVector<f64>, opts: &SolverOptions, tol: f64) -> Option<(DVector<f64>, f64, bool)> {
    let mut x = start;
    let (mut g, mut gn) = residual_norm(game, &x)?;
    for _ in 0..opts.max_iter {
        if gn <= tol {
            return Some((x, gn, true));
        }
        let j = jacobian(game, &x)?;
        let dx = match j.clone().lu().solve(&(-&g)) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => j.svd(true, true).solve(&(-&g), 1e-14).ok()?,
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let xn = &x + &dx * step;
            if let Some((gn2, nn)) = residual_norm(game, &xn) {
                if nn < gn {
                    x = xn;
                    g = gn2;
                    gn = nn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return boundary_landing(game, &x, gn, opts).map(|t| (t, 0.0, true)).or(Some((x, gn, false)));
        }
    }
    if gn <= tol {
        return Some((x, gn, true));
    }
    boundary_landing(game, &x, gn, opts).map(|t| (t, 0.0, true)).or(Some((x, gn, false)))
}

fn starts(n: usize, opts: &SolverOptions) -> Vec<DVector<f64>> {
    let r = opts.grid_radius;
    let mut out = Vec::new();
    if n <= 2 {
        let ints: Vec<f64> = (-r..=r).map(f64::from).collect();
        if n == 1 {
            out.extend(ints.iter().map(|&t| DVector::from_element(1, t)));
        } else {
            for &a in &ints {
                for &b in &ints {
                    out.push(DVector::from_vec(vec![a, b]));
                }
            }
        }
    } else {
        out.extend((-r..=r).map(|t| DVector::from_element(n, f64::from(t))));
    }
    out.extend(opts.fractional_starts.iter().map(|&t| DVector::from_element(n, t)));
    out
}

/// All positive-definite certificates found, sorted lexicographically.
pub fn solve_certificate(game: &QuadraticGame, opts: &SolverOptions) -> Result<Vec<DVector<f64>>> {
    if opts.exact_symmetric_path && is_swap_symmetric(game) {
        return exact_symmetric(game, opts);
    }
    let tol = residual_tol(game);
    let results: Vec<Option<(DVector<f64>, f64, bool)>> =
        starts(game.n_players(), opts).into_par_iter().map(|s| newton(game, s, opts, tol)).collect();
    let mut best = f64::INFINITY;
    let mut cands = Vec::new();
    for (x, gn, ok) in results.into_iter().flatten() {
        best = best.min(gn);
        if ok {
            cands.push(x);
        }
    }
    finish(game, cands, best, opts.boundary_tol)
}
