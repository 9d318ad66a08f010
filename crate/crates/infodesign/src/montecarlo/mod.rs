//! Seeded simulation oracles for obedience, primal and dual values, and weak duality.
//!
//! Every sample is addressed by `(seed, stream, index)`; samples are grouped into
//! fixed blocks of [`BLOCK`] indices, accumulated serially inside a block and merged
//! pairwise across blocks in index order, so results do not depend on the number
//! of threads.

pub mod rng;
pub mod stats;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::certification::{dual_linear_terms, dual_quadratic, dual_value};
use crate::error::{Error, Result};
use crate::game::{LinearContract, LinearGaussianStructure, QuadraticGame};
use crate::linalg::{self, SymSpectrum};
use rng::NormalStream;
pub use stats::{Estimate, Welford};

pub const BLOCK: u64 = 4096;
/// Acceptance band in standard errors.
pub const SE_BAND: f64 = 4.0;
pub const MIN_SAMPLES: u64 = 1000;
const JOINT_STREAM: u64 = 0;
const CONTRACT_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub n_samples: u64,
    pub n_bins: usize,
}

impl McConfig {
    pub fn new(seed: u64, n_samples: u64) -> Self {
        McConfig { seed, n_samples, n_bins: 32 }
    }

    fn check(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::InvalidParams(format!("need at least {MIN_SAMPLES} samples for a verdict")));
        }
        if self.n_bins == 0 {
            return Err(Error::InvalidParams("n_bins must be positive".into()));
        }
        Ok(())
    }
}

/// Maps a standard normal vector `z = (z_ω, z_ε)` to `(ω, a)`.
#[derive(Debug, Clone)]
pub struct JointSampler {
    n: usize,
    k: usize,
    a0: Vec<f64>,
    r: DMatrix<f64>,
    l_sigma: DMatrix<f64>,
    l_xi: DMatrix<f64>,
}

impl JointSampler {
    pub fn new(game: &QuadraticGame, s: &LinearGaussianStructure) -> Result<Self> {
        game.check_structure(s)?;
        Ok(JointSampler {
            n: game.n_players(),
            k: game.state_dim(),
            a0: s.a0.iter().copied().collect(),
            r: s.r.clone(),
            l_sigma: linalg::psd_sqrt(game.sigma(), "sigma")?,
            l_xi: linalg::psd_sqrt(&s.xi, "xi")?,
        })
    }

    pub fn dim(&self) -> usize {
        self.k + self.n
    }

    pub fn map(&self, z: &[f64], omega: &mut [f64], a: &mut [f64]) {
        let (zw, ze) = z.split_at(self.k);
        for i in 0..self.k {
            omega[i] = (0..self.k).map(|j| self.l_sigma[(i, j)] * zw[j]).sum();
        }
        for i in 0..self.n {
            let mut v = self.a0[i];
            for j in 0..self.k {
                v += self.r[(i, j)] * omega[j];
            }
            for j in 0..self.n {
                v += self.l_xi[(i, j)] * ze[j];
            }
            a[i] = v;
        }
    }
}

/// Sequential `(ω, a)` draws of the joint law, starting at any index.
pub struct JointStream {
    sampler: JointSampler,
    normals: NormalStream,
    z: Vec<f64>,
}

impl Iterator for JointStream {
    type Item = (DVector<f64>, DVector<f64>);
    fn next(&mut self) -> Option<Self::Item> {
        self.normals.next_sample(&mut self.z);
        let mut w = DVector::zeros(self.sampler.k);
        let mut a = DVector::zeros(self.sampler.n);
        self.sampler.map(&self.z, w.as_mut_slice(), a.as_mut_slice());
        Some((w, a))
    }
}

pub fn sample_joint(game: &QuadraticGame, s: &LinearGaussianStructure, cfg: &McConfig, start: u64) -> Result<JointStream> {
    let sampler = JointSampler::new(game, s)?;
    let dim = sampler.dim();
    Ok(JointStream { normals: NormalStream::new(cfg.seed, JOINT_STREAM, dim, start), z: vec![0.0; dim], sampler })
}

/// Block-parallel accumulation of `n_stats` running moments.
pub fn accumulate<S, I, F>(cfg: &McConfig, stream: u64, dim: usize, n_stats: usize, init: I, f: F) -> Vec<Welford>
where
    I: Fn() -> S + Sync,
    F: Fn(&[f64], &mut S, &mut [Welford]) + Sync,
{
    let n = cfg.n_samples;
    let n_blocks = n.div_ceil(BLOCK);
    let blocks: Vec<Vec<Welford>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = n.min(start + BLOCK);
            let mut normals = NormalStream::new(cfg.seed, stream, dim, start);
            let mut z = vec![0.0; dim];
            let mut scratch = init();
            let mut acc = vec![Welford::default(); n_stats];
            for _ in start..end {
                normals.next_sample(&mut z);
                f(&z, &mut scratch, &mut acc);
            }
            acc
        })
        .collect();
    if blocks.is_empty() {
        return vec![Welford::default(); n_stats];
    }
    stats::tree_merge(blocks)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub std_error: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `|mean| ≤ 4·SE + floor`; `floor` absorbs floating-point round-off
    /// of statistics whose population value is identically zero.
    fn zero_mean(name: String, w: &Welford, floor: f64) -> Check {
        if w.n < 2 {
            return Check { name, statistic: w.mean, std_error: f64::INFINITY, threshold: f64::INFINITY, pass: true };
        }
        let se = w.std_error();
        let threshold = SE_BAND * se + floor;
        Check { name, statistic: w.mean, std_error: se, threshold, pass: w.mean.abs() <= threshold }
    }

    /// Passes when `|estimate − target| ≤ 4·SE + floor`.
    pub fn against(name: &str, est: &Estimate, target: f64, floor: f64) -> Check {
        let threshold = SE_BAND * est.std_error + floor;
        Check {
            name: name.to_string(),
            statistic: est.estimate - target,
            std_error: est.std_error,
            threshold,
            pass: (est.estimate - target).abs() <= threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerObedience {
    pub player: usize,
    pub moments: Vec<Check>,
    pub bins: Vec<Check>,
    pub moment_pass: bool,
    pub binned_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObedienceReport {
    pub players: Vec<PlayerObedience>,
    pub n_statistics: usize,
    pub note: String,
    pub pass: bool,
}

fn bonferroni_note(k: usize) -> String {
    format!("{k} statistics at 4 SE each; expected false alarms under the null about {:.1e}", k as f64 * 6.3e-5)
}

/// Quantile edges of `N(mean, var)`; a single bin for a degenerate marginal.
fn bin_edges(mean: f64, var: f64, n_bins: usize) -> Vec<f64> {
    if n_bins <= 1 || var <= 1e-14 * (1.0 + mean * mean) {
        return Vec::new();
    }
    let d = Normal::new(mean, var.sqrt()).expect("positive variance");
    (1..n_bins).map(|k| d.inverse_cdf(k as f64 / n_bins as f64)).collect()
}

pub fn mc_obedience(game: &QuadraticGame, s: &LinearGaussianStructure, cfg: &McConfig) -> Result<ObedienceReport> {
    cfg.check()?;
    let sampler = JointSampler::new(game, s)?;
    let (n, k) = (game.n_players(), game.state_dim());
    let cov = s.action_covariance(game.sigma());
    let edges: Vec<Vec<f64>> = (0..n).map(|i| bin_edges(s.a0[i], cov[(i, i)], cfg.n_bins)).collect();
    let per = 2 + cfg.n_bins;
    let b = game.b().clone();
    let bm = game.b_mat().clone();
    let c = game.c_mat().clone();
    let acc = accumulate(
        cfg,
        JOINT_STREAM,
        sampler.dim(),
        n * per,
        || (vec![0.0; k], vec![0.0; n]),
        |z, (w, a), acc| {
            sampler.map(z, w, a);
            for i in 0..n {
                let mut u = b[i];
                for j in 0..k {
                    u += bm[(i, j)] * w[j];
                }
                for j in 0..n {
                    u -= c[(i, j)] * a[j];
                }
                acc[i * per].push(u);
                acc[i * per + 1].push(u * a[i]);
                let bin = edges[i].partition_point(|e| *e <= a[i]);
                acc[i * per + 2 + bin].push(u);
            }
        },
    );
    let root_tr = game.sigma().trace().max(0.0).sqrt();
    let mut players = Vec::with_capacity(n);
    let mut n_stats = 0;
    for i in 0..n {
        let sd_a = cov[(i, i)].max(0.0).sqrt();
        let u_scale = b[i].abs() + bm.row(i).norm() * root_tr + c.row(i).norm() * (s.a0.norm() + cov.trace().max(0.0).sqrt());
        let floor = 1e-12 * u_scale;
        let moments = vec![
            Check::zero_mean(format!("E[du_{i}]"), &acc[i * per], floor),
            Check::zero_mean(format!("E[du_{i}*a_{i}]"), &acc[i * per + 1], floor * (s.a0[i].abs() + sd_a)),
        ];
        let n_bins = edges[i].len() + 1;
        let bins: Vec<Check> =
            (0..n_bins).map(|q| Check::zero_mean(format!("E[du_{i}|bin {q}]"), &acc[i * per + 2 + q], floor)).collect();
        n_stats += 2 + bins.iter().filter(|c| c.std_error.is_finite()).count();
        let moment_pass = moments.iter().all(|c| c.pass);
        let binned_pass = bins.iter().all(|c| c.pass);
        players.push(PlayerObedience { player: i, moments, bins, moment_pass, binned_pass });
    }
    let pass = players.iter().all(|p| p.moment_pass && p.binned_pass);
    Ok(ObedienceReport { players, n_statistics: n_stats, note: bonferroni_note(n_stats), pass })
}

pub fn mc_designer_value(game: &QuadraticGame, s: &LinearGaussianStructure, cfg: &McConfig) -> Result<Estimate> {
    let sampler = JointSampler::new(game, s)?;
    let (n, k) = (game.n_players(), game.state_dim());
    let bh = game.b_hat().clone();
    let bhm = game.b_hat_mat().clone();
    let ch = game.c_hat().clone();
    let acc = accumulate(
        cfg,
        JOINT_STREAM,
        sampler.dim(),
        1,
        || (vec![0.0; k], vec![0.0; n]),
        |z, (w, a), acc| {
            sampler.map(z, w, a);
            let mut v = 0.0;
            for i in 0..n {
                let mut lin = bh[i];
                for j in 0..k {
                    lin += bhm[(i, j)] * w[j];
                }
                let mut quad = 0.0;
                for j in 0..n {
                    quad += ch[(i, j)] * a[j];
                }
                v += a[i] * (lin - 0.5 * quad);
            }
            acc[0].push(v);
        },
    );
    Ok(Estimate::from(&acc[0]))
}

/// Per-contract data for the closed-form inner supremum.
struct DualKernel {
    pinv: DMatrix<f64>,
    m: DVector<f64>,
    big_m: DMatrix<f64>,
    c0: f64,
    w: DVector<f64>,
}

impl DualKernel {
    /// `None` when the inner problem is unbounded.
    fn new(game: &QuadraticGame, contract: &LinearContract) -> Result<Option<Self>> {
        if !dual_value(game, contract)?.is_finite() {
            return Ok(None);
        }
        let sp = SymSpectrum::new(&dual_quadratic(game, &contract.x));
        let (m, big_m) = dual_linear_terms(game, contract);
        Ok(Some(DualKernel {
            pinv: sp.pinv,
            m,
            big_m,
            c0: contract.x0.dot(game.b()),
            w: game.b_mat().transpose() * &contract.x0,
        }))
    }

    fn eval(&self, omega: &[f64], y: &mut [f64]) -> f64 {
        let n = self.m.len();
        let k = omega.len();
        for i in 0..n {
            let mut v = self.m[i];
            for j in 0..k {
                v += self.big_m[(i, j)] * omega[j];
            }
            y[i] = v;
        }
        let mut quad = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.pinv[(i, j)] * y[j];
            }
            quad += y[i] * row;
        }
        let mut lin = self.c0;
        for j in 0..k {
            lin += self.w[j] * omega[j];
        }
        0.5 * quad + lin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub unbounded: bool,
}

/// Monte Carlo of `E[sup_a (v + Σλᵢu̇ᵢ)]`, sharing state draws with the primal estimators.
pub fn mc_dual_values(game: &QuadraticGame, contracts: &[LinearContract], cfg: &McConfig) -> Result<Vec<DualEstimate>> {
    let (n, k) = (game.n_players(), game.state_dim());
    let kernels: Vec<Option<DualKernel>> = contracts.iter().map(|c| DualKernel::new(game, c)).collect::<Result<_>>()?;
    let l_sigma = linalg::psd_sqrt(game.sigma(), "sigma")?;
    let acc = accumulate(
        cfg,
        JOINT_STREAM,
        k + n,
        kernels.len(),
        || (vec![0.0; k], vec![0.0; n]),
        |z, (w, y), acc| {
            for i in 0..k {
                w[i] = (0..k).map(|j| l_sigma[(i, j)] * z[j]).sum();
            }
            for (slot, ker) in kernels.iter().enumerate() {
                if let Some(ker) = ker {
                    acc[slot].push(ker.eval(w, y));
                }
            }
        },
    );
    Ok(kernels
        .iter()
        .zip(acc.iter())
        .map(|(ker, w)| match ker {
            Some(_) => DualEstimate { estimate: w.mean, std_error: w.std_error(), unbounded: false },
            None => DualEstimate { estimate: f64::INFINITY, std_error: 0.0, unbounded: true },
        })
        .collect())
}

pub fn mc_dual_value(game: &QuadraticGame, contract: &LinearContract, cfg: &McConfig) -> Result<DualEstimate> {
    Ok(mc_dual_values(game, std::slice::from_ref(contract), cfg)?[0])
}

/// Random linear contracts with a positive-definite dual quadratic form.
pub fn random_finite_contracts(game: &QuadraticGame, count: usize, seed: u64) -> Vec<LinearContract> {
    let n = game.n_players();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CONTRACT_STREAM);
    let pd = |t: f64, p: &DVector<f64>| linalg::is_pd(&dual_quadratic(game, &(DVector::from_element(n, t) + p)));
    let zero = DVector::zeros(n);
    let mut t0 = 0.0;
    if !pd(0.0, &zero) {
        t0 = 1e-3;
        while !pd(t0, &zero) && t0 < 1e12 {
            t0 *= 2.0;
        }
    }
    let x0_scale = 1.0 + game.b().norm() + game.b_hat().norm();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut x = DVector::zeros(n);
        for _ in 0..100 {
            let t = t0 + rng.gen::<f64>() * (1.0 + t0);
            let p = DVector::from_fn(n, |_, _| (rng.gen::<f64>() - 0.5) * 0.5 * (1.0 + t0));
            if pd(t, &p) {
                x = DVector::from_element(n, t) + p;
                break;
            }
            x = DVector::from_element(n, 2.0 * t0 + 1.0);
        }
        let x0 = DVector::from_fn(n, |_, _| (rng.gen::<f64>() * 2.0 - 1.0) * x0_scale);
        out.push(LinearContract { x0, x });
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractDual {
    pub dual: DualEstimate,
    pub dual_analytic: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakDualityReport {
    pub primal: Estimate,
    pub primal_analytic: f64,
    pub contracts: Vec<ContractDual>,
    pub violations: usize,
    pub min_dual: f64,
    pub min_dual_analytic: f64,
}

/// Weak duality by sampling: `n_contracts` random finite contracts plus `include`.
/// A violation is `primal > dual + 4·SE` with the SEs of both estimates combined.
pub fn weak_duality_sweep(
    game: &QuadraticGame,
    s: &LinearGaussianStructure,
    n_contracts: usize,
    cfg: &McConfig,
    include: &[LinearContract],
) -> Result<WeakDualityReport> {
    cfg.check()?;
    let mut contracts = random_finite_contracts(game, n_contracts, cfg.seed);
    contracts.extend_from_slice(include);
    let primal = mc_designer_value(game, s, cfg)?;
    let primal_analytic = game.expected_designer_value(s)?;
    let duals = mc_dual_values(game, &contracts, cfg)?;
    let mut out = Vec::with_capacity(contracts.len());
    for (c, d) in contracts.iter().zip(duals) {
        let band = SE_BAND * (primal.std_error.powi(2) + d.std_error.powi(2)).sqrt();
        let violation = !d.unbounded && primal.estimate > d.estimate + band;
        out.push(ContractDual { dual: d, dual_analytic: dual_value(game, c)?, violation });
    }
    let violations = out.iter().filter(|c| c.violation).count();
    let min_dual = out.iter().map(|c| c.dual.estimate).fold(f64::INFINITY, f64::min);
    let min_dual_analytic = out.iter().map(|c| c.dual_analytic).fold(f64::INFINITY, f64::min);
    Ok(WeakDualityReport { primal, primal_analytic, contracts: out, violations, min_dual, min_dual_analytic })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwinReport {
    pub primal: Check,
    pub dual: Option<Check>,
    pub obedience: ObedienceReport,
    pub pass: bool,
}

/// MC estimates of primal value, dual value and obedience moments against their
/// analytic counterparts.
pub fn twin_report(
    game: &QuadraticGame,
    s: &LinearGaussianStructure,
    contract: Option<&LinearContract>,
    cfg: &McConfig,
) -> Result<TwinReport> {
    cfg.check()?;
    let primal_exact = game.expected_designer_value(s)?;
    let p = mc_designer_value(game, s, cfg)?;
    let floor = 1e-12 * (1.0 + primal_exact.abs());
    let primal = Check::against("primal_value", &p, primal_exact, floor);
    let dual = match contract {
        Some(c) => {
            let exact = dual_value(game, c)?;
            let d = mc_dual_value(game, c, cfg)?;
            Some(if d.unbounded || !exact.is_finite() {
                Check {
                    name: "dual_value".into(),
                    statistic: d.estimate,
                    std_error: d.std_error,
                    threshold: f64::INFINITY,
                    pass: d.unbounded && !exact.is_finite(),
                }
            } else {
                let est = Estimate { estimate: d.estimate, std_error: d.std_error };
                Check::against("dual_value", &est, exact, 1e-12 * (1.0 + exact.abs()))
            })
        }
        None => None,
    };
    let obedience = mc_obedience(game, s, cfg)?;
    let pass = primal.pass && dual.as_ref().is_none_or(|d| d.pass) && obedience.pass;
    Ok(TwinReport { primal, dual, obedience, pass })
}
