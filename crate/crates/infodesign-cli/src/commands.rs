use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use infodesign::applications::bertrand::{self, MarketParams};
use infodesign::applications::investment::{self, InvestmentParams};
use infodesign::applications::persuasion::{self, PersuasionMode, PersuasionParams};
use infodesign::applications::perturbation;
use infodesign::benchmarks::{self, FirstBest};
use infodesign::certification::{self, CertificationReport, CertifyOptions, Verdict};
use infodesign::montecarlo::{self, McConfig};
use infodesign::solver::{self, SolverOptions};
use infodesign::{fixtures, Error, LinearContract, LinearGaussianStructure, QuadraticGame};
use log::warn;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::grid;
use crate::{BertrandArgs, Cli, Command, InvestArgs, McArgs, PersuadeArgs, PersuasionKind, PerturbArgs, ProblemFiles, StructureKind};

/// Half-width of the δ band around δ^cr reported as critical.
const CRITICAL_BAND: f64 = 1e-3;

pub enum Status {
    Success,
    Failed,
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Success
    } else {
        Status::Failed
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    if !(cli.tol > 0.0) || !cli.tol.is_finite() {
        bail!("--tol must be positive");
    }
    match &cli.command {
        Command::Certify(a) => certify(cli, &a.files),
        Command::Bertrand(a) => bertrand_sweep(cli, a),
        Command::Persuade(a) => persuade(cli, a),
        Command::Invest(a) => invest(cli, a),
        Command::Perturb(a) => perturb(cli, a),
        Command::Mc(a) => mc(cli, a),
        Command::Fixtures => export_fixtures(cli),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(cli: &Cli, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit(cli, &s)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn options(cli: &Cli) -> CertifyOptions {
    CertifyOptions { gap_tol: cli.tol, ..CertifyOptions::default() }
}

struct Problem {
    game: QuadraticGame,
    structure: LinearGaussianStructure,
    contract: Option<LinearContract>,
}

fn load(files: &ProblemFiles) -> Result<Problem> {
    if let Some(name) = &files.fixture {
        let f = fixtures::by_name(name)?;
        let contract = match &files.contract {
            Some(p) => read_json(p)?,
            None => f.contract,
        };
        return Ok(Problem { game: f.game, structure: f.structure, contract: Some(contract) });
    }
    let (Some(g), Some(s)) = (&files.game, &files.structure) else {
        bail!("give --fixture NAME or both --game and --structure");
    };
    let game: QuadraticGame = read_json(g)?;
    let structure: LinearGaussianStructure = read_json(s)?;
    let contract = files.contract.as_deref().map(read_json::<LinearContract>).transpose()?;
    game.check_structure(&structure)?;
    if let Some(c) = &contract {
        game.check_contract(c)?;
    }
    Ok(Problem { game, structure, contract })
}

fn certify(cli: &Cli, files: &ProblemFiles) -> Result<Status> {
    let p = load(files)?;
    let (contract, solved) = match p.contract {
        Some(c) => (c, false),
        None => match solver::solve_certificate(&p.game, &SolverOptions::default()) {
            Ok(roots) => {
                let x = roots[0].clone();
                let x0 = certification::constant_offset(&p.game, &x, &p.structure.a0)?;
                (LinearContract::new(x0, x)?, true)
            }
            Err(e @ (Error::NotFound { .. } | Error::CriticalPoint { .. })) => {
                emit_json(cli, &json!({ "solved": false, "error": e.to_string(), "verdict": null }))?;
                return Ok(Status::Failed);
            }
            Err(e) => return Err(e.into()),
        },
    };
    let report = certification::certify_with(&p.game, &p.structure, &contract, &options(cli))?;
    let ok = report.verdict == Verdict::Certified;
    emit_json(cli, &json!({ "solved": solved, "contract": contract, "report": report }))?;
    Ok(status(ok))
}

#[derive(Debug, Serialize)]
struct BertrandRow {
    delta: f64,
    x: f64,
    r_own: f64,
    r_cross: f64,
    a0: f64,
    sigma_price: f64,
    rho_price: f64,
    r_own_fi: f64,
    r_cross_fi: f64,
    r_own_fb: f64,
    r_cross_fb: f64,
    primal_value: f64,
    gap: f64,
    verdict: String,
}

const BERTRAND_HEADER: &str =
    "delta,x,r_own,r_cross,a0,sigma_price,rho_price,r_own_FI,r_cross_FI,r_own_FB,r_cross_FB,primal_value,gap,verdict";

fn bertrand_row(p: &MarketParams, dcr: f64, opts: &CertifyOptions) -> Result<BertrandRow> {
    let g = bertrand::bertrand_game(p)?;
    let fi = benchmarks::full_info_equilibrium(&g)?;
    let (r_own_fb, r_cross_fb) = match benchmarks::first_best(&g) {
        FirstBest::Optimal { r, .. } => (r[(0, 0)], r[(0, 1)]),
        FirstBest::Unbounded => (f64::NAN, f64::NAN),
    };
    let mut row = BertrandRow {
        delta: p.delta,
        x: f64::NAN,
        r_own: f64::NAN,
        r_cross: f64::NAN,
        a0: f64::NAN,
        sigma_price: f64::NAN,
        rho_price: f64::NAN,
        r_own_fi: fi.r[(0, 0)],
        r_cross_fi: fi.r[(0, 1)],
        r_own_fb,
        r_cross_fb,
        primal_value: f64::NAN,
        gap: f64::NAN,
        verdict: String::new(),
    };
    if (p.delta - dcr).abs() <= CRITICAL_BAND {
        row.verdict = "Critical".into();
        return Ok(row);
    }
    let roots = match solver::solve_certificate(&g, &SolverOptions::default()) {
        Ok(r) => r,
        Err(e @ (Error::NotFound { .. } | Error::CriticalPoint { .. })) => {
            warn!("delta = {}: {e}", p.delta);
            row.verdict = match e {
                Error::NotFound { .. } => "NotFound".into(),
                _ => "Critical".into(),
            };
            return Ok(row);
        }
        Err(e) => return Err(e.into()),
    };
    let x = roots[0].clone();
    let (s, c) = certification::certificate_pair(&g, &x)?;
    let rep = certification::certify_with(&g, &s, &c, opts)?;
    let (own, cross) = (s.r[(0, 0)], s.r[(0, 1)]);
    let norm2 = own * own + cross * cross;
    row.x = x[0];
    row.r_own = own;
    row.r_cross = cross;
    row.a0 = s.a0[0];
    row.sigma_price = p.sigma2.sqrt() * norm2.sqrt();
    row.rho_price = 2.0 * own * cross / norm2;
    row.primal_value = rep.primal_value;
    row.gap = rep.gap;
    row.verdict = format!("{:?}", rep.verdict);
    Ok(row)
}

fn bertrand_sweep(cli: &Cli, a: &BertrandArgs) -> Result<Status> {
    let base = match &a.params {
        Some(path) => read_json::<MarketParams>(path)?,
        None => MarketParams { c: a.c, theta_bar: a.theta_bar, sigma2: a.sigma2, eta: a.eta, xi: a.xi, delta: 0.0 },
    };
    let deltas = match (&a.sweep_delta, a.delta) {
        (Some(spec), _) => {
            let g = grid::parse(spec)?;
            if g.clamped {
                warn!("step does not divide the δ span; last point clamped to {}", g.points.last().expect("non-empty"));
            }
            g.points
        }
        (None, Some(d)) => vec![d],
        (None, None) => vec![if a.params.is_some() { base.delta } else { 0.0 }],
    };
    for &d in &deltas {
        base.with_delta(d).validate().with_context(|| format!("delta = {d}"))?;
    }
    let dcr = bertrand::critical_delta(&base);
    let opts = options(cli);
    let rows = deltas.par_iter().map(|&d| bertrand_row(&base.with_delta(d), dcr, &opts)).collect::<Result<Vec<_>>>()?;
    let ok = rows.iter().all(|r| r.verdict == "Certified" || r.verdict == "Critical");
    if cli.json {
        emit_json(cli, &json!({ "params": base, "critical_delta": dcr, "delta_fb": bertrand::delta_fb(&base), "rows": rows }))?;
    } else {
        let mut out = String::new();
        writeln!(out, "{BERTRAND_HEADER}")?;
        for r in &rows {
            let nums = [
                r.delta,
                r.x,
                r.r_own,
                r.r_cross,
                r.a0,
                r.sigma_price,
                r.rho_price,
                r.r_own_fi,
                r.r_cross_fi,
                r.r_own_fb,
                r.r_cross_fb,
                r.primal_value,
                r.gap,
            ];
            for v in nums {
                write!(out, "{v:.16e},")?;
            }
            writeln!(out, "{}", r.verdict)?;
        }
        emit(cli, &out)?;
    }
    Ok(status(ok))
}

fn parse_rho(s: &str) -> Result<(f64, Option<(u64, u64)>)> {
    if let Some((p, q)) = s.split_once('/') {
        let p: u64 = p.trim().parse().with_context(|| format!("bad ratio numerator in {s:?}"))?;
        let q: u64 = q.trim().parse().with_context(|| format!("bad ratio denominator in {s:?}"))?;
        if q == 0 {
            bail!("zero denominator in {s:?}");
        }
        Ok((p as f64 / q as f64, Some((p, q))))
    } else {
        let r: f64 = s.trim().parse().with_context(|| format!("bad rho {s:?}"))?;
        Ok((r, None))
    }
}

fn persuade(cli: &Cli, a: &PersuadeArgs) -> Result<Status> {
    let p = match a.mode {
        PersuasionKind::Polarization => {
            if a.rho.is_some() {
                bail!("--rho applies to co-movement only");
            }
            PersuasionParams::polarization(a.n, a.omega_bar, a.sigma2)
        }
        PersuasionKind::Comovement => {
            let (rho, ratio) = parse_rho(a.rho.as_deref().ok_or_else(|| anyhow!("co-movement needs --rho"))?)?;
            PersuasionParams { n_players: a.n, omega_bar: a.omega_bar, sigma2: a.sigma2, mode: PersuasionMode::CoMovement { rho, ratio } }
        }
    };
    p.validate()?;
    let game = persuasion::persuasion_game(&p)?;
    let full_info_optimal = match p.mode {
        PersuasionMode::CoMovement { rho, ratio } => match ratio {
            Some((pp, q)) => (pp as u128) * (2 * p.n_players as u128 - 1) <= (q as u128) * p.n_players as u128,
            None => rho <= persuasion::comovement_threshold(p.n_players),
        },
        PersuasionMode::Polarization => false,
    };
    let (structure, contract, n_informed) = if full_info_optimal {
        let (s, c) = persuasion::comovement_full_information(&p)?;
        (s, c, Some(p.n_players))
    } else {
        match a.structure {
            StructureKind::Selective => {
                let k = persuasion::informed_count(&p)?;
                (persuasion::selective_informing(&p, k)?, persuasion::persuasion_contract(&p), Some(k))
            }
            StructureKind::Gaussian => (persuasion::coordinated_gaussian(&p)?, persuasion::persuasion_contract(&p), None),
        }
    };
    let report = certification::certify_with(&game, &structure, &contract, &options(cli))?;
    let ok = report.verdict == Verdict::Certified;
    emit_json(
        cli,
        &json!({
            "params": p,
            "full_information_optimal": full_info_optimal,
            "n_informed": n_informed,
            "noise_variance": if full_info_optimal { 0.0 } else { persuasion::noise_variance(&p) },
            "structure": structure,
            "contract": contract,
            "value": report.primal_value,
            "report": report,
        }),
    )?;
    Ok(status(ok))
}

fn investment_case(p: &InvestmentParams, kind: StructureKind, opts: &CertifyOptions) -> Result<(serde_json::Value, bool)> {
    let game = investment::investment_game(p)?;
    let structure = match kind {
        StructureKind::Selective => investment::selective_informing(p, 1)?,
        StructureKind::Gaussian => investment::coordinated_gaussian(p)?,
    };
    let contract = investment::investment_contract(p);
    let report: CertificationReport = certification::certify_with(&game, &structure, &contract, opts)?;
    let (ni, fi, star) = investment::closed_form_values(p);
    let ok = report.verdict == Verdict::Certified;
    Ok((
        json!({
            "params": p,
            "values": { "no_info": ni, "full_info": fi, "optimal": star },
            "full_information_optimal": p.n_players == 1,
            "structure": structure,
            "contract": contract,
            "report": report,
        }),
        ok,
    ))
}

fn invest(cli: &Cli, a: &InvestArgs) -> Result<Status> {
    let p = InvestmentParams { n_players: a.n, r: a.r, c: a.c, theta_mean: a.mean, theta_var: a.var };
    p.validate()?;
    let opts = options(cli);
    let (mut out, mut ok) = investment_case(&p, a.structure, &opts)?;
    if let Some(s) = &a.prior2 {
        let (m, v) = s.split_once(',').ok_or_else(|| anyhow!("--prior2 must be mean,var"))?;
        let m: f64 = m.trim().parse().with_context(|| format!("bad mean in {s:?}"))?;
        let v: f64 = v.trim().parse().with_context(|| format!("bad variance in {s:?}"))?;
        let p2 = p.with_prior(m, v);
        p2.validate()?;
        let (second, ok2) = investment_case(&p2, a.structure, &opts)?;
        ok &= ok2;
        out["second_prior"] = second;
    }
    emit_json(cli, &out)?;
    Ok(status(ok))
}

#[derive(Debug, Serialize)]
struct PerturbRow {
    delta: f64,
    q_star: f64,
    slope: f64,
    gamma: f64,
    slope_rel_err: f64,
    verdict: String,
}

fn perturb(cli: &Cli, a: &PerturbArgs) -> Result<Status> {
    let g = grid::parse(&a.delta_grid)?;
    if g.clamped {
        warn!("step does not divide the Δ span; last point clamped");
    }
    let gamma = perturbation::gamma_slope(a.n, a.rho);
    let opts = options(cli);
    let rows = g
        .points
        .par_iter()
        .map(|&d| -> Result<PerturbRow> {
            let pc = perturbation::perturbed_comovement(a.n, a.rho, d)?;
            let rep = certification::certify_with(&pc.game, &pc.structure, &pc.contract, &opts)?;
            let slope = (pc.q_star - a.rho) / d;
            Ok(PerturbRow { delta: d, q_star: pc.q_star, slope, gamma, slope_rel_err: (slope - gamma).abs() / gamma, verdict: format!("{:?}", rep.verdict) })
        })
        .collect::<Result<Vec<_>>>()?;
    let ok = rows.iter().all(|r| r.verdict == "Certified");
    if cli.json {
        emit_json(cli, &json!({ "n": a.n, "rho": a.rho, "gamma": gamma, "rows": rows }))?;
    } else {
        let mut out = String::from("delta,q_star,slope,gamma,slope_rel_err,verdict\n");
        for r in &rows {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}", r.delta, r.q_star, r.slope, r.gamma, r.slope_rel_err, r.verdict)?;
        }
        emit(cli, &out)?;
    }
    Ok(status(ok))
}

fn mc(cli: &Cli, a: &McArgs) -> Result<Status> {
    let p = load(&a.files)?;
    let cfg = McConfig::new(cli.seed, cli.samples);
    let rep = montecarlo::twin_report(&p.game, &p.structure, p.contract.as_ref(), &cfg)?;
    let ok = rep.pass;
    emit_json(cli, &json!({ "fixture": a.files.fixture, "seed": cli.seed, "samples": cli.samples, "report": rep }))?;
    Ok(status(ok))
}

fn export_fixtures(cli: &Cli) -> Result<Status> {
    let Some(dir) = &cli.out else {
        println!("{}", fixtures::NAMES.join("\n"));
        return Ok(Status::Success);
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for f in fixtures::all()? {
        for (kind, v) in [
            ("game", serde_json::to_string_pretty(&f.game)?),
            ("structure", serde_json::to_string_pretty(&f.structure)?),
            ("contract", serde_json::to_string_pretty(&f.contract)?),
        ] {
            let path = dir.join(format!("{}.{kind}.json", f.name));
            fs::write(&path, v + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(Status::Success)
}
