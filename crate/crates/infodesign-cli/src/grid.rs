//! Closed parameter grids: `lo:hi:step` or a comma-separated list.

use anyhow::{bail, Context, Result};

/// Points `lo, lo+step, …` up to `hi`. When `step` does not divide the span the
/// last point is clamped to `hi` (and `clamped` is set).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
    pub clamped: bool,
}

fn num(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("bad {what} {s:?}"))?;
    if !v.is_finite() {
        bail!("{what} must be finite");
    }
    Ok(v)
}

pub fn parse(spec: &str) -> Result<Grid> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("grid must be lo:hi:step, got {spec:?}");
        }
        let (lo, hi, step) = (num(parts[0], "lower end")?, num(parts[1], "upper end")?, num(parts[2], "step")?);
        if hi < lo {
            bail!("grid upper end {hi} is below lower end {lo}");
        }
        if !(step > 0.0) {
            bail!("grid step must be positive");
        }
        let span = hi - lo;
        let ratio = span / step;
        let n = (ratio + 1e-9).floor();
        if n > 1e7 {
            bail!("grid has more than 10⁷ points");
        }
        let n = n as usize;
        let mut points: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
        let tol = 1e-9 * step;
        let last = *points.last().expect("non-empty");
        let mut clamped = false;
        if (last - hi).abs() <= tol {
            *points.last_mut().expect("non-empty") = hi;
        } else if last > hi {
            points.pop();
            points.push(hi);
        } else {
            points.push(hi);
            clamped = true;
        }
        Ok(Grid { points, clamped })
    } else {
        let points = spec.split(',').map(|s| num(s, "grid point")).collect::<Result<Vec<f64>>>()?;
        if points.is_empty() {
            bail!("empty grid");
        }
        Ok(Grid { points, clamped: false })
    }
}
