//! Two-parameter optimization of the ring-switching family.

use rayon::prelude::*;

use crate::air::{gmi_mc, AwgnSpec, NORMALIZED_ES};
use crate::error::{Error, Result};
use crate::formats::{prs_from_params, PrsParams};

/// GMI over an `(r, theta)` grid with the refined maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct PrsSurface {
    pub snr_db: f64,
    pub r: Vec<f64>,
    pub theta_deg: Vec<f64>,
    /// `gmi[i][j]` at `(r[i], theta_deg[j])`; NaN where the parameters do not
    /// give a valid constellation.
    pub gmi: Vec<Vec<f64>>,
    pub r_opt: f64,
    pub theta_opt: f64,
    pub gmi_opt: f64,
}

fn evaluate(ch: &AwgnSpec, r: f64, theta: f64, samples: usize, seed: u64) -> Result<f64> {
    let c = prs_from_params(&PrsParams::new(r, theta, NORMALIZED_ES)?)?;
    Ok(gmi_mc(&c, ch, samples, seed)?.value)
}

/// Golden-section maximum of `f` on `[a, b]` down to width `tol`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Evaluates the GMI of the ring-switching family on the grid (same `seed`
/// and `samples` everywhere, so the surface is a smooth function of the
/// parameters), then refines the best grid point by alternating
/// golden-section searches along `r` and `theta` within one grid step.
/// Grid points outside `0 < r <= 1`, `0 < theta < 45` are reported as NaN.
pub fn prs_param_sweep(
    snr_db: f64,
    r_grid: &[f64],
    theta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<PrsSurface> {
    let ch = AwgnSpec::new(snr_db)?;
    if r_grid.is_empty() || theta_grid.is_empty() {
        return Err(Error::InvalidParameter("empty parameter grid".into()));
    }
    let cells: Vec<(usize, usize)> = (0..r_grid.len())
        .flat_map(|i| (0..theta_grid.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| evaluate(&ch, r_grid[i], theta_grid[j], samples, seed).unwrap_or(f64::NAN))
        .collect();
    let mut gmi = vec![vec![f64::NAN; theta_grid.len()]; r_grid.len()];
    let mut best: Option<(usize, usize, f64)> = None;
    for (&(i, j), &v) in cells.iter().zip(&values) {
        gmi[i][j] = v;
        if v.is_finite() && best.is_none_or(|b| v > b.2) {
            best = Some((i, j, v));
        }
    }
    let (bi, bj, bv) = best.ok_or_else(|| Error::Degenerate("no valid grid point".into()))?;

    let bracket = |grid: &[f64], k: usize, lo: f64, hi: f64| {
        let step = if grid.len() > 1 {
            (grid[grid.len() - 1] - grid[0]).abs() / (grid.len() - 1) as f64
        } else {
            (hi - lo) / 10.0
        };
        ((grid[k] - step).max(lo), (grid[k] + step).min(hi))
    };
    let (r_lo, r_hi) = bracket(r_grid, bi, 1e-3, 1.0);
    let (t_lo, t_hi) = bracket(theta_grid, bj, 1e-3, 45.0 - 1e-3);
    let f = |r: f64, t: f64| evaluate(&ch, r, t, samples, seed).unwrap_or(f64::NEG_INFINITY);
    let (mut r, mut t, mut v) = (r_grid[bi], theta_grid[bj], bv);
    for _ in 0..2 {
        let (rn, vr) = golden_max(|x| f(x, t), r_lo, r_hi, 1e-3);
        if vr > v {
            r = rn;
            v = vr;
        }
        let (tn, vt) = golden_max(|x| f(r, x), t_lo, t_hi, 0.02);
        if vt > v {
            t = tn;
            v = vt;
        }
    }
    Ok(PrsSurface {
        snr_db,
        r: r_grid.to_vec(),
        theta_deg: theta_grid.to_vec(),
        gmi,
        r_opt: r,
        theta_opt: t,
        gmi_opt: v,
    })
}

/// Optimum of the family at one SNR from a coarse default grid
/// (`r` in `0.30..=1.00` step 0.05, `theta` in `1..=44` step 1.5 degrees).
pub fn prs_optimize(snr_db: f64, samples: usize, seed: u64) -> Result<PrsSurface> {
    let r: Vec<f64> = (0..=14).map(|k| 0.30 + 0.05 * k as f64).collect();
    let t: Vec<f64> = (0..=28).map(|k| 1.0 + 1.5 * k as f64).collect();
    prs_param_sweep(snr_db, &r, &t, samples, seed)
}
