use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::nelder_mead::nelder_mead;
use super::{from_angles, to_angles, Constellation, Layout, OptimizerConfig, Scorer};
use crate::error::{Error, Result};

/// Initial simplex size in radians.
const SIMPLEX_STEP: f64 = 0.05;
/// Standard deviation of the restart perturbation in radians.
const RESTART_SPREAD: f64 = 0.05;

/// Result of one POA or BSA move.
#[derive(Debug, Clone)]
pub struct MoveOutcome {
    pub constellation: Constellation,
    pub objective_before: f64,
    pub objective_after: f64,
    pub accepted: bool,
}

/// Repositions the pair `(j, k)` on the sphere of radius `sqrt(cfg.es)` to
/// maximize the scorer; returns the input unchanged unless the candidate is
/// strictly better. In orthant-locked mode `j` and `k` index generators.
pub fn poa_step(
    c: &Constellation,
    pair: (usize, usize),
    cfg: &OptimizerConfig,
    scorer: &Scorer,
    rng: &mut ChaCha8Rng,
) -> Result<MoveOutcome> {
    let layout = Layout::new(c, cfg.symmetry)?;
    let before = scorer.score(c);
    let (next, after) = poa_layout(&layout, before, pair, cfg, scorer, rng)?;
    let accepted = after > before;
    Ok(MoveOutcome {
        constellation: if accepted { next.constellation()? } else { c.clone() },
        objective_before: before,
        objective_after: if accepted { after } else { before },
        accepted,
    })
}

pub(crate) fn poa_layout(
    layout: &Layout,
    before: f64,
    (j, k): (usize, usize),
    cfg: &OptimizerConfig,
    scorer: &Scorer,
    rng: &mut ChaCha8Rng,
) -> Result<(Layout, f64)> {
    if j == k || j >= layout.units() || k >= layout.units() {
        return Err(Error::InvalidParameter(format!(
            "pair ({j}, {k}) is not two distinct indices below {}",
            layout.units()
        )));
    }
    let radius = cfg.es.sqrt();
    let objective = |x: &[f64]| -> f64 {
        let pj = from_angles(&x[..3], radius);
        let pk = from_angles(&x[3..], radius);
        match layout.with_points(&[(j, pj), (k, pk)]) {
            Some(l) => match l.constellation() {
                Ok(c) => -scorer.score(&c),
                Err(_) => f64::INFINITY,
            },
            None => f64::INFINITY,
        }
    };
    let x0: Vec<f64> = to_angles(&layout.point(j))
        .into_iter()
        .chain(to_angles(&layout.point(k)))
        .collect();

    let first_budget = cfg.poa_budget * 3 / 5;
    let mut best = nelder_mead(objective, &x0, SIMPLEX_STEP, first_budget.max(1), 1e-9);
    let rest = cfg.poa_budget - best.evaluations.min(cfg.poa_budget);
    if rest > x0.len() + 1 {
        let start: Vec<f64> = best
            .x
            .iter()
            .map(|v| v + RESTART_SPREAD * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let second = nelder_mead(objective, &start, SIMPLEX_STEP, rest, 1e-9);
        if second.f < best.f {
            best = second;
        }
    }
    if -best.f > before {
        let pj = from_angles(&best.x[..3], radius);
        let pk = from_angles(&best.x[3..], radius);
        if let Some(next) = layout.with_points(&[(j, pj), (k, pk)]) {
            return Ok((next, -best.f));
        }
    }
    Ok((layout.clone(), before))
}
