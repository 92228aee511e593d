use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bsa::bsa_layout;
use super::poa::poa_layout;
use super::{Constellation, Layout, OptimizerConfig, Scorer, SymmetryMode};
use crate::air::{gmi_mc, AirEstimate, NORMALIZED_ES};
use crate::error::Result;
use crate::orthant::{orthant_expand, orthant_generators, OrthantBitMap};
use crate::scalar::{dist2, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Poa,
    Bsa,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Poa => "poa",
            MoveKind::Bsa => "bsa",
        }
    }
}

/// One accepted move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub round: usize,
    pub kind: MoveKind,
    pub objective_before: f64,
    pub objective_after: f64,
}

#[derive(Debug, Clone)]
pub struct OptTrace {
    pub records: Vec<TraceRecord>,
    /// Optimized constellation at the configured energy.
    pub constellation: Constellation,
    /// Scorer value of the prepared initial constellation.
    pub initial_objective: f64,
    /// Scorer value after the last round.
    pub final_objective: f64,
    /// Full Monte-Carlo GMI of the result at the design SNR.
    pub final_gmi: AirEstimate,
    pub rounds: usize,
}

/// Constellation the optimizer actually starts from.
///
/// Free mode projects every point onto the sphere of radius `sqrt(es)`.
/// Orthant-locked mode keeps an input that is already orthant symmetric
/// under [`OrthantBitMap::prs64`]; otherwise it collects the distinct
/// coordinate magnitude vectors of the input, lifts zero magnitudes to a
/// fifth of the largest one, projects them onto the sphere and greedily picks
/// four generators, starting from the magnitudes of the point labeled 0 and
/// then always adding the candidate that maximizes the minimum distance of
/// the expanded constellation.
pub fn prepare_initial(init: &Constellation, cfg: &OptimizerConfig) -> Result<Constellation> {
    cfg.validate()?;
    let radius = cfg.es.sqrt();
    let project = |p: &[f64; 4]| {
        let n = norm2(p).sqrt();
        p.map(|v| v * radius / n)
    };
    match cfg.symmetry {
        SymmetryMode::Free => init.with_points(init.points().iter().map(project).collect()),
        SymmetryMode::OrthantLocked => {
            let map = OrthantBitMap::prs64();
            if init.bits_per_symbol() == map.bits_per_symbol() {
                let tol = 1e-9 * init.mean_energy().sqrt();
                if let Ok((gens, labels)) = orthant_generators(init, &map, tol) {
                    let gens: Vec<[f64; 4]> = gens.iter().map(project).collect();
                    return orthant_expand(&gens, &labels, &map);
                }
            }
            let largest = init.points().iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let lift = largest / 5.0;
            let mut candidates: Vec<[f64; 4]> = Vec::new();
            let mut first = None;
            for (p, &l) in init.points().iter().zip(init.labels()) {
                let mag = project(&p.map(|v| if v.abs() < 1e-9 * largest { lift } else { v.abs() }));
                let known = candidates.iter().position(|q| dist2(q, &mag) < 1e-18 * cfg.es);
                let idx = known.unwrap_or_else(|| {
                    candidates.push(mag);
                    candidates.len() - 1
                });
                if l == 0 {
                    first = Some(idx);
                }
            }
            let gens_needed = 1usize << map.intra_bits.len();
            let mut chosen = vec![candidates[first.unwrap_or(0)]];
            while chosen.len() < gens_needed {
                let mut best: Option<([f64; 4], f64)> = None;
                for cand in &candidates {
                    if chosen.iter().any(|g| dist2(g, cand) < 1e-18 * cfg.es) {
                        continue;
                    }
                    let mut trial = chosen.clone();
                    trial.push(*cand);
                    let msed = expanded_msed(&trial);
                    if best.is_none_or(|b| msed > b.1) {
                        best = Some((*cand, msed));
                    }
                }
                match best {
                    Some((g, _)) => chosen.push(g),
                    None => {
                        return Err(crate::error::Error::InvalidParameter(
                            "initial constellation has fewer than four distinct magnitude vectors".into(),
                        ))
                    }
                }
            }
            orthant_expand(&chosen, &[0, 1, 2, 3], &map)
        }
    }
}

/// Minimum squared distance of the sign expansion of a generator set.
fn expanded_msed(gens: &[[f64; 4]]) -> f64 {
    let mut pts = Vec::with_capacity(gens.len() * 16);
    for g in gens {
        for signs in 0..16u32 {
            let mut p = *g;
            for (d, v) in p.iter_mut().enumerate() {
                if (signs >> d) & 1 == 1 {
                    *v = -*v;
                }
            }
            pts.push(p);
        }
    }
    let mut best = f64::INFINITY;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            best = best.min(dist2(&pts[a], &pts[b]));
        }
    }
    best
}

/// Alternates POA and BSA until an outer round gains less than
/// `cfg.convergence_tol` or `cfg.outer_iters` rounds have run, then re-scores
/// the result with `gmi_mc` at `cfg.final_samples` samples.
pub fn joint_optimize(init: &Constellation, cfg: &OptimizerConfig) -> Result<OptTrace> {
    let start = prepare_initial(init, cfg)?;
    let scorer = Scorer::new(cfg, start.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut layout = Layout::new(&start, cfg.symmetry)?;
    let initial = scorer.score(&start);
    let mut objective = initial;
    let mut records = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut rounds = 0;

    for round in 0..cfg.outer_iters {
        rounds = round + 1;
        let round_start = objective;
        for _ in 0..cfg.poa_iters {
            if pairs.is_empty() {
                pairs = draw_pairs(layout.units(), &mut rng);
            }
            let pair = pairs.pop().expect("refilled");
            let (next, after) = poa_layout(&layout, objective, pair, cfg, &scorer, &mut rng)?;
            if after > objective {
                records.push(TraceRecord {
                    round,
                    kind: MoveKind::Poa,
                    objective_before: objective,
                    objective_after: after,
                });
                layout = next;
                objective = after;
            }
        }
        for _ in 0..cfg.bsa_passes {
            let (next, swaps) = bsa_layout(layout, cfg, &scorer)?;
            layout = next;
            for s in swaps {
                records.push(TraceRecord {
                    round,
                    kind: MoveKind::Bsa,
                    objective_before: s.objective_before,
                    objective_after: s.objective_after,
                });
                objective = s.objective_after;
            }
        }
        if objective - round_start < cfg.convergence_tol {
            break;
        }
    }

    let constellation = layout.constellation()?;
    let final_gmi = gmi_mc(
        &constellation.normalize(NORMALIZED_ES)?,
        &cfg.channel(),
        cfg.final_samples,
        cfg.seed,
    )?;
    Ok(OptTrace {
        records,
        constellation,
        initial_objective: initial,
        final_objective: objective,
        final_gmi,
        rounds,
    })
}

/// Disjoint random pairs covering the units (uniform, without replacement);
/// with at most four units every unordered pair is listed in random order.
fn draw_pairs(units: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = if units <= 4 {
        (0..units).flat_map(|a| (a + 1..units).map(move |b| (a, b))).collect()
    } else {
        let mut idx: Vec<usize> = (0..units).collect();
        idx.shuffle(rng);
        idx.chunks_exact(2).map(|p| (p[0], p[1])).collect()
    };
    pairs.shuffle(rng);
    pairs
}
