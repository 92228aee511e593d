use super::{Constellation, Layout, OptimizerConfig, Scorer};
use crate::air::{maxlog_symbol_costs, NORMALIZED_ES};
use crate::error::Result;

/// One accepted label swap between movable units `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapRecord {
    pub i: usize,
    pub j: usize,
    pub objective_before: f64,
    pub objective_after: f64,
}

#[derive(Debug, Clone)]
pub struct BsaOutcome {
    pub constellation: Constellation,
    pub swaps: Vec<SwapRecord>,
}

/// One binary-switching sweep.
///
/// Symbols are ranked by their max-log bit-metric cost, highest first. Each
/// symbol in turn tries a label swap with every other symbol and keeps the
/// best swap if it strictly improves the scorer. Coordinates are untouched.
pub fn bsa_pass(c: &Constellation, cfg: &OptimizerConfig, scorer: &Scorer) -> Result<BsaOutcome> {
    let layout = Layout::new(c, cfg.symmetry)?;
    let (layout, swaps) = bsa_layout(layout, cfg, scorer)?;
    Ok(BsaOutcome {
        constellation: layout.constellation()?,
        swaps,
    })
}

pub(crate) fn bsa_layout(mut layout: Layout, cfg: &OptimizerConfig, scorer: &Scorer) -> Result<(Layout, Vec<SwapRecord>)> {
    let c = layout.constellation()?;
    let normalized = c.normalize(NORMALIZED_ES)?;
    let costs = maxlog_symbol_costs(&normalized, &cfg.channel());
    let mut order: Vec<usize> = (0..layout.units()).collect();
    let unit_cost: Vec<f64> = order.iter().map(|&i| costs[layout.representative(&c, i)]).collect();
    order.sort_by(|&a, &b| unit_cost[b].total_cmp(&unit_cost[a]).then(a.cmp(&b)));

    let mut current = scorer.score(&c);
    let mut swaps = Vec::new();
    for &i in &order {
        let mut best: Option<(usize, f64, Layout)> = None;
        for &j in &order {
            if j == i {
                continue;
            }
            let cand = layout.swap_labels(i, j);
            let s = scorer.score(&cand.constellation()?);
            if s > best.as_ref().map_or(current, |b| b.1) {
                best = Some((j, s, cand));
            }
        }
        if let Some((j, s, cand)) = best {
            swaps.push(SwapRecord {
                i,
                j,
                objective_before: current,
                objective_after: s,
            });
            layout = cand;
            current = s;
        }
    }
    Ok((layout, swaps))
}
