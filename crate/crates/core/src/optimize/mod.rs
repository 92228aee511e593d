//! Joint optimization of constellation coordinates and labeling.
//!
//! The pairwise optimization algorithm (POA) repositions two points at a time
//! on the constant-modulus sphere; the binary switching algorithm (BSA) swaps
//! labels. [`joint_optimize`] alternates the two. In orthant-locked mode the
//! free variables are the positive-orthant generators and their intra-orthant
//! labels; the sign bits stay fixed by [`OrthantBitMap::prs64`].
//!
//! The optimizer works in `f64`; cast other scalar types at the boundary.

mod bsa;
mod joint;
mod nelder_mead;
mod poa;
mod prs_sweep;

pub use bsa::{bsa_pass, BsaOutcome, SwapRecord};
pub use joint::{joint_optimize, prepare_initial, MoveKind, OptTrace, TraceRecord};
pub use nelder_mead::{nelder_mead, Minimum};
pub use poa::{poa_step, MoveOutcome};
pub use prs_sweep::{prs_optimize, prs_param_sweep, PrsSurface};

use crate::air::{gmi_maxlog, AwgnSpec, CommonNoiseGmi, DEFAULT_SAMPLES, NORMALIZED_ES};
use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use crate::orthant::{orthant_expand, orthant_generators, OrthantBitMap};

type Constellation = LabeledConstellation<f64>;

/// Which variables the optimizer may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryMode {
    /// Every point and every label bit.
    Free,
    /// Four positive-orthant generators and the two intra-orthant label bits.
    OrthantLocked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub snr_db: f64,
    /// POA pair updates per outer round.
    pub poa_iters: usize,
    /// BSA sweeps per outer round.
    pub bsa_passes: usize,
    /// Maximum number of outer rounds.
    pub outer_iters: usize,
    pub seed: u64,
    pub symmetry: SymmetryMode,
    /// Constant-modulus energy constraint.
    pub es: f64,
    /// Samples per candidate evaluation with frozen noise; `0` scores
    /// candidates with the max-log surrogate instead.
    pub surrogate_samples: usize,
    /// Objective evaluations per POA pair, split between the first simplex
    /// run and one restart.
    pub poa_budget: usize,
    /// Stop when an outer round improves the objective by less than this.
    pub convergence_tol: f64,
    /// Samples of the final Monte-Carlo re-scoring.
    pub final_samples: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            snr_db: 8.0,
            poa_iters: 32,
            bsa_passes: 1,
            outer_iters: 20,
            seed: 1,
            symmetry: SymmetryMode::Free,
            es: NORMALIZED_ES,
            surrogate_samples: 20_000,
            poa_budget: 200,
            convergence_tol: 1e-4,
            final_samples: DEFAULT_SAMPLES,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidParameter("design SNR must be finite".into()));
        }
        if !(self.es.is_finite() && self.es > 0.0) {
            return Err(Error::InvalidParameter("energy constraint must be positive".into()));
        }
        let counts = [
            ("poa_iters", self.poa_iters),
            ("bsa_passes", self.bsa_passes),
            ("outer_iters", self.outer_iters),
            ("poa_budget", self.poa_budget),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn channel(&self) -> AwgnSpec {
        AwgnSpec { snr_db: self.snr_db }
    }
}

/// Candidate objective shared by POA and BSA: GMI under frozen noise, or the
/// max-log surrogate.
#[derive(Debug, Clone)]
pub struct Scorer {
    ch: AwgnSpec,
    mc: Option<CommonNoiseGmi>,
    orthant: bool,
}

impl Scorer {
    /// Scorer for constellations of `size` points under `cfg`.
    pub fn new(cfg: &OptimizerConfig, size: usize) -> Self {
        let ch = cfg.channel();
        let orthant = cfg.symmetry == SymmetryMode::OrthantLocked;
        let mc = (cfg.surrogate_samples > 0).then(|| {
            let slots = if orthant { (size / 16).max(1) } else { size };
            let per_source = (cfg.surrogate_samples / slots).max(1);
            CommonNoiseGmi::new(&ch, slots, per_source, cfg.seed ^ 0x5eed_0f_c0de)
        });
        Self { ch, mc, orthant }
    }

    /// Objective value, bits per 4D symbol (higher is better).
    pub fn score(&self, c: &Constellation) -> f64 {
        let es = c.mean_energy();
        let scaled;
        let c = if ((es - NORMALIZED_ES) / NORMALIZED_ES).abs() > 1e-12 {
            scaled = c.map_points(|p| p.map(|v| v * (NORMALIZED_ES / es).sqrt()));
            &scaled
        } else {
            c
        };
        match &self.mc {
            Some(mc) if self.orthant => {
                // one transmitted point per orbit of the sign group
                let mut sources: Vec<usize> = (0..c.len())
                    .filter(|&i| c.points()[i].iter().all(|v| *v > 0.0))
                    .collect();
                sources.sort_by_key(|&i| c.labels()[i]);
                mc.gmi(c, &sources)
            }
            Some(mc) => mc.gmi(c, &[]),
            None => gmi_maxlog(c, &self.ch).unwrap_or(f64::NEG_INFINITY),
        }
    }
}

/// Movable representation of a constellation under a symmetry mode.
#[derive(Debug, Clone)]
pub(crate) enum Layout {
    Free(Constellation),
    Orthant {
        gens: Vec<[f64; 4]>,
        labels: Vec<u32>,
        map: OrthantBitMap,
    },
}

impl Layout {
    pub(crate) fn new(c: &Constellation, mode: SymmetryMode) -> Result<Self> {
        match mode {
            SymmetryMode::Free => Ok(Layout::Free(c.clone())),
            SymmetryMode::OrthantLocked => {
                let map = OrthantBitMap::prs64();
                let tol = 1e-9 * c.mean_energy().sqrt();
                let (gens, labels) = orthant_generators(c, &map, tol)?;
                Ok(Layout::Orthant { gens, labels, map })
            }
        }
    }

    pub(crate) fn constellation(&self) -> Result<Constellation> {
        match self {
            Layout::Free(c) => Ok(c.clone()),
            Layout::Orthant { gens, labels, map } => orthant_expand(gens, labels, map),
        }
    }

    /// Number of independently movable points.
    pub(crate) fn units(&self) -> usize {
        match self {
            Layout::Free(c) => c.len(),
            Layout::Orthant { gens, .. } => gens.len(),
        }
    }

    pub(crate) fn point(&self, i: usize) -> [f64; 4] {
        match self {
            Layout::Free(c) => c.points()[i],
            Layout::Orthant { gens, .. } => gens[i],
        }
    }

    /// Replaces movable points; `None` when the result is not a valid
    /// constellation (coinciding points, or a generator leaving the open
    /// positive orthant).
    pub(crate) fn with_points(&self, updates: &[(usize, [f64; 4])]) -> Option<Layout> {
        match self {
            Layout::Free(c) => {
                let mut pts = c.points().to_vec();
                for &(i, p) in updates {
                    pts[i] = p;
                }
                c.with_points(pts).ok().map(Layout::Free)
            }
            Layout::Orthant { gens, labels, map } => {
                let mut gens = gens.clone();
                for &(i, p) in updates {
                    gens[i] = p.map(f64::abs);
                }
                let radius = gens.iter().map(|g| crate::scalar::norm2(g)).fold(0.0, f64::max).sqrt();
                if gens.iter().flatten().any(|v| *v < 1e-6 * radius) {
                    return None;
                }
                let next = Layout::Orthant {
                    gens,
                    labels: labels.clone(),
                    map: map.clone(),
                };
                next.constellation().ok().map(|_| next)
            }
        }
    }

    pub(crate) fn swap_labels(&self, i: usize, j: usize) -> Layout {
        match self {
            Layout::Free(c) => {
                let mut labels = c.labels().to_vec();
                labels.swap(i, j);
                Layout::Free(c.with_labels(labels).expect("swap keeps a permutation"))
            }
            Layout::Orthant { gens, labels, map } => {
                let mut labels = labels.clone();
                labels.swap(i, j);
                Layout::Orthant {
                    gens: gens.clone(),
                    labels,
                    map: map.clone(),
                }
            }
        }
    }

    /// Index in the expanded constellation of a representative of unit `i`.
    pub(crate) fn representative(&self, c: &Constellation, i: usize) -> usize {
        match self {
            Layout::Free(_) => i,
            Layout::Orthant { labels, map, .. } => c
                .index_of_label(map.compose(labels[i], 0))
                .expect("expanded constellation holds every label"),
        }
    }
}

/// Angles `(a1, a2, a3)` of a 4D point in hyperspherical coordinates.
pub(crate) fn to_angles(p: &[f64; 4]) -> [f64; 3] {
    [
        (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt().atan2(p[0]),
        (p[2] * p[2] + p[3] * p[3]).sqrt().atan2(p[1]),
        p[3].atan2(p[2]),
    ]
}

/// Point of norm `radius` at the given hyperspherical angles.
pub(crate) fn from_angles(a: &[f64], radius: f64) -> [f64; 4] {
    let (s1, c1) = a[0].sin_cos();
    let (s2, c2) = a[1].sin_cos();
    let (s3, c3) = a[2].sin_cos();
    [radius * c1, radius * s1 * c2, radius * s1 * s2 * c3, radius * s1 * s2 * s3]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_roundtrip() {
        for p in [[1.0f64, 2.0, -3.0, 0.5], [-0.1, 0.0, 0.0, 2.0], [0.3, -0.4, 0.5, -0.6]] {
            let r = crate::scalar::norm2(&p).sqrt();
            let q = from_angles(&to_angles(&p), r);
            for (a, b) in p.iter().zip(&q) {
                assert!((a - b).abs() < 1e-12, "{p:?} {q:?}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            poa_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            snr_db: f64::NAN,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
