//! Monte-Carlo MI/GMI estimation.
//!
//! Samples are drawn in fixed blocks of [`BLOCK`] samples. Block `b` owns the
//! ChaCha8 stream `b` of the run seed, so each sample's transmitted point and
//! noise depend only on `(seed, sample index)`; blocks are reduced in index
//! order and the result is bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{check_normalized, sample_terms, AirEstimate, AwgnSpec, MIN_SAMPLES};
use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use crate::scalar::Real;

const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    mi: f64,
    mi_sq: f64,
    gmi: f64,
    gmi_sq: f64,
}

impl Moments {
    fn add(&mut self, mi: f64, gmi: f64) {
        self.mi += mi;
        self.mi_sq += mi * mi;
        self.gmi += gmi;
        self.gmi_sq += gmi * gmi;
    }

    fn merge(mut self, o: Moments) -> Moments {
        self.mi += o.mi;
        self.mi_sq += o.mi_sq;
        self.gmi += o.gmi;
        self.gmi_sq += o.gmi_sq;
        self
    }
}

/// MI and GMI from the same samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirPair {
    pub mi: AirEstimate,
    pub gmi: AirEstimate,
}

fn estimate(sum: f64, sum_sq: f64, n: usize, seed: u64) -> AirEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    // identical samples (noise-free limit) still carry rounding uncertainty
    let floor = f64::EPSILON * mean.abs().max(1.0);
    AirEstimate {
        value: mean,
        stderr: (var / nf).sqrt().max(floor),
        samples: n,
        seed,
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// MI and GMI estimated jointly from `n` samples.
pub fn air_mc<T: Real>(c: &LabeledConstellation<T>, ch: &AwgnSpec, n: usize, seed: u64) -> Result<AirPair> {
    check_normalized(c)?;
    if n < MIN_SAMPLES {
        return Err(Error::Precondition(format!("{n} samples, at least {MIN_SAMPLES} required")));
    }
    let sigma2 = ch.sigma2();
    let sigma = T::lit(sigma2.sqrt());
    let inv = T::lit(0.5 / sigma2);
    let size = c.len();
    let points = c.points();
    let labels = c.labels();
    let bits = c.bits_per_symbol();
    let blocks = n.div_ceil(BLOCK);

    let parts: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let count = BLOCK.min(n - b * BLOCK);
            let mut dist = vec![T::zero(); size];
            let mut acc = Moments::default();
            for _ in 0..count {
                let tx = rng.random_range(0..size);
                let z = [0; 4].map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    T::lit(g) * sigma
                });
                let (mi, gmi) = sample_terms(points, labels, bits, tx, z, inv, &mut dist);
                acc.add(mi, gmi);
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(AirPair {
        mi: estimate(total.mi, total.mi_sq, n, seed),
        gmi: estimate(total.gmi, total.gmi_sq, n, seed),
    })
}

/// Mutual information `I(X;Y)` in bits per 4D symbol.
pub fn mi_mc<T: Real>(c: &LabeledConstellation<T>, ch: &AwgnSpec, n: usize, seed: u64) -> Result<AirEstimate> {
    Ok(air_mc(c, ch, n, seed)?.mi)
}

/// Generalized mutual information (bit-wise decoder rate) in bits per 4D
/// symbol.
pub fn gmi_mc<T: Real>(c: &LabeledConstellation<T>, ch: &AwgnSpec, n: usize, seed: u64) -> Result<AirEstimate> {
    Ok(air_mc(c, ch, n, seed)?.gmi)
}

/// One row of an SNR sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub mi: f64,
    pub mi_stderr: f64,
    pub gmi: f64,
    pub gmi_stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// MI/GMI over a list of SNRs, every point with the same seed (common random
/// numbers across the sweep).
pub fn air_sweep<T: Real>(
    c: &LabeledConstellation<T>,
    snrs_db: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    snrs_db
        .iter()
        .map(|&snr| {
            let r = air_mc(c, &AwgnSpec::new(snr)?, n, seed)?;
            Ok(SweepRow {
                snr_db: snr,
                mi: r.mi.value,
                mi_stderr: r.mi.stderr,
                gmi: r.gmi.value,
                gmi_stderr: r.gmi.stderr,
                samples: n,
                seed,
            })
        })
        .collect()
}

/// GMI evaluated on a frozen set of noise realizations.
///
/// Every transmitted point `s` listed in `sources` is paired with the same
/// `per_source` standard-normal noise vectors, so the estimate is a smooth,
/// deterministic function of the constellation coordinates. Used to score
/// candidate geometries inside optimization loops.
#[derive(Debug, Clone)]
pub struct CommonNoiseGmi {
    noise: Vec<[f64; 4]>,
    per_source: usize,
    sigma2: f64,
}

impl CommonNoiseGmi {
    /// `slots` independent noise sets of `per_source` vectors each.
    pub fn new(ch: &AwgnSpec, slots: usize, per_source: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = (0..slots * per_source)
            .map(|_| [0; 4].map(|_| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        Self {
            noise,
            per_source,
            sigma2: ch.sigma2(),
        }
    }

    pub fn slots(&self) -> usize {
        self.noise.len() / self.per_source.max(1)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Mean GMI over the transmitted points in `sources` (averaged over all
    /// points when `sources` is empty). Source `k` uses noise slot
    /// `k % slots`.
    pub fn gmi<T: Real>(&self, c: &LabeledConstellation<T>, sources: &[usize]) -> f64 {
        let all: Vec<usize>;
        let sources = if sources.is_empty() {
            all = (0..c.len()).collect();
            &all
        } else {
            sources
        };
        let sigma = T::lit(self.sigma2.sqrt());
        let inv = T::lit(0.5 / self.sigma2);
        let slots = self.slots();
        let sums: Vec<f64> = sources
            .par_iter()
            .enumerate()
            .map(|(k, &tx)| {
                let mut dist = vec![T::zero(); c.len()];
                let base = (k % slots) * self.per_source;
                self.noise[base..base + self.per_source]
                    .iter()
                    .map(|z| {
                        let z = z.map(|v| T::lit(v) * sigma);
                        sample_terms(c.points(), c.labels(), c.bits_per_symbol(), tx, z, inv, &mut dist).1
                    })
                    .sum()
            })
            .collect();
        sums.iter().sum::<f64>() / (sources.len() * self.per_source) as f64
    }
}
