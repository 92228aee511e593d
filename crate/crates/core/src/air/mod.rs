//! Achievable information rates of a labeled constellation over the
//! memoryless 4D AWGN channel.
//!
//! The SNR is defined per two real dimensions for a constellation with mean
//! energy `E_s = 2`, so the noise variance per real dimension is
//! `10^(-snr_db/10) / 2`. Every estimator checks the normalization first.

mod gain;
mod hermite;
mod maxlog;
mod mc;
mod quadrature;

pub use gain::{snr_at_rate, snr_gain_at_rate, GmiCurve};
pub use hermite::gauss_hermite;
pub use maxlog::{gmi_maxlog, maxlog_symbol_costs, pair_bit_loss};
pub use mc::{air_mc, air_sweep, gmi_mc, mi_mc, AirPair, CommonNoiseGmi, SweepRow};
pub use quadrature::air_quadrature;

use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mean energy the estimators expect.
pub const NORMALIZED_ES: f64 = 2.0;

/// Smallest Monte-Carlo sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 10_000;

/// Default Monte-Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnSpec {
    pub snr_db: f64,
}

impl AwgnSpec {
    pub fn new(snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidParameter(format!("SNR {snr_db} dB is not finite")));
        }
        Ok(Self { snr_db })
    }

    /// Noise variance per real dimension.
    pub fn sigma2(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0) / 2.0
    }
}

/// A Monte-Carlo rate estimate in bits per 4D symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

pub(crate) fn check_normalized<T: Real>(c: &LabeledConstellation<T>) -> Result<()> {
    let es = c.mean_energy().as_f64();
    let tol = 1e-6_f64.max(T::epsilon().as_f64() * 64.0);
    if ((es - NORMALIZED_ES) / NORMALIZED_ES).abs() > tol {
        return Err(Error::Precondition(format!(
            "constellation mean energy is {es}, expected {NORMALIZED_ES}; normalize it first"
        )));
    }
    Ok(())
}

/// Per-sample information terms for one transmitted point and one noise
/// realization: `(mi_term, gmi_term)`, both in bits.
///
/// `w_j = exp(-(|y - s_j|^2 - min_k |y - s_k|^2) / (2 sigma^2))` keeps the
/// dominant term at 1 so the sums never underflow.
#[inline]
pub(crate) fn sample_terms<T: Real>(
    points: &[[T; 4]],
    labels: &[u32],
    bits: u32,
    tx: usize,
    noise: [T; 4],
    inv_two_sigma2: T,
    dist: &mut [T],
) -> (f64, f64) {
    let s = points[tx];
    let y = [s[0] + noise[0], s[1] + noise[1], s[2] + noise[2], s[3] + noise[3]];
    let mut dmin = T::infinity();
    for (d, p) in dist.iter_mut().zip(points) {
        let v = crate::scalar::dist2(&y, p);
        *d = v;
        if v < dmin {
            dmin = v;
        }
    }
    let mut total = T::zero();
    let mut ones = [T::zero(); 16];
    let mut zeros = [T::zero(); 16];
    let m = bits as usize;
    for (d, &l) in dist.iter().zip(labels) {
        let w = (-(*d - dmin) * inv_two_sigma2).exp();
        total = total + w;
        for (k, (o, z)) in ones.iter_mut().zip(zeros.iter_mut()).take(m).enumerate() {
            if (l >> (m - 1 - k)) & 1 == 1 {
                *o = *o + w;
            } else {
                *z = *z + w;
            }
        }
    }
    let own = (-(dist[tx] - dmin) * inv_two_sigma2).exp();
    let total_f = total.as_f64();
    let mi = m as f64 - (total_f / own.as_f64()).log2();
    let lx = labels[tx];
    let mut gmi = 0.0;
    for k in 0..m {
        let same = if (lx >> (m - 1 - k)) & 1 == 1 { ones[k] } else { zeros[k] };
        gmi += 1.0 - (total_f / same.as_f64()).log2();
    }
    (mi, gmi)
}
