//! Horizontal (SNR) gaps between rate curves.

use super::SweepRow;
use crate::error::{Error, Result};

/// GMI as a function of SNR, sampled on an increasing SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GmiCurve {
    pub snr_db: Vec<f64>,
    pub gmi: Vec<f64>,
}

impl GmiCurve {
    pub fn new(snr_db: Vec<f64>, gmi: Vec<f64>) -> Result<Self> {
        if snr_db.len() != gmi.len() || snr_db.len() < 2 {
            return Err(Error::InvalidParameter("curve needs at least two (snr, gmi) points".into()));
        }
        if snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("curve SNR grid must be strictly increasing".into()));
        }
        Ok(Self { snr_db, gmi })
    }

    pub fn from_sweep(rows: &[SweepRow]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.snr_db).collect(), rows.iter().map(|r| r.gmi).collect())
    }
}

/// SNR at which `curve` reaches `rate`, by linear interpolation on the
/// running maximum of the sampled GMI (which makes the curve monotone even
/// when Monte-Carlo noise produces small dips).
pub fn snr_at_rate(curve: &GmiCurve, rate: f64) -> Result<f64> {
    let mut envelope = curve.gmi.clone();
    for k in 1..envelope.len() {
        envelope[k] = envelope[k].max(envelope[k - 1]);
    }
    let first = envelope[0];
    let last = *envelope.last().expect("non-empty");
    if rate < first || rate > last {
        return Err(Error::OutOfRange(format!(
            "rate {rate} outside the curve range [{first}, {last}]"
        )));
    }
    for k in 0..envelope.len() - 1 {
        let (g0, g1) = (envelope[k], envelope[k + 1]);
        if rate >= g0 && rate <= g1 {
            if g1 == g0 {
                return Ok(curve.snr_db[k]);
            }
            let t = (rate - g0) / (g1 - g0);
            return Ok(curve.snr_db[k] + t * (curve.snr_db[k + 1] - curve.snr_db[k]));
        }
    }
    Ok(*curve.snr_db.last().expect("non-empty"))
}

/// SNR advantage of `a` over `b` at `rate`: `snr_b(rate) - snr_a(rate)` in dB.
pub fn snr_gain_at_rate(a: &GmiCurve, b: &GmiCurve, rate: f64) -> Result<f64> {
    Ok(snr_at_rate(b, rate)? - snr_at_rate(a, rate)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(offset: f64) -> GmiCurve {
        let snr: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let gmi = snr.iter().map(|s| 0.5 * (s - offset)).collect();
        GmiCurve::new(snr, gmi).unwrap()
    }

    #[test]
    fn identical_curves_have_zero_gain() {
        let c = line(0.0);
        assert_eq!(snr_gain_at_rate(&c, &c, 2.3).unwrap(), 0.0);
    }

    #[test]
    fn shifted_curve_gain() {
        let gain = snr_gain_at_rate(&line(0.0), &line(1.5), 2.0).unwrap();
        assert!((gain - 1.5).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_rate() {
        assert!(matches!(snr_at_rate(&line(0.0), 6.0), Err(Error::OutOfRange(_))));
        assert!(matches!(snr_at_rate(&line(0.0), -1.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn exact_sample_point() {
        assert_eq!(snr_at_rate(&line(0.0), 2.0).unwrap(), 4.0);
    }

    #[test]
    fn dips_are_flattened() {
        let c = GmiCurve::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 2.0, 1.9, 3.0]).unwrap();
        assert!((snr_at_rate(&c, 1.95).unwrap() - 0.95).abs() < 1e-12);
        assert!(GmiCurve::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }
}
