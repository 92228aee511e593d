//! Deterministic max-log GMI surrogate.
//!
//! For transmitted point `x` and bit `i`, the max-log bit metric is decided
//! by the closest point of the opposite subset `S_{i, 1-b_i(x)}`. A pair at
//! squared distance `d^2` produces the Gaussian LLR `L ~ N(mu, 2 mu)` with
//! `mu = d^2 / (2 sigma^2)`, whose bit loss is
//! `psi(mu) = E[log2(1 + exp(-L))]`. The surrogate is
//!
//! ```text
//! G_ml = m - (1/M) sum_x sum_i min(1, N_i(x) psi(d_i(x)^2 / (2 sigma^2)))
//! ```
//!
//! where `d_i(x)` is the nearest opposite-subset distance and `N_i(x)` the
//! number of opposite-subset points at that distance.

use super::hermite::gauss_hermite;
use super::{check_normalized, AwgnSpec};
use crate::constellation::LabeledConstellation;
use crate::error::Result;
use crate::scalar::{dist2, Real};
use std::sync::OnceLock;

const HERMITE_NODES: usize = 48;

fn nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_hermite(HERMITE_NODES))
}

/// Expected bit loss `E[log2(1 + e^-L)]` of a binary decision between two
/// points whose LLR has mean `mu` and variance `2 mu`.
pub fn pair_bit_loss(mu: f64) -> f64 {
    if mu <= 0.0 {
        return 1.0;
    }
    let (x, w) = nodes();
    let s = 2.0 * mu.sqrt();
    let total: f64 = x
        .iter()
        .zip(w)
        .map(|(x, w)| {
            let l = mu + s * x;
            // ln(1 + e^-l) without overflow
            let soft = if l > 0.0 { (-l).exp().ln_1p() } else { -l + l.exp().ln_1p() };
            w * soft
        })
        .sum();
    total / (std::f64::consts::PI.sqrt() * std::f64::consts::LN_2)
}

/// Per-symbol cost `sum_i min(1, N_i(x) psi(.))`, the quantity the binary
/// switching algorithm ranks symbols by.
pub fn maxlog_symbol_costs<T: Real>(c: &LabeledConstellation<T>, ch: &AwgnSpec) -> Vec<f64> {
    let sigma2 = ch.sigma2();
    let m = c.bits_per_symbol();
    let tol = c.mean_energy().as_f64() * 1e-9;
    let pts = c.points();
    let labels = c.labels();
    (0..c.len())
        .map(|x| {
            let mut nearest = vec![(f64::INFINITY, 0usize); m as usize];
            for j in 0..c.len() {
                if j == x {
                    continue;
                }
                let diff = labels[x] ^ labels[j];
                if diff == 0 {
                    continue;
                }
                let d = dist2(&pts[x], &pts[j]).as_f64();
                for (k, slot) in nearest.iter_mut().enumerate() {
                    if (diff >> (m - 1 - k as u32)) & 1 == 0 {
                        continue;
                    }
                    if d < slot.0 - tol {
                        *slot = (d, 1);
                    } else if (d - slot.0).abs() <= tol {
                        slot.1 += 1;
                    }
                }
            }
            nearest
                .iter()
                .map(|&(d, n)| (n as f64 * pair_bit_loss(d / (2.0 * sigma2))).min(1.0))
                .sum()
        })
        .collect()
}

/// Max-log GMI surrogate in bits per 4D symbol.
pub fn gmi_maxlog<T: Real>(c: &LabeledConstellation<T>, ch: &AwgnSpec) -> Result<f64> {
    check_normalized(c)?;
    let costs = maxlog_symbol_costs(c, ch);
    Ok(c.bits_per_symbol() as f64 - costs.iter().sum::<f64>() / c.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_limits() {
        assert_eq!(pair_bit_loss(0.0), 1.0);
        assert!(pair_bit_loss(1e-9) > 0.999);
        assert!(pair_bit_loss(200.0) < 1e-20);
        let mut prev = 1.0;
        for k in 1..60 {
            let v = pair_bit_loss(k as f64 * 0.25);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn loss_matches_brute_force_expectation() {
        // direct Riemann sum of the Gaussian expectation
        let mu = 1.7_f64;
        let sd = (2.0 * mu).sqrt();
        let steps = 200_000;
        let (lo, hi) = (mu - 12.0 * sd, mu + 12.0 * sd);
        let h = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for k in 0..steps {
            let l = lo + (k as f64 + 0.5) * h;
            let pdf = (-(l - mu).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
            acc += pdf * (1.0 + (-l).exp()).log2() * h;
        }
        assert!((pair_bit_loss(mu) - acc).abs() < 1e-9);
    }
}
