//! Gauss-Hermite cross-check for the Monte-Carlo estimators.

use super::hermite::gauss_hermite;
use super::{check_normalized, sample_terms, AwgnSpec};
use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;

/// `(MI, GMI)` by tensor-product Gauss-Hermite quadrature with `nodes` nodes
/// per real dimension. Costs `M^2 nodes^4` distance evaluations.
pub fn air_quadrature<T: Real>(c: &LabeledConstellation<T>, ch: &AwgnSpec, nodes: usize) -> Result<(f64, f64)> {
    check_normalized(c)?;
    if nodes == 0 {
        return Err(Error::InvalidParameter("need at least one quadrature node".into()));
    }
    let (x, w) = gauss_hermite(nodes);
    let scale = (2.0 * ch.sigma2()).sqrt();
    let inv = T::lit(0.5 / ch.sigma2());
    let norm = std::f64::consts::PI.powi(2);
    let per_point: Vec<(f64, f64)> = (0..c.len())
        .into_par_iter()
        .map(|tx| {
            let mut dist = vec![T::zero(); c.len()];
            let (mut mi, mut gmi) = (0.0, 0.0);
            for a in 0..nodes {
                for b in 0..nodes {
                    for e in 0..nodes {
                        for f in 0..nodes {
                            let wt = w[a] * w[b] * w[e] * w[f] / norm;
                            let z = [x[a], x[b], x[e], x[f]].map(|v| T::lit(v * scale));
                            let (i, g) =
                                sample_terms(c.points(), c.labels(), c.bits_per_symbol(), tx, z, inv, &mut dist);
                            mi += wt * i;
                            gmi += wt * g;
                        }
                    }
                }
            }
            (mi, gmi)
        })
        .collect();
    let n = c.len() as f64;
    let (mi, gmi) = per_point.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((mi / n, gmi / n))
}
