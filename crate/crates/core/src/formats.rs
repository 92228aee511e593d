//! Built-in 6 bit/4D-sym formats: the polarization-ring-switching family and
//! the baselines it is compared against.

use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use crate::orthant::{orthant_expand, OrthantBitMap};
use crate::scalar::Real;

/// Energy every built-in format is normalized to (unit energy per
/// polarization).
pub const DEFAULT_ES: f64 = 2.0;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 7] = ["prs64", "table1", "pm8qam", "pm8psk", "pm16qam", "2a8psk", "sp12qam"];

/// Ring ratio and angle of the design point at 8 dB.
pub const PRS_OPT_R: f64 = 0.54;
pub const PRS_OPT_THETA_DEG: f64 = 25.5;

/// Ring ratio used for the 4D two-amplitude 8PSK baseline.
pub const A8PSK_RING_RATIO: f64 = 0.65;

/// Coordinate magnitudes `(nu1, nu2, nu3)` as printed with the reference
/// table (two decimals).
pub const TABLE1_NU_ROUNDED: [f64; 3] = [0.87, 1.0, 2.47];

/// Two-parameter description of the ring-switching family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrsParams<T> {
    /// Ring ratio `R2 / R1` in `(0, 1]`.
    pub r: T,
    /// Angle in degrees in `(0, 45)` between the quadrant diagonal and the
    /// outer-ring points.
    pub theta_deg: T,
    /// Target mean energy.
    pub es: T,
}

impl<T: Real> PrsParams<T> {
    pub fn new(r: T, theta_deg: T, es: T) -> Result<Self> {
        let p = Self { r, theta_deg, es };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > T::zero() && self.r <= T::one()) {
            return Err(Error::InvalidParameter(format!("ring ratio {} outside (0, 1]", self.r)));
        }
        if !(self.theta_deg > T::zero() && self.theta_deg < T::lit(45.0)) {
            return Err(Error::InvalidParameter(format!(
                "angle {} deg outside (0, 45)",
                self.theta_deg
            )));
        }
        if !(self.es > T::zero() && self.es.is_finite()) {
            return Err(Error::InvalidParameter(format!("energy {} must be > 0", self.es)));
        }
        Ok(())
    }

    /// `(nu1, nu2, nu3)` for an outer radius `R1 = 1`.
    pub fn nu(&self) -> [T; 3] {
        let a = (T::lit(45.0) + self.theta_deg).to_radians();
        [a.cos(), self.r / T::SQRT_2(), a.sin()]
    }

    /// True when the outer points sit within `1e-6 R1` of the coordinate
    /// axes, where the format degenerates towards a 2-ring QPSK-like layout.
    pub fn is_near_degenerate(&self) -> bool {
        self.nu()[0] < T::lit(1e-6)
    }
}

/// Generators `(nu1,nu3,nu2,nu2)`, `(nu3,nu1,nu2,nu2)`, `(nu2,nu2,nu1,nu3)`,
/// `(nu2,nu2,nu3,nu1)` and their intra-orthant labels `(b3, b6)`.
pub fn prs_generators<T: Real>(nu: [T; 3]) -> ([[T; 4]; 4], [u32; 4]) {
    let [n1, n2, n3] = nu;
    (
        [[n1, n3, n2, n2], [n3, n1, n2, n2], [n2, n2, n1, n3], [n2, n2, n3, n1]],
        [0b00, 0b11, 0b10, 0b01],
    )
}

/// Ring-switching constellation for explicit coordinate magnitudes,
/// normalized to `es`.
pub fn prs_from_nu<T: Real>(nu: [T; 3], es: T) -> Result<LabeledConstellation<T>> {
    let (gens, labels) = prs_generators(nu);
    orthant_expand(&gens, &labels, &OrthantBitMap::prs64())?.normalize(es)
}

/// Member of the ring-switching family for the given ring ratio and angle.
pub fn prs_from_params<T: Real>(p: &PrsParams<T>) -> Result<LabeledConstellation<T>> {
    p.validate()?;
    prs_from_nu(p.nu(), p.es)
}

/// Recovers `(r, theta, es)` from a ring-switching constellation.
pub fn fit_prs_params<T: Real>(c: &LabeledConstellation<T>) -> Result<PrsParams<T>> {
    let p = c
        .points()
        .first()
        .ok_or_else(|| Error::InvalidConstellation("empty".into()))?;
    let (outer, inner) = {
        let e1 = p[0] * p[0] + p[1] * p[1];
        let e2 = p[2] * p[2] + p[3] * p[3];
        if e1 >= e2 {
            ([p[0], p[1]], [p[2], p[3]])
        } else {
            ([p[2], p[3]], [p[0], p[1]])
        }
    };
    let r1 = outer[0].hypot(outer[1]);
    let r2 = inner[0].hypot(inner[1]);
    let lo = outer[0].abs().min(outer[1].abs());
    let hi = outer[0].abs().max(outer[1].abs());
    let theta = hi.atan2(lo).to_degrees() - T::lit(45.0);
    PrsParams::new(r2 / r1, theta, c.mean_energy())
}

const TABLE1: &str = "\
+1 +3 +2 +2 000000  +1 +3 -2 +2 000010
+1 +3 -2 -2 000110  +1 +3 +2 -2 000100
-1 +3 +2 +2 010000  -1 +3 -2 +2 010010
-1 +3 -2 -2 010110  -1 +3 +2 -2 010100
-3 +1 +2 +2 011001  -3 +1 -2 +2 011011
-3 +1 -2 -2 011111  -3 +1 +2 -2 011101
-3 -1 +2 +2 111001  -3 -1 -2 +2 111011
-3 -1 -2 -2 111111  -3 -1 +2 -2 111101
-1 -3 +2 +2 110000  -1 -3 -2 +2 110010
-1 -3 -2 -2 110110  -1 -3 +2 -2 110100
+1 -3 +2 +2 100000  +1 -3 -2 +2 100010
+1 -3 -2 -2 100110  +1 -3 +2 -2 100100
+3 -1 +2 +2 101001  +3 -1 -2 +2 101011
+3 -1 -2 -2 101111  +3 -1 +2 -2 101101
+3 +1 +2 +2 001001  +3 +1 -2 +2 001011
+3 +1 -2 -2 001111  +3 +1 +2 -2 001101
+2 +2 +1 +3 001000  +2 +2 -1 +3 001010
+2 +2 -3 +1 000011  +2 +2 -3 -1 000111
+2 +2 -1 -3 001110  +2 +2 +1 -3 001100
+2 +2 +3 -1 000101  +2 +2 +3 +1 000001
-2 +2 +1 +3 011000  -2 +2 -1 +3 011010
-2 +2 -3 +1 010011  -2 +2 -3 -1 010111
-2 +2 -1 -3 011110  -2 +2 +1 -3 011100
-2 +2 +3 -1 010101  -2 +2 +3 +1 010001
-2 -2 +1 +3 111000  -2 -2 -1 +3 111010
-2 -2 -3 +1 110011  -2 -2 -3 -1 110111
-2 -2 -1 -3 111110  -2 -2 +1 -3 111100
-2 -2 +3 -1 110101  -2 -2 +3 +1 110001
+2 -2 +1 +3 101000  +2 -2 -1 +3 101010
+2 -2 -3 +1 100011  +2 -2 -3 -1 100111
+2 -2 -1 -3 101110  +2 -2 +1 -3 101100
+2 -2 +3 -1 100101  +2 -2 +3 +1 100001";

/// Reference table rows as `(signed nu index per coordinate, label)`.
pub fn table1_entries() -> Vec<([i8; 4], u32)> {
    TABLE1
        .split_whitespace()
        .collect::<Vec<_>>()
        .chunks(5)
        .map(|row| {
            let coords = [0, 1, 2, 3].map(|k| row[k].parse::<i8>().expect("table coordinate"));
            let label = u32::from_str_radix(row[4], 2).expect("table label");
            (coords, label)
        })
        .collect()
}

/// The reference table instantiated with explicit `(nu1, nu2, nu3)`, not
/// normalized.
pub fn table1_with_nu<T: Real>(nu: [T; 3]) -> Result<LabeledConstellation<T>> {
    let (points, labels): (Vec<_>, Vec<_>) = table1_entries()
        .into_iter()
        .map(|(idx, l)| {
            let p = idx.map(|k| {
                let v = nu[(k.unsigned_abs() - 1) as usize];
                if k < 0 {
                    -v
                } else {
                    v
                }
            });
            (p, l)
        })
        .unzip();
    LabeledConstellation::new(points, labels)
}

/// The reference 64-point table, row order and labels verbatim, with the
/// coordinate magnitudes of the `r = 0.54`, `theta = 25.5 deg` design point
/// scaled to `nu2 = 1` (`nu1 = 0.874`, `nu3 = 2.469`; these round to the
/// printed 0.87 and 2.47). Not normalized.
pub fn table1_reference<T: Real>() -> LabeledConstellation<T> {
    let p = PrsParams {
        r: T::lit(PRS_OPT_R),
        theta_deg: T::lit(PRS_OPT_THETA_DEG),
        es: T::lit(DEFAULT_ES),
    };
    let nu = p.nu();
    let nu = nu.map(|v| v / nu[1]);
    table1_with_nu(nu).expect("reference table is a valid constellation")
}

/// Binary reflected Gray code.
pub fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Polarization-multiplexed product of a 2D format: every pair of 2D points,
/// label = `(label_x << bits) | label_y`, normalized to `es`.
pub fn pm_product<T: Real>(base: &[([T; 2], u32)], es: T) -> Result<LabeledConstellation<T>> {
    if !base.len().is_power_of_two() {
        return Err(Error::InvalidConstellation("2D base size is not a power of two".into()));
    }
    let bits = base.len().trailing_zeros();
    let mut points = Vec::with_capacity(base.len() * base.len());
    let mut labels = Vec::with_capacity(points.capacity());
    for (a, la) in base {
        for (b, lb) in base {
            points.push([a[0], a[1], b[0], b[1]]);
            labels.push((la << bits) | lb);
        }
    }
    LabeledConstellation::new(points, labels)?.normalize(es)
}

fn polar<T: Real>(radius: T, deg: f64) -> [T; 2] {
    let a = T::lit(deg.to_radians());
    [radius * a.cos(), radius * a.sin()]
}

/// Circular 8QAM: inner square at 45 + 90k degrees and an outer cross on the
/// axes, with the outer radius chosen so inner-inner and inner-outer
/// neighbors are equidistant. `b1` selects the ring, `(b2, b3)` the Gray
/// coded quadrant; each inner point shares its quadrant bits with the outer
/// point counter-clockwise before it.
pub fn qam8_2d<T: Real>() -> Vec<([T; 2], u32)> {
    let inner = T::one();
    let outer = inner * (T::SQRT_2() + T::lit(6.0).sqrt()) / T::lit(2.0);
    (0..4u32)
        .flat_map(|k| {
            let g = gray(k);
            [
                (polar(inner, 45.0 + 90.0 * k as f64), g),
                (polar(outer, 90.0 * k as f64), 0b100 | g),
            ]
        })
        .collect()
}

/// Gray-labeled 8PSK.
pub fn psk8_2d<T: Real>() -> Vec<([T; 2], u32)> {
    (0..8u32).map(|k| (polar(T::one(), 45.0 * k as f64), gray(k))).collect()
}

/// Gray-labeled square QAM with `side^2` points (`side` a power of two).
pub fn square_qam_2d<T: Real>(side: u32) -> Vec<([T; 2], u32)> {
    let bits = side.trailing_zeros();
    let level = |k: u32| T::lit(2.0 * k as f64 - (side as f64 - 1.0));
    let mut out = Vec::new();
    for i in 0..side {
        for q in 0..side {
            out.push(([level(i), level(q)], (gray(i) << bits) | gray(q)));
        }
    }
    out
}

pub fn pm8qam<T: Real>() -> LabeledConstellation<T> {
    pm_product(&qam8_2d(), T::lit(DEFAULT_ES)).expect("valid PM-8QAM")
}

pub fn pm8psk<T: Real>() -> LabeledConstellation<T> {
    pm_product(&psk8_2d(), T::lit(DEFAULT_ES)).expect("valid PM-8PSK")
}

pub fn pm16qam<T: Real>() -> LabeledConstellation<T> {
    pm_product(&square_qam_2d(4), T::lit(DEFAULT_ES)).expect("valid PM-16QAM")
}

pub fn pm_qpsk<T: Real>() -> LabeledConstellation<T> {
    pm_product(&square_qam_2d(2), T::lit(DEFAULT_ES)).expect("valid PM-QPSK")
}

/// 4D two-amplitude 8PSK: 8PSK phases `k1, k2` in each polarization, Gray
/// labeled (`b1..b3` from `k1`, `b4..b6` from `k2`). The ring assignment is
/// fixed by the parity of `k1 + k2`: even parity puts the first polarization
/// on the outer ring and the second on the inner one, odd parity swaps them,
/// so every symbol has the same 4D energy.
pub fn reconstruct_2a8psk<T: Real>(ring_ratio: T) -> Result<LabeledConstellation<T>> {
    if !(ring_ratio > T::zero() && ring_ratio < T::one()) {
        return Err(Error::InvalidParameter(format!("ring ratio {ring_ratio} outside (0, 1)")));
    }
    let (outer, inner) = (T::one(), ring_ratio);
    let mut points = Vec::with_capacity(64);
    let mut labels = Vec::with_capacity(64);
    for k1 in 0..8u32 {
        for k2 in 0..8u32 {
            let (r1, r2) = if (k1 + k2) % 2 == 0 { (outer, inner) } else { (inner, outer) };
            let a = polar(r1, 45.0 * k1 as f64);
            let b = polar(r2, 45.0 * k2 as f64);
            points.push([a[0], a[1], b[0], b[1]]);
            labels.push((gray(k1) << 3) | gray(k2));
        }
    }
    LabeledConstellation::new(points, labels)?.normalize(T::lit(DEFAULT_ES))
}

/// 4D 64-point set-partitioned 12QAM: pairs of 12QAM points (16QAM without
/// corners) from the same checkerboard class, excluding the pairs where both
/// polarizations use the inner ring. Labels follow generation order; the
/// construction is only returned when its minimum distance bucket matches
/// the published fingerprint (`d2 = 1`, 272 pairs at `E_s = 2`).
pub fn sp12qam<T: Real>() -> Result<LabeledConstellation<T>> {
    let pts2d: Vec<(i32, i32)> = [-3i32, -1, 1, 3]
        .iter()
        .flat_map(|&x| [-3i32, -1, 1, 3].map(move |y| (x, y)))
        .filter(|&(x, y)| !(x.abs() == 3 && y.abs() == 3))
        .collect();
    let class = |p: &(i32, i32)| ((p.0 + p.1) / 2).rem_euclid(2);
    let inner = |p: &(i32, i32)| p.0.abs() == 1 && p.1.abs() == 1;
    let mut points = Vec::new();
    for a in &pts2d {
        for b in &pts2d {
            if class(a) == class(b) && !(inner(a) && inner(b)) {
                points.push([a.0, a.1, b.0, b.1].map(|v| T::lit(v as f64)));
            }
        }
    }
    let labels = (0..points.len() as u32).collect();
    let c = LabeledConstellation::new(points, labels)?.normalize(T::lit(DEFAULT_ES))?;
    let spec = c.distance_spectrum();
    let msed = spec.msed().expect("non-empty");
    if (msed.d2 - T::one()).abs() > T::lit(1e-6) || msed.count != 272 {
        return Err(Error::InvalidConstellation(format!(
            "set-partitioned 12QAM fingerprint mismatch: MSED {} with {} pairs",
            msed.d2, msed.count
        )));
    }
    Ok(c)
}

/// Looks up a built-in format by name; every format is returned normalized
/// to `E_s = 2`.
pub fn builtin<T: Real>(name: &str) -> Result<LabeledConstellation<T>> {
    let es = T::lit(DEFAULT_ES);
    match name {
        "prs64" => prs_from_params(&PrsParams::new(T::lit(PRS_OPT_R), T::lit(PRS_OPT_THETA_DEG), es)?),
        "table1" => table1_reference::<T>().normalize(es),
        "pm8qam" => Ok(pm8qam()),
        "pm8psk" => Ok(pm8psk()),
        "pm16qam" => Ok(pm16qam()),
        "pmqpsk" => Ok(pm_qpsk()),
        "2a8psk" => reconstruct_2a8psk(T::lit(A8PSK_RING_RATIO)),
        "sp12qam" => sp12qam(),
        other => Err(Error::UnknownFormat(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn table1_matches_orthant_rule() {
        // the transcribed rows must coincide with the sign/label construction
        let nu = [0.87, 1.0, 2.47];
        let table = table1_with_nu(nu).unwrap();
        let (gens, labels) = prs_generators(nu);
        let built = orthant_expand(&gens, &labels, &OrthantBitMap::prs64()).unwrap();
        for (p, l) in built.points().iter().zip(built.labels()) {
            let i = table.index_of_label(*l).unwrap();
            assert_eq!(&table.points()[i], p, "label {l:06b}");
        }
    }

    #[test]
    fn table1_first_row_and_labels() {
        let t = table1_reference::<f64>();
        assert_eq!(t.labels()[0], 0);
        let [n1, n2, n3] = [t.points()[0][0], t.points()[0][2], t.points()[0][1]];
        assert!(n1 > 0.0 && n3 > 0.0);
        assert_relative_eq!(n2, 1.0);
        let mut sorted = t.labels().to_vec();
        sorted.sort();
        assert_eq!(sorted, (0..64).collect::<Vec<_>>());
        // rounds to the printed magnitudes
        assert_eq!((n1 * 100.0).round() / 100.0, 0.87);
        assert_eq!((n3 * 100.0).round() / 100.0, 2.47);
    }

    #[test]
    fn msed_pairs_of_table1_flip_nu1_sign() {
        let t = table1_reference::<f64>().normalize(2.0).unwrap();
        let a = t.index_of_label(0b000000).unwrap();
        let b = t.index_of_label(0b010000).unwrap();
        let d2 = crate::scalar::dist2(&t.points()[a], &t.points()[b]);
        assert_relative_eq!(d2, t.distance_spectrum().msed().unwrap().d2, max_relative = 1e-9);
    }

    #[test]
    fn prs_params_bounds() {
        assert!(PrsParams::new(0.54, 50.0, 2.0).is_err());
        assert!(PrsParams::new(0.0, 25.0, 2.0).is_err());
        assert!(PrsParams::new(1.2, 25.0, 2.0).is_err());
        assert!(PrsParams::new(0.5, 25.0, -1.0).is_err());
        assert!(PrsParams::new(1.0, 44.9, 2.0).is_ok());
        assert!(PrsParams::new(0.5, 44.99999999, 2.0).unwrap().is_near_degenerate());
    }

    #[test]
    fn design_point_nu_ratios() {
        let nu = PrsParams::<f64>::new(0.54, 25.5, 2.0).unwrap().nu();
        let nu = nu.map(|v| v / nu[1]);
        assert!((nu[0] - 0.87).abs() < 0.005);
        assert!((nu[2] - 2.47).abs() < 0.005);
        assert!((nu[2] / nu[0] - 2.83).abs() < 0.01);
    }

    #[test]
    fn colliding_generators_error() {
        // nu1 == nu3 maps two generators onto each other
        assert!(matches!(
            prs_from_nu([1.0, 0.5, 1.0], 2.0),
            Err(Error::DuplicatePoint(_, _))
        ));
    }

    #[test]
    fn pm_formats_are_normalized() {
        for c in [pm8qam::<f64>(), pm8psk(), pm16qam(), pm_qpsk()] {
            assert_relative_eq!(c.mean_energy(), 2.0, max_relative = 1e-12);
        }
        assert_eq!(pm16qam::<f64>().len(), 256);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin::<f64>("pm32qam"), Err(Error::UnknownFormat(_))));
        for name in BUILTIN_NAMES {
            let expected = if name == "pm16qam" { 256 } else { 64 };
            assert_eq!(builtin::<f64>(name).unwrap().len(), expected, "{name}");
        }
    }

    #[test]
    fn a8psk_rejects_bad_ratio() {
        assert!(reconstruct_2a8psk(1.0).is_err());
        assert!(reconstruct_2a8psk(0.0).is_err());
    }
}
