//! Labeled 4D constellations and their structural analysis.
//!
//! A [`LabeledConstellation`] is the pair of an `M x 4` coordinate matrix and a
//! bijective `m`-bit labeling (`M = 2^m`). Bit `b1` of a label is its most
//! significant bit. Coordinates `[x1, x2, x3, x4]` are the in-phase and
//! quadrature components of the first polarization followed by those of the
//! second polarization.

use crate::error::{Error, Result};
use crate::scalar::{dist2, norm2, Real};

/// One of the two polarizations of a 4D point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// Coordinates `x1, x2`.
    X,
    /// Coordinates `x3, x4`.
    Y,
}

impl Polarization {
    #[inline]
    fn offset(self) -> usize {
        match self {
            Polarization::X => 0,
            Polarization::Y => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledConstellation<T: Real> {
    points: Vec<[T; 4]>,
    labels: Vec<u32>,
    bits: u32,
}

impl<T: Real> LabeledConstellation<T> {
    /// Validates and builds a constellation.
    ///
    /// Requires `points.len()` to be a power of two (at least 2), `labels` to
    /// be a permutation of `0..M`, finite coordinates and pairwise distinct
    /// points.
    pub fn new(points: Vec<[T; 4]>, labels: Vec<u32>) -> Result<Self> {
        let size = points.len();
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::InvalidConstellation(format!(
                "point count {size} is not a power of two >= 2"
            )));
        }
        if labels.len() != size {
            return Err(Error::InvalidConstellation(format!(
                "{} labels for {size} points",
                labels.len()
            )));
        }
        let mut seen = vec![false; size];
        for &l in &labels {
            let idx = l as usize;
            if idx >= size || seen[idx] {
                return Err(Error::InvalidConstellation(format!(
                    "labels are not a permutation of 0..{size} (offending label {l})"
                )));
            }
            seen[idx] = true;
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConstellation("non-finite coordinate".into()));
        }
        for i in 0..size {
            for j in (i + 1)..size {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoint(i, j));
                }
            }
        }
        Ok(Self {
            points,
            labels,
            bits: size.trailing_zeros(),
        })
    }

    pub fn points(&self) -> &[[T; 4]] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of points `M`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Bits per symbol `m`.
    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    /// Bit `k` (0-based, `k = 0` is `b1`, the MSB) of the label of point `i`.
    #[inline]
    pub fn bit(&self, i: usize, k: u32) -> u32 {
        label_bit(self.labels[i], k, self.bits)
    }

    /// Mean symbol energy `(1/M) sum |s_i|^2`.
    pub fn mean_energy(&self) -> T {
        let total: T = self.points.iter().map(norm2).sum();
        total / T::lit(self.len() as f64)
    }

    /// Uniformly rescales the points so the mean energy equals `es`.
    pub fn normalize(&self, es: T) -> Result<Self> {
        if !(es > T::zero()) || !es.is_finite() {
            return Err(Error::InvalidParameter(format!("target energy {es} must be > 0")));
        }
        let current = self.mean_energy();
        if !(current > T::zero()) {
            return Err(Error::Degenerate("all-zero constellation cannot be normalized".into()));
        }
        let scale = (es / current).sqrt();
        Ok(self.map_points(|p| p.map(|v| v * scale)))
    }

    /// True iff every point energy lies within `tol` of the mean energy.
    pub fn is_constant_modulus(&self, tol: T) -> bool {
        let es = self.mean_energy();
        self.points.iter().all(|p| (norm2(p) - es).abs() <= tol)
    }

    /// Standardized moment of order `p` of the per-polarization complex
    /// symbol, pooling both polarizations and centering by the empirical mean:
    /// `E[|x|^p] / E[|x|^2]^(p/2)`.
    pub fn standardized_moment(&self, p: u32) -> Result<T> {
        if p < 2 || p % 2 != 0 {
            return Err(Error::InvalidParameter(format!("moment order {p} must be even and >= 2")));
        }
        let n = T::lit(self.len() as f64);
        let mut mean = [T::zero(); 4];
        for pt in &self.points {
            for (m, v) in mean.iter_mut().zip(pt) {
                *m = *m + *v;
            }
        }
        let mean = mean.map(|v| v / n);
        let half = (p / 2) as i32;
        let (mut m2, mut mp) = (T::zero(), T::zero());
        for pt in &self.points {
            for off in [0, 2] {
                let re = pt[off] - mean[off];
                let im = pt[off + 1] - mean[off + 1];
                let e = re * re + im * im;
                m2 = m2 + e;
                mp = mp + e.powi(half);
            }
        }
        let count = n + n;
        let m2 = m2 / count;
        if !(m2 > T::zero()) {
            return Err(Error::Degenerate("zero second moment".into()));
        }
        Ok((mp / count) / m2.powi(half))
    }

    /// Fourth and sixth standardized moments.
    pub fn moments(&self) -> Result<MomentSet<T>> {
        Ok(MomentSet {
            mu4: self.standardized_moment(4)?,
            mu6: self.standardized_moment(6)?,
        })
    }

    /// All-pairs squared Euclidean distance spectrum with the Hamming
    /// distance 1 split.
    ///
    /// Distances closer than `1e-9 * E_s` (relative to the mean energy) are
    /// merged into one bucket; the bucket reports the mean of its members.
    pub fn distance_spectrum(&self) -> DistanceSpectrum<T> {
        let mut pairs: Vec<(T, bool)> = Vec::with_capacity(self.len() * (self.len() - 1) / 2);
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let hd1 = (self.labels[i] ^ self.labels[j]).count_ones() == 1;
                pairs.push((dist2(&self.points[i], &self.points[j]), hd1));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));
        let tol = self.mean_energy() * merge_tolerance::<T>();

        let mut entries: Vec<SpectrumEntry<T>> = Vec::new();
        let mut start = T::zero();
        let mut sum = T::zero();
        for (d2, hd1) in pairs {
            match entries.last_mut() {
                Some(e) if d2 - start <= tol => {
                    e.count += 1;
                    e.hd1_count += hd1 as usize;
                    sum = sum + d2;
                    e.d2 = sum / T::lit(e.count as f64);
                }
                _ => {
                    start = d2;
                    sum = d2;
                    entries.push(SpectrumEntry { d2, count: 1, hd1_count: hd1 as usize });
                }
            }
        }
        DistanceSpectrum { entries }
    }

    /// True iff every pair at the minimum squared distance differs in exactly
    /// one label bit.
    pub fn gray_check(&self) -> bool {
        self.distance_spectrum()
            .entries
            .first()
            .map(|e| e.hd1_count == e.count)
            .unwrap_or(true)
    }

    /// Distinct 2D points of one polarization with the number of 4D points
    /// projecting onto each, sorted by angle then radius.
    pub fn project_2d(&self, pol: Polarization) -> Vec<([T; 2], usize)> {
        let off = pol.offset();
        let tol = self.mean_energy().sqrt() * T::lit(1e-9);
        let mut out: Vec<([T; 2], usize)> = Vec::new();
        for p in &self.points {
            let q = [p[off], p[off + 1]];
            match out
                .iter_mut()
                .find(|(r, _)| (r[0] - q[0]).abs() <= tol && (r[1] - q[1]).abs() <= tol)
            {
                Some((_, n)) => *n += 1,
                None => out.push((q, 1)),
            }
        }
        out.sort_by(|a, b| {
            let ka = (a.0[1].atan2(a.0[0]), a.0[0].hypot(a.0[1]));
            let kb = (b.0[1].atan2(b.0[0]), b.0[0].hypot(b.0[1]));
            ka.partial_cmp(&kb).expect("finite coordinates")
        });
        out
    }

    /// Applies `f` to every point, keeping labels. Panics if the result
    /// contains duplicate points; use [`Self::new`] for fallible rebuilding.
    pub fn map_points(&self, f: impl Fn(&[T; 4]) -> [T; 4]) -> Self {
        Self {
            points: self.points.iter().map(f).collect(),
            labels: self.labels.clone(),
            bits: self.bits,
        }
    }

    /// Same points with a new labeling.
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Self> {
        Self::new(self.points.clone(), labels)
    }

    /// Same labels with new coordinates.
    pub fn with_points(&self, points: Vec<[T; 4]>) -> Result<Self> {
        Self::new(points, self.labels.clone())
    }

    /// XORs every label with `mask`.
    pub fn xor_labels(&self, mask: u32) -> Self {
        let mask = mask & ((1 << self.bits) - 1);
        Self {
            points: self.points.clone(),
            labels: self.labels.iter().map(|l| l ^ mask).collect(),
            bits: self.bits,
        }
    }

    /// Reorders label bits: bit `k` of the new label is bit `perm[k]` of the
    /// old one (MSB-first indexing).
    pub fn permute_bits(&self, perm: &[u32]) -> Result<Self> {
        let m = self.bits;
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..m).collect::<Vec<_>>() {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of 0..{m}")));
        }
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                perm.iter()
                    .enumerate()
                    .fold(0, |acc, (k, &src)| acc | (label_bit(l, src, m) << (m - 1 - k as u32)))
            })
            .collect();
        Ok(Self {
            points: self.points.clone(),
            labels,
            bits: m,
        })
    }

    /// Index of the point carrying `label`.
    pub fn index_of_label(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Converts the coordinates to another scalar type.
    pub fn cast<U: Real>(&self) -> LabeledConstellation<U> {
        LabeledConstellation {
            points: self
                .points
                .iter()
                .map(|p| p.map(|v| U::lit(v.as_f64())))
                .collect(),
            labels: self.labels.clone(),
            bits: self.bits,
        }
    }
}

/// Bit `k` (MSB-first) of an `m`-bit label.
#[inline]
pub fn label_bit(label: u32, k: u32, m: u32) -> u32 {
    (label >> (m - 1 - k)) & 1
}

fn merge_tolerance<T: Real>() -> T {
    // f32 coordinates cannot resolve 1e-9 relative differences
    T::lit(1e-9).max(T::epsilon() * T::lit(16.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet<T> {
    pub mu4: T,
    pub mu6: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry<T> {
    /// Squared Euclidean distance.
    pub d2: T,
    /// Unordered point pairs at this distance.
    pub count: usize,
    /// Pairs whose labels differ in exactly one bit.
    pub hd1_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpectrum<T> {
    pub entries: Vec<SpectrumEntry<T>>,
}

impl<T: Real> DistanceSpectrum<T> {
    /// Minimum squared Euclidean distance bucket.
    pub fn msed(&self) -> Option<&SpectrumEntry<T>> {
        self.entries.first()
    }

    pub fn total_pairs(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Buckets containing at least one Hamming-distance-1 pair, as
    /// `(d2, hd1_count)`.
    pub fn hd1_groups(&self) -> Vec<(T, usize)> {
        self.entries
            .iter()
            .filter(|e| e.hd1_count > 0)
            .map(|e| (e.d2, e.hd1_count))
            .collect()
    }
}
