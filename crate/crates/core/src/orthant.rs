//! Orthant-symmetric constellations.
//!
//! An orthant-symmetric constellation is generated by a set of points in the
//! open positive orthant: each generator is copied into all 16 orthants by
//! flipping coordinate signs. Four label bits encode the signs (one bit per
//! coordinate, `0` for a positive sign) and the remaining bits identify the
//! generator.

use crate::constellation::{label_bit, LabeledConstellation};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Assignment of label bit positions (MSB-first, `0` is `b1`) to coordinate
/// signs and to the intra-orthant generator label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthantBitMap {
    /// `sign_bits[d]` is the label bit carrying the sign of coordinate `d`.
    pub sign_bits: [u32; 4],
    /// Label bits carrying the generator label, most significant first.
    pub intra_bits: Vec<u32>,
}

impl OrthantBitMap {
    /// Bit assignment of the published 64-point ring-switching format:
    /// `b2, b1` carry the signs of `x1, x2`, `b5, b4` those of `x3, x4`, and
    /// `(b3, b6)` select the generator.
    pub fn prs64() -> Self {
        Self {
            sign_bits: [1, 0, 4, 3],
            intra_bits: vec![2, 5],
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        4 + self.intra_bits.len() as u32
    }

    fn validate(&self) -> Result<()> {
        let m = self.bits_per_symbol();
        let mut used = vec![false; m as usize];
        for &b in self.sign_bits.iter().chain(&self.intra_bits) {
            if b >= m || used[b as usize] {
                return Err(Error::InvalidParameter(format!(
                    "orthant bit map {self:?} is not a bijection onto 0..{m}"
                )));
            }
            used[b as usize] = true;
        }
        Ok(())
    }

    /// Label of the copy of generator `gen_label` with sign pattern `signs`
    /// (bit `d` of `signs` set means coordinate `d` is negative).
    pub fn compose(&self, gen_label: u32, signs: u32) -> u32 {
        let m = self.bits_per_symbol();
        let g = self.intra_bits.len() as u32;
        let mut label = 0;
        for (d, &b) in self.sign_bits.iter().enumerate() {
            label |= ((signs >> d) & 1) << (m - 1 - b);
        }
        for (k, &b) in self.intra_bits.iter().enumerate() {
            label |= ((gen_label >> (g - 1 - k as u32)) & 1) << (m - 1 - b);
        }
        label
    }

    /// Generator label encoded in `label`.
    pub fn intra_label(&self, label: u32) -> u32 {
        let m = self.bits_per_symbol();
        self.intra_bits
            .iter()
            .fold(0, |acc, &b| (acc << 1) | label_bit(label, b, m))
    }

    /// Sign pattern encoded in `label`.
    pub fn signs(&self, label: u32) -> u32 {
        let m = self.bits_per_symbol();
        self.sign_bits
            .iter()
            .enumerate()
            .fold(0, |acc, (d, &b)| acc | (label_bit(label, b, m) << d))
    }
}

/// Expands positive-orthant generators into the full sign-symmetric
/// constellation. Output order is generator-major, then sign pattern
/// `0..16` with bit `d` of the pattern negating coordinate `d`.
pub fn orthant_expand<T: Real>(
    generators: &[[T; 4]],
    generator_labels: &[u32],
    map: &OrthantBitMap,
) -> Result<LabeledConstellation<T>> {
    map.validate()?;
    let g = map.intra_bits.len();
    if generators.len() != 1 << g || generator_labels.len() != generators.len() {
        return Err(Error::InvalidGenerator(format!(
            "{} generators with {} labels for {g} intra-orthant bits",
            generators.len(),
            generator_labels.len()
        )));
    }
    if let Some((i, _)) = generators
        .iter()
        .enumerate()
        .find(|(_, p)| p.iter().any(|v| !(*v > T::zero())))
    {
        return Err(Error::InvalidGenerator(format!(
            "generator {i} has a non-positive coordinate"
        )));
    }
    let mut points = Vec::with_capacity(generators.len() * 16);
    let mut labels = Vec::with_capacity(generators.len() * 16);
    for (gen, &gl) in generators.iter().zip(generator_labels) {
        for signs in 0..16u32 {
            let mut p = *gen;
            for (d, v) in p.iter_mut().enumerate() {
                if (signs >> d) & 1 == 1 {
                    *v = -*v;
                }
            }
            points.push(p);
            labels.push(map.compose(gl, signs));
        }
    }
    LabeledConstellation::new(points, labels)
}

/// Recovers generators and generator labels from an orthant-symmetric
/// constellation, failing if the constellation is not the expansion of its
/// own positive-orthant points under `map`.
pub fn orthant_generators<T: Real>(
    c: &LabeledConstellation<T>,
    map: &OrthantBitMap,
    tol: T,
) -> Result<(Vec<[T; 4]>, Vec<u32>)> {
    map.validate()?;
    if c.bits_per_symbol() != map.bits_per_symbol() {
        return Err(Error::InvalidParameter("bit map does not match constellation".into()));
    }
    let mut gens = Vec::new();
    let mut gen_labels = Vec::new();
    for (p, &l) in c.points().iter().zip(c.labels()) {
        if map.signs(l) == 0 {
            gens.push(*p);
            gen_labels.push(map.intra_label(l));
        }
    }
    let rebuilt = orthant_expand(&gens, &gen_labels, map)?;
    for (p, &l) in rebuilt.points().iter().zip(rebuilt.labels()) {
        let idx = c
            .index_of_label(l)
            .ok_or_else(|| Error::InvalidConstellation(format!("label {l} missing")))?;
        let q = c.points()[idx];
        if p.iter().zip(&q).any(|(a, b)| (*a - *b).abs() > tol) {
            return Err(Error::InvalidConstellation(format!(
                "point with label {l:#b} breaks orthant symmetry"
            )));
        }
    }
    Ok((gens, gen_labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_generator_gives_all_sign_patterns() {
        let map = OrthantBitMap {
            sign_bits: [0, 1, 2, 3],
            intra_bits: vec![],
        };
        let c = orthant_expand(&[[1.0f64, 2.0, 3.0, 4.0]], &[0], &map).unwrap();
        assert_eq!(c.len(), 16);
        let mut patterns: Vec<_> = c
            .points()
            .iter()
            .map(|p| p.iter().map(|v| v.is_sign_negative()).collect::<Vec<_>>())
            .collect();
        patterns.sort();
        patterns.dedup();
        assert_eq!(patterns.len(), 16);
        assert!(c.is_constant_modulus(1e-12));
    }

    #[test]
    fn rejects_non_positive_generators() {
        let map = OrthantBitMap::prs64();
        let mut g = [[1.0, 2.0, 3.0, 4.0]; 4];
        g[1] = [4.0, 3.0, 2.0, 1.0];
        g[2] = [2.0, 1.0, 4.0, 3.0];
        g[3] = [3.0, 0.0, 1.0, 2.0];
        assert!(matches!(
            orthant_expand(&g, &[0, 1, 2, 3], &map),
            Err(Error::InvalidGenerator(_))
        ));
    }

    #[test]
    fn duplicate_generators_collide() {
        let map = OrthantBitMap::prs64();
        let g = [[1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0], [3.0, 1.0, 1.0, 2.0]];
        assert!(matches!(
            orthant_expand(&g, &[0, 1, 2, 3], &map),
            Err(Error::DuplicatePoint(_, _))
        ));
    }

    #[test]
    fn compose_and_decompose_roundtrip() {
        let map = OrthantBitMap::prs64();
        for gl in 0..4 {
            for s in 0..16 {
                let l = map.compose(gl, s);
                assert_eq!(map.intra_label(l), gl);
                assert_eq!(map.signs(l), s);
            }
        }
    }

    #[test]
    fn bad_bit_map_is_rejected() {
        let map = OrthantBitMap {
            sign_bits: [0, 0, 1, 2],
            intra_bits: vec![3, 4],
        };
        assert!(orthant_expand(&[[1.0; 4]; 4], &[0, 1, 2, 3], &map).is_err());
    }

    #[test]
    fn generators_roundtrip() {
        let map = OrthantBitMap::prs64();
        let g = [[1.0, 2.0, 3.0, 4.0], [4.0, 3.0, 2.0, 1.0], [2.0, 1.0, 4.0, 3.0], [3.0, 1.0, 1.0, 2.0]];
        let c = orthant_expand(&g, &[2, 0, 3, 1], &map).unwrap();
        let (gens, labels) = orthant_generators(&c, &map, 1e-12).unwrap();
        assert_eq!(gens, g.to_vec());
        assert_eq!(labels, vec![2, 0, 3, 1]);
        // breaking one copy is detected
        let mut pts = c.points().to_vec();
        pts[5][0] = pts[5][0] * 1.1;
        let broken = c.with_points(pts).unwrap();
        assert!(orthant_generators(&broken, &map, 1e-12).is_err());
    }
}
