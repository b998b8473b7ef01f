//! Dense 2-D maps: real-valued scalar maps, binary masks, and probability
//! distributions over pixels.
//!
//! All maps are row-major with the origin at the top-left corner, x growing
//! right and y growing down. Values are stored as `f64`; every constructor
//! rejects NaN and infinities so downstream arithmetic never has to check.

use crate::error::{Error, Result};

/// Dense real-valued map (prediction, fixation density, attention carrier).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl ScalarMap {
    /// Builds a map from row-major values. Fails on a count mismatch or any
    /// non-finite value.
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidConfig(format!(
                "value count {} does not match {}x{}",
                values.len(),
                width,
                height
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(ScalarMap {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        ScalarMap {
            width,
            height,
            values: vec![0.0; (width as usize) * (height as usize)],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.sum() / self.values.len() as f64
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Population (divide-by-N) standard deviation.
    pub fn std_pop(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.mean();
        (self
            .values
            .iter()
            .map(|v| {
                let d = v - mean;
                d * d
            })
            .sum::<f64>()
            / n)
            .sqrt()
    }

    /// Applies `f` to every value. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarMap> {
        ScalarMap::new(
            self.width,
            self.height,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn same_dims(&self, other: &ScalarMap) -> bool {
        self.dims() == other.dims()
    }

}

/// Per-pixel {0,1} mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidConfig(format!(
                "bit count {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; (width as usize) * (height as usize)],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    /// Number of set pixels.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    pub fn is_all_one(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// Reads the mask as a 0.0/1.0 scalar map.
    pub fn to_scalar_map(&self) -> ScalarMap {
        ScalarMap {
            width: self.width,
            height: self.height,
            values: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Pixelwise union of two masks of equal dims.
    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        if self.dims() != other.dims() {
            return Err(Error::dims(other.dims(), self.dims()));
        }
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a || b)
                .collect(),
        })
    }

    /// Tight axis-aligned bounding box `(x, y, w, h)`, or None for an empty mask.
    pub fn bounding_box(&self) -> Option<(u32, u32, u32, u32)> {
        let mut min_x = u32::MAX;
        let mut min_y = u32::MAX;
        let mut max_x = 0u32;
        let mut max_y = 0u32;
        let mut any = false;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    any = true;
                    min_x = min_x.min(x);
                    min_y = min_y.min(y);
                    max_x = max_x.max(x);
                    max_y = max_y.max(y);
                }
            }
        }
        any.then(|| (min_x, min_y, max_x - min_x + 1, max_y - min_y + 1))
    }

    /// Centroid of set pixels (pixel centers), or None for an empty mask.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut n = 0usize;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }
}

/// A scalar map whose values are nonnegative and sum to 1 (within 1e-9).
///
/// Constructed through [`to_distribution`] or [`Distribution::try_from_map`];
/// the wrapper is what the mass-based metrics (SIM, KLD, EMD) accept.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(ScalarMap);

impl Distribution {
    /// Validates that `map` already is a distribution.
    pub fn try_from_map(map: ScalarMap) -> Result<Self> {
        if let Some(i) = map.values.iter().position(|&v| v < 0.0) {
            return Err(Error::NotNormalized(format!(
                "negative value at pixel index {i}"
            )));
        }
        let sum = map.sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(format!("values sum to {sum}")));
        }
        Ok(Distribution(map))
    }

    pub fn as_map(&self) -> &ScalarMap {
        &self.0
    }

    pub fn into_map(self) -> ScalarMap {
        self.0
    }

    pub fn dims(&self) -> (u32, u32) {
        self.0.dims()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }
}

/// Normalizes a nonnegative map so its values sum to 1.
///
/// Idempotent and scale-invariant: `to_distribution(c*m) == to_distribution(m)`
/// for any `c > 0`.
pub fn to_distribution(map: &ScalarMap) -> Result<Distribution> {
    if let Some(i) = map.values.iter().position(|&v| v < 0.0) {
        return Err(Error::NotNormalized(format!(
            "negative value at pixel index {i}"
        )));
    }
    let sum = map.sum();
    if sum <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let values = map.values.iter().map(|v| v / sum).collect();
    Ok(Distribution(ScalarMap {
        width: map.width,
        height: map.height,
        values,
    }))
}

/// Standardizes a map to mean 0 and population standard deviation 1.
pub fn z_score(map: &ScalarMap) -> Result<ScalarMap> {
    let std = map.std_pop();
    if std <= 0.0 {
        return Err(Error::DegenerateMap("zero standard deviation"));
    }
    let mean = map.mean();
    map.map(|v| (v - mean) / std)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: u32, h: u32, v: &[f64]) -> ScalarMap {
        ScalarMap::new(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn new_rejects_count_mismatch_and_nan() {
        assert!(ScalarMap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(matches!(
            ScalarMap::new(2, 1, vec![0.0, f64::NAN]),
            Err(Error::NonFiniteValue(1))
        ));
    }

    #[test]
    fn to_distribution_halves() {
        let d = to_distribution(&map(2, 1, &[2.0, 2.0])).unwrap();
        assert_eq!(d.values(), &[0.5, 0.5]);
    }

    #[test]
    fn to_distribution_idempotent() {
        let d = to_distribution(&map(2, 2, &[0.1, 0.2, 0.3, 0.4])).unwrap();
        let d2 = to_distribution(d.as_map()).unwrap();
        for (a, b) in d.values().iter().zip(d2.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn to_distribution_zero_mass() {
        assert!(matches!(
            to_distribution(&ScalarMap::zeros(3, 3)),
            Err(Error::ZeroMass)
        ));
    }

    #[test]
    fn to_distribution_rejects_negative() {
        assert!(matches!(
            to_distribution(&map(2, 1, &[1.0, -0.5])),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn distribution_wrapper_validates() {
        assert!(Distribution::try_from_map(map(2, 1, &[0.7, 0.3])).is_ok());
        assert!(Distribution::try_from_map(map(2, 1, &[0.7, 0.7])).is_err());
    }

    #[test]
    fn z_score_constant_map_fails() {
        assert!(matches!(
            z_score(&map(2, 2, &[0.4; 4])),
            Err(Error::DegenerateMap(_))
        ));
    }

    #[test]
    fn z_score_hand_computed() {
        // mean 1.5, population std sqrt(0.75) = 0.8660
        let z = z_score(&map(2, 2, &[3.0, 1.0, 1.0, 1.0])).unwrap();
        assert!((z.values()[0] - (3.0 - 1.5) / 0.75f64.sqrt()).abs() < 1e-12);
        assert!((z.values()[0] - 1.7320508).abs() < 1e-6);
        assert!(z.mean().abs() < 1e-9);
        assert!((z.std_pop() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn z_score_idempotent() {
        let m = map(2, 2, &[0.9, 0.1, 0.4, 0.2]);
        let z1 = z_score(&m).unwrap();
        let z2 = z_score(&z1).unwrap();
        for (a, b) in z1.values().iter().zip(z2.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn z_score_affine_invariant() {
        let m = map(3, 1, &[0.2, 0.8, 0.5]);
        let t = m.map(|v| 3.0 * v + 7.0).unwrap();
        let za = z_score(&m).unwrap();
        let zb = z_score(&t).unwrap();
        for (a, b) in za.values().iter().zip(zb.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mask_bbox_and_centroid() {
        let mut m = BinaryMask::empty(5, 4);
        m.set(1, 1, true);
        m.set(3, 2, true);
        assert_eq!(m.bounding_box(), Some((1, 1, 3, 2)));
        let (cx, cy) = m.centroid().unwrap();
        assert!((cx - 2.0).abs() < 1e-12 && (cy - 1.5).abs() < 1e-12);
        assert_eq!(BinaryMask::empty(2, 2).bounding_box(), None);
    }
}
