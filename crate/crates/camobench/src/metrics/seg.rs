//! Binary-segmentation metrics: MAE, mean F-measure, S-measure, and mean
//! E-measure.
//!
//! Conventions, pinned so every consumer agrees:
//! - adaptive binarization threshold `T = min(2 * mean(pred), 1)`, applied
//!   as `pred >= T`
//! - F-measure with `beta^2 = 0.3`
//! - S-measure with `alpha = 0.5`, sample (N-1) statistics inside the object
//!   and region terms, result clamped to [0, 1]
//! - E-measure alignment epsilon `1e-12`
//! - degenerate ground truth: all-zero gt scores `1 - mean(pred)` (S) /
//!   `1 - mean(binarized pred)` (E); all-one gt scores the mean instead

use crate::error::{Error, Result};
use crate::map::{BinaryMask, ScalarMap};

pub const F_MEASURE_BETA2: f64 = 0.3;
pub const S_MEASURE_ALPHA: f64 = 0.5;
pub const E_MEASURE_EPSILON: f64 = 1e-12;

fn ensure_dims(pred: &ScalarMap, gt: &BinaryMask) -> Result<()> {
    if pred.dims() == gt.dims() {
        Ok(())
    } else {
        Err(Error::dims(pred.dims(), gt.dims()))
    }
}

/// Mean absolute error between a unit-normalized prediction and a binary
/// ground truth read as 0/1 reals.
pub fn mae(pred: &ScalarMap, gt: &BinaryMask) -> Result<f64> {
    ensure_dims(pred, gt)?;
    let n = pred.len() as f64;
    let sum: f64 = pred
        .values()
        .iter()
        .zip(gt.bits())
        .map(|(&p, &g)| (p - if g { 1.0 } else { 0.0 }).abs())
        .sum();
    Ok(sum / n)
}

/// Adaptive binarization threshold: `min(2 * mean(pred), 1)`.
pub fn adaptive_threshold(pred: &ScalarMap) -> f64 {
    (2.0 * pred.mean()).min(1.0)
}

/// Binarizes a prediction at its adaptive threshold (`pred >= T`).
pub fn binarize_adaptive(pred: &ScalarMap) -> BinaryMask {
    let t = adaptive_threshold(pred);
    BinaryMask::new(
        pred.width(),
        pred.height(),
        pred.values().iter().map(|&v| v >= t).collect(),
    )
    .expect("dims preserved")
}

/// F-measure at the adaptive threshold with `beta^2 = 0.3`. Returns 0 when
/// precision + recall is 0.
pub fn f_measure(pred: &ScalarMap, gt: &BinaryMask) -> Result<f64> {
    ensure_dims(pred, gt)?;
    if gt.is_all_zero() {
        return Err(Error::EmptyGroundTruth);
    }
    let bin = binarize_adaptive(pred);
    let mut tp = 0usize;
    let mut pred_pos = 0usize;
    let mut gt_pos = 0usize;
    for (&b, &g) in bin.bits().iter().zip(gt.bits()) {
        if b {
            pred_pos += 1;
        }
        if g {
            gt_pos += 1;
        }
        if b && g {
            tp += 1;
        }
    }
    let precision = if pred_pos == 0 {
        0.0
    } else {
        tp as f64 / pred_pos as f64
    };
    let recall = tp as f64 / gt_pos as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    let b2 = F_MEASURE_BETA2;
    Ok((1.0 + b2) * precision * recall / (b2 * precision + recall))
}

/// Sample (N-1) standard deviation of a slice; 0 for fewer than two values.
fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values
        .iter()
        .map(|v| {
            let d = v - mean;
            d * d
        })
        .sum::<f64>()
        / (n as f64 - 1.0);
    var.sqrt()
}

fn object_score(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let x = values.iter().sum::<f64>() / values.len() as f64;
    let sigma = sample_std(values);
    2.0 * x / (x * x + 1.0 + sigma + f64::EPSILON)
}

fn s_object(pred: &ScalarMap, gt: &BinaryMask) -> f64 {
    let mut fg = Vec::new();
    let mut bg = Vec::new();
    for (&p, &g) in pred.values().iter().zip(gt.bits()) {
        if g {
            fg.push(p);
        } else {
            bg.push(1.0 - p);
        }
    }
    let mu = gt.count_ones() as f64 / gt.bits().len() as f64;
    mu * object_score(&fg) + (1.0 - mu) * object_score(&bg)
}

/// Structural similarity of one block pair, following the region term of the
/// structure measure.
fn region_ssim(pred: &[f64], gt: &[f64]) -> f64 {
    let n = pred.len() as f64;
    let x = pred.iter().sum::<f64>() / n;
    let y = gt.iter().sum::<f64>() / n;
    let denom = n - 1.0 + f64::EPSILON;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxy = 0.0;
    for (&p, &g) in pred.iter().zip(gt) {
        sx += (p - x) * (p - x);
        sy += (g - y) * (g - y);
        sxy += (p - x) * (g - y);
    }
    let sigma_x2 = sx / denom;
    let sigma_y2 = sy / denom;
    let sigma_xy = sxy / denom;
    let alpha = 4.0 * x * y * sigma_xy;
    let beta = (x * x + y * y) * (sigma_x2 + sigma_y2);
    if alpha != 0.0 {
        alpha / (beta + f64::EPSILON)
    } else if beta == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Rounded 1-based foreground centroid, matching the region split convention.
fn gt_centroid(gt: &BinaryMask) -> (u32, u32) {
    let (w, h) = gt.dims();
    let total = gt.count_ones() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for y in 0..h {
        for x in 0..w {
            if gt.get(x, y) {
                sx += (x + 1) as f64;
                sy += (y + 1) as f64;
            }
        }
    }
    let cx = (sx / total).round() as u32;
    let cy = (sy / total).round() as u32;
    (cx.clamp(1, w), cy.clamp(1, h))
}

fn block_values(map_vals: &[f64], w: u32, x0: u32, x1: u32, y0: u32, y1: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(((x1 - x0) * (y1 - y0)) as usize);
    for y in y0..y1 {
        for x in x0..x1 {
            out.push(map_vals[(y * w + x) as usize]);
        }
    }
    out
}

fn s_region(pred: &ScalarMap, gt: &BinaryMask) -> f64 {
    let (w, h) = gt.dims();
    let (cx, cy) = gt_centroid(gt);
    let gt_vals: Vec<f64> = gt.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let area = (w as f64) * (h as f64);
    // quadrant splits at the 1-based centroid: left width cx, top height cy
    let spans = [
        (0, cx, 0, cy),
        (cx, w, 0, cy),
        (0, cx, cy, h),
        (cx, w, cy, h),
    ];
    let mut total = 0.0;
    for &(x0, x1, y0, y1) in &spans {
        if x1 <= x0 || y1 <= y0 {
            continue;
        }
        let weight = ((x1 - x0) as f64) * ((y1 - y0) as f64) / area;
        let p = block_values(pred.values(), w, x0, x1, y0, y1);
        let g = block_values(&gt_vals, w, x0, x1, y0, y1);
        total += weight * region_ssim(&p, &g);
    }
    total
}

/// Structure measure `S = alpha * So + (1 - alpha) * Sr`, `alpha = 0.5`.
pub fn s_measure(pred: &ScalarMap, gt: &BinaryMask) -> Result<f64> {
    ensure_dims(pred, gt)?;
    if gt.is_all_zero() {
        return Ok(1.0 - pred.mean());
    }
    if gt.is_all_one() {
        return Ok(pred.mean());
    }
    let s = S_MEASURE_ALPHA * s_object(pred, gt) + (1.0 - S_MEASURE_ALPHA) * s_region(pred, gt);
    Ok(s.clamp(0.0, 1.0))
}

/// Enhanced alignment measure at the adaptive threshold.
pub fn e_measure(pred: &ScalarMap, gt: &BinaryMask) -> Result<f64> {
    ensure_dims(pred, gt)?;
    let bin = binarize_adaptive(pred);
    let bin_mean = bin.count_ones() as f64 / bin.bits().len() as f64;
    if gt.is_all_zero() {
        return Ok(1.0 - bin_mean);
    }
    if gt.is_all_one() {
        return Ok(bin_mean);
    }
    let gt_mean = gt.count_ones() as f64 / gt.bits().len() as f64;
    let mut sum = 0.0;
    for (&b, &g) in bin.bits().iter().zip(gt.bits()) {
        let phi_p = (if b { 1.0 } else { 0.0 }) - bin_mean;
        let phi_g = (if g { 1.0 } else { 0.0 }) - gt_mean;
        let xi = 2.0 * phi_g * phi_p / (phi_g * phi_g + phi_p * phi_p + E_MEASURE_EPSILON);
        let enhanced = (xi + 1.0) * (xi + 1.0) / 4.0;
        sum += enhanced;
    }
    Ok(sum / bin.bits().len() as f64)
}
