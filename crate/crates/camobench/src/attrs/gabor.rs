//! Outline-oriented Gabor energy for the disruptive-coloration score.
//!
//! At each outline pixel of the instance mask the local tangent comes from
//! the smoothed-mask gradient normal. Gabor energy is evaluated with the
//! filter stripes along the tangent (E_par) and along the normal (E_perp);
//! the per-point ratio E_perp / (E_par + E_perp + eps) averages into a
//! [0, 1] score. Energy defaults to the quadrature-pair magnitude so the
//! score is insensitive to where the outline sits relative to the carrier
//! phase; a single-phase mode is available through the config.

use crate::error::{Error, Result};
use crate::map::{BinaryMask, ScalarMap};

use super::AttributeConfig;

const RATIO_EPS: f64 = 1e-10;

/// Mask pixels with at least one in-bounds 4-neighbor off the mask, in
/// row-major order.
pub fn outline_pixels(mask: &BinaryMask) -> Vec<(u32, u32)> {
    let (w, h) = mask.dims();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let mut boundary = false;
            if x > 0 && !mask.get(x - 1, y) {
                boundary = true;
            }
            if !boundary && x + 1 < w && !mask.get(x + 1, y) {
                boundary = true;
            }
            if !boundary && y > 0 && !mask.get(x, y - 1) {
                boundary = true;
            }
            if !boundary && y + 1 < h && !mask.get(x, y + 1) {
                boundary = true;
            }
            if boundary {
                out.push((x, y));
            }
        }
    }
    out
}

/// Separable Gaussian blur with a kernel truncated at 3 sigma; borders are
/// renormalized over the in-bounds taps so flat regions stay flat.
pub fn gaussian_blur(map: &ScalarMap, sigma: f64) -> Result<ScalarMap> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!("sigma {sigma} must be positive")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k as f64 * k as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let (w, h) = (map.width() as i64, map.height() as i64);
    let src = map.values();
    let mut tmp = vec![0.0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for (ki, &kw) in kernel.iter().enumerate() {
                let xx = x + ki as i64 - radius;
                if xx >= 0 && xx < w {
                    acc += kw * src[(y * w + xx) as usize];
                    wsum += kw;
                }
            }
            tmp[(y * w + x) as usize] = acc / wsum;
        }
    }
    let mut out = vec![0.0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for (ki, &kw) in kernel.iter().enumerate() {
                let yy = y + ki as i64 - radius;
                if yy >= 0 && yy < h {
                    acc += kw * tmp[(yy * w + x) as usize];
                    wsum += kw;
                }
            }
            out[(y * w + x) as usize] = acc / wsum;
        }
    }
    ScalarMap::new(map.width(), map.height(), out)
}

/// Gabor energy centered at (cx, cy) with the filter stripes running along
/// `stripe_angle` (radians). Both kernels are made zero-mean over their
/// in-bounds support, so constant regions respond with 0 even where the
/// window is clipped at an image border.
fn gabor_energy(
    lum: &ScalarMap,
    cx: u32,
    cy: u32,
    stripe_angle: f64,
    config: &AttributeConfig,
) -> f64 {
    let sigma = config.dc_sigma;
    let gamma = config.dc_gamma;
    let lambda = config.dc_wavelength;
    let psi = config.dc_phase;
    let radius = (3.0 * sigma).ceil() as i64;
    // carrier runs perpendicular to the stripes
    let carrier = stripe_angle + std::f64::consts::FRAC_PI_2;
    let (cos_c, sin_c) = (carrier.cos(), carrier.sin());

    let (w, h) = (lum.width() as i64, lum.height() as i64);
    let (mut even_v, mut odd_v) = (0.0, 0.0);
    let (mut even_k, mut odd_k) = (0.0, 0.0);
    let mut value_sum = 0.0;
    let mut taps = 0.0;
    for dy in -radius..=radius {
        let yy = cy as i64 + dy;
        if yy < 0 || yy >= h {
            continue;
        }
        for dx in -radius..=radius {
            let xx = cx as i64 + dx;
            if xx < 0 || xx >= w {
                continue;
            }
            let v = lum.values()[(yy * w + xx) as usize];
            let p = dx as f64 * cos_c + dy as f64 * sin_c;
            let q = -(dx as f64) * sin_c + dy as f64 * cos_c;
            let env = (-(p * p + gamma * gamma * q * q) / (2.0 * sigma * sigma)).exp();
            let phase = 2.0 * std::f64::consts::PI * p / lambda + psi;
            let (kc, ks) = (env * phase.cos(), env * phase.sin());
            even_v += kc * v;
            odd_v += ks * v;
            even_k += kc;
            odd_k += ks;
            value_sum += v;
            taps += 1.0;
        }
    }
    let even = even_v - even_k * value_sum / taps;
    let odd = odd_v - odd_k * value_sum / taps;
    if config.dc_quadrature {
        (even * even + odd * odd).sqrt()
    } else {
        even.abs()
    }
}

/// GabRat score over the mask outline: mean of E_perp/(E_par+E_perp+eps).
/// Needs at least 8 outline pixels.
pub fn gabrat_score(
    lum: &ScalarMap,
    mask: &BinaryMask,
    config: &AttributeConfig,
) -> Result<f64> {
    if lum.dims() != mask.dims() {
        return Err(Error::dims(mask.dims(), lum.dims()));
    }
    let outline = outline_pixels(mask);
    if outline.len() < 8 {
        return Err(Error::DegenerateBoundary(outline.len()));
    }
    let smoothed = gaussian_blur(&mask.to_scalar_map(), config.dc_mask_sigma)?;
    let (w, h) = mask.dims();
    let mut total = 0.0;
    let mut used = 0usize;
    for &(x, y) in &outline {
        // central differences with clamped indices
        let xm = smoothed.get(x.saturating_sub(1), y);
        let xp = smoothed.get((x + 1).min(w - 1), y);
        let ym = smoothed.get(x, y.saturating_sub(1));
        let yp = smoothed.get(x, (y + 1).min(h - 1));
        let gx = (xp - xm) / 2.0;
        let gy = (yp - ym) / 2.0;
        if gx * gx + gy * gy < 1e-24 {
            continue; // no usable normal at this point
        }
        let normal = gy.atan2(gx);
        let tangent = normal + std::f64::consts::FRAC_PI_2;
        let e_par = gabor_energy(lum, x, y, tangent, config);
        let e_perp = gabor_energy(lum, x, y, normal, config);
        total += e_perp / (e_par + e_perp + RATIO_EPS);
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateBoundary(0));
    }
    Ok(total / used as f64)
}
