//! SLIC superpixels in Lab space with enforced connectivity, plus the
//! per-superpixel color/texture features and the chi-square histogram
//! distance used by the background-matching attribute.

use crate::error::{Error, Result};
use crate::map::BinaryMask;

use super::image::RgbImage;
use super::lbp;
use super::AttributeConfig;

/// Which side of the ground-truth mask a superpixel mostly lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Foreground,
    Background,
}

/// One superpixel: members partition the image across all superpixels.
/// Histograms and side are empty/None until `superpixel_features` fills
/// them in.
#[derive(Debug, Clone)]
pub struct Superpixel {
    pub id: usize,
    /// Row-major pixel indices.
    pub members: Vec<usize>,
    pub mean_lab: [f64; 3],
    /// Concatenated per-channel Lab histograms, L1-normalized.
    pub color_hist: Vec<f64>,
    /// Uniform LBP histogram, L1-normalized.
    pub texture_hist: Vec<f64>,
    pub side: Option<Side>,
}

/// Lab-space SLIC targeting `config.slic_k` superpixels. Deterministic:
/// grid seeding, strict-less distance ties, and a row-major connectivity
/// sweep that absorbs fragments smaller than a quarter of the mean
/// superpixel area into an adjacent region.
pub fn slic_superpixels(image: &RgbImage, config: &AttributeConfig) -> Result<Vec<Superpixel>> {
    let (w, h) = image.dims();
    let n = (w as usize) * (h as usize);
    if config.slic_k == 0 {
        return Err(Error::InvalidConfig("slic_k must be at least 1".into()));
    }
    if config.slic_k > n {
        return Err(Error::TooManySuperpixels {
            requested: config.slic_k,
            pixels: n,
        });
    }
    let lab = image.to_lab();

    // grid seeding: roughly one seed per S x S cell
    let s = (n as f64 / config.slic_k as f64).sqrt();
    let nx = ((w as f64 / s).round() as usize).max(1);
    let ny = ((h as f64 / s).round() as usize).max(1);
    let step_x = w as f64 / nx as f64;
    let step_y = h as f64 / ny as f64;
    let mut centers: Vec<[f64; 5]> = Vec::with_capacity(nx * ny); // l, a, b, x, y
    for j in 0..ny {
        for i in 0..nx {
            let cx = ((i as f64 + 0.5) * step_x).min(w as f64 - 1.0).floor();
            let cy = ((j as f64 + 0.5) * step_y).min(h as f64 - 1.0).floor();
            let p = &lab[(cy as usize) * w as usize + cx as usize];
            centers.push([p[0], p[1], p[2], cx, cy]);
        }
    }

    let m2 = config.slic_compactness * config.slic_compactness;
    let s2 = s * s;
    let mut label = vec![usize::MAX; n];
    let mut best = vec![f64::INFINITY; n];
    for _ in 0..config.slic_iterations {
        best.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let x0 = (center[3] - 2.0 * s).floor().max(0.0) as u32;
            let x1 = ((center[3] + 2.0 * s).ceil() as u32).min(w - 1);
            let y0 = (center[4] - 2.0 * s).floor().max(0.0) as u32;
            let y1 = ((center[4] + 2.0 * s).ceil() as u32).min(h - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let idx = (y * w + x) as usize;
                    let p = &lab[idx];
                    let dl = p[0] - center[0];
                    let da = p[1] - center[1];
                    let db = p[2] - center[2];
                    let dx = x as f64 - center[3];
                    let dy = y as f64 - center[4];
                    let d = dl * dl + da * da + db * db + (dx * dx + dy * dy) / s2 * m2;
                    if d < best[idx] {
                        best[idx] = d;
                        label[idx] = c;
                    }
                }
            }
        }
        // any pixel outside every search window snaps to the spatially
        // nearest center (possible only with extreme aspect ratios)
        for idx in 0..n {
            if label[idx] == usize::MAX {
                let x = (idx % w as usize) as f64;
                let y = (idx / w as usize) as f64;
                let c = centers
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        let da = (a[3] - x).powi(2) + (a[4] - y).powi(2);
                        let db = (b[3] - x).powi(2) + (b[4] - y).powi(2);
                        da.partial_cmp(&db).unwrap()
                    })
                    .map(|(i, _)| i)
                    .expect("at least one center");
                label[idx] = c;
            }
        }
        // move centers to member means
        let mut acc = vec![[0.0f64; 6]; centers.len()]; // l,a,b,x,y,count
        for (idx, &c) in label.iter().enumerate() {
            let p = &lab[idx];
            let a = &mut acc[c];
            a[0] += p[0];
            a[1] += p[1];
            a[2] += p[2];
            a[3] += (idx % w as usize) as f64;
            a[4] += (idx / w as usize) as f64;
            a[5] += 1.0;
        }
        for (c, a) in acc.iter().enumerate() {
            if a[5] > 0.0 {
                centers[c] = [a[0] / a[5], a[1] / a[5], a[2] / a[5], a[3] / a[5], a[4] / a[5]];
            }
        }
    }

    let final_labels = enforce_connectivity(&label, w, h, centers.len());
    let count = final_labels.iter().max().map_or(0, |&m| m + 1);
    let mut superpixels: Vec<Superpixel> = (0..count)
        .map(|id| Superpixel {
            id,
            members: Vec::new(),
            mean_lab: [0.0; 3],
            color_hist: Vec::new(),
            texture_hist: Vec::new(),
            side: None,
        })
        .collect();
    for (idx, &lbl) in final_labels.iter().enumerate() {
        superpixels[lbl].members.push(idx);
    }
    for sp in superpixels.iter_mut() {
        let mut mean = [0.0f64; 3];
        for &idx in &sp.members {
            for (m, v) in mean.iter_mut().zip(lab[idx]) {
                *m += v;
            }
        }
        let k = sp.members.len() as f64;
        sp.mean_lab = [mean[0] / k, mean[1] / k, mean[2] / k];
    }
    Ok(superpixels)
}

/// Row-major flood-fill relabeling: each connected component becomes one
/// superpixel; components below `mean area / 4` merge into the adjacent
/// already-relabeled region.
fn enforce_connectivity(label: &[usize], w: u32, h: u32, seeds: usize) -> Vec<usize> {
    let n = label.len();
    let min_size = (n / seeds.max(1) / 4).max(1);
    let (w, h) = (w as i64, h as i64);
    let mut out = vec![usize::MAX; n];
    let mut next = 0usize;
    let mut component: Vec<usize> = Vec::new();
    for start in 0..n {
        if out[start] != usize::MAX {
            continue;
        }
        // the most recently relabeled 4-neighbor of the seed, if any
        let sx = (start as i64) % w;
        let sy = (start as i64) / w;
        let mut adjacent = usize::MAX;
        for (dx, dy) in [(-1i64, 0i64), (0, -1), (1, 0), (0, 1)] {
            let (nx, ny) = (sx + dx, sy + dy);
            if nx >= 0 && nx < w && ny >= 0 && ny < h {
                let nid = (ny * w + nx) as usize;
                if out[nid] != usize::MAX {
                    adjacent = out[nid];
                }
            }
        }
        component.clear();
        component.push(start);
        out[start] = next;
        let mut head = 0;
        while head < component.len() {
            let cur = component[head];
            head += 1;
            let cx = (cur as i64) % w;
            let cy = (cur as i64) / w;
            for (dx, dy) in [(-1i64, 0i64), (0, -1), (1, 0), (0, 1)] {
                let (nx, ny) = (cx + dx, cy + dy);
                if nx >= 0 && nx < w && ny >= 0 && ny < h {
                    let nid = (ny * w + nx) as usize;
                    if out[nid] == usize::MAX && label[nid] == label[start] {
                        out[nid] = next;
                        component.push(nid);
                    }
                }
            }
        }
        if component.len() < min_size && adjacent != usize::MAX {
            for &idx in &component {
                out[idx] = adjacent;
            }
        } else {
            next += 1;
        }
    }
    // compact ids (merges can leave gaps)
    let mut remap = vec![usize::MAX; next];
    let mut compact = 0usize;
    for &lbl in out.iter() {
        if remap[lbl] == usize::MAX {
            remap[lbl] = compact;
            compact += 1;
        }
    }
    out.iter().map(|&lbl| remap[lbl]).collect()
}

/// Fills color histograms (32 Lab bins per channel, concatenated), uniform
/// LBP texture histograms, and the foreground/background side (foreground
/// iff more than half the members lie inside the ground-truth mask).
pub fn superpixel_features(
    image: &RgbImage,
    superpixels: &mut [Superpixel],
    gt_mask: &BinaryMask,
    config: &AttributeConfig,
) -> Result<()> {
    if image.dims() != gt_mask.dims() {
        return Err(Error::dims(gt_mask.dims(), image.dims()));
    }
    let lab = image.to_lab();
    let (w, h) = image.dims();
    let lightness: Vec<f64> = lab.iter().map(|p| p[0]).collect();
    let bins = config.color_bins;
    // fixed Lab binning ranges; a/b span the sRGB gamut comfortably
    const RANGES: [(f64, f64); 3] = [(0.0, 100.0), (-110.0, 110.0), (-110.0, 110.0)];
    for sp in superpixels.iter_mut() {
        let mut color = vec![0.0f64; 3 * bins];
        for &idx in &sp.members {
            for (ch, &(lo, hi)) in RANGES.iter().enumerate() {
                let t = ((lab[idx][ch] - lo) / (hi - lo)).clamp(0.0, 1.0);
                let bin = ((t * bins as f64) as usize).min(bins - 1);
                color[ch * bins + bin] += 1.0;
            }
        }
        let total: f64 = color.iter().sum();
        if total > 0.0 {
            for v in color.iter_mut() {
                *v /= total;
            }
        }
        sp.color_hist = color;
        sp.texture_hist = lbp::lbp_histogram(&lightness, w, h, sp.members.iter().copied());
        let inside = sp.members.iter().filter(|&&idx| gt_mask.bits()[idx]).count();
        sp.side = Some(if inside * 2 > sp.members.len() {
            Side::Foreground
        } else {
            Side::Background
        });
    }
    Ok(())
}

/// Chi-square histogram distance: half the sum of squared differences over
/// sums, with a 1e-10 guard. At most 1 on L1-normalized inputs.
pub fn chi_square(h: &[f64], g: &[f64]) -> Result<f64> {
    if h.len() != g.len() {
        return Err(Error::LengthMismatch(h.len(), g.len()));
    }
    Ok(h.iter()
        .zip(g)
        .map(|(&a, &b)| (a - b) * (a - b) / (a + b + 1e-10))
        .sum::<f64>()
        / 2.0)
}
