//! Fine-grained camouflage attributes per image/instance: background
//! matching (BM), complex background (CB), corner position (CP), disruptive
//! coloration (DC), mimicry (MM), occlusion (OC), salient object (SA), and
//! small object (SO).
//!
//! MM and OC come from manifest annotations; SA needs an externally
//! supplied saliency map; the rest are computed from the image and masks.
//! Absent inputs make the corresponding flag Unknown (None), never an
//! error for the whole row.

pub mod gabor;
pub mod image;
pub mod lbp;
pub mod slic;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::ManifestEntry;
use crate::map::{BinaryMask, ScalarMap};
use crate::metrics::seg::binarize_adaptive;

pub use image::{load_rgb_image, rgb_to_lab, save_rgb_image, RgbImage};
pub use slic::{chi_square, slic_superpixels, superpixel_features, Side, Superpixel};

/// How color and texture chi-square distances merge into one BM distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiSquareCombine {
    /// Average of the color and texture distances.
    #[default]
    MeanColorTexture,
    ColorOnly,
    TextureOnly,
    /// Chi-square over the concatenated histograms.
    Concatenated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributeConfig {
    pub slic_k: usize,
    pub slic_compactness: f64,
    pub slic_iterations: usize,
    /// Histogram bins per Lab channel.
    pub color_bins: usize,
    pub combine: ChiSquareCombine,
    /// BM: mean foreground-to-background chi-square below this.
    pub bm_threshold: f64,
    /// CB: background complexity above this.
    pub cb_threshold: f64,
    /// CP: centroid offset beyond this fraction of width/height.
    pub cp_sigma: f64,
    /// CP direction: true flags far-from-center (">"), false flags the
    /// literal near-center ("<") reading.
    pub cp_far_from_center: bool,
    /// DC: GabRat above this.
    pub dc_threshold: f64,
    pub dc_wavelength: f64,
    pub dc_sigma: f64,
    pub dc_gamma: f64,
    pub dc_phase: f64,
    /// Mask smoothing for outline tangents.
    pub dc_mask_sigma: f64,
    /// Quadrature-pair Gabor energy; false uses the single-phase kernel.
    pub dc_quadrature: bool,
    /// SO: mask area below this fraction of the image.
    pub so_threshold: f64,
    /// SA: mean in-mask saliency over the map maximum, at least this.
    pub sa_response_threshold: f64,
    /// SA: IoU of adaptively binarized saliency with the mask, at least this.
    pub sa_iou_threshold: f64,
}

impl Default for AttributeConfig {
    fn default() -> Self {
        AttributeConfig {
            slic_k: 200,
            slic_compactness: 10.0,
            slic_iterations: 10,
            color_bins: 32,
            combine: ChiSquareCombine::default(),
            bm_threshold: 0.9,
            cb_threshold: 0.12,
            cp_sigma: 0.35,
            cp_far_from_center: true,
            dc_threshold: 0.35,
            dc_wavelength: 8.0,
            dc_sigma: 4.0,
            dc_gamma: 1.0,
            dc_phase: 0.0,
            dc_mask_sigma: 2.0,
            dc_quadrature: true,
            so_threshold: 0.02,
            sa_response_threshold: 0.7,
            sa_iou_threshold: 0.5,
        }
    }
}

impl AttributeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slic_k == 0 {
            return Err(Error::InvalidConfig("slic_k must be at least 1".into()));
        }
        if self.color_bins == 0 {
            return Err(Error::InvalidConfig("color_bins must be at least 1".into()));
        }
        for (name, v) in [
            ("slic_compactness", self.slic_compactness),
            ("bm_threshold", self.bm_threshold),
            ("cb_threshold", self.cb_threshold),
            ("cp_sigma", self.cp_sigma),
            ("dc_threshold", self.dc_threshold),
            ("dc_wavelength", self.dc_wavelength),
            ("dc_sigma", self.dc_sigma),
            ("dc_gamma", self.dc_gamma),
            ("dc_mask_sigma", self.dc_mask_sigma),
            ("so_threshold", self.so_threshold),
            ("sa_response_threshold", self.sa_response_threshold),
            ("sa_iou_threshold", self.sa_iou_threshold),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Pluggable background-complexity measure behind the CB attribute. The
/// published 0.12 threshold is calibrated to an external measure, so
/// reports carry the measure name alongside the score.
pub trait ComplexityMeasure {
    fn name(&self) -> &'static str;
    /// Score in [0, 1] over the background (off-mask) pixels.
    fn score(&self, image: &RgbImage, gt_mask: &BinaryMask) -> Result<f64>;
}

/// Default measure: mean gradient magnitude of the luminance over
/// background pixels, central differences with clamped borders, normalized
/// by the largest representable magnitude (sqrt(0.5)).
pub struct MeanGradientMeasure;

impl ComplexityMeasure for MeanGradientMeasure {
    fn name(&self) -> &'static str {
        "mean-normalized-gradient"
    }

    fn score(&self, image: &RgbImage, gt_mask: &BinaryMask) -> Result<f64> {
        if image.dims() != gt_mask.dims() {
            return Err(Error::dims(gt_mask.dims(), image.dims()));
        }
        let lum = image.luminance();
        let (w, h) = image.dims();
        let mut total = 0.0;
        let mut count = 0usize;
        for y in 0..h {
            for x in 0..w {
                if gt_mask.get(x, y) {
                    continue;
                }
                let gx = (lum.get((x + 1).min(w - 1), y) - lum.get(x.saturating_sub(1), y)) / 2.0;
                let gy = (lum.get(x, (y + 1).min(h - 1)) - lum.get(x, y.saturating_sub(1))) / 2.0;
                total += (gx * gx + gy * gy).sqrt();
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::NoBackground);
        }
        Ok(total / count as f64 / std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// Background-matching flag and score from featured superpixels: per
/// foreground superpixel the mean combined chi-square to all background
/// superpixels, averaged over the foreground. Flag is strict `score <
/// bm_threshold`.
pub fn bm_flag(superpixels: &[Superpixel], config: &AttributeConfig) -> Result<(bool, f64)> {
    let fg: Vec<&Superpixel> = superpixels
        .iter()
        .filter(|sp| sp.side == Some(Side::Foreground))
        .collect();
    let bg: Vec<&Superpixel> = superpixels
        .iter()
        .filter(|sp| sp.side == Some(Side::Background))
        .collect();
    if fg.is_empty() {
        return Err(Error::NoForeground);
    }
    if bg.is_empty() {
        return Err(Error::NoBackground);
    }
    let combined = |a: &Superpixel, b: &Superpixel| -> Result<f64> {
        Ok(match config.combine {
            ChiSquareCombine::MeanColorTexture => {
                (chi_square(&a.color_hist, &b.color_hist)?
                    + chi_square(&a.texture_hist, &b.texture_hist)?)
                    / 2.0
            }
            ChiSquareCombine::ColorOnly => chi_square(&a.color_hist, &b.color_hist)?,
            ChiSquareCombine::TextureOnly => chi_square(&a.texture_hist, &b.texture_hist)?,
            ChiSquareCombine::Concatenated => {
                let cat = |sp: &Superpixel| {
                    let mut v = sp.color_hist.clone();
                    v.extend_from_slice(&sp.texture_hist);
                    v
                };
                chi_square(&cat(a), &cat(b))?
            }
        })
    };
    let mut score = 0.0;
    for f in &fg {
        let mut to_bg = 0.0;
        for b in &bg {
            to_bg += combined(f, b)?;
        }
        score += to_bg / bg.len() as f64;
    }
    score /= fg.len() as f64;
    Ok((score < config.bm_threshold, score))
}

/// Complex-background flag and score with the default gradient measure.
/// Flag is strict `score > cb_threshold`.
pub fn cb_flag(
    image: &RgbImage,
    gt_mask: &BinaryMask,
    config: &AttributeConfig,
) -> Result<(bool, f64)> {
    cb_flag_with(&MeanGradientMeasure, image, gt_mask, config)
}

pub fn cb_flag_with(
    measure: &dyn ComplexityMeasure,
    image: &RgbImage,
    gt_mask: &BinaryMask,
    config: &AttributeConfig,
) -> Result<(bool, f64)> {
    let score = measure.score(image, gt_mask)?;
    Ok((score > config.cb_threshold, score))
}

/// Corner-position flag: mask centroid (pixel centers) against the image
/// center. The default flags far-from-center; the config switch flips to
/// the literal near-center comparison.
pub fn cp_flag(mask: &BinaryMask, config: &AttributeConfig) -> Result<bool> {
    let (cx, cy) = mask.centroid().ok_or(Error::EmptyMask)?;
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    let du = (cx + 0.5 - w / 2.0).abs();
    let dv = (cy + 0.5 - h / 2.0).abs();
    let far = du > config.cp_sigma * w || dv > config.cp_sigma * h;
    Ok(if config.cp_far_from_center {
        far
    } else {
        du < config.cp_sigma * w || dv < config.cp_sigma * h
    })
}

/// Disruptive-coloration flag and GabRat score. Flag is strict
/// `score > dc_threshold`.
pub fn dc_gabrat(
    image: &RgbImage,
    mask: &BinaryMask,
    config: &AttributeConfig,
) -> Result<(bool, f64)> {
    let score = gabor::gabrat_score(&image.luminance(), mask, config)?;
    Ok((score > config.dc_threshold, score))
}

/// Small-object flag: mask area strictly below `so_threshold` of the image.
pub fn so_flag(mask: &BinaryMask, config: &AttributeConfig) -> bool {
    let area = mask.count_ones() as f64;
    let total = (mask.width() as f64) * (mask.height() as f64);
    area / total < config.so_threshold
}

fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        if x && y {
            inter += 1;
        }
        if x || y {
            union += 1;
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Salient-object flag: None when no saliency map is supplied; otherwise
/// true iff the mean in-mask response reaches `sa_response_threshold` of
/// the map maximum and the adaptively binarized map overlaps the mask with
/// IoU at least `sa_iou_threshold`.
pub fn sa_flag(
    saliency: Option<&ScalarMap>,
    mask: &BinaryMask,
    config: &AttributeConfig,
) -> Result<Option<bool>> {
    let Some(sal) = saliency else {
        return Ok(None);
    };
    if sal.dims() != mask.dims() {
        return Err(Error::dims(sal.dims(), mask.dims()));
    }
    let max = sal.max();
    if max <= 0.0 {
        return Ok(Some(false));
    }
    let mut inside = 0.0;
    let mut count = 0usize;
    for (v, &m) in sal.values().iter().zip(mask.bits()) {
        if m {
            inside += v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let response = inside / count as f64 / max;
    let iou = mask_iou(&binarize_adaptive(sal), mask);
    Ok(Some(
        response >= config.sa_response_threshold && iou >= config.sa_iou_threshold,
    ))
}

/// One attribute row. None means Unknown: the required input was absent or
/// the computation failed (see `notes` for which).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceAttributes {
    pub image_id: String,
    pub instance_id: String,
    #[serde(rename = "BM")]
    pub bm: Option<bool>,
    #[serde(rename = "CB")]
    pub cb: Option<bool>,
    #[serde(rename = "CP")]
    pub cp: Option<bool>,
    #[serde(rename = "DC")]
    pub dc: Option<bool>,
    #[serde(rename = "MM")]
    pub mm: Option<bool>,
    #[serde(rename = "OC")]
    pub oc: Option<bool>,
    #[serde(rename = "SA")]
    pub sa: Option<bool>,
    #[serde(rename = "SO")]
    pub so: Option<bool>,
    pub bm_score: Option<f64>,
    pub cb_score: Option<f64>,
    pub gabrat: Option<f64>,
    #[serde(skip)]
    pub notes: Vec<String>,
}

impl InstanceAttributes {
    pub fn flag(&self, name: &str) -> Option<bool> {
        match name {
            "BM" => self.bm,
            "CB" => self.cb,
            "CP" => self.cp,
            "DC" => self.dc,
            "MM" => self.mm,
            "OC" => self.oc,
            "SA" => self.sa,
            "SO" => self.so,
            _ => None,
        }
    }
}

/// Attribute names in CSV column order.
pub const ATTRIBUTE_NAMES: [&str; 8] = ["BM", "CB", "CP", "DC", "MM", "OC", "SA", "SO"];

/// Classifies every instance of one image. Image-level BM/CB compute once
/// from the union mask; per-attribute failures turn into notes on the
/// affected rows while the remaining attributes still fill in.
#[allow(clippy::too_many_arguments)]
pub fn classify_instances(
    image_id: &str,
    image: &RgbImage,
    gt_union: &BinaryMask,
    instances: &[(String, BinaryMask)],
    saliency: Option<&ScalarMap>,
    mm: Option<bool>,
    oc: Option<bool>,
    config: &AttributeConfig,
) -> Vec<InstanceAttributes> {
    let mut image_notes = Vec::new();
    let bm = slic_superpixels(image, config)
        .and_then(|mut sps| {
            superpixel_features(image, &mut sps, gt_union, config)?;
            bm_flag(&sps, config)
        })
        .map_err(|e| image_notes.push(format!("BM: {}", e.kind())))
        .ok();
    let cb = cb_flag(image, gt_union, config)
        .map_err(|e| image_notes.push(format!("CB: {}", e.kind())))
        .ok();

    instances
        .iter()
        .map(|(instance_id, mask)| {
            let mut notes = image_notes.clone();
            let cp = cp_flag(mask, config)
                .map_err(|e| notes.push(format!("CP: {}", e.kind())))
                .ok();
            let dc = dc_gabrat(image, mask, config)
                .map_err(|e| notes.push(format!("DC: {}", e.kind())))
                .ok();
            let sa = sa_flag(saliency, mask, config)
                .map_err(|e| notes.push(format!("SA: {}", e.kind())))
                .ok()
                .flatten();
            InstanceAttributes {
                image_id: image_id.to_string(),
                instance_id: instance_id.clone(),
                bm: bm.map(|(f, _)| f),
                cb: cb.map(|(f, _)| f),
                cp,
                dc: dc.map(|(f, _)| f),
                mm,
                oc,
                sa,
                so: Some(so_flag(mask, config)),
                bm_score: bm.map(|(_, s)| s),
                cb_score: cb.map(|(_, s)| s),
                gabrat: dc.map(|(_, s)| s),
                notes,
            }
        })
        .collect()
}

/// Loads one manifest entry's files and classifies its instances. An
/// unreadable saliency map degrades SA to Unknown with a note instead of
/// failing the entry.
pub fn classify_entry(entry: &ManifestEntry, base: &Path, config: &AttributeConfig) -> Result<Vec<InstanceAttributes>> {
    config.validate()?;
    let dims = entry.dims();
    let image = load_rgb_image(&crate::manifest::resolve_in(base, &entry.image), dims)?;
    let gt_union = crate::io::load_mask(&crate::manifest::resolve_in(base, &entry.gt_mask), dims)?;
    let mut instances = Vec::with_capacity(entry.instances.len());
    for (i, inst) in entry.instances.iter().enumerate() {
        let mask = crate::io::load_mask(&crate::manifest::resolve_in(base, &inst.mask), dims)?;
        instances.push((i.to_string(), mask));
    }
    let mut sal_note = None;
    let saliency = match &entry.saliency_map {
        Some(path) => {
            match crate::io::load_scalar_map(&crate::manifest::resolve_in(base, path), dims) {
                Ok(map) => Some(map),
                Err(e) => {
                    sal_note = Some(format!("SA: {}", e.kind()));
                    None
                }
            }
        }
        None => None,
    };
    let mut rows = classify_instances(
        &entry.id(),
        &image,
        &gt_union,
        &instances,
        saliency.as_ref(),
        entry.mm,
        entry.oc,
        config,
    );
    if let Some(note) = sal_note {
        for row in rows.iter_mut() {
            row.notes.push(note.clone());
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with the fixed column order; Unknown flags and
/// absent scores serialize as empty fields.
pub fn write_attribute_table(path: &Path, rows: &[InstanceAttributes]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::UnwritablePath {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    })?;
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::parse(path, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::UnwritablePath {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn read_attribute_table(path: &Path) -> Result<Vec<InstanceAttributes>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::FileMissing(path.to_path_buf())
        }
        _ => Error::parse(path, e.to_string()),
    })?;
    let mut rows = Vec::new();
    for row in reader.deserialize::<InstanceAttributes>() {
        rows.push(row.map_err(|e| Error::parse(path, e.to_string()))?);
    }
    Ok(rows)
}
