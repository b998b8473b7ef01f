//! Ground-truth construction: per-observer detection delays from fixation
//! logs, consensus aggregation, dataset-wide normalization, rank
//! assignment, and rendering of fixation maps and gray-scale rank maps.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixation::FixationSession;
use crate::instance::InstanceRecord;
use crate::map::{BinaryMask, ScalarMap};
use crate::rank::{paint_ranks, RankLabel, RankMap};

/// One observer either detected the instance after some delay or never
/// fixated it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObserverOutcome {
    Detected { delay_ms: f64 },
    NotDetected,
}

/// Per-instance detection delay, carried through aggregation, dataset
/// normalization, and rank assignment.
#[derive(Debug, Clone)]
pub struct DelayRecord {
    pub image_id: String,
    pub instance_id: String,
    pub outcomes: Vec<ObserverOutcome>,
    /// Consensus delay in milliseconds; None when failure was forced.
    pub delay_ms: Option<f64>,
    /// Dataset-normalized delay in [0, 1]; failure-forced records hold 1.
    pub normalized: Option<f64>,
    pub rank: Option<RankLabel>,
    pub failure_forced: bool,
}

/// How normalized delays map onto the five foreground ranks.
#[derive(Debug, Clone, PartialEq)]
pub enum RankBinning {
    /// Equal-frequency fifths of the empirical delay distribution; tied
    /// values all land in the lower (easier) bin.
    Quintile,
    /// Four ascending cut points: value <= t[k] selects rank k (ES..M3),
    /// above t[3] selects HD.
    Thresholds([f64; 4]),
}

/// Normalization applied across all non-failure consensus delays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayNormalization {
    /// Divide by the dataset maximum among detected instances.
    #[default]
    MaxDetected,
}

#[derive(Debug, Clone)]
pub struct BuilderConfig {
    /// Observers that must detect an instance for a consensus delay.
    pub majority_threshold: usize,
    /// Blur sigma in pixels; None means image-width / 20.
    pub sigma: Option<f64>,
    pub binning: RankBinning,
    pub normalization: DelayNormalization,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig {
            majority_threshold: 4,
            sigma: None,
            binning: RankBinning::Quintile,
            normalization: DelayNormalization::MaxDetected,
        }
    }
}

impl BuilderConfig {
    pub fn sigma_for_width(&self, width: u32) -> f64 {
        self.sigma.unwrap_or(width as f64 / 20.0)
    }

    pub fn validate(&self, observer_count: usize) -> Result<()> {
        if self.majority_threshold == 0 || self.majority_threshold > observer_count {
            return Err(Error::InvalidConfig(format!(
                "majority threshold {} outside 1..={observer_count}",
                self.majority_threshold
            )));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) {
                return Err(Error::InvalidConfig(format!("sigma {s} must be positive")));
            }
        }
        if let RankBinning::Thresholds(t) = &self.binning {
            if t.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidConfig(
                    "rank thresholds must be ascending".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Median of a nonempty sequence: middle element for odd counts, mean of
/// the two middle elements for even counts.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    })
}

/// Detection delay of one observer for one instance: the median offset
/// `t - t0` over fixation events landing inside the mask, or NotDetected
/// when none do.
pub fn per_observer_delay(session: &FixationSession, instance: &BinaryMask) -> Result<ObserverOutcome> {
    let (w, h) = instance.dims();
    if !session.in_bounds(w, h) {
        let max_x = session.events().iter().map(|e| e.x).max().unwrap_or(0);
        let max_y = session.events().iter().map(|e| e.y).max().unwrap_or(0);
        return Err(Error::dims((max_x + 1, max_y + 1), (w, h)));
    }
    let offsets: Vec<f64> = session
        .events()
        .iter()
        .filter(|e| instance.get(e.x, e.y))
        .map(|e| (e.t_ms - session.t0_ms) as f64)
        .collect();
    if offsets.is_empty() {
        Ok(ObserverOutcome::NotDetected)
    } else {
        Ok(ObserverOutcome::Detected {
            delay_ms: median(&offsets)?,
        })
    }
}

/// Consensus delay across observers. With at least `majority_threshold`
/// detections the delay is the median over the detecting observers;
/// otherwise failure is forced and the normalized delay pinned to 1.
pub fn aggregate_instance_delay(
    image_id: impl Into<String>,
    instance_id: impl Into<String>,
    outcomes: &[ObserverOutcome],
    config: &BuilderConfig,
) -> Result<DelayRecord> {
    if outcomes.is_empty() {
        return Err(Error::NoObservers);
    }
    config.validate(outcomes.len())?;
    let detected: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            ObserverOutcome::Detected { delay_ms } => Some(*delay_ms),
            ObserverOutcome::NotDetected => None,
        })
        .collect();
    let (delay_ms, normalized, failure_forced) = if detected.len() >= config.majority_threshold {
        (Some(median(&detected)?), None, false)
    } else {
        (None, Some(1.0), true)
    };
    Ok(DelayRecord {
        image_id: image_id.into(),
        instance_id: instance_id.into(),
        outcomes: outcomes.to_vec(),
        delay_ms,
        normalized,
        rank: None,
        failure_forced,
    })
}

/// Fills normalized delays across the whole dataset: each consensus delay
/// is divided by the maximum among non-failure records and clamped to
/// [0, 1]. When every detected delay is 0 the records normalize to 1
/// (each equals the maximum). Failure-forced records keep their pinned 1.
pub fn normalize_delays(records: &mut [DelayRecord]) -> Result<()> {
    let max = records
        .iter()
        .filter(|r| !r.failure_forced)
        .filter_map(|r| r.delay_ms)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllFailed);
    }
    for r in records.iter_mut() {
        if r.failure_forced {
            r.normalized = Some(1.0);
        } else if let Some(d) = r.delay_ms {
            r.normalized = Some(if max > 0.0 {
                (d / max).clamp(0.0, 1.0)
            } else {
                1.0
            });
        }
    }
    Ok(())
}

/// Assigns rank labels: failure-forced records become HD; the rest are
/// binned by the configured policy over their normalized delays. Larger
/// delays never receive a strictly lower rank.
pub fn assign_ranks(records: &mut [DelayRecord], binning: &RankBinning) -> Result<()> {
    let mut scored: Vec<(usize, f64)> = Vec::new();
    for (idx, r) in records.iter().enumerate() {
        if r.failure_forced {
            continue;
        }
        let v = r.normalized.ok_or_else(|| {
            Error::InvalidConfig("ranks need normalized delays; run normalization first".into())
        })?;
        scored.push((idx, v));
    }
    match binning {
        RankBinning::Quintile => {
            scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            let n = scored.len();
            let mut k = 0;
            while k < n {
                // tied values collapse into the bin of the group's first member
                let mut j = k;
                while j + 1 < n && scored[j + 1].1 == scored[k].1 {
                    j += 1;
                }
                let bin = (5 * k / n).min(4);
                for &(idx, _) in &scored[k..=j] {
                    records[idx].rank = Some(RankLabel::FOREGROUND[bin]);
                }
                k = j + 1;
            }
        }
        RankBinning::Thresholds(t) => {
            for &(idx, v) in &scored {
                let bin = t.iter().position(|&cut| v <= cut).unwrap_or(4);
                records[idx].rank = Some(RankLabel::FOREGROUND[bin]);
            }
        }
    }
    for r in records.iter_mut() {
        if r.failure_forced {
            r.rank = Some(RankLabel::Hd);
        }
    }
    Ok(())
}

/// Unrescaled fixation density: one unit impulse per event across all
/// sessions, blurred with a separable Gaussian truncated at 3 sigma. Each
/// fully interior event contributes total mass 1.
pub fn render_fixation_density(
    sessions: &[FixationSession],
    width: u32,
    height: u32,
    sigma: f64,
) -> Result<ScalarMap> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!("sigma {sigma} must be positive")));
    }
    let mut impulses = vec![0.0f64; (width * height) as usize];
    for session in sessions {
        if !session.in_bounds(width, height) {
            let max_x = session.events().iter().map(|e| e.x).max().unwrap_or(0);
            let max_y = session.events().iter().map(|e| e.y).max().unwrap_or(0);
            return Err(Error::dims((max_x + 1, max_y + 1), (width, height)));
        }
        for e in session.events() {
            impulses[(e.y * width + e.x) as usize] += 1.0;
        }
    }

    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for k in -radius..=radius {
        kernel.push((-(k as f64 * k as f64) / (2.0 * sigma * sigma)).exp());
    }
    let ksum: f64 = kernel.iter().sum();
    for w in kernel.iter_mut() {
        *w /= ksum;
    }

    let (w, h) = (width as i64, height as i64);
    let mut horizontal = vec![0.0f64; impulses.len()];
    for y in 0..h {
        for x in 0..w {
            let v = impulses[(y * w + x) as usize];
            if v == 0.0 {
                continue;
            }
            for (ki, &kw) in kernel.iter().enumerate() {
                let xx = x + ki as i64 - radius;
                if xx >= 0 && xx < w {
                    horizontal[(y * w + xx) as usize] += v * kw;
                }
            }
        }
    }
    let mut blurred = vec![0.0f64; impulses.len()];
    for y in 0..h {
        for x in 0..w {
            let v = horizontal[(y * w + x) as usize];
            if v == 0.0 {
                continue;
            }
            for (ki, &kw) in kernel.iter().enumerate() {
                let yy = y + ki as i64 - radius;
                if yy >= 0 && yy < h {
                    blurred[(yy * w + x) as usize] += v * kw;
                }
            }
        }
    }
    ScalarMap::new(width, height, blurred)
}

/// Fixation map: blurred density rescaled so the global maximum is 1.
/// With zero events the map stays all-zero.
pub fn render_fixation_map(
    sessions: &[FixationSession],
    width: u32,
    height: u32,
    sigma: f64,
) -> Result<ScalarMap> {
    let density = render_fixation_density(sessions, width, height, sigma)?;
    let max = density.max();
    if max <= 0.0 {
        return Ok(density);
    }
    density.map(|v| v / max)
}

/// Gray-scale rank map from ranked instances: each pixel takes the rank of
/// the covering instance (higher score wins on overlap; with no scores the
/// later-listed instance wins and a warning is logged), BG elsewhere.
pub fn render_rank_map(
    instances: &[InstanceRecord],
    width: u32,
    height: u32,
) -> Result<RankMap> {
    let mut items = Vec::with_capacity(instances.len());
    for inst in instances {
        items.push((&inst.mask, inst.rank()?, inst.score));
    }
    let (map, unscored) = paint_ranks(width, height, &items)?;
    if unscored > 0 {
        log::warn!(
            "{unscored} overlapping pixels resolved by listing order (no scores present)"
        );
    }
    Ok(map)
}

/// One row of the delay-table CSV.
#[derive(Debug, Serialize, Deserialize)]
struct DelayRow {
    image_id: String,
    instance_id: String,
    delay_ms: Option<f64>,
    normalized: Option<f64>,
    rank: Option<RankLabel>,
    failure_forced: bool,
}

/// Writes the delay table: columns image_id, instance_id, delay_ms,
/// normalized, rank, failure_forced. Empty fields encode absent values.
pub fn write_delay_table(path: &Path, records: &[DelayRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::UnwritablePath {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    })?;
    for r in records {
        writer
            .serialize(DelayRow {
                image_id: r.image_id.clone(),
                instance_id: r.instance_id.clone(),
                delay_ms: r.delay_ms,
                normalized: r.normalized,
                rank: r.rank,
                failure_forced: r.failure_forced,
            })
            .map_err(|e| Error::parse(path, e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| Error::UnwritablePath {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Reads a delay table back; per-observer outcomes are not stored in the
/// CSV so the records come back with empty outcome lists.
pub fn read_delay_table(path: &Path) -> Result<Vec<DelayRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::FileMissing(path.to_path_buf())
        }
        _ => Error::parse(path, e.to_string()),
    })?;
    let mut out = Vec::new();
    for row in reader.deserialize::<DelayRow>() {
        let row = row.map_err(|e| Error::parse(path, e.to_string()))?;
        out.push(DelayRecord {
            image_id: row.image_id,
            instance_id: row.instance_id,
            outcomes: Vec::new(),
            delay_ms: row.delay_ms,
            normalized: row.normalized,
            rank: row.rank,
            failure_forced: row.failure_forced,
        });
    }
    Ok(out)
}
