//! Rank-agreement metrics: Spearman correlation, pixelwise rank MAE,
//! instance matching, and the sampled rank-correlation score.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::InstanceRecord;
use crate::rank::{paint_ranks, RankLabel, RankMap};

/// Pool of matched ground-truth instances a correlation run samples from.
#[derive(Debug, Clone)]
pub struct MatchedInstance {
    pub gt_rank: RankLabel,
    pub predicted_rank: RankLabel,
}

/// Matching and sampling parameters for [`corr`].
#[derive(Debug, Clone)]
pub struct MatchConfig {
    /// Bbox IoU a prediction must exceed (strictly) to count as a match.
    pub iou_threshold: f64,
    /// Samplings averaged per repeat.
    pub samples: usize,
    /// Repeats averaged into the final value.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            iou_threshold: 0.25,
            samples: 100,
            repeats: 10,
            seed: 0,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "iou threshold {} outside (0, 1]",
                self.iou_threshold
            )));
        }
        if self.samples == 0 || self.repeats == 0 {
            return Err(Error::InvalidConfig(
                "sampling counts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Average-tie ranks of a vector (1-based; ties share the mean position).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean of (i+1)..=(j+1)
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank-order correlation: Pearson correlation of average-tie
/// ranks. Equals `1 - 6*sum(d^2)/(n(n^2-1))` when all values are distinct.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::DegenerateVector("fewer than two elements"));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateVector("constant vector has no rank order"));
    }
    Ok(sab / (saa.sqrt() * sbb.sqrt()))
}

/// Mean absolute difference of per-pixel rank codes (ES=1 .. BG=6); 0 is a
/// perfect ranking, 5 the worst possible.
pub fn r_mae(pred: &RankMap, gt: &RankMap) -> Result<f64> {
    if pred.dims() != gt.dims() {
        return Err(Error::dims(pred.dims(), gt.dims()));
    }
    let sum: f64 = pred
        .labels()
        .iter()
        .zip(gt.labels())
        .map(|(&p, &g)| (p.code() as f64 - g.code() as f64).abs())
        .sum();
    Ok(sum / pred.labels().len() as f64)
}

/// Finds the prediction matching a ground-truth instance: bbox IoU strictly
/// above the threshold, ties broken by the maximal rank score (then by
/// earliest position). Returns None when nothing qualifies.
pub fn match_instance<'a>(
    gt: &InstanceRecord,
    predictions: &'a [InstanceRecord],
    iou_threshold: f64,
) -> Result<Option<&'a InstanceRecord>> {
    let gt_box = gt.effective_bbox()?;
    let mut best: Option<(&InstanceRecord, f64)> = None;
    for pred in predictions {
        let iou = pred.effective_bbox()?.iou(&gt_box);
        if iou <= iou_threshold {
            continue;
        }
        let score = pred.score.unwrap_or(f64::NEG_INFINITY);
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((pred, score));
        }
    }
    Ok(best.map(|(p, _)| p))
}

/// Builds the matched pool: one entry per ground-truth instance that found
/// a prediction, carrying both rank labels. Unmatched instances are dropped
/// and counted.
pub fn matched_pool(
    images: &[(Vec<InstanceRecord>, Vec<InstanceRecord>)],
    iou_threshold: f64,
) -> Result<(Vec<MatchedInstance>, usize)> {
    let mut pool = Vec::new();
    let mut unmatched = 0usize;
    for (gts, preds) in images {
        for gt in gts {
            match match_instance(gt, preds, iou_threshold)? {
                Some(p) => pool.push(MatchedInstance {
                    gt_rank: gt.rank()?,
                    predicted_rank: p.rank()?,
                }),
                None => unmatched += 1,
            }
        }
    }
    Ok((pool, unmatched))
}

/// Deterministic sub-seed for one sampling round; pure in its inputs so
/// rounds may run in any order or in parallel.
fn sub_seed(seed: u64, repeat: u64, sample: u64) -> u64 {
    let mut z = seed ^ (repeat.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        ^ (sample.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sampled rank correlation over a matched pool.
///
/// Each sampling draws one matched instance per foreground rank (ES..HD),
/// computes Spearman between the five ground-truth codes and the matched
/// predicted codes, and the value is the mean over `repeats` independent
/// means of `samples` samplings. A sampling whose predicted vector is
/// constant (correlation undefined) contributes 0.
pub fn corr(pool: &[MatchedInstance], config: &MatchConfig) -> Result<f64> {
    config.validate()?;
    let mut by_rank: [Vec<&MatchedInstance>; 5] = Default::default();
    for inst in pool {
        let idx = (inst.gt_rank.code() - 1) as usize;
        if idx >= 5 {
            continue; // BG never appears as an instance rank
        }
        by_rank[idx].push(inst);
    }
    for (idx, bucket) in by_rank.iter().enumerate() {
        if bucket.is_empty() {
            return Err(Error::RankUnderpopulated(RankLabel::FOREGROUND[idx]));
        }
    }
    let gt_codes: Vec<f64> = (1..=5).map(f64::from).collect();
    let mut repeat_means = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let mut acc = 0.0;
        for s in 0..config.samples {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(config.seed, r as u64, s as u64));
            let picked: Vec<f64> = by_rank
                .iter()
                .map(|bucket| {
                    let inst = bucket[rng.gen_range(0..bucket.len())];
                    inst.predicted_rank.code() as f64
                })
                .collect();
            acc += match spearman(&gt_codes, &picked) {
                Ok(v) => v,
                Err(Error::DegenerateVector(_)) => 0.0,
                Err(e) => return Err(e),
            };
        }
        repeat_means.push(acc / config.samples as f64);
    }
    Ok(repeat_means.iter().sum::<f64>() / config.repeats as f64)
}

/// Renders instance predictions to a per-pixel rank map with the shared
/// overlap semantics (higher score wins, background elsewhere).
pub fn rank_prediction_to_map(
    predictions: &[InstanceRecord],
    width: u32,
    height: u32,
) -> Result<RankMap> {
    let mut items = Vec::with_capacity(predictions.len());
    for p in predictions {
        items.push((&p.mask, p.rank()?, p.score));
    }
    let (map, unscored) = paint_ranks(width, height, &items)?;
    if unscored > 0 {
        log::warn!("{unscored} overlapping pixels decided without scores on either side");
    }
    Ok(map)
}
