//! Fixation / localization metrics.
//!
//! Distribution metrics (SIM, CC, KLD, EMD) consume blurred density maps;
//! location metrics (NSS, AUC variants) consume discrete fixation points.
//! All randomized metrics take an explicit seed; there is no global RNG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fixation::FixationPointSet;
use crate::map::{Distribution, ScalarMap};

/// Default number of random negative-sampling splits for AUC-Borji and
/// shuffled AUC.
pub const DEFAULT_SPLITS: usize = 100;

/// Histogram intersection: sum of the pixelwise minimum of two
/// distributions. 1 means identical, 0 means disjoint support.
pub fn sim(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.as_map().dims() != q.as_map().dims() {
        return Err(Error::dims(p.as_map().dims(), q.as_map().dims()));
    }
    Ok(p.as_map()
        .values()
        .iter()
        .zip(q.as_map().values())
        .map(|(&a, &b)| a.min(b))
        .sum())
}

/// Pearson correlation between two maps read as flat vectors.
pub fn cc(p: &ScalarMap, q: &ScalarMap) -> Result<f64> {
    if p.dims() != q.dims() {
        return Err(Error::dims(p.dims(), q.dims()));
    }
    let mp = p.mean();
    let mq = q.mean();
    let mut spq = 0.0;
    let mut spp = 0.0;
    let mut sqq = 0.0;
    for (&a, &b) in p.values().iter().zip(q.values()) {
        let da = a - mp;
        let db = b - mq;
        spq += da * db;
        spp += da * da;
        sqq += db * db;
    }
    if spp == 0.0 || sqq == 0.0 {
        return Err(Error::DegenerateMap("constant map has no correlation"));
    }
    Ok(spq / (spp.sqrt() * sqq.sqrt()))
}

/// Normalized scanpath saliency: mean of the z-scored prediction at the
/// fixated pixels (population standard deviation).
pub fn nss(pred: &ScalarMap, fixations: &FixationPointSet) -> Result<f64> {
    if pred.dims() != fixations.dims() {
        return Err(Error::dims(pred.dims(), fixations.dims()));
    }
    if fixations.is_empty() {
        return Err(Error::EmptyFixations);
    }
    let z = crate::map::z_score(pred)?;
    let sum: f64 = fixations.points().iter().map(|&(x, y)| z.get(x, y)).sum();
    Ok(sum / fixations.len() as f64)
}

/// KL divergence with the ground truth `q` weighting the log ratio:
/// `sum q_i * ln(eps + q_i / (p_i + eps))`.
pub fn kld(p: &Distribution, q: &Distribution) -> Result<f64> {
    kld_with_epsilon(p, q, f64::EPSILON)
}

pub fn kld_with_epsilon(p: &Distribution, q: &Distribution, eps: f64) -> Result<f64> {
    if p.as_map().dims() != q.as_map().dims() {
        return Err(Error::dims(p.as_map().dims(), q.as_map().dims()));
    }
    Ok(p.as_map()
        .values()
        .iter()
        .zip(q.as_map().values())
        .map(|(&pi, &qi)| qi * (eps + qi / (pi + eps)).ln())
        .sum())
}

/// Threshold-sweep AUC over an explicit positive / negative split.
///
/// Thresholds are the distinct positive values; per threshold `t`, TPR and
/// FPR count values `>= t`. The curve is augmented with (0,0) and (1,1) and
/// integrated by trapezoid.
fn threshold_sweep_auc(fix_vals: &[f64], neg_vals: &[f64]) -> f64 {
    let mut thresholds = fix_vals.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let mut fix_sorted = fix_vals.to_vec();
    fix_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut neg_sorted = neg_vals.to_vec();
    neg_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let count_ge = |sorted: &[f64], t: f64| sorted.len() - sorted.partition_point(|&v| v < t);

    let nf = fix_vals.len() as f64;
    let nn = neg_vals.len() as f64;
    let mut pts = Vec::with_capacity(thresholds.len() + 2);
    pts.push((0.0, 0.0));
    for &t in &thresholds {
        let tpr = count_ge(&fix_sorted, t) as f64 / nf;
        let fpr = count_ge(&neg_sorted, t) as f64 / nn;
        pts.push((fpr, tpr));
    }
    pts.push((1.0, 1.0));

    let mut area = 0.0;
    for w in pts.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    area
}

fn fixation_values(pred: &ScalarMap, fixations: &FixationPointSet) -> Vec<f64> {
    fixations
        .points()
        .iter()
        .map(|&(x, y)| pred.get(x, y))
        .collect()
}

/// AUC with every non-fixated pixel as a negative.
pub fn auc_judd(pred: &ScalarMap, fixations: &FixationPointSet) -> Result<f64> {
    if pred.dims() != fixations.dims() {
        return Err(Error::dims(pred.dims(), fixations.dims()));
    }
    if fixations.is_empty() {
        return Err(Error::EmptyFixations);
    }
    let total = pred.len();
    if fixations.len() == total {
        return Err(Error::AllFixated);
    }
    let fix_vals = fixation_values(pred, fixations);
    let (w, _h) = pred.dims();
    let mut neg_vals = Vec::with_capacity(total - fixations.len());
    for (i, &v) in pred.values().iter().enumerate() {
        let x = (i as u32) % w;
        let y = (i as u32) / w;
        if !fixations.contains(x, y) {
            neg_vals.push(v);
        }
    }
    Ok(threshold_sweep_auc(&fix_vals, &neg_vals))
}

fn mean_sampled_auc(
    fix_vals: &[f64],
    neg_pool: &[f64],
    per_split: usize,
    splits: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..splits {
        let idx = rand::seq::index::sample(&mut rng, neg_pool.len(), per_split);
        let negs: Vec<f64> = idx.into_iter().map(|i| neg_pool[i]).collect();
        acc += threshold_sweep_auc(fix_vals, &negs);
    }
    acc / splits as f64
}

/// AUC with `|fixations|` negatives resampled uniformly (without
/// replacement) from the non-fixated pixels on each of `splits` rounds.
pub fn auc_borji(
    pred: &ScalarMap,
    fixations: &FixationPointSet,
    splits: usize,
    seed: u64,
) -> Result<f64> {
    if pred.dims() != fixations.dims() {
        return Err(Error::dims(pred.dims(), fixations.dims()));
    }
    if fixations.is_empty() {
        return Err(Error::EmptyFixations);
    }
    let total = pred.len();
    let available = total - fixations.len();
    if available < fixations.len() {
        return Err(Error::InsufficientNegatives {
            needed: fixations.len(),
            available,
        });
    }
    let fix_vals = fixation_values(pred, fixations);
    let (w, _h) = pred.dims();
    let mut pool = Vec::with_capacity(available);
    for (i, &v) in pred.values().iter().enumerate() {
        let x = (i as u32) % w;
        let y = (i as u32) / w;
        if !fixations.contains(x, y) {
            pool.push(v);
        }
    }
    Ok(mean_sampled_auc(&fix_vals, &pool, fix_vals.len(), splits, seed))
}

/// Shuffled AUC: negatives are drawn from a pool of fixations recorded on
/// other images, minus any point coinciding with this image's fixations.
/// Each split samples `min(|fixations|, |pool|)` negatives.
pub fn sauc(
    pred: &ScalarMap,
    fixations: &FixationPointSet,
    other_fixations: &FixationPointSet,
    splits: usize,
    seed: u64,
) -> Result<f64> {
    if pred.dims() != fixations.dims() {
        return Err(Error::dims(pred.dims(), fixations.dims()));
    }
    if other_fixations.dims() != pred.dims() {
        return Err(Error::dims(pred.dims(), other_fixations.dims()));
    }
    if fixations.is_empty() {
        return Err(Error::EmptyFixations);
    }
    let pool: Vec<f64> = other_fixations
        .points()
        .iter()
        .filter(|&&(x, y)| !fixations.contains(x, y))
        .map(|&(x, y)| pred.get(x, y))
        .collect();
    if pool.is_empty() {
        return Err(Error::EmptyNegativePool);
    }
    let fix_vals = fixation_values(pred, fixations);
    let per_split = fix_vals.len().min(pool.len());
    Ok(mean_sampled_auc(&fix_vals, &pool, per_split, splits, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::to_distribution;

    fn map(w: u32, h: u32, v: &[f64]) -> ScalarMap {
        ScalarMap::new(w, h, v.to_vec()).unwrap()
    }

    fn dist(w: u32, h: u32, v: &[f64]) -> Distribution {
        to_distribution(&map(w, h, v)).unwrap()
    }

    fn points(w: u32, h: u32, pts: &[(u32, u32)]) -> FixationPointSet {
        FixationPointSet::new(w, h, pts.to_vec()).unwrap()
    }

    #[test]
    fn sim_identical_disjoint_and_half() {
        let p = dist(2, 1, &[0.5, 0.5]);
        assert!((sim(&p, &p).unwrap() - 1.0).abs() < 1e-12);

        let a = dist(2, 1, &[1.0, 0.0]);
        let b = dist(2, 1, &[0.0, 1.0]);
        assert!(sim(&a, &b).unwrap().abs() < 1e-12);

        assert!((sim(&p, &a).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sim_invariant_to_input_rescale() {
        let raw = map(2, 2, &[1.0, 3.0, 0.5, 0.25]);
        let scaled = raw.map(|v| v * 7.0).unwrap();
        let q = dist(2, 2, &[0.25; 4]);
        let s1 = sim(&to_distribution(&raw).unwrap(), &q).unwrap();
        let s2 = sim(&to_distribution(&scaled).unwrap(), &q).unwrap();
        assert!((s1 - s2).abs() < 1e-12);
    }

    #[test]
    fn cc_affine_cases() {
        let q = map(2, 2, &[0.1, 0.4, 0.7, 0.2]);
        let pos = q.map(|v| 2.0 * v + 0.1).unwrap();
        assert!((cc(&pos, &q).unwrap() - 1.0).abs() < 1e-12);
        let neg = q.map(|v| -v + 1.0).unwrap();
        assert!((cc(&neg, &q).unwrap() + 1.0).abs() < 1e-12);

        let flat = map(2, 2, &[0.3; 4]);
        assert!(matches!(cc(&flat, &q), Err(Error::DegenerateMap(_))));
    }

    #[test]
    fn nss_hand_computed() {
        // values (3,1,1,1): mean 1.5, population std sqrt(0.75), z at the 3
        // is 1.5/sqrt(0.75) = sqrt(3)
        let pred = map(2, 2, &[3.0, 1.0, 1.0, 1.0]);
        let fix = points(2, 2, &[(0, 0)]);
        assert!((nss(&pred, &fix).unwrap() - 3f64.sqrt()).abs() < 1e-9);
        assert!((nss(&pred, &fix).unwrap() - 1.7321).abs() < 1e-4);
    }

    #[test]
    fn nss_zero_at_mean_and_affine_invariant() {
        let pred = map(2, 2, &[0.0, 1.0, 0.5, 0.5]);
        // 0.5 equals the mean, so its z-score contributes 0
        let fix = points(2, 2, &[(0, 1)]);
        assert!(nss(&pred, &fix).unwrap().abs() < 1e-12);

        let shifted = pred.map(|v| 3.0 * v + 2.0).unwrap();
        let fix2 = points(2, 2, &[(1, 0), (0, 0)]);
        assert!((nss(&pred, &fix2).unwrap() - nss(&shifted, &fix2).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn nss_error_cases() {
        let flat = map(2, 2, &[0.5; 4]);
        let fix = points(2, 2, &[(0, 0)]);
        assert!(matches!(nss(&flat, &fix), Err(Error::DegenerateMap(_))));
        let pred = map(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let none = points(2, 2, &[]);
        assert!(matches!(nss(&pred, &none), Err(Error::EmptyFixations)));
    }

    #[test]
    fn kld_zero_and_closed_form() {
        let p = dist(2, 1, &[0.5, 0.5]);
        assert!(kld(&p, &p).unwrap().abs() < 1e-9);

        let u = dist(2, 2, &[0.25; 4]);
        assert!(kld(&u, &u).unwrap().abs() < 1e-9);

        let q = dist(2, 1, &[1.0, 0.0]);
        let p = dist(2, 1, &[0.5, 0.5]);
        assert!((kld(&p, &q).unwrap() - std::f64::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn kld_nonnegative_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let a: Vec<f64> = (0..16).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let b: Vec<f64> = (0..16).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let p = to_distribution(&map(4, 4, &a)).unwrap();
            let q = to_distribution(&map(4, 4, &b)).unwrap();
            assert!(kld(&p, &q).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn auc_judd_perfect_separation() {
        let pred = map(2, 2, &[0.9, 0.8, 0.1, 0.2]);
        let fix = points(2, 2, &[(0, 0), (1, 0)]);
        assert!((auc_judd(&pred, &fix).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auc_judd_single_low_fixation_is_chance() {
        let pred = map(2, 2, &[0.9, 0.1, 0.2, 0.3]);
        let fix = points(2, 2, &[(1, 0)]);
        assert!((auc_judd(&pred, &fix).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn auc_judd_constant_pred_is_chance() {
        let pred = map(3, 3, &[0.4; 9]);
        let fix = points(3, 3, &[(0, 0), (2, 2)]);
        assert!((auc_judd(&pred, &fix).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn auc_judd_error_cases() {
        let pred = map(2, 1, &[0.1, 0.9]);
        assert!(matches!(
            auc_judd(&pred, &points(2, 1, &[])),
            Err(Error::EmptyFixations)
        ));
        assert!(matches!(
            auc_judd(&pred, &points(2, 1, &[(0, 0), (1, 0)])),
            Err(Error::AllFixated)
        ));
    }

    #[test]
    fn auc_judd_invariant_to_monotone_transform() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let vals: Vec<f64> = (0..25).map(|_| rng.gen::<f64>()).collect();
            let pred = map(5, 5, &vals);
            let cubed = pred.map(|v| v * v * v).unwrap();
            let fix = points(5, 5, &[(1, 1), (3, 2), (0, 4)]);
            let a = auc_judd(&pred, &fix).unwrap();
            let b = auc_judd(&cubed, &fix).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_borji_perfect_and_deterministic() {
        let pred = map(3, 3, &[0.9, 0.8, 0.05, 0.1, 0.2, 0.15, 0.0, 0.3, 0.25]);
        let fix = points(3, 3, &[(0, 0), (1, 0)]);
        for seed in [0u64, 1, 42] {
            assert!((auc_borji(&pred, &fix, 100, seed).unwrap() - 1.0).abs() < 1e-12);
        }
        let a = auc_borji(&pred, &fix, 100, 7).unwrap();
        let b = auc_borji(&pred, &fix, 100, 7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn auc_borji_chance_level_on_random_pred() {
        use rand::{Rng, SeedableRng};
        let mut gen = ChaCha8Rng::seed_from_u64(99);
        let vals: Vec<f64> = (0..1000).map(|_| gen.gen::<f64>()).collect();
        let pred = map(40, 25, &vals);
        let mut pts = Vec::new();
        while pts.len() < 50 {
            let x = gen.gen_range(0..40u32);
            let y = gen.gen_range(0..25u32);
            if !pts.contains(&(x, y)) {
                pts.push((x, y));
            }
        }
        let fix = points(40, 25, &pts);
        let mut acc = 0.0;
        for seed in 0..20u64 {
            acc += auc_borji(&pred, &fix, 100, seed).unwrap();
        }
        let mean = acc / 20.0;
        assert!(
            (mean - 0.5).abs() < 0.05,
            "expected chance level, got {mean}"
        );
    }

    #[test]
    fn auc_borji_insufficient_negatives() {
        let pred = map(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let fix = points(2, 2, &[(0, 0), (1, 0), (0, 1)]);
        assert!(matches!(
            auc_borji(&pred, &fix, 10, 0),
            Err(Error::InsufficientNegatives {
                needed: 3,
                available: 1
            })
        ));
    }

    #[test]
    fn sauc_perfect_and_deterministic() {
        let pred = map(3, 3, &[0.9, 0.8, 0.05, 0.1, 0.2, 0.15, 0.0, 0.3, 0.25]);
        let fix = points(3, 3, &[(0, 0), (1, 0)]);
        let pool = points(3, 3, &[(2, 0), (0, 1), (1, 1), (2, 2)]);
        assert!((sauc(&pred, &fix, &pool, 100, 3).unwrap() - 1.0).abs() < 1e-12);
        let a = sauc(&pred, &fix, &pool, 100, 9).unwrap();
        let b = sauc(&pred, &fix, &pool, 100, 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sauc_excludes_coincident_points_and_errors_on_empty_pool() {
        let pred = map(2, 2, &[0.9, 0.1, 0.2, 0.3]);
        let fix = points(2, 2, &[(0, 0)]);
        let pool_same = points(2, 2, &[(0, 0)]);
        assert!(matches!(
            sauc(&pred, &fix, &pool_same, 10, 0),
            Err(Error::EmptyNegativePool)
        ));
    }

    #[test]
    fn sauc_penalizes_center_bias_relative_to_borji() {
        // center-peaked prediction, uniformly scattered fixations, and a
        // center-biased pool: shuffled AUC must come out lower than Borji
        use rand::{Rng, SeedableRng};
        let (w, h) = (21u32, 21u32);
        let mut vals = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let dx = x as f64 - 10.0;
                let dy = y as f64 - 10.0;
                vals.push(1.0 / (1.0 + (dx * dx + dy * dy).sqrt()));
            }
        }
        let pred = map(w, h, &vals);
        let mut gen = ChaCha8Rng::seed_from_u64(17);
        let mut pts = Vec::new();
        while pts.len() < 30 {
            let x = gen.gen_range(0..w);
            let y = gen.gen_range(0..h);
            if !pts.contains(&(x, y)) {
                pts.push((x, y));
            }
        }
        let fix = points(w, h, &pts);
        let mut center_pool = Vec::new();
        for y in 7..14u32 {
            for x in 7..14u32 {
                center_pool.push((x, y));
            }
        }
        let pool = points(w, h, &center_pool);
        let borji = auc_borji(&pred, &fix, 100, 5).unwrap();
        let shuffled = sauc(&pred, &fix, &pool, 100, 5).unwrap();
        assert!(
            shuffled < borji,
            "expected center-bias penalty: sauc {shuffled} vs borji {borji}"
        );
    }

    #[test]
    fn sampled_aucs_invariant_to_monotone_transform_per_seed() {
        use rand::{Rng, SeedableRng};
        let mut gen = ChaCha8Rng::seed_from_u64(23);
        let vals: Vec<f64> = (0..64).map(|_| gen.gen::<f64>()).collect();
        let pred = map(8, 8, &vals);
        let mono = pred.map(|v| (5.0 * v).exp()).unwrap();
        let fix = points(8, 8, &[(0, 0), (3, 3), (7, 7), (2, 5)]);
        let pool = points(8, 8, &[(1, 1), (6, 2), (4, 4), (5, 6), (0, 7)]);
        for seed in [0u64, 11] {
            let a = auc_borji(&pred, &fix, 50, seed).unwrap();
            let b = auc_borji(&mono, &fix, 50, seed).unwrap();
            assert!((a - b).abs() < 1e-12);
            let c = sauc(&pred, &fix, &pool, 50, seed).unwrap();
            let d = sauc(&mono, &fix, &pool, 50, seed).unwrap();
            assert!((c - d).abs() < 1e-12);
        }
    }
}
