//! Shared fixtures for the integration tests: independent oracle
//! implementations of selected metrics and a synthetic on-disk dataset
//! generator.
//!
//! The oracles deliberately avoid the library's algorithms and data layout.
//! They favour brute force over speed so that agreement with the production
//! code is meaningful evidence rather than a tautology.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use camobench::bench::{write_rank_predictions, RankPredictionEntry, RankPredictionFile};
use camobench::fixation::{FixationEvent, FixationSession};
use camobench::manifest::{DatasetManifest, ManifestEntry, ManifestInstance};
use camobench::map::{BinaryMask, ScalarMap};
use camobench::rank::RankLabel;
use camobench::MethodRoot;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// small constructors

pub fn rect_mask(w: u32, h: u32, x0: u32, y0: u32, bw: u32, bh: u32) -> BinaryMask {
    let mut bits = vec![false; (w * h) as usize];
    for y in y0..(y0 + bh).min(h) {
        for x in x0..(x0 + bw).min(w) {
            bits[(y * w + x) as usize] = true;
        }
    }
    BinaryMask::new(w, h, bits).unwrap()
}

/// Nonempty, non-full random mask: a union of one to three rectangles.
pub fn random_mask(rng: &mut StdRng, w: u32, h: u32) -> BinaryMask {
    loop {
        let mut bits = vec![false; (w * h) as usize];
        for _ in 0..rng.gen_range(1..=3) {
            let bw = rng.gen_range(1..=w / 2);
            let bh = rng.gen_range(1..=h / 2);
            let x0 = rng.gen_range(0..w - bw + 1);
            let y0 = rng.gen_range(0..h - bh + 1);
            for y in y0..y0 + bh {
                for x in x0..x0 + bw {
                    bits[(y * w + x) as usize] = true;
                }
            }
        }
        let ones = bits.iter().filter(|&&b| b).count();
        if ones > 0 && ones < bits.len() {
            return BinaryMask::new(w, h, bits).unwrap();
        }
    }
}

pub fn random_map(rng: &mut StdRng, w: u32, h: u32) -> ScalarMap {
    let values: Vec<f64> = (0..w * h).map(|_| rng.gen::<f64>()).collect();
    ScalarMap::new(w, h, values).unwrap()
}

/// Sum of isotropic Gaussian bumps, rescaled to peak at 1. Separable
/// evaluation keeps generation cheap at full image size.
pub fn blob_mixture(w: u32, h: u32, centers: &[(f64, f64)], sigma: f64) -> ScalarMap {
    let mut values = vec![0.0f64; (w * h) as usize];
    for &(cx, cy) in centers {
        let gx: Vec<f64> = (0..w)
            .map(|x| (-((x as f64 - cx).powi(2)) / (2.0 * sigma * sigma)).exp())
            .collect();
        let gy: Vec<f64> = (0..h)
            .map(|y| (-((y as f64 - cy).powi(2)) / (2.0 * sigma * sigma)).exp())
            .collect();
        for y in 0..h as usize {
            for x in 0..w as usize {
                values[y * w as usize + x] += gx[x] * gy[y];
            }
        }
    }
    let peak = values.iter().cloned().fold(0.0f64, f64::max);
    if peak > 0.0 {
        for v in &mut values {
            *v /= peak;
        }
    }
    ScalarMap::new(w, h, values).unwrap()
}

// ---------------------------------------------------------------------------
// transport oracle: dense two-phase tableau simplex

const LP_TOL: f64 = 1e-9;

fn lp_pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, e: usize) {
    let cols = t[0].len();
    let div = t[r][e];
    for v in t[r].iter_mut() {
        *v /= div;
    }
    for i in 0..t.len() {
        if i == r || t[i][e] == 0.0 {
            continue;
        }
        let f = t[i][e];
        for j in 0..cols {
            t[i][j] -= f * t[r][j];
        }
    }
    basis[r] = e;
}

/// One simplex phase under Bland's rule, minimizing `obj` with entering
/// variables restricted to columns `0..limit`. Reduced costs are recomputed
/// from scratch each iteration; slow and hard to get wrong.
fn lp_run_phase(t: &mut [Vec<f64>], basis: &mut [usize], obj: &[f64], limit: usize) {
    let rhs = t[0].len() - 1;
    loop {
        let mut entering = None;
        'cols: for j in 0..limit {
            if basis.contains(&j) {
                continue;
            }
            let mut r = obj[j];
            for (i, row) in t.iter().enumerate() {
                r -= obj[basis[i]] * row[j];
            }
            if r < -LP_TOL {
                entering = Some(j);
                break 'cols;
            }
        }
        let Some(e) = entering else { break };
        let mut leave: Option<usize> = None;
        for i in 0..t.len() {
            if t[i][e] <= LP_TOL {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    let ri = t[i][rhs] / t[i][e];
                    let rl = t[l][rhs] / t[l][e];
                    ri < rl - LP_TOL || ((ri - rl).abs() <= LP_TOL && basis[i] < basis[l])
                }
            };
            if better {
                leave = Some(i);
            }
        }
        let r = leave.expect("transportation program is bounded");
        lp_pivot(t, basis, r, e);
    }
}

/// Minimizes `c . x` subject to `A x = b`, `x >= 0` (with `b >= 0`),
/// returning the optimal objective. Panics on infeasible input; the
/// transportation programs fed to it are always feasible.
fn simplex_min_eq(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let m = a.len();
    let n = c.len();
    let cols = n + m;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; cols + 1];
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = 1.0;
            row[cols] = b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..cols).collect();

    let mut phase1 = vec![0.0; cols];
    for v in &mut phase1[n..] {
        *v = 1.0;
    }
    lp_run_phase(&mut t, &mut basis, &phase1, cols);
    let infeasibility: f64 = basis
        .iter()
        .zip(&t)
        .map(|(&b, row)| if b >= n { row[cols] } else { 0.0 })
        .sum();
    assert!(infeasibility < 1e-7, "phase 1 left mass unplaced");

    // drive zero-level artificials out of the basis before phase 2
    for i in 0..m {
        if basis[i] >= n {
            let e = (0..n)
                .find(|&j| t[i][j].abs() > 1e-7)
                .expect("constraint rows are independent");
            lp_pivot(&mut t, &mut basis, i, e);
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(c);
    lp_run_phase(&mut t, &mut basis, &phase2, n);
    basis
        .iter()
        .zip(&t)
        .map(|(&b, row)| phase2[b] * row[cols])
        .sum()
}

/// Minimum-cost transport between two nonnegative pixel grids, each
/// normalized to unit mass, with Euclidean distance between cell
/// coordinates as the ground cost. Every cell is a node; nothing is pruned.
pub fn transport_lp_oracle(p: &[f64], q: &[f64], w: u32, h: u32) -> f64 {
    let cells = (w * h) as usize;
    assert_eq!(p.len(), cells);
    assert_eq!(q.len(), cells);
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    assert!(sp > 0.0 && sq > 0.0);

    let nvars = cells * cells;
    let rows = 2 * cells - 1; // the final demand row is linearly dependent
    let mut a = vec![vec![0.0; nvars]; rows];
    let mut b = vec![0.0; rows];
    for s in 0..cells {
        for d in 0..cells {
            a[s][s * cells + d] = 1.0;
        }
        b[s] = p[s] / sp;
    }
    for d in 0..cells - 1 {
        for s in 0..cells {
            a[cells + d][s * cells + d] = 1.0;
        }
        b[cells + d] = q[d] / sq;
    }
    let coord = |i: usize| ((i as u32 % w) as f64, (i as u32 / w) as f64);
    let c: Vec<f64> = (0..nvars)
        .map(|k| {
            let (xs, ys) = coord(k / cells);
            let (xd, yd) = coord(k % cells);
            ((xs - xd).powi(2) + (ys - yd).powi(2)).sqrt()
        })
        .collect();
    simplex_min_eq(&a, &b, &c)
}

// ---------------------------------------------------------------------------
// fixation AUC oracle: exhaustive threshold enumeration

/// ROC area with every distinct saliency value at a fixated pixel as one
/// threshold, all non-fixated pixels as negatives, counts taken by direct
/// linear scans, and the curve closed with (0,0) and (1,1).
pub fn auc_judd_oracle(values: &[f64], w: u32, h: u32, fixations: &[(u32, u32)]) -> f64 {
    let fix: BTreeSet<(u32, u32)> = fixations.iter().copied().collect();
    assert!(!fix.is_empty() && fix.len() < (w * h) as usize);
    let at = |x: u32, y: u32| values[(y * w + x) as usize];
    let pos: Vec<f64> = fix.iter().map(|&(x, y)| at(x, y)).collect();
    let mut neg = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !fix.contains(&(x, y)) {
                neg.push(at(x, y));
            }
        }
    }
    let mut thresholds = pos.clone();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let frac_ge = |vals: &[f64], t: f64| {
        vals.iter().filter(|&&v| v >= t).count() as f64 / vals.len() as f64
    };
    let mut pts = vec![(0.0, 0.0)];
    for &t in &thresholds {
        pts.push((frac_ge(&neg, t), frac_ge(&pos, t)));
    }
    pts.push((1.0, 1.0));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

// ---------------------------------------------------------------------------
// Spearman oracles

/// Textbook formula for distinct values: 1 - 6 sum(d^2) / (n (n^2 - 1)).
pub fn spearman_closed_form_distinct(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let rank_of = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&x| 1.0 + v.iter().filter(|&&y| y < x).count() as f64)
            .collect()
    };
    let ra = rank_of(a);
    let rb = rank_of(b);
    let d2: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y).powi(2)).sum();
    let n = a.len() as f64;
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
    let mut out = vec![0.0; n];
    let mut k = 0;
    while k < n {
        let mut j = k;
        while j + 1 < n && v[idx[j + 1]] == v[idx[k]] {
            j += 1;
        }
        let avg = (k + j) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=j] {
            out[i] = avg;
        }
        k = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Tie-aware oracle: average ranks over tied groups, then plain Pearson on
/// the rank vectors. Undefined (NaN) when either vector is constant.
pub fn spearman_rank_pearson_oracle(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn recurse(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                recurse(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    recurse(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

// ---------------------------------------------------------------------------
// synthetic dataset generator

pub struct DatasetSpec {
    pub images: usize,
    pub width: u32,
    pub height: u32,
    pub methods: usize,
    /// Ground-truth rectangles per image; at least 1.
    pub instances: usize,
    /// List the rectangles as ranked instances in the manifest.
    pub ranked: bool,
    /// Write `<method root>/<id>.json` ranked-instance predictions.
    pub rank_predictions: bool,
    /// Write fixation density maps and per-observer logs.
    pub fixations: bool,
    /// Write actual RGB image files (needed by attribute classification).
    pub write_images: bool,
    pub saliency: bool,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            images: 6,
            width: 64,
            height: 48,
            methods: 2,
            instances: 2,
            ranked: true,
            rank_predictions: true,
            fixations: true,
            write_images: false,
            saliency: false,
            seed: 0x5eed,
        }
    }
}

pub struct TestDataset {
    pub dir: tempfile::TempDir,
    pub manifest: DatasetManifest,
    pub manifest_path: PathBuf,
    pub methods: Vec<MethodRoot>,
}

impl TestDataset {
    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    /// `name=path` strings as the command line expects them.
    pub fn method_args(&self) -> Vec<String> {
        self.methods
            .iter()
            .map(|m| format!("{}={}", m.name, m.path.display()))
            .collect()
    }
}

fn union_masks(masks: &[BinaryMask], w: u32, h: u32) -> BinaryMask {
    let mut bits = vec![false; (w * h) as usize];
    for m in masks {
        for (i, &b) in m.bits().iter().enumerate() {
            bits[i] |= b;
        }
    }
    BinaryMask::new(w, h, bits).unwrap()
}

/// Writes a complete dataset under a temp directory: ground-truth masks,
/// per-instance masks with cycling rank labels, Gaussian fixation densities
/// with matching observer logs, and per-method prediction maps whose bumps
/// are displaced from the truth. Everything is deterministic in the seed.
pub fn synthetic_dataset(spec: &DatasetSpec) -> TestDataset {
    assert!(spec.instances >= 1);
    assert!(spec.width >= 32 && spec.height >= 16 * spec.instances as u32);
    let mut rng = rng(spec.seed);
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for sub in ["img", "gt", "maps", "logs"] {
        std::fs::create_dir_all(root.join(sub)).unwrap();
    }
    let method_names: Vec<String> = (0..spec.methods).map(|m| format!("m{m}")).collect();
    for name in &method_names {
        std::fs::create_dir_all(root.join("preds").join(name)).unwrap();
    }

    let (w, h) = (spec.width, spec.height);
    let sigma = w as f64 / 16.0;
    let mut entries = Vec::new();
    for i in 0..spec.images {
        let id = format!("{i:04}");
        let band = h / spec.instances as u32;
        let mut inst_masks = Vec::new();
        let mut centers = Vec::new();
        for j in 0..spec.instances {
            let bw = rng.gen_range(w / 8..=w / 4);
            let bh = rng.gen_range(band / 4..=band / 2);
            let x0 = rng.gen_range(0..w - bw);
            let y0 = j as u32 * band + rng.gen_range(0..band - bh);
            centers.push((x0 as f64 + bw as f64 / 2.0, y0 as f64 + bh as f64 / 2.0));
            inst_masks.push(rect_mask(w, h, x0, y0, bw, bh));
        }
        let gt = union_masks(&inst_masks, w, h);
        camobench::io::save_mask(&gt, &root.join(format!("gt/{id}.png"))).unwrap();

        let mut instances = Vec::new();
        if spec.ranked {
            for (j, mask) in inst_masks.iter().enumerate() {
                let mask_rel = format!("gt/{id}_i{j}.png");
                camobench::io::save_mask(mask, &root.join(&mask_rel)).unwrap();
                instances.push(ManifestInstance {
                    mask: PathBuf::from(mask_rel),
                    rank: Some(RankLabel::FOREGROUND[(i + j) % 5]),
                });
            }
        }

        let mut fixation_map = None;
        let mut fixation_logs = Vec::new();
        if spec.fixations {
            let density = blob_mixture(w, h, &centers, sigma);
            let map_rel = format!("maps/{id}.png");
            camobench::io::save_scalar_map(&density, &root.join(&map_rel)).unwrap();
            fixation_map = Some(PathBuf::from(map_rel));
            for obs in 0..2 {
                let mut events = Vec::new();
                for (j, &(cx, cy)) in centers.iter().enumerate() {
                    for k in 0..3u64 {
                        let x = (cx + rng.gen_range(-4.0..4.0)).clamp(0.0, w as f64 - 1.0);
                        let y = (cy + rng.gen_range(-4.0..4.0)).clamp(0.0, h as f64 - 1.0);
                        events.push(FixationEvent {
                            t_ms: 1000 + 210 * (3 * j as u64 + k),
                            x: x as u32,
                            y: y as u32,
                        });
                    }
                }
                let log_rel = format!("logs/{id}_o{obs}.csv");
                FixationSession::new(&id, format!("obs{obs}"), 1000, events)
                    .unwrap()
                    .write_csv(&root.join(&log_rel))
                    .unwrap();
                fixation_logs.push(PathBuf::from(log_rel));
            }
        }

        for (m, name) in method_names.iter().enumerate() {
            let shift = (m as f64 + 1.0) * w as f64 / 20.0;
            let moved: Vec<(f64, f64)> = centers
                .iter()
                .map(|&(cx, cy)| ((cx + shift).min(w as f64 - 1.0), cy))
                .collect();
            let bump = blob_mixture(w, h, &moved, sigma * 1.2);
            // methods emit noisy maps; the floor also keeps every pixel active
            let noisy: Vec<f64> = bump.values().iter().map(|&v| 0.05 + 0.9 * v).collect();
            let pred = ScalarMap::new(w, h, noisy).unwrap();
            camobench::io::save_scalar_map(&pred, &root.join(format!("preds/{name}/{id}.png")))
                .unwrap();

            if spec.rank_predictions && spec.ranked {
                let pred_instances: Vec<RankPredictionEntry> = inst_masks
                    .iter()
                    .enumerate()
                    .map(|(j, _)| RankPredictionEntry {
                        mask: PathBuf::from(format!("../../gt/{id}_i{j}.png")),
                        rank: RankLabel::FOREGROUND[(i + j + m) % 5],
                        score: Some(0.5 + 0.1 * j as f64),
                    })
                    .collect();
                write_rank_predictions(
                    &root.join(format!("preds/{name}/{id}.json")),
                    &RankPredictionFile {
                        instances: pred_instances,
                    },
                )
                .unwrap();
            }
        }

        if spec.write_images {
            let img = image::RgbImage::from_fn(w, h, |x, y| {
                let t = (x as f64 / 7.3).sin() * (y as f64 / 5.1).cos();
                let v = (128.0 + 48.0 * t) as u8;
                image::Rgb([v, v.saturating_add(8), v.saturating_sub(8)])
            });
            img.save(root.join(format!("img/{id}.png"))).unwrap();
        }

        let mut saliency_map = None;
        if spec.saliency {
            let sal = blob_mixture(w, h, &centers[..1], sigma * 1.5);
            let sal_rel = format!("maps/{id}_sal.png");
            camobench::io::save_scalar_map(&sal, &root.join(&sal_rel)).unwrap();
            saliency_map = Some(PathBuf::from(sal_rel));
        }

        entries.push(ManifestEntry {
            image: PathBuf::from(format!("img/{id}.png")),
            width: w,
            height: h,
            gt_mask: PathBuf::from(format!("gt/{id}.png")),
            instances,
            fixation_map,
            fixation_logs,
            saliency_map,
            mm: Some(i % 3 == 0),
            oc: Some(i % 4 == 0),
        });
    }

    let mut manifest = DatasetManifest::new("synthetic", entries);
    manifest.set_base_dir(root);
    let manifest_path = root.join("manifest.json");
    manifest.write(&manifest_path).unwrap();
    let methods = method_names
        .iter()
        .map(|n| MethodRoot::new(n, root.join("preds").join(n)))
        .collect();
    TestDataset {
        dir,
        manifest,
        manifest_path,
        methods,
    }
}
