//! Batch evaluation over dataset manifests.
//!
//! Each operation walks the manifest once per method, producing one row per
//! (image, method, metric) plus dataset-level aggregates. Per-image tasks run
//! on a thread pool sized by [`RunOptions::jobs`]; results are merged in
//! manifest order and every seeded computation derives its seed purely from
//! (run seed, image index, method index), so any job count yields a
//! byte-identical report.
//!
//! One bad input file errors its own rows and never aborts the run. An
//! errored row carries a note naming the operation, the offending path, and
//! the machine-readable error kind.

pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attrs::{AttributeConfig, ComplexityMeasure, MeanGradientMeasure};
use crate::error::{Error, Result};
use crate::fixation::{FixationPointSet, FixationSession};
use crate::instance::InstanceRecord;
use crate::io;
use crate::manifest::{resolve_in, DatasetManifest, ManifestEntry};
use crate::map::{to_distribution, BinaryMask, Distribution, ScalarMap};
use crate::metrics::{fixation as fx, ranking, seg, transport};
use crate::rank::{RankLabel, RankMap};

pub use report::{
    attr_breakdown, emit_breakdown, emit_histogram, emit_report, rank_histogram, rows_from_csv,
    rows_to_csv, AttributeBreakdown, AttributeGroup, RankHistogram,
};

/// Metric columns of `eval_seg`, in row order.
pub const SEG_METRICS: [&str; 4] = ["S", "F", "E", "MAE"];
/// Metric columns of `eval_fix`, in row order.
pub const FIX_METRICS: [&str; 8] = ["SIM", "CC", "EMD", "KLD", "NSS", "AUC_J", "AUC_B", "sAUC"];
/// Metric columns of `eval_rank`, in row order. Corr is dataset-level and
/// reported separately.
pub const RANK_METRICS: [&str; 2] = ["MAE", "r_MAE"];

/// Tunable evaluation parameters. The defaults mirror the published
/// protocol and are snapshotted into every report's metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// Cells per side of the EMD downsampling grid.
    pub emd_grid: u32,
    /// Sampling rounds for AUC_B and sAUC.
    pub auc_splits: usize,
    /// Bbox IoU a prediction must strictly exceed to match a gt instance.
    pub iou_threshold: f64,
    /// Samplings averaged per Corr repeat.
    pub corr_samples: usize,
    /// Repeats averaged into the final Corr value.
    pub corr_repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            emd_grid: transport::DEFAULT_EMD_GRID,
            auc_splits: fx::DEFAULT_SPLITS,
            iou_threshold: 0.25,
            corr_samples: 100,
            corr_repeats: 10,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.emd_grid == 0 {
            return Err(Error::InvalidConfig("emd grid must be positive".into()));
        }
        if self.auc_splits == 0 {
            return Err(Error::InvalidConfig("auc splits must be at least 1".into()));
        }
        self.match_config(0).validate()
    }

    /// Corr matching/sampling parameters under the given sampling seed.
    pub fn match_config(&self, seed: u64) -> ranking::MatchConfig {
        ranking::MatchConfig {
            iou_threshold: self.iou_threshold,
            samples: self.corr_samples,
            repeats: self.corr_repeats,
            seed,
        }
    }
}

/// One run's knobs: seed, worker count, and metric parameters.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads; 0 and 1 both mean serial.
    pub jobs: usize,
    pub config: BenchConfig,
}

/// A named directory of one method's predictions (`name=path` on the CLI).
/// Dense prediction maps live at `<path>/<image id>.png`, ranked-instance
/// predictions at `<path>/<image id>.json`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodRoot {
    pub name: String,
    pub path: PathBuf,
}

impl MethodRoot {
    pub fn new(name: impl Into<String>, path: impl Into<PathBuf>) -> Self {
        MethodRoot {
            name: name.into(),
            path: path.into(),
        }
    }

    /// Parses a `name=path` spec.
    pub fn parse(spec: &str) -> Result<MethodRoot> {
        match spec.split_once('=') {
            Some((name, path)) if !name.is_empty() && !path.is_empty() => {
                Ok(MethodRoot::new(name, path))
            }
            _ => Err(Error::InvalidConfig(format!(
                "prediction root '{spec}' is not name=path"
            ))),
        }
    }

    pub fn map_path(&self, image_id: &str) -> PathBuf {
        self.path.join(format!("{image_id}.png"))
    }

    pub fn instances_path(&self, image_id: &str) -> PathBuf {
        self.path.join(format!("{image_id}.json"))
    }
}

/// Parses repeated `name=path` specs, rejecting duplicates.
pub fn parse_method_roots(specs: &[String]) -> Result<Vec<MethodRoot>> {
    let mut roots = Vec::with_capacity(specs.len());
    for spec in specs {
        let root = MethodRoot::parse(spec)?;
        if roots.iter().any(|r: &MethodRoot| r.name == root.name) {
            return Err(Error::InvalidConfig(format!(
                "duplicate prediction root name '{}'",
                root.name
            )));
        }
        roots.push(root);
    }
    if roots.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one prediction root is required".into(),
        ));
    }
    Ok(roots)
}

/// Sub-seed for one (image, method) task: a pure mix of the inputs, so tasks
/// may run in any order on any number of threads. Dataset-level seeded work
/// passes `image_index = u64::MAX`; a task with two seeded metrics uses
/// method slots `2m` and `2m + 1`.
pub fn task_seed(run_seed: u64, image_index: u64, method_index: u64) -> u64 {
    let mut z = run_seed
        ^ image_index.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ method_index.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One (image, method, metric) cell: a value or an error note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub image: String,
    pub method: String,
    pub metric: String,
    pub value: Option<f64>,
    pub error: Option<String>,
}

/// Mean of one metric's non-error rows for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub metric: String,
    /// None when every row of this cell errored.
    pub mean: Option<f64>,
    /// Rows that entered the mean.
    pub count: usize,
}

/// A dataset-level result (Corr, match counts) or its error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetValue {
    pub method: String,
    pub metric: String,
    pub value: Option<f64>,
    pub error: Option<String>,
}

/// Everything needed to reproduce a run: tool version, seed, config
/// snapshot, and the convention identifiers behind every number. The worker
/// count is deliberately absent; it must not influence the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub operation: String,
    pub dataset: String,
    pub seed: u64,
    pub images: usize,
    pub methods: Vec<String>,
    pub metrics: Vec<String>,
    pub config: BenchConfig,
    pub conventions: BTreeMap<String, String>,
}

/// Per-image rows plus per-dataset aggregates for one evaluation run.
///
/// Invariants: every (image, method, metric) combination has exactly one
/// row; an aggregate is the arithmetic mean of its non-error rows, summed in
/// manifest order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<Aggregate>,
    pub dataset_values: Vec<DatasetValue>,
}

impl EvaluationReport {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
            || self.dataset_values.iter().any(|v| v.error.is_some())
    }

    /// Every error note, per-image rows first, then dataset-level values.
    pub fn error_notes(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter_map(|r| r.error.as_deref())
            .chain(self.dataset_values.iter().filter_map(|v| v.error.as_deref()))
            .collect()
    }

    pub fn first_error(&self) -> Option<&str> {
        self.error_notes().first().copied()
    }

    /// Re-derives the aggregates from the rows; must equal `aggregates`.
    pub fn recompute_aggregates(&self) -> Vec<Aggregate> {
        compute_aggregates(&self.rows, &self.metadata.methods, &self.metadata.metrics)
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("report json: {e}")))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileMissing(path.to_path_buf()),
            _ => Error::Io {
                context: format!("reading report {}", path.display()),
                source: e,
            },
        })?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

/// Means of non-error rows per (method, metric), summed in row order so the
/// result is independent of completion order.
pub(crate) fn compute_aggregates(
    rows: &[ReportRow],
    methods: &[String],
    metrics: &[String],
) -> Vec<Aggregate> {
    let mut out = Vec::with_capacity(methods.len() * metrics.len());
    for method in methods {
        for metric in metrics {
            let mut sum = 0.0;
            let mut count = 0usize;
            for row in rows {
                if row.method == *method && row.metric == *metric {
                    if let Some(v) = row.value {
                        sum += v;
                        count += 1;
                    }
                }
            }
            out.push(Aggregate {
                method: method.clone(),
                metric: metric.clone(),
                mean: (count > 0).then(|| sum / count as f64),
                count,
            });
        }
    }
    out
}

/// Convention identifiers pinned into every report so its numbers are
/// self-describing: threshold policies, grid sizes, epsilons, and the
/// attribute decision thresholds.
pub fn convention_map(config: &BenchConfig, attr: &AttributeConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put(
        "f_measure",
        format!(
            "adaptive threshold min(2*mean, 1), binarize >= t, beta^2 = {}",
            seg::F_MEASURE_BETA2
        ),
    );
    put("s_measure", format!("alpha = {}", seg::S_MEASURE_ALPHA));
    put(
        "e_measure",
        "adaptive-threshold enhanced alignment".to_string(),
    );
    put("emd_grid", config.emd_grid.to_string());
    put("kld_epsilon", format!("{:e}", f64::EPSILON));
    put("auc_splits", config.auc_splits.to_string());
    put(
        "sauc_negative_pool",
        "fixation points of all other images, minus coincident points".to_string(),
    );
    put("iou_threshold", config.iou_threshold.to_string());
    put(
        "corr_sampling",
        format!(
            "{} samples x {} repeats, one matched instance per rank",
            config.corr_samples, config.corr_repeats
        ),
    );
    put("rank_codes", "ES=1,M1=2,M2=3,M3=4,HD=5,BG=6".to_string());
    put("bm_threshold", attr.bm_threshold.to_string());
    put("cb_threshold", attr.cb_threshold.to_string());
    put("cb_measure", MeanGradientMeasure.name().to_string());
    put("cp_sigma", attr.cp_sigma.to_string());
    put(
        "cp_rule",
        if attr.cp_far_from_center {
            "far from center: centroid offset > sigma * extent on either axis".to_string()
        } else {
            "literal: centroid offset < sigma * extent on either axis".to_string()
        },
    );
    put("gabrat_threshold", attr.dc_threshold.to_string());
    put("so_threshold", attr.so_threshold.to_string());
    m
}

/// A loaded input or the finished error note for the rows it would feed.
type Loaded<T> = std::result::Result<T, String>;

/// Formats the error note for one failed input: operation, path, kind,
/// message.
fn fail(op: &str, path: &Path, err: Error) -> String {
    format!("{op}: {}: [{}] {err}", path.display(), err.kind())
}

fn mk_row(image: &str, method: &str, metric: &str, outcome: Loaded<f64>) -> ReportRow {
    match outcome {
        Ok(v) => ReportRow {
            image: image.to_string(),
            method: method.to_string(),
            metric: metric.to_string(),
            value: Some(v),
            error: None,
        },
        Err(note) => ReportRow {
            image: image.to_string(),
            method: method.to_string(),
            metric: metric.to_string(),
            value: None,
            error: Some(note),
        },
    }
}

fn both<'a, A, B>(a: &'a Loaded<A>, b: &'a Loaded<B>) -> std::result::Result<(&'a A, &'a B), String> {
    match (a, b) {
        (Ok(x), Ok(y)) => Ok((x, y)),
        (Err(n), _) => Err(n.clone()),
        (_, Err(n)) => Err(n.clone()),
    }
}

/// Runs `work` over the entries on a pool of `jobs` threads, returning the
/// outputs in manifest order regardless of completion order.
fn with_pool<T, F>(jobs: usize, entries: &[ManifestEntry], work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &ManifestEntry) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| work(i, e))
            .collect()
    }))
}

fn assemble(
    op: &str,
    manifest: &DatasetManifest,
    methods: &[MethodRoot],
    options: &RunOptions,
    metrics: &[&str],
    rows: Vec<ReportRow>,
    dataset_values: Vec<DatasetValue>,
) -> EvaluationReport {
    let method_names: Vec<String> = methods.iter().map(|m| m.name.clone()).collect();
    let metric_names: Vec<String> = metrics.iter().map(|s| s.to_string()).collect();
    let aggregates = compute_aggregates(&rows, &method_names, &metric_names);
    EvaluationReport {
        metadata: ReportMetadata {
            tool: format!("camobench {}", env!("CARGO_PKG_VERSION")),
            operation: op.to_string(),
            dataset: manifest.dataset.clone(),
            seed: options.seed,
            images: manifest.entries.len(),
            methods: method_names,
            metrics: metric_names,
            config: options.config,
            conventions: convention_map(&options.config, &AttributeConfig::default()),
        },
        rows,
        aggregates,
        dataset_values,
    }
}

/// Dense segmentation quality: S, F, E, MAE per image per method.
///
/// A bad gt mask errors the image's rows for every method; a bad prediction
/// map errors only that method's rows.
pub fn eval_seg(
    manifest: &DatasetManifest,
    methods: &[MethodRoot],
    options: &RunOptions,
) -> Result<EvaluationReport> {
    options.config.validate()?;
    let op = "eval-seg";
    let metric_fns: [(&str, fn(&ScalarMap, &BinaryMask) -> Result<f64>); 4] = [
        ("S", seg::s_measure),
        ("F", seg::f_measure),
        ("E", seg::e_measure),
        ("MAE", seg::mae),
    ];
    let groups = with_pool(options.jobs, &manifest.entries, |_, entry| {
        let id = entry.id();
        let dims = entry.dims();
        let gt_path = manifest.resolve(&entry.gt_mask);
        let gt: Loaded<BinaryMask> =
            io::load_mask(&gt_path, dims).map_err(|e| fail(op, &gt_path, e));
        let mut rows = Vec::with_capacity(methods.len() * SEG_METRICS.len());
        for method in methods {
            let pred_path = method.map_path(&id);
            let pred: Loaded<ScalarMap> = match &gt {
                Ok(_) => {
                    io::load_scalar_map(&pred_path, dims).map_err(|e| fail(op, &pred_path, e))
                }
                Err(note) => Err(note.clone()),
            };
            for (name, f) in metric_fns {
                let outcome = both(&pred, &gt).and_then(|(p, g)| {
                    f(p, g).map_err(|e| {
                        // empty-gt failures are the mask's fault, not the map's
                        let blame = if matches!(e, Error::EmptyGroundTruth) {
                            &gt_path
                        } else {
                            &pred_path
                        };
                        fail(op, blame, e)
                    })
                });
                rows.push(mk_row(&id, &method.name, name, outcome));
            }
        }
        rows
    })?;
    let rows = groups.into_iter().flatten().collect();
    Ok(assemble(op, manifest, methods, options, &SEG_METRICS, rows, Vec::new()))
}

/// Per-entry fixation ground truth, loaded once up front.
struct FixGt {
    map: Loaded<ScalarMap>,
    dist: Loaded<Distribution>,
    points: Loaded<FixationPointSet>,
    /// sAUC negatives: every other image's fixation points that land inside
    /// this image's bounds.
    pool: FixationPointSet,
}

/// Fixation metrics: SIM, CC, EMD, KLD, NSS, AUC_J, AUC_B, sAUC per image
/// per method. Distribution metrics compare against the gt density map;
/// location metrics use the union of the logged fixation points.
pub fn eval_fix(
    manifest: &DatasetManifest,
    methods: &[MethodRoot],
    options: &RunOptions,
) -> Result<EvaluationReport> {
    options.config.validate()?;
    let op = "eval-fix";
    let n = manifest.entries.len();

    let mut maps: Vec<Loaded<ScalarMap>> = Vec::with_capacity(n);
    let mut points: Vec<Loaded<FixationPointSet>> = Vec::with_capacity(n);
    let mut raw_points: Vec<Vec<(u32, u32)>> = Vec::with_capacity(n);
    for entry in &manifest.entries {
        let dims = entry.dims();
        let map = match &entry.fixation_map {
            Some(p) => {
                let path = manifest.resolve(p);
                io::load_scalar_map(&path, dims).map_err(|e| fail(op, &path, e))
            }
            None => Err(fail(
                op,
                &manifest.resolve(&entry.image),
                Error::InvalidConfig("manifest entry lists no fixation_map".into()),
            )),
        };
        let pts = (|| {
            let mut sessions = Vec::with_capacity(entry.fixation_logs.len());
            for log in &entry.fixation_logs {
                let path = manifest.resolve(log);
                sessions.push(FixationSession::read_csv(&path).map_err(|e| fail(op, &path, e))?);
            }
            FixationPointSet::from_sessions(dims.0, dims.1, &sessions)
                .map_err(|e| fail(op, &manifest.resolve(&entry.image), e))
        })();
        raw_points.push(match &pts {
            Ok(ps) => ps.points().to_vec(),
            Err(_) => Vec::new(),
        });
        maps.push(map);
        points.push(pts);
    }
    let gts: Vec<FixGt> = maps
        .into_iter()
        .zip(points)
        .enumerate()
        .map(|(i, (map, pts))| {
            let (w, h) = manifest.entries[i].dims();
            let pool_pts = raw_points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, v)| v.iter().copied())
                .filter(|&(x, y)| x < w && y < h);
            let pool = FixationPointSet::new(w, h, pool_pts).expect("pool points pre-filtered");
            let dist = map.as_ref().map_err(Clone::clone).and_then(|m| {
                to_distribution(m).map_err(|e| {
                    let path = entry_map_path(manifest, i);
                    fail(op, &path, e)
                })
            });
            FixGt {
                map,
                dist,
                points: pts,
                pool,
            }
        })
        .collect();

    let splits = options.config.auc_splits;
    let grid = options.config.emd_grid;
    let seed = options.seed;
    let groups = with_pool(options.jobs, &manifest.entries, |i, entry| {
        let id = entry.id();
        let dims = entry.dims();
        let gt = &gts[i];
        let mut rows = Vec::with_capacity(methods.len() * FIX_METRICS.len());
        for (m, method) in methods.iter().enumerate() {
            let pred_path = method.map_path(&id);
            let pred: Loaded<ScalarMap> =
                io::load_scalar_map(&pred_path, dims).map_err(|e| fail(op, &pred_path, e));
            let pred_dist: Loaded<Distribution> = pred
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|p| to_distribution(p).map_err(|e| fail(op, &pred_path, e)));
            let on_pred = |e: Error| fail(op, &pred_path, e);

            let sim = both(&pred_dist, &gt.dist).and_then(|(p, q)| fx::sim(p, q).map_err(on_pred));
            rows.push(mk_row(&id, &method.name, "SIM", sim));

            let cc = both(&pred, &gt.map).and_then(|(p, q)| fx::cc(p, q).map_err(on_pred));
            rows.push(mk_row(&id, &method.name, "CC", cc));

            let emd = both(&pred_dist, &gt.dist)
                .and_then(|(p, q)| transport::emd(p, q, grid).map_err(on_pred));
            rows.push(mk_row(&id, &method.name, "EMD", emd));

            let kld = both(&pred_dist, &gt.dist).and_then(|(p, q)| fx::kld(p, q).map_err(on_pred));
            rows.push(mk_row(&id, &method.name, "KLD", kld));

            let nss = both(&pred, &gt.points).and_then(|(p, f)| fx::nss(p, f).map_err(on_pred));
            rows.push(mk_row(&id, &method.name, "NSS", nss));

            let aj = both(&pred, &gt.points).and_then(|(p, f)| fx::auc_judd(p, f).map_err(on_pred));
            rows.push(mk_row(&id, &method.name, "AUC_J", aj));

            let ab = both(&pred, &gt.points).and_then(|(p, f)| {
                fx::auc_borji(p, f, splits, task_seed(seed, i as u64, 2 * m as u64))
                    .map_err(on_pred)
            });
            rows.push(mk_row(&id, &method.name, "AUC_B", ab));

            let sa = both(&pred, &gt.points).and_then(|(p, f)| {
                fx::sauc(p, f, &gt.pool, splits, task_seed(seed, i as u64, 2 * m as u64 + 1))
                    .map_err(on_pred)
            });
            rows.push(mk_row(&id, &method.name, "sAUC", sa));
        }
        rows
    })?;
    let rows = groups.into_iter().flatten().collect();
    Ok(assemble(op, manifest, methods, options, &FIX_METRICS, rows, Vec::new()))
}

fn entry_map_path(manifest: &DatasetManifest, i: usize) -> PathBuf {
    let entry = &manifest.entries[i];
    match &entry.fixation_map {
        Some(p) => manifest.resolve(p),
        None => manifest.resolve(&entry.image),
    }
}

/// Ranked-instance predictions for one image, stored at
/// `<method root>/<image id>.json`:
///
/// ```json
/// { "instances": [ { "mask": "0001_i0.png", "rank": "M2", "score": 0.83 } ] }
/// ```
///
/// Mask paths resolve relative to the JSON file's directory. `score` is
/// optional and only breaks matching and overlap ties.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankPredictionFile {
    pub instances: Vec<RankPredictionEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankPredictionEntry {
    pub mask: PathBuf,
    pub rank: RankLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// Loads one method's ranked-instance prediction for one image.
pub fn read_rank_predictions(path: &Path, dims: (u32, u32)) -> Result<Vec<InstanceRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileMissing(path.to_path_buf()),
        _ => Error::Io {
            context: format!("reading rank predictions {}", path.display()),
            source: e,
        },
    })?;
    let file: RankPredictionFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut out = Vec::with_capacity(file.instances.len());
    for (i, inst) in file.instances.iter().enumerate() {
        let mask_path = resolve_in(base, &inst.mask);
        let mask = io::load_mask(&mask_path, dims)?;
        out.push(InstanceRecord::new(
            i.to_string(),
            mask,
            Some(inst.rank),
            inst.score,
        )?);
    }
    Ok(out)
}

/// Writes the ranked-instance prediction wire format.
pub fn write_rank_predictions(path: &Path, file: &RankPredictionFile) -> Result<()> {
    let mut text = serde_json::to_string_pretty(file).expect("predictions serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::UnwritablePath {
        path: path.to_path_buf(),
        source: e,
    })
}

fn union_of<'a>(masks: impl Iterator<Item = &'a BinaryMask>, dims: (u32, u32)) -> BinaryMask {
    let mut acc = BinaryMask::empty(dims.0, dims.1);
    for m in masks {
        acc = acc.union(m).expect("dims checked at load");
    }
    acc
}

/// Per-method pool contribution from one image: gt and predicted instances.
type PoolEntry = Option<(Vec<InstanceRecord>, Vec<InstanceRecord>)>;

/// Instance-ranking quality: per-image mask-union MAE and r_MAE, plus one
/// dataset-level Corr per method.
///
/// Corr samples over instances matched across the whole dataset; an image
/// whose gt or prediction failed to load is excluded from the pool and
/// counted. A rank level with no matched instances turns Corr (and only
/// Corr) into a dataset-level error.
pub fn eval_rank(
    manifest: &DatasetManifest,
    methods: &[MethodRoot],
    options: &RunOptions,
) -> Result<EvaluationReport> {
    options.config.validate()?;
    let op = "eval-rank";

    struct RankOut {
        rows: Vec<ReportRow>,
        pools: Vec<PoolEntry>,
    }

    let groups: Vec<RankOut> = with_pool(options.jobs, &manifest.entries, |_, entry| {
        let id = entry.id();
        let dims = entry.dims();

        // gt masks with optional ranks, all dims-checked and nonempty
        let gt: Loaded<Vec<(BinaryMask, Option<RankLabel>)>> = (|| {
            let mut out = Vec::with_capacity(entry.instances.len());
            for inst in &entry.instances {
                let path = manifest.resolve(&inst.mask);
                let mask = io::load_mask(&path, dims).map_err(|e| fail(op, &path, e))?;
                if mask.is_all_zero() {
                    return Err(fail(op, &path, Error::EmptyMask));
                }
                out.push((mask, inst.rank));
            }
            Ok(out)
        })();
        let gt_union: Loaded<BinaryMask> = gt
            .as_ref()
            .map_err(Clone::clone)
            .map(|list| union_of(list.iter().map(|(m, _)| m), dims));
        let gt_records: Loaded<Vec<InstanceRecord>> =
            gt.as_ref().map_err(Clone::clone).and_then(|list| {
                let mut recs = Vec::with_capacity(list.len());
                for (k, (mask, rank)) in list.iter().enumerate() {
                    let rank = rank.ok_or_else(|| {
                        let path = manifest.resolve(&entry.instances[k].mask);
                        fail(op, &path, Error::MissingRank(format!("{id}/{k}")))
                    })?;
                    recs.push(
                        InstanceRecord::new(k.to_string(), mask.clone(), Some(rank), None)
                            .expect("mask checked nonempty"),
                    );
                }
                Ok(recs)
            });
        let gt_rank_map: Loaded<RankMap> =
            gt_records.as_ref().map_err(Clone::clone).and_then(|recs| {
                crate::dataset::render_rank_map(recs, dims.0, dims.1)
                    .map_err(|e| fail(op, &manifest.resolve(&entry.image), e))
            });

        let mut rows = Vec::with_capacity(methods.len() * RANK_METRICS.len());
        let mut pools = Vec::with_capacity(methods.len());
        for method in methods {
            let pred_path = method.instances_path(&id);
            let preds: Loaded<Vec<InstanceRecord>> =
                read_rank_predictions(&pred_path, dims).map_err(|e| fail(op, &pred_path, e));

            let mae = both(&preds, &gt_union).and_then(|(ps, gu)| {
                let pred_union = union_of(ps.iter().map(|r| &r.mask), dims);
                seg::mae(&pred_union.to_scalar_map(), gu).map_err(|e| fail(op, &pred_path, e))
            });
            rows.push(mk_row(&id, &method.name, "MAE", mae));

            let rmae = both(&preds, &gt_rank_map).and_then(|(ps, gm)| {
                ranking::rank_prediction_to_map(ps, dims.0, dims.1)
                    .and_then(|pm| ranking::r_mae(&pm, gm))
                    .map_err(|e| fail(op, &pred_path, e))
            });
            rows.push(mk_row(&id, &method.name, "r_MAE", rmae));

            pools.push(match (&gt_records, &preds) {
                (Ok(g), Ok(p)) => Some((g.clone(), p.clone())),
                _ => None,
            });
        }
        RankOut { rows, pools }
    })?;

    let mut dataset_values = Vec::with_capacity(methods.len() * 4);
    for (m, method) in methods.iter().enumerate() {
        let mut images: Vec<(Vec<InstanceRecord>, Vec<InstanceRecord>)> = Vec::new();
        let mut excluded = 0usize;
        for out in &groups {
            match &out.pools[m] {
                Some(pair) => images.push(pair.clone()),
                None => excluded += 1,
            }
        }
        let corr_seed = task_seed(options.seed, u64::MAX, m as u64);
        let dataset_err = |e: Error| {
            format!("{op}: {}: [{}] {e}", manifest.dataset, e.kind())
        };
        let (corr, matched, unmatched) =
            match ranking::matched_pool(&images, options.config.iou_threshold) {
                Ok((pool, unmatched)) => (
                    ranking::corr(&pool, &options.config.match_config(corr_seed))
                        .map_err(dataset_err),
                    Some(pool.len()),
                    Some(unmatched),
                ),
                Err(e) => (Err(dataset_err(e)), None, None),
            };
        let mut push = |metric: &str, outcome: Loaded<f64>| {
            let (value, error) = match outcome {
                Ok(v) => (Some(v), None),
                Err(n) => (None, Some(n)),
            };
            dataset_values.push(DatasetValue {
                method: method.name.clone(),
                metric: metric.to_string(),
                value,
                error,
            });
        };
        push("Corr", corr);
        push(
            "matched_instances",
            matched.map(|v| v as f64).ok_or_else(|| {
                format!("{op}: {}: [matching] pool unavailable", manifest.dataset)
            }),
        );
        push(
            "unmatched_gt_instances",
            unmatched.map(|v| v as f64).ok_or_else(|| {
                format!("{op}: {}: [matching] pool unavailable", manifest.dataset)
            }),
        );
        push("excluded_images", Ok(excluded as f64));
    }

    let rows = groups.into_iter().flat_map(|g| g.rows).collect();
    Ok(assemble(op, manifest, methods, options, &RANK_METRICS, rows, dataset_values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixation::FixationEvent;
    use crate::manifest::ManifestInstance;

    fn rect_mask(w: u32, h: u32, x0: u32, y0: u32, bw: u32, bh: u32) -> BinaryMask {
        let mut bits = vec![false; (w * h) as usize];
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                bits[(y * w + x) as usize] = true;
            }
        }
        BinaryMask::new(w, h, bits).unwrap()
    }

    fn blob_map(w: u32, h: u32, cx: f64, cy: f64, sigma: f64) -> ScalarMap {
        let mut values = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                values.push((-d2 / (2.0 * sigma * sigma)).exp());
            }
        }
        ScalarMap::new(w, h, values).unwrap()
    }

    fn write_log(path: &Path, image: &str, observer: &str, pts: &[(u32, u32)]) {
        let events: Vec<FixationEvent> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| FixationEvent {
                t_ms: 1000 + 100 * i as u64,
                x,
                y,
            })
            .collect();
        FixationSession::new(image, observer, 1000, events)
            .unwrap()
            .write_csv(path)
            .unwrap();
    }

    struct SegFixture {
        _dir: tempfile::TempDir,
        manifest: DatasetManifest,
        method: MethodRoot,
    }

    /// Two entries, one method, predictions identical to the gt masks.
    fn seg_fixture() -> SegFixture {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for sub in ["gt", "preds/m1"] {
            std::fs::create_dir_all(root.join(sub)).unwrap();
        }
        let mut entries = Vec::new();
        for (i, x0) in [(1, 4u32), (2, 10u32)] {
            let id = format!("{i:04}");
            let mask = rect_mask(32, 24, x0, 5, 8, 8);
            crate::io::save_mask(&mask, &root.join(format!("gt/{id}.png"))).unwrap();
            std::fs::copy(
                root.join(format!("gt/{id}.png")),
                root.join(format!("preds/m1/{id}.png")),
            )
            .unwrap();
            entries.push(ManifestEntry {
                image: PathBuf::from(format!("img/{id}.jpg")),
                width: 32,
                height: 24,
                gt_mask: PathBuf::from(format!("gt/{id}.png")),
                instances: Vec::new(),
                fixation_map: None,
                fixation_logs: Vec::new(),
                saliency_map: None,
                mm: None,
                oc: None,
            });
        }
        let mut manifest = DatasetManifest::new("seg-demo", entries);
        manifest.set_base_dir(root);
        let method = MethodRoot::new("m1", root.join("preds/m1"));
        SegFixture {
            _dir: dir,
            manifest,
            method,
        }
    }

    #[test]
    fn eval_seg_identical_predictions_are_perfect() {
        let fx = seg_fixture();
        let report = eval_seg(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 8, "2 images x 1 method x 4 metrics");
        assert!(!report.has_errors());
        for row in &report.rows {
            let v = row.value.unwrap();
            let want = if row.metric == "MAE" { 0.0 } else { 1.0 };
            assert!(
                (v - want).abs() < 1e-9,
                "{} {} = {v}",
                row.image,
                row.metric
            );
        }
        for agg in &report.aggregates {
            assert_eq!(agg.count, 2);
        }
        assert_eq!(report.recompute_aggregates(), report.aggregates);
    }

    #[test]
    fn eval_seg_isolates_a_missing_prediction() {
        let fx = seg_fixture();
        std::fs::remove_file(fx.method.map_path("0002")).unwrap();
        let report = eval_seg(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 8);
        assert!(report.has_errors());
        let errored: Vec<&ReportRow> = report.rows.iter().filter(|r| r.error.is_some()).collect();
        assert_eq!(errored.len(), 4);
        for row in &errored {
            assert_eq!(row.image, "0002");
            let note = row.error.as_ref().unwrap();
            assert!(note.contains("eval-seg"), "{note}");
            assert!(note.contains("0002.png"), "{note}");
            assert!(note.contains("[FileMissing]"), "{note}");
        }
        // aggregates fall back to the surviving image
        for agg in &report.aggregates {
            assert_eq!(agg.count, 1);
            assert!(agg.mean.is_some());
        }
    }

    #[test]
    fn eval_seg_blames_gt_for_every_method() {
        let fx = seg_fixture();
        let gt_path = fx.manifest.resolve(&fx.manifest.entries[0].gt_mask);
        std::fs::remove_file(&gt_path).unwrap();
        let m2 = MethodRoot::new("m2", fx.method.path.clone());
        let report = eval_seg(
            &fx.manifest,
            &[fx.method.clone(), m2],
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(report.rows.len(), 16);
        let errored: Vec<&ReportRow> = report.rows.iter().filter(|r| r.error.is_some()).collect();
        assert_eq!(errored.len(), 8, "both methods' rows for image 0001");
        for row in errored {
            assert!(row.error.as_ref().unwrap().contains("gt/0001.png"));
        }
    }

    struct FixFixture {
        _dir: tempfile::TempDir,
        manifest: DatasetManifest,
        method: MethodRoot,
    }

    /// Entries with fixation maps, logs, and predictions equal to the gt
    /// density file.
    fn fix_fixture(n: usize) -> FixFixture {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for sub in ["fix", "logs", "preds/m1", "gt"] {
            std::fs::create_dir_all(root.join(sub)).unwrap();
        }
        let (w, h) = (40u32, 30u32);
        let mut entries = Vec::new();
        for i in 0..n {
            let id = format!("{:04}", i + 1);
            let cx = 8.0 + 6.0 * i as f64;
            let map = blob_map(w, h, cx, 12.0, 4.0);
            crate::io::save_scalar_map(&map, &root.join(format!("fix/{id}.png"))).unwrap();
            std::fs::copy(
                root.join(format!("fix/{id}.png")),
                root.join(format!("preds/m1/{id}.png")),
            )
            .unwrap();
            let p0 = (cx as u32, 12);
            let p1 = (cx as u32 + 2, 14);
            write_log(
                &root.join(format!("logs/{id}_o1.csv")),
                &id,
                "o1",
                &[p0, p1],
            );
            write_log(
                &root.join(format!("logs/{id}_o2.csv")),
                &id,
                "o2",
                &[(cx as u32 + 1, 10)],
            );
            entries.push(ManifestEntry {
                image: PathBuf::from(format!("img/{id}.jpg")),
                width: w,
                height: h,
                gt_mask: PathBuf::from(format!("gt/{id}.png")),
                instances: Vec::new(),
                fixation_map: Some(PathBuf::from(format!("fix/{id}.png"))),
                fixation_logs: vec![
                    PathBuf::from(format!("logs/{id}_o1.csv")),
                    PathBuf::from(format!("logs/{id}_o2.csv")),
                ],
                saliency_map: None,
                mm: None,
                oc: None,
            });
        }
        let mut manifest = DatasetManifest::new("fix-demo", entries);
        manifest.set_base_dir(root);
        let method = MethodRoot::new("m1", root.join("preds/m1"));
        FixFixture {
            _dir: dir,
            manifest,
            method,
        }
    }

    #[test]
    fn eval_fix_identical_predictions_and_determinism() {
        let fx = fix_fixture(2);
        let options = RunOptions {
            seed: 11,
            jobs: 1,
            config: BenchConfig::default(),
        };
        let report = eval_fix(&fx.manifest, &[fx.method.clone()], &options).unwrap();
        assert_eq!(report.rows.len(), 16, "2 images x 1 method x 8 metrics");
        assert!(!report.has_errors(), "{:?}", report.error_notes());
        for row in &report.rows {
            let v = row.value.unwrap();
            match row.metric.as_str() {
                "SIM" | "CC" => assert!((v - 1.0).abs() < 1e-9, "{} {v}", row.metric),
                "KLD" | "EMD" => assert!(v.abs() < 1e-9, "{} {v}", row.metric),
                "NSS" => assert!(v > 0.0),
                "AUC_J" | "AUC_B" | "sAUC" => assert!((0.0..=1.0).contains(&v)),
                other => panic!("unexpected metric {other}"),
            }
        }

        // same seed, same report; different job count, same bytes
        let again = eval_fix(&fx.manifest, &[fx.method.clone()], &options).unwrap();
        assert_eq!(report.to_json_string(), again.to_json_string());
        let parallel = eval_fix(
            &fx.manifest,
            &[fx.method.clone()],
            &RunOptions {
                jobs: 4,
                ..options.clone()
            },
        )
        .unwrap();
        assert_eq!(report.to_json_string(), parallel.to_json_string());

        // a different seed moves the sampled metrics
        let reseeded = eval_fix(
            &fx.manifest,
            &[fx.method.clone()],
            &RunOptions {
                seed: 12,
                ..options
            },
        )
        .unwrap();
        let pick = |rep: &EvaluationReport, metric: &str| -> Vec<f64> {
            rep.rows
                .iter()
                .filter(|r| r.metric == metric)
                .map(|r| r.value.unwrap())
                .collect()
        };
        assert_ne!(pick(&report, "AUC_B"), pick(&reseeded, "AUC_B"));
        // unseeded metrics must not move
        assert_eq!(pick(&report, "AUC_J"), pick(&reseeded, "AUC_J"));
    }

    #[test]
    fn eval_fix_single_image_errors_only_sauc() {
        let fx = fix_fixture(1);
        let report =
            eval_fix(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 8);
        for row in &report.rows {
            if row.metric == "sAUC" {
                let note = row.error.as_ref().expect("sAUC must error");
                assert!(note.contains("[EmptyNegativePool]"), "{note}");
            } else {
                assert!(row.value.is_some(), "{} should compute", row.metric);
            }
        }
    }

    #[test]
    fn eval_fix_missing_map_errors_density_metrics_only() {
        let fx = fix_fixture(2);
        let map_path = fx
            .manifest
            .resolve(fx.manifest.entries[0].fixation_map.as_ref().unwrap());
        std::fs::remove_file(&map_path).unwrap();
        // prediction for image 1 is still readable
        let report =
            eval_fix(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        for row in report.rows.iter().filter(|r| r.image == "0001") {
            match row.metric.as_str() {
                "SIM" | "CC" | "EMD" | "KLD" => {
                    assert!(row.error.as_ref().unwrap().contains("[FileMissing]"))
                }
                _ => assert!(row.value.is_some(), "{} should compute", row.metric),
            }
        }
        assert!(report
            .rows
            .iter()
            .filter(|r| r.image == "0002")
            .all(|r| r.value.is_some()));
    }

    struct RankFixture {
        _dir: tempfile::TempDir,
        manifest: DatasetManifest,
        method: MethodRoot,
    }

    /// Gt instances spread over two images covering the given ranks, with a
    /// prediction JSON that mirrors the gt exactly (score 0.9 each).
    fn rank_fixture(ranks_a: &[RankLabel], ranks_b: &[RankLabel]) -> RankFixture {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for sub in ["inst", "preds/m1", "gt"] {
            std::fs::create_dir_all(root.join(sub)).unwrap();
        }
        let (w, h) = (48u32, 32u32);
        let mut entries = Vec::new();
        for (img_idx, ranks) in [(1usize, ranks_a), (2usize, ranks_b)] {
            let id = format!("{img_idx:04}");
            let mut instances = Vec::new();
            let mut pred_instances = Vec::new();
            for (k, &rank) in ranks.iter().enumerate() {
                let mask = rect_mask(w, h, 2 + 9 * k as u32, 4, 6, 6);
                let mask_path = root.join(format!("inst/{id}_i{k}.png"));
                crate::io::save_mask(&mask, &mask_path).unwrap();
                instances.push(ManifestInstance {
                    mask: PathBuf::from(format!("inst/{id}_i{k}.png")),
                    rank: Some(rank),
                });
                pred_instances.push(RankPredictionEntry {
                    mask: mask_path.clone(),
                    rank,
                    score: Some(0.9),
                });
            }
            let union = rect_mask(w, h, 0, 0, 1, 1);
            crate::io::save_mask(&union, &root.join(format!("gt/{id}.png"))).unwrap();
            write_rank_predictions(
                &root.join(format!("preds/m1/{id}.json")),
                &RankPredictionFile {
                    instances: pred_instances,
                },
            )
            .unwrap();
            entries.push(ManifestEntry {
                image: PathBuf::from(format!("img/{id}.jpg")),
                width: w,
                height: h,
                gt_mask: PathBuf::from(format!("gt/{id}.png")),
                instances,
                fixation_map: None,
                fixation_logs: Vec::new(),
                saliency_map: None,
                mm: None,
                oc: None,
            });
        }
        let mut manifest = DatasetManifest::new("rank-demo", entries);
        manifest.set_base_dir(root);
        let method = MethodRoot::new("m1", root.join("preds/m1"));
        RankFixture {
            _dir: dir,
            manifest,
            method,
        }
    }

    #[test]
    fn eval_rank_identical_predictions_are_perfect() {
        use RankLabel::*;
        let fx = rank_fixture(&[Es, M1, M2], &[M3, Hd]);
        let report =
            eval_rank(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 4, "2 images x 1 method x 2 metrics");
        assert!(!report.has_errors(), "{:?}", report.error_notes());
        for row in &report.rows {
            assert!(row.value.unwrap().abs() < 1e-12, "{} nonzero", row.metric);
        }
        let corr = report
            .dataset_values
            .iter()
            .find(|v| v.metric == "Corr")
            .unwrap();
        assert!((corr.value.unwrap() - 1.0).abs() < 1e-12);
        let count = |metric: &str| {
            report
                .dataset_values
                .iter()
                .find(|v| v.metric == metric)
                .unwrap()
                .value
                .unwrap()
        };
        assert_eq!(count("matched_instances"), 5.0);
        assert_eq!(count("unmatched_gt_instances"), 0.0);
        assert_eq!(count("excluded_images"), 0.0);

        // fixed-seed reproducibility
        let again =
            eval_rank(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        assert_eq!(report.to_json_string(), again.to_json_string());
    }

    #[test]
    fn eval_rank_missing_rank_level_errors_corr_only() {
        use RankLabel::*;
        let fx = rank_fixture(&[Es, M1], &[M2, M3]);
        let report =
            eval_rank(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        assert!(report.rows.iter().all(|r| r.value.is_some()));
        let corr = report
            .dataset_values
            .iter()
            .find(|v| v.metric == "Corr")
            .unwrap();
        let note = corr.error.as_ref().expect("Corr must error");
        assert!(note.contains("[RankUnderpopulated]"), "{note}");
        assert!(report.has_errors());
    }

    #[test]
    fn eval_rank_missing_prediction_is_excluded_and_counted() {
        use RankLabel::*;
        let fx = rank_fixture(&[Es, M1, M2, M3, Hd], &[Es]);
        std::fs::remove_file(fx.method.instances_path("0002")).unwrap();
        let report =
            eval_rank(&fx.manifest, &[fx.method.clone()], &RunOptions::default()).unwrap();
        let errored: Vec<&ReportRow> = report.rows.iter().filter(|r| r.error.is_some()).collect();
        assert_eq!(errored.len(), 2);
        assert!(errored.iter().all(|r| r.image == "0002"));
        let by = |metric: &str| {
            report
                .dataset_values
                .iter()
                .find(|v| v.metric == metric)
                .unwrap()
        };
        assert_eq!(by("excluded_images").value.unwrap(), 1.0);
        assert_eq!(by("matched_instances").value.unwrap(), 5.0);
        assert!((by("Corr").value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn task_seed_is_pure_and_spread() {
        assert_eq!(task_seed(7, 3, 1), task_seed(7, 3, 1));
        let mut seen = std::collections::BTreeSet::new();
        for img in 0..20u64 {
            for m in 0..4u64 {
                seen.insert(task_seed(9, img, m));
            }
        }
        assert_eq!(seen.len(), 80, "collisions in a tiny grid");
    }

    #[test]
    fn method_root_parsing() {
        let root = MethodRoot::parse("sinet=preds/sinet").unwrap();
        assert_eq!(root.name, "sinet");
        assert_eq!(root.map_path("0001"), PathBuf::from("preds/sinet/0001.png"));
        assert_eq!(
            root.instances_path("0001"),
            PathBuf::from("preds/sinet/0001.json")
        );
        assert!(MethodRoot::parse("no-equals").is_err());
        assert!(MethodRoot::parse("=path").is_err());
        assert!(parse_method_roots(&["a=x".into(), "a=y".into()]).is_err());
        assert!(parse_method_roots(&[]).is_err());
    }

    #[test]
    fn bench_config_defaults_and_validation() {
        let config = BenchConfig::default();
        assert_eq!(config.emd_grid, 32);
        assert_eq!(config.auc_splits, 100);
        assert_eq!(config.iou_threshold, 0.25);
        assert!(config.validate().is_ok());
        assert!(BenchConfig {
            emd_grid: 0,
            ..config
        }
        .validate()
        .is_err());

        // overrides parse from partial json
        let parsed: BenchConfig = serde_json::from_str(r#"{"emd_grid": 16}"#).unwrap();
        assert_eq!(parsed.emd_grid, 16);
        assert_eq!(parsed.auc_splits, 100);
    }

    #[test]
    fn conventions_pin_the_decision_thresholds() {
        let m = convention_map(&BenchConfig::default(), &AttributeConfig::default());
        assert_eq!(m["iou_threshold"], "0.25");
        assert_eq!(m["bm_threshold"], "0.9");
        assert_eq!(m["cb_threshold"], "0.12");
        assert_eq!(m["cp_sigma"], "0.35");
        assert_eq!(m["gabrat_threshold"], "0.35");
        assert_eq!(m["so_threshold"], "0.02");
        assert_eq!(m["emd_grid"], "32");
        assert!(m["kld_epsilon"].contains("e-16"));
    }

    #[test]
    fn rank_prediction_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mask = rect_mask(8, 8, 1, 1, 3, 3);
        let mask_path = dir.path().join("m.png");
        crate::io::save_mask(&mask, &mask_path).unwrap();
        let file = RankPredictionFile {
            instances: vec![RankPredictionEntry {
                mask: PathBuf::from("m.png"),
                rank: RankLabel::M2,
                score: None,
            }],
        };
        let json_path = dir.path().join("pred.json");
        write_rank_predictions(&json_path, &file).unwrap();
        let records = read_rank_predictions(&json_path, (8, 8)).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].rank, Some(RankLabel::M2));
        assert_eq!(records[0].mask.count_ones(), 9);

        assert!(matches!(
            read_rank_predictions(&dir.path().join("absent.json"), (8, 8)),
            Err(Error::FileMissing(_))
        ));
    }
}
