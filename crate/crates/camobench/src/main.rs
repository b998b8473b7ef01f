//! Command-line front-end: dataset construction, batch evaluation, attribute
//! classification, grouped reports, and attention-map rendering.
//!
//! Exit codes: 0 clean, 1 when any per-row evaluation errored (the report is
//! still written), 2 on fatal errors (unreadable manifest, bad flags, or any
//! row error under --strict).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use camobench::attention::{min_max_rescale, ranking_attention, reverse_attention, RankingAttentionMode};
use camobench::attrs::{classify_entry, write_attribute_table, AttributeConfig};
use camobench::bench::{
    self, attr_breakdown, emit_breakdown, emit_histogram, emit_report, parse_method_roots,
    rank_histogram, BenchConfig, EvaluationReport, RunOptions,
};
use camobench::dataset::{
    aggregate_instance_delay, assign_ranks, normalize_delays, per_observer_delay,
    render_fixation_map, render_rank_map, write_delay_table, BuilderConfig, DelayRecord,
    RankBinning,
};
use camobench::fixation::FixationSession;
use camobench::instance::InstanceRecord;
use camobench::io;
use camobench::manifest::DatasetManifest;

#[derive(Parser)]
#[command(name = "camobench", version, about = "Camouflage benchmark toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build ground truth from fixation logs: delays, ranks, and maps.
    BuildDataset(BuildDatasetArgs),
    /// Segmentation metrics (S, F, E, MAE) per image per method.
    EvalSeg(EvalArgs),
    /// Fixation metrics (SIM, CC, EMD, KLD, NSS, AUC_J, AUC_B, sAUC).
    EvalFix(EvalArgs),
    /// Ranking metrics (MAE, r_MAE per image; Corr per method).
    EvalRank(EvalArgs),
    /// Classify the eight camouflage attributes per instance.
    Attrs(AttrsArgs),
    /// Attribute breakdown and rank histogram from an existing report.
    Report(ReportArgs),
    /// Render a boundary or ranking attention map.
    Attention(AttentionArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset manifest JSON; entry paths resolve relative to its directory.
    #[arg(long)]
    manifest: PathBuf,
    /// Prediction root as name=path; repeatable, one per method.
    #[arg(long = "pred-root", required = true)]
    pred_root: Vec<String>,
    /// Output directory for report.csv / report.json / report.md.
    #[arg(long)]
    out: PathBuf,
    /// Run seed for the sampled metrics (AUC_B, sAUC, Corr).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results are identical for any value.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// JSON overrides for evaluation knobs (emd_grid, auc_splits, ...).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Abort without writing outputs if any row errors.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct BuildDatasetArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for delays.csv and maps/.
    #[arg(long)]
    out: PathBuf,
    /// Observers that must detect an instance for a consensus delay.
    #[arg(long, default_value_t = 4)]
    majority: usize,
    /// Fixation blur sigma in pixels; defaults to image width / 20.
    #[arg(long)]
    sigma: Option<f64>,
    /// Rank cut points t1<=t2<=t3<=t4 on normalized delays; default is
    /// equal-frequency quintiles.
    #[arg(long, num_args = 4, value_names = ["T1", "T2", "T3", "T4"])]
    thresholds: Option<Vec<f64>>,
}

#[derive(Args)]
struct AttrsArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for attributes.csv and attributes_meta.json.
    #[arg(long)]
    out: PathBuf,
    /// JSON overrides for attribute thresholds and SLIC parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Abort on the first failed image instead of recording a note.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Evaluation report JSON produced by an eval-* run.
    #[arg(long)]
    report: PathBuf,
    /// Attribute table CSV produced by `attrs`.
    #[arg(long)]
    attrs: PathBuf,
    /// Manifest (for gt ranks); enables the rank histogram.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AttentionArgs {
    /// Boundary map for reverse attention (pair with --lateral).
    #[arg(long, requires = "lateral", conflicts_with_all = ["scores", "foreground"])]
    base: Option<PathBuf>,
    /// Lateral map for reverse attention.
    #[arg(long)]
    lateral: Option<PathBuf>,
    /// Rank-score map for ranking attention (pair with --foreground).
    #[arg(long, requires = "foreground")]
    scores: Option<PathBuf>,
    /// Foreground mask for ranking attention.
    #[arg(long)]
    foreground: Option<PathBuf>,
    /// Gate by the literal foreground indicator instead of grading by score.
    #[arg(long)]
    literal_indicator: bool,
    /// Output directory for attention.png and attention.json.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(errored_rows) if errored_rows => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether any per-row error was recorded (exit code 1).
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::EvalSeg(args) => run_eval(args, "eval-seg", bench::eval_seg),
        Command::EvalFix(args) => run_eval(args, "eval-fix", bench::eval_fix),
        Command::EvalRank(args) => run_eval(args, "eval-rank", bench::eval_rank),
        Command::BuildDataset(args) => run_build_dataset(args).map(|_| false),
        Command::Attrs(args) => run_attrs(args).map(|_| false),
        Command::Report(args) => run_report(args).map(|_| false),
        Command::Attention(args) => run_attention(args).map(|_| false),
    }
}

fn run_eval(
    args: EvalArgs,
    name: &str,
    eval: fn(&DatasetManifest, &[bench::MethodRoot], &RunOptions) -> camobench::Result<EvaluationReport>,
) -> Result<bool> {
    let manifest = DatasetManifest::read(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let methods = parse_method_roots(&args.pred_root)?;
    let config: BenchConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => BenchConfig::default(),
    };
    config.validate()?;
    let options = RunOptions {
        seed: args.seed,
        jobs: args.jobs,
        config,
    };
    let report = eval(&manifest, &methods, &options)?;
    if args.strict {
        if let Some(note) = report.first_error() {
            bail!("{name} aborted (--strict): {note}");
        }
    }
    let files = emit_report(&report, &args.out)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    let notes = report.error_notes();
    for note in &notes {
        eprintln!("row error: {note}");
    }
    Ok(!notes.is_empty())
}

fn run_build_dataset(args: BuildDatasetArgs) -> Result<()> {
    let manifest = DatasetManifest::read(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let binning = match args.thresholds {
        Some(t) => RankBinning::Thresholds([t[0], t[1], t[2], t[3]]),
        None => RankBinning::Quintile,
    };
    let config = BuilderConfig {
        majority_threshold: args.majority,
        sigma: args.sigma,
        binning,
        ..BuilderConfig::default()
    };

    // pass 1: per-observer delays and consensus per instance
    let mut records: Vec<DelayRecord> = Vec::new();
    let mut sessions_by_entry: Vec<Vec<FixationSession>> = Vec::new();
    for entry in &manifest.entries {
        let id = entry.id();
        let sessions: Vec<FixationSession> = entry
            .fixation_logs
            .iter()
            .map(|p| FixationSession::read_csv(&manifest.resolve(p)))
            .collect::<camobench::Result<_>>()
            .with_context(|| format!("reading fixation logs for {id}"))?;
        for (k, inst) in entry.instances.iter().enumerate() {
            let mask = io::load_mask(&manifest.resolve(&inst.mask), entry.dims())
                .with_context(|| format!("loading instance mask for {id}/{k}"))?;
            let outcomes = sessions
                .iter()
                .map(|s| per_observer_delay(s, &mask))
                .collect::<camobench::Result<Vec<_>>>()
                .with_context(|| format!("computing delays for {id}/{k}"))?;
            records.push(aggregate_instance_delay(&id, k.to_string(), &outcomes, &config)?);
        }
        sessions_by_entry.push(sessions);
    }

    // pass 2: dataset-wide normalization and rank assignment
    normalize_delays(&mut records).context("normalizing delays")?;
    assign_ranks(&mut records, &config.binning).context("assigning ranks")?;

    let maps_dir = args.out.join("maps");
    std::fs::create_dir_all(&maps_dir)
        .with_context(|| format!("creating {}", maps_dir.display()))?;
    write_delay_table(&args.out.join("delays.csv"), &records)?;
    println!("wrote {}", args.out.join("delays.csv").display());

    // pass 3: fixation and rank maps per image
    for (entry, sessions) in manifest.entries.iter().zip(&sessions_by_entry) {
        let id = entry.id();
        let (w, h) = entry.dims();
        let fixation = render_fixation_map(sessions, w, h, config.sigma_for_width(w))
            .with_context(|| format!("rendering fixation map for {id}"))?;
        io::save_scalar_map(&fixation, &maps_dir.join(format!("{id}_fixation.png")))?;

        let mut instances = Vec::new();
        for (k, inst) in entry.instances.iter().enumerate() {
            let mask = io::load_mask(&manifest.resolve(&inst.mask), entry.dims())?;
            let rank = records
                .iter()
                .find(|r| r.image_id == id && r.instance_id == k.to_string())
                .and_then(|r| r.rank);
            instances.push(InstanceRecord::new(format!("{id}/{k}"), mask, rank, None)?);
        }
        let rank_map = render_rank_map(&instances, w, h)
            .with_context(|| format!("rendering rank map for {id}"))?;
        io::save_rank_map(&rank_map, &maps_dir.join(format!("{id}_ranks.png")))?;
    }
    println!("wrote {} image pairs under {}", manifest.entries.len(), maps_dir.display());
    Ok(())
}

fn run_attrs(args: AttrsArgs) -> Result<()> {
    let manifest = DatasetManifest::read(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let config: AttributeConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => AttributeConfig::default(),
    };
    config.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let results: Vec<camobench::Result<Vec<_>>> = pool.install(|| {
        use rayon::prelude::*;
        manifest
            .entries
            .par_iter()
            .map(|entry| classify_entry(entry, manifest.base_dir(), &config))
            .collect()
    });

    let mut rows = Vec::new();
    for (entry, result) in manifest.entries.iter().zip(results) {
        match result {
            Ok(mut r) => rows.append(&mut r),
            Err(e) if args.strict => {
                bail!("attrs aborted (--strict): {}: {e}", entry.id())
            }
            Err(e) => eprintln!("skipping {}: {e}", entry.id()),
        }
    }
    for row in &rows {
        for note in &row.notes {
            eprintln!("note {}/{}: {note}", row.image_id, row.instance_id);
        }
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let table = args.out.join("attributes.csv");
    write_attribute_table(&table, &rows)?;
    println!("wrote {} ({} instances)", table.display(), rows.len());

    // snapshot of the decision thresholds these flags were computed under
    let meta = serde_json::json!({
        "tool": format!("camobench {}", env!("CARGO_PKG_VERSION")),
        "dataset": manifest.dataset,
        "instances": rows.len(),
        "config": config,
    });
    let meta_path = args.out.join("attributes_meta.json");
    std::fs::write(&meta_path, format!("{:#}\n", meta))
        .with_context(|| format!("writing {}", meta_path.display()))?;
    println!("wrote {}", meta_path.display());
    Ok(())
}

fn run_report(args: ReportArgs) -> Result<()> {
    let report = EvaluationReport::read_json(&args.report)?;
    let attrs = camobench::attrs::read_attribute_table(&args.attrs)?;

    let breakdown = attr_breakdown(&report, &attrs);
    for note in &breakdown.notes {
        eprintln!("note: {note}");
    }
    for f in emit_breakdown(&breakdown, &args.out)? {
        println!("wrote {}", f.display());
    }

    if let Some(manifest_path) = &args.manifest {
        let manifest = DatasetManifest::read(manifest_path)
            .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
        let histogram = rank_histogram(&manifest, &attrs);
        for f in emit_histogram(&histogram, &args.out)? {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn load_map(path: &Path) -> Result<camobench::ScalarMap> {
    let dims = io::image_dims(path)?;
    Ok(io::load_scalar_map(path, dims)?)
}

fn run_attention(args: AttentionArgs) -> Result<()> {
    let (raw, mode) = match (&args.base, &args.scores) {
        (Some(base), None) => {
            let lateral = args.lateral.as_ref().expect("clap requires --lateral");
            let s_b = load_map(base)?;
            let s_l = load_map(lateral)?;
            (reverse_attention(&s_b, &s_l)?, "reverse")
        }
        (None, Some(scores)) => {
            let fg_path = args.foreground.as_ref().expect("clap requires --foreground");
            let s_r = load_map(scores)?;
            let dims = io::image_dims(fg_path)?;
            let fg = io::load_mask(fg_path, dims)?;
            let mode = if args.literal_indicator {
                RankingAttentionMode::LiteralIndicator
            } else {
                RankingAttentionMode::Graded
            };
            let label = match mode {
                RankingAttentionMode::Graded => "ranking-graded",
                RankingAttentionMode::LiteralIndicator => "ranking-literal-indicator",
            };
            (ranking_attention(&s_r, &fg, mode)?, label)
        }
        _ => bail!("pass either --base/--lateral or --scores/--foreground"),
    };

    let (rescaled, lo, hi) = min_max_rescale(&raw);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let png = args.out.join("attention.png");
    io::save_scalar_map(&rescaled, &png)?;

    // raw range travels with the 8-bit image so values stay recoverable
    let mut sidecar = BTreeMap::new();
    sidecar.insert("mode", serde_json::json!(mode));
    sidecar.insert("min", serde_json::json!(lo));
    sidecar.insert("max", serde_json::json!(hi));
    let json = args.out.join("attention.json");
    std::fs::write(&json, format!("{:#}\n", serde_json::json!(sidecar)))
        .with_context(|| format!("writing {}", json.display()))?;
    println!("wrote {} and {}", png.display(), json.display());
    Ok(())
}
