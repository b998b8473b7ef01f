//! Fixation-prediction evaluation: SIM, CC, EMD, KLD, NSS, and the three
//! AUC variants over a synthetic two-image manifest, plus a demonstration
//! that the worker count never changes the emitted bytes.
//!
//! ```bash
//! cargo run --example eval_fixations
//! ```

use std::path::PathBuf;

use camobench::bench::{eval_fix, BenchConfig, MethodRoot, RunOptions};
use camobench::fixation::{FixationEvent, FixationSession};
use camobench::io;
use camobench::manifest::{DatasetManifest, ManifestEntry};
use camobench::map::ScalarMap;
use camobench::Result;

const W: u32 = 96;
const H: u32 = 72;

fn blob(cx: f64, cy: f64, sigma: f64) -> ScalarMap {
    let mut values = Vec::with_capacity((W * H) as usize);
    for y in 0..H {
        for x in 0..W {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            values.push((-d2 / (2.0 * sigma * sigma)).exp());
        }
    }
    ScalarMap::new(W, H, values).unwrap()
}

fn log_file(path: &std::path::Path, image: &str, observer: &str, pts: &[(u32, u32)]) {
    let events = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| FixationEvent { t_ms: 900 + 150 * i as u64, x, y })
        .collect();
    FixationSession::new(image, observer, 800, events)
        .unwrap()
        .write_csv(path)
        .unwrap();
}

fn main() -> Result<()> {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for sub in ["fix", "logs", "preds/sharp", "preds/diffuse", "gt"] {
        std::fs::create_dir_all(root.join(sub)).unwrap();
    }

    let mut entries = Vec::new();
    for (i, (cx, cy)) in [(30.0, 30.0), (66.0, 40.0)].into_iter().enumerate() {
        let id = format!("{:04}", i + 1);
        io::save_scalar_map(&blob(cx, cy, 6.0), &root.join(format!("fix/{id}.png")))?;
        // "sharp" concentrates where observers looked; "diffuse" spreads out
        io::save_scalar_map(&blob(cx, cy, 5.0), &root.join(format!("preds/sharp/{id}.png")))?;
        io::save_scalar_map(&blob(cx, cy, 20.0), &root.join(format!("preds/diffuse/{id}.png")))?;
        let (x, y) = (cx as u32, cy as u32);
        log_file(&root.join(format!("logs/{id}_o1.csv")), &id, "o1", &[(x, y), (x + 3, y - 2)]);
        log_file(&root.join(format!("logs/{id}_o2.csv")), &id, "o2", &[(x - 2, y + 1)]);
        entries.push(ManifestEntry {
            image: PathBuf::from(format!("img/{id}.jpg")),
            width: W,
            height: H,
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
    let mut manifest = DatasetManifest::new("blobs", entries);
    manifest.set_base_dir(root);

    let methods = vec![
        MethodRoot::new("sharp", root.join("preds/sharp")),
        MethodRoot::new("diffuse", root.join("preds/diffuse")),
    ];
    let serial = RunOptions { seed: 42, jobs: 1, config: BenchConfig::default() };
    let report = eval_fix(&manifest, &methods, &serial)?;
    print!("{}", report.to_markdown());

    let parallel = eval_fix(&manifest, &methods, &RunOptions { jobs: 8, ..serial })?;
    assert_eq!(report.to_json_string(), parallel.to_json_string());
    println!("\n--jobs 1 and --jobs 8 reports are byte-identical");
    Ok(())
}
