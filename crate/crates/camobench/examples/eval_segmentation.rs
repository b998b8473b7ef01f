//! Batch segmentation evaluation: S-measure, F-measure, E-measure, and MAE
//! for two synthetic methods over a three-image manifest, emitted as a
//! method-by-metric table.
//!
//! ```bash
//! cargo run --example eval_segmentation
//! ```

use std::path::PathBuf;

use camobench::bench::{eval_seg, MethodRoot, RunOptions};
use camobench::io;
use camobench::manifest::{DatasetManifest, ManifestEntry};
use camobench::map::{BinaryMask, ScalarMap};
use camobench::Result;

const W: u32 = 64;
const H: u32 = 48;

fn disk(cx: f64, cy: f64, r: f64) -> BinaryMask {
    let mut bits = vec![false; (W * H) as usize];
    for y in 0..H {
        for x in 0..W {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            bits[(y * W + x) as usize] = d2 <= r * r;
        }
    }
    BinaryMask::new(W, H, bits).unwrap()
}

/// A soft prediction: the mask blurred into a radial falloff.
fn soft(cx: f64, cy: f64, r: f64) -> ScalarMap {
    let mut values = Vec::with_capacity((W * H) as usize);
    for y in 0..H {
        for x in 0..W {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            values.push((1.0 - (d - r) / 6.0).clamp(0.0, 1.0));
        }
    }
    ScalarMap::new(W, H, values).unwrap()
}

fn main() -> Result<()> {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for sub in ["gt", "preds/exact", "preds/soft"] {
        std::fs::create_dir_all(root.join(sub)).unwrap();
    }

    let mut entries = Vec::new();
    for (i, (cx, cy, r)) in [(18.0, 20.0, 9.0), (40.0, 25.0, 12.0), (30.0, 14.0, 6.0)]
        .into_iter()
        .enumerate()
    {
        let id = format!("{:04}", i + 1);
        let gt = disk(cx, cy, r);
        io::save_mask(&gt, &root.join(format!("gt/{id}.png")))?;
        // method "exact" reproduces the mask; "soft" hedges at the boundary
        io::save_scalar_map(&gt.to_scalar_map(), &root.join(format!("preds/exact/{id}.png")))?;
        io::save_scalar_map(&soft(cx, cy, r), &root.join(format!("preds/soft/{id}.png")))?;
        entries.push(ManifestEntry {
            image: PathBuf::from(format!("img/{id}.jpg")),
            width: W,
            height: H,
            gt_mask: PathBuf::from(format!("gt/{id}.png")),
            instances: Vec::new(),
            fixation_map: None,
            fixation_logs: Vec::new(),
            saliency_map: None,
            mm: None,
            oc: None,
        });
    }
    let mut manifest = DatasetManifest::new("disks", entries);
    manifest.set_base_dir(root);

    let methods = vec![
        MethodRoot::new("exact", root.join("preds/exact")),
        MethodRoot::new("soft", root.join("preds/soft")),
    ];
    let report = eval_seg(&manifest, &methods, &RunOptions::default())?;
    print!("{}", report.to_markdown());
    Ok(())
}
