//! Camouflage-ranking evaluation: per-image localization MAE and rank-map
//! r_MAE, plus the dataset-level rank correlation over IoU-matched
//! instances. One method reproduces the ground truth, the other confuses
//! the easiest and hardest instances.
//!
//! ```bash
//! cargo run --example eval_ranking
//! ```

use std::path::PathBuf;

use camobench::bench::{
    eval_rank, write_rank_predictions, MethodRoot, RankPredictionEntry, RankPredictionFile,
    RunOptions,
};
use camobench::io;
use camobench::manifest::{DatasetManifest, ManifestEntry, ManifestInstance};
use camobench::map::BinaryMask;
use camobench::{RankLabel, Result};

const W: u32 = 72;
const H: u32 = 48;

fn rect(x0: u32, y0: u32, side: u32) -> BinaryMask {
    let mut bits = vec![false; (W * H) as usize];
    for y in y0..y0 + side {
        for x in x0..x0 + side {
            bits[(y * W + x) as usize] = true;
        }
    }
    BinaryMask::new(W, H, bits).unwrap()
}

fn main() -> Result<()> {
    use RankLabel::*;
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for sub in ["inst", "gt", "preds/oracle", "preds/confused"] {
        std::fs::create_dir_all(root.join(sub)).unwrap();
    }

    // five ranked instances across two images
    let layout: [(&str, &[(u32, RankLabel)]); 2] = [
        ("0001", &[(4, Es), (28, M1), (52, M2)]),
        ("0002", &[(10, M3), (40, Hd)]),
    ];

    let mut entries = Vec::new();
    for (id, placements) in layout {
        let mut instances = Vec::new();
        let mut oracle = Vec::new();
        let mut confused = Vec::new();
        for (k, &(x0, rank)) in placements.iter().enumerate() {
            let mask_path = root.join(format!("inst/{id}_{k}.png"));
            io::save_mask(&rect(x0, 12, 14), &mask_path)?;
            instances.push(ManifestInstance {
                mask: PathBuf::from(format!("inst/{id}_{k}.png")),
                rank: Some(rank),
            });
            oracle.push(RankPredictionEntry { mask: mask_path.clone(), rank, score: Some(0.9) });
            // the confused method flips the extreme difficulty levels
            let flipped = match rank {
                Es => Hd,
                Hd => Es,
                other => other,
            };
            confused.push(RankPredictionEntry { mask: mask_path, rank: flipped, score: Some(0.9) });
        }
        io::save_mask(&rect(0, 0, 1), &root.join(format!("gt/{id}.png")))?;
        write_rank_predictions(
            &root.join(format!("preds/oracle/{id}.json")),
            &RankPredictionFile { instances: oracle },
        )?;
        write_rank_predictions(
            &root.join(format!("preds/confused/{id}.json")),
            &RankPredictionFile { instances: confused },
        )?;
        entries.push(ManifestEntry {
            image: PathBuf::from(format!("img/{id}.jpg")),
            width: W,
            height: H,
            gt_mask: PathBuf::from(format!("gt/{id}.png")),
            instances,
            fixation_map: None,
            fixation_logs: Vec::new(),
            saliency_map: None,
            mm: None,
            oc: None,
        });
    }
    let mut manifest = DatasetManifest::new("ranked", entries);
    manifest.set_base_dir(root);

    let methods = vec![
        MethodRoot::new("oracle", root.join("preds/oracle")),
        MethodRoot::new("confused", root.join("preds/confused")),
    ];
    let report = eval_rank(&manifest, &methods, &RunOptions::default())?;
    print!("{}", report.to_markdown());
    Ok(())
}
