//! Slicing an evaluation report by camouflage attribute and counting
//! ranked instances per attribute: the grouped views built on top of a
//! finished evaluation run.
//!
//! ```bash
//! cargo run --example grouped_reports
//! ```

use std::path::PathBuf;

use camobench::attrs::InstanceAttributes;
use camobench::bench::{attr_breakdown, eval_seg, rank_histogram, MethodRoot, RunOptions};
use camobench::io;
use camobench::manifest::{DatasetManifest, ManifestEntry, ManifestInstance};
use camobench::map::BinaryMask;
use camobench::{RankLabel, Result};

const W: u32 = 48;
const H: u32 = 36;

fn rect(x0: u32, y0: u32, side: u32) -> BinaryMask {
    let mut bits = vec![false; (W * H) as usize];
    for y in y0..y0 + side {
        for x in x0..x0 + side {
            bits[(y * W + x) as usize] = true;
        }
    }
    BinaryMask::new(W, H, bits).unwrap()
}

fn flags(image: &str, instance: &str, so: bool, bm: bool) -> InstanceAttributes {
    InstanceAttributes {
        image_id: image.into(),
        instance_id: instance.into(),
        bm: Some(bm),
        cb: Some(false),
        cp: None,
        dc: None,
        mm: None,
        oc: None,
        sa: None,
        so: Some(so),
        bm_score: None,
        cb_score: None,
        gabrat: None,
        notes: Vec::new(),
    }
}

fn main() -> Result<()> {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::create_dir_all(root.join("gt")).unwrap();
    std::fs::create_dir_all(root.join("preds/m")).unwrap();

    // three images whose prediction quality degrades with the offset
    let mut entries = Vec::new();
    for (i, offset) in [0u32, 2, 5].into_iter().enumerate() {
        let id = format!("{:04}", i + 1);
        let gt = rect(10, 10, 12);
        io::save_mask(&gt, &root.join(format!("gt/{id}.png")))?;
        let pred = rect(10 + offset, 10, 12);
        io::save_scalar_map(&pred.to_scalar_map(), &root.join(format!("preds/m/{id}.png")))?;
        entries.push(ManifestEntry {
            image: PathBuf::from(format!("img/{id}.jpg")),
            width: W,
            height: H,
            gt_mask: PathBuf::from(format!("gt/{id}.png")),
            instances: vec![ManifestInstance {
                mask: PathBuf::from(format!("gt/{id}.png")),
                rank: Some([RankLabel::Es, RankLabel::M2, RankLabel::Hd][i]),
            }],
            fixation_map: None,
            fixation_logs: Vec::new(),
            saliency_map: None,
            mm: None,
            oc: None,
        });
    }
    let mut manifest = DatasetManifest::new("grouped", entries);
    manifest.set_base_dir(root);
    let methods = vec![MethodRoot::new("m", root.join("preds/m"))];
    let report = eval_seg(&manifest, &methods, &RunOptions::default())?;

    // the hardest image is also the only small-object one
    let attrs = vec![
        flags("0001", "0", false, true),
        flags("0002", "0", false, true),
        flags("0003", "0", true, true),
    ];

    let breakdown = attr_breakdown(&report, &attrs);
    print!("{}", breakdown.to_markdown());
    for note in &breakdown.notes {
        println!("note: {note}");
    }

    let histogram = rank_histogram(&manifest, &attrs);
    print!("\n{}", histogram.to_markdown());
    Ok(())
}
