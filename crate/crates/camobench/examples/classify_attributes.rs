//! Per-instance camouflage-attribute classification on a constructed scene:
//! a small, perfectly background-matching square sitting far off-center on
//! a uniform field.
//!
//! ```bash
//! cargo run --example classify_attributes
//! ```

use camobench::attrs::{classify_instances, AttributeConfig, RgbImage};
use camobench::map::{BinaryMask, ScalarMap};
use camobench::Result;

const W: u32 = 160;
const H: u32 = 120;

fn rect(x0: u32, y0: u32, side: u32) -> BinaryMask {
    let mut bits = vec![false; (W * H) as usize];
    for y in y0..y0 + side {
        for x in x0..x0 + side {
            bits[(y * W + x) as usize] = true;
        }
    }
    BinaryMask::new(W, H, bits).unwrap()
}

fn show(name: &str, flag: Option<bool>) -> String {
    match flag {
        Some(true) => format!("{name}=true"),
        Some(false) => format!("{name}=false"),
        None => format!("{name}=unknown"),
    }
}

fn main() -> Result<()> {
    // Uniform mid-gray everywhere: the instance region is pixel-identical
    // to its surroundings, the strongest possible background match.
    let image = RgbImage::from_fn(W, H, |_, _| [128, 128, 128]);

    // 16x16 instance centered at 0.95W: 1.3% of the image area, far from
    // the image center.
    let mask = rect(144, 52, 16);

    // A saliency model that entirely misses the instance.
    let saliency = ScalarMap::new(
        W,
        H,
        (0..W * H)
            .map(|i| if i % W < 40 { 0.9 } else { 0.05 })
            .collect(),
    )?;

    let config = AttributeConfig::default();
    let rows = classify_instances(
        "scene",
        &image,
        &mask,
        &[("0".to_string(), mask.clone())],
        Some(&saliency),
        Some(true), // annotator says the shape mimics a leaf
        None,       // occlusion was never annotated
        &config,
    );

    for row in &rows {
        println!("instance {}/{}", row.image_id, row.instance_id);
        println!(
            "  {}  {}  {}  {}",
            show("background-match", row.bm),
            show("complex-background", row.cb),
            show("off-center", row.cp),
            show("disruptive-coloration", row.dc),
        );
        println!(
            "  {}  {}  {}  {}",
            show("mimicry", row.mm),
            show("occlusion", row.oc),
            show("salient", row.sa),
            show("small-object", row.so),
        );
        println!(
            "  scores: bm={:.4}  cb={:.4}  gabrat={:.4}",
            row.bm_score.unwrap_or(f64::NAN),
            row.cb_score.unwrap_or(f64::NAN),
            row.gabrat.unwrap_or(f64::NAN),
        );
        for note in &row.notes {
            println!("  note: {note}");
        }
    }
    Ok(())
}
