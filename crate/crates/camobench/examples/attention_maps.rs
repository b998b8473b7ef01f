//! The two attention transforms: boundary-difference reverse attention
//! from a pair of side-output maps, and rank-score attention gated by the
//! foreground.
//!
//! ```bash
//! cargo run --example attention_maps
//! ```

use camobench::attention::{
    min_max_rescale, ranking_attention, reverse_attention, RankingAttentionMode,
};
use camobench::io;
use camobench::map::{BinaryMask, ScalarMap};
use camobench::Result;

const W: u32 = 64;
const H: u32 = 64;

fn radial(cx: f64, cy: f64, scale: f64) -> ScalarMap {
    let mut values = Vec::with_capacity((W * H) as usize);
    for y in 0..H {
        for x in 0..W {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            values.push((1.0 - d / scale).clamp(0.0, 1.0));
        }
    }
    ScalarMap::new(W, H, values).unwrap()
}

fn main() -> Result<()> {
    // Reverse attention peaks where two decoder stages disagree, i.e. in
    // the annulus between the two radii here.
    let coarse = radial(32.0, 32.0, 40.0);
    let fine = radial(32.0, 32.0, 24.0);
    let reverse = reverse_attention(&coarse, &fine)?;
    println!(
        "reverse attention range: [{:.4}, {:.4}] (identical maps would give [1, 1])",
        reverse.min(),
        reverse.max()
    );

    // Rank attention boosts foreground pixels by how hard they were to
    // spot: low rank scores earn the largest boost.
    let scores = radial(32.0, 32.0, 48.0);
    let foreground = BinaryMask::new(
        W,
        H,
        (0..W * H)
            .map(|i| {
                let (x, y) = (i % W, i / W);
                (16..48).contains(&x) && (16..48).contains(&y)
            })
            .collect(),
    )?;
    let graded = ranking_attention(&scores, &foreground, RankingAttentionMode::Graded)?;
    let literal = ranking_attention(&scores, &foreground, RankingAttentionMode::LiteralIndicator)?;
    println!(
        "rank attention range: graded [{:.4}, {:.4}], literal-indicator [{:.4}, {:.4}]",
        graded.min(),
        graded.max(),
        literal.min(),
        literal.max()
    );

    // 8-bit export keeps the raw range in a sidecar so values stay
    // recoverable after the rescale.
    let out = std::env::temp_dir().join("camobench-attention");
    std::fs::create_dir_all(&out).unwrap();
    let (rescaled, lo, hi) = min_max_rescale(&graded);
    io::save_scalar_map(&rescaled, &out.join("rank_attention.png"))?;
    println!(
        "wrote {} (raw range [{lo:.4}, {hi:.4}])",
        out.join("rank_attention.png").display()
    );
    Ok(())
}
