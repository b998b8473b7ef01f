//! Attention map transforms over predicted score maps.
//!
//! `reverse_attention` highlights pixels where a boundary-aware score and a
//! location score disagree. `ranking_attention` boosts foreground pixels in
//! inverse proportion to their rank score, so harder instances (smaller
//! scores) receive strictly more attention.

use crate::error::{Error, Result};
use crate::map::{BinaryMask, ScalarMap};

fn ensure_unit(map: &ScalarMap, name: &str) -> Result<()> {
    for (i, &v) in map.values().iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::NotNormalized(format!(
                "{name} value {v} at pixel index {i} outside [0, 1]"
            )));
        }
    }
    Ok(())
}

/// Elementwise `exp(|s_b - s_l|)` over two unit-normalized score maps.
/// Output values lie in [1, e]; symmetric in its arguments.
pub fn reverse_attention(s_b: &ScalarMap, s_l: &ScalarMap) -> Result<ScalarMap> {
    if s_b.dims() != s_l.dims() {
        return Err(Error::dims(s_b.dims(), s_l.dims()));
    }
    ensure_unit(s_b, "s_b")?;
    ensure_unit(s_l, "s_l")?;
    let values = s_b
        .values()
        .iter()
        .zip(s_l.values())
        .map(|(&a, &b)| (a - b).abs().exp())
        .collect();
    ScalarMap::new(s_b.width(), s_b.height(), values)
}

/// How the rank-score term inside the ranking attention is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankingAttentionMode {
    /// Foreground gets `1 + exp(-s_r)`, background stays at 1. Smaller
    /// (harder) rank scores receive strictly more attention.
    #[default]
    Graded,
    /// The score term collapses to the indicator `[s_r > 0]`:
    /// `1 + exp(-1)` wherever the score is positive, `1 + exp(0) = 2`
    /// elsewhere. Kept for comparison against the graded form.
    LiteralIndicator,
}

/// Ranking-based attention over a real-valued rank-score map.
pub fn ranking_attention(
    s_r: &ScalarMap,
    foreground: &BinaryMask,
    mode: RankingAttentionMode,
) -> Result<ScalarMap> {
    if s_r.dims() != foreground.dims() {
        return Err(Error::dims(s_r.dims(), foreground.dims()));
    }
    let values: Vec<f64> = match mode {
        RankingAttentionMode::Graded => s_r
            .values()
            .iter()
            .zip(foreground.bits())
            .map(|(&s, &fg)| if fg { 1.0 + (-s).exp() } else { 1.0 })
            .collect(),
        RankingAttentionMode::LiteralIndicator => s_r
            .values()
            .iter()
            .map(|&s| {
                let ind: f64 = if s > 0.0 { 1.0 } else { 0.0 };
                1.0 + (-ind).exp()
            })
            .collect(),
    };
    ScalarMap::new(s_r.width(), s_r.height(), values)
}

/// Rescales a map onto [0, 1] for 8-bit visualization, returning the
/// original (min, max) alongside. A constant map rescales to all zeros.
pub fn min_max_rescale(map: &ScalarMap) -> (ScalarMap, f64, f64) {
    let lo = map.min();
    let hi = map.max();
    let span = hi - lo;
    let rescaled = if span > 0.0 {
        map.map(|v| (v - lo) / span).expect("finite rescale")
    } else {
        ScalarMap::zeros(map.width(), map.height())
    };
    (rescaled, lo, hi)
}
