//! Ground-truth construction from raw fixation logs: per-observer detection
//! delays, consensus medians, dataset-wide normalization, rank assignment,
//! and the rendered fixation/rank maps.
//!
//! ```bash
//! cargo run --example build_ground_truth
//! ```

use camobench::dataset::{
    aggregate_instance_delay, assign_ranks, normalize_delays, per_observer_delay,
    render_fixation_map, render_rank_map, BuilderConfig,
};
use camobench::fixation::{FixationEvent, FixationSession};
use camobench::instance::InstanceRecord;
use camobench::io;
use camobench::map::BinaryMask;
use camobench::Result;

const W: u32 = 80;
const H: u32 = 60;

fn rect(x0: u32, y0: u32, side: u32) -> BinaryMask {
    let mut bits = vec![false; (W * H) as usize];
    for y in y0..y0 + side {
        for x in x0..x0 + side {
            bits[(y * W + x) as usize] = true;
        }
    }
    BinaryMask::new(W, H, bits).unwrap()
}

/// One observer's scan path: a stray off-target look, then (optionally) a
/// landing on the instance `delay_ms` after stimulus onset.
fn session(observer: &str, target: Option<(u32, u32, u64)>) -> FixationSession {
    let mut events = vec![FixationEvent { t_ms: 1100, x: 2, y: 2 }];
    if let Some((x, y, delay_ms)) = target {
        events.push(FixationEvent { t_ms: 1000 + delay_ms, x, y });
        events.push(FixationEvent { t_ms: 1000 + delay_ms + 80, x: x + 1, y });
    }
    FixationSession::new("demo", observer, 1000, events).unwrap()
}

fn main() -> Result<()> {
    // Three instances: one every observer finds quickly, one that takes
    // most observers seconds, and one only a single observer ever fixates
    // (below the 4-observer consensus, so its failure is forced).
    let masks = [rect(10, 10, 12), rect(55, 40, 10), rect(50, 6, 8)];
    let anchors = [(14u32, 14u32), (58, 44), (53, 9)];

    // per-observer delays in ms; None = never fixated the instance
    let observers: Vec<(&str, [Option<u64>; 3])> = vec![
        ("o1", [Some(400), Some(2600), None]),
        ("o2", [Some(500), Some(2400), Some(3100)]),
        ("o3", [Some(600), Some(1900), None]),
        ("o4", [Some(800), Some(3000), None]),
        ("o5", [Some(1200), None, None]),
        ("o6", [Some(300), Some(2200), None]),
    ];

    let mut sessions = Vec::new();
    let mut outcomes = vec![Vec::new(), Vec::new(), Vec::new()];
    for (name, delays) in observers {
        for k in 0..3 {
            let (x, y) = anchors[k];
            let s = session(name, delays[k].map(|d| (x, y, d)));
            outcomes[k].push(per_observer_delay(&s, &masks[k])?);
            sessions.push(s);
        }
    }

    let config = BuilderConfig::default();
    let mut records = Vec::new();
    for (k, instance_outcomes) in outcomes.iter().enumerate() {
        records.push(aggregate_instance_delay(
            "demo",
            k.to_string(),
            instance_outcomes,
            &config,
        )?);
    }
    normalize_delays(&mut records)?;
    assign_ranks(&mut records, &config.binning)?;

    println!("instance  consensus_ms  normalized  rank  failure_forced");
    for r in &records {
        println!(
            "{:<8}  {:>12}  {:>10}  {:<4}  {}",
            r.instance_id,
            r.delay_ms.map_or("-".into(), |d| format!("{d:.0}")),
            r.normalized.map_or("-".into(), |n| format!("{n:.3}")),
            r.rank.map_or("-".into(), |k| format!("{k:?}")),
            r.failure_forced,
        );
    }

    // Render the observer-consensus fixation map and the gray-scale rank
    // map next to each other.
    let out = std::env::temp_dir().join("camobench-ground-truth");
    std::fs::create_dir_all(&out).unwrap();
    let fixmap = render_fixation_map(&sessions, W, H, config.sigma_for_width(W))?;
    io::save_scalar_map(&fixmap, &out.join("demo_fixation.png"))?;

    let mut instances = Vec::new();
    for (k, mask) in masks.into_iter().enumerate() {
        instances.push(InstanceRecord::new(format!("demo/{k}"), mask, records[k].rank, None)?);
    }
    let rank_map = render_rank_map(&instances, W, H)?;
    io::save_rank_map(&rank_map, &out.join("demo_ranks.png"))?;
    println!("\nmaps written under {}", out.display());
    Ok(())
}
