//! Camouflage benchmark toolkit.
//!
//! Builds ranking/localization ground truth from eye-tracker fixation logs,
//! evaluates camouflaged-object detection, localization, and ranking
//! predictions, classifies fine-grained camouflage attributes, and emits
//! benchmark reports.
//!
//! The crate is organized around a handful of submodules:
//!
//! - [`map`], [`rank`], [`instance`], [`fixation`] — shared domain types
//! - [`io`] — grayscale PNG readers/writers
//! - [`dataset`] — fixation logs to delays, ranks, fixation maps, rank maps
//! - [`metrics`] — segmentation, fixation (localization), and ranking metrics
//! - [`attention`] — the two analysis map transforms
//! - [`attrs`] — fine-grained camouflage attribute classification
//! - [`manifest`], [`bench`] — dataset manifests, batch evaluation, reports
//!
//! The `examples/` directory carries one runnable example per capability;
//! the `camobench` binary wraps the same entry points as subcommands.

pub mod attention;
pub mod attrs;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod fixation;
pub mod instance;
pub mod io;
pub mod manifest;
pub mod map;
pub mod metrics;
pub mod rank;

pub use bench::{BenchConfig, EvaluationReport, MethodRoot, RunOptions};
pub use error::{Error, Result};
pub use fixation::{FixationEvent, FixationPointSet, FixationSession};
pub use instance::{BoundingBox, InstanceRecord};
pub use manifest::{DatasetManifest, ManifestEntry, ManifestInstance};
pub use map::{to_distribution, z_score, BinaryMask, Distribution, ScalarMap};
pub use rank::{penalty_lookup, PenaltyMatrix, RankLabel, RankMap};
