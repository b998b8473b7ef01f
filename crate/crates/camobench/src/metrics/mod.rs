//! Evaluation metrics, grouped by task.
//!
//! - [`seg`]: dense segmentation quality (MAE, F-measure, S-measure,
//!   E-measure)
//! - [`fixation`]: localization against eye-fixation ground truth (SIM, CC,
//!   NSS, KLD, EMD, and the three AUC variants)
//! - [`transport`]: the exact transportation solver behind EMD
//! - [`ranking`]: rank-agreement scores over instance difficulty levels

pub mod fixation;
pub mod ranking;
pub mod seg;
pub mod transport;
