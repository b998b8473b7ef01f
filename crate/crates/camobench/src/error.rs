//! Error type shared by every module in the crate.

use std::path::PathBuf;

use thiserror::Error;

use crate::rank::RankLabel;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file missing: {0}")]
    FileMissing(PathBuf),
    #[error("dimension mismatch: found {found_w}x{found_h}, expected {expected_w}x{expected_h}")]
    DimensionMismatch {
        found_w: u32,
        found_h: u32,
        expected_w: u32,
        expected_h: u32,
    },
    #[error("unsupported pixel format: {0}")]
    UnsupportedPixelFormat(String),
    #[error("map has zero total mass")]
    ZeroMass,
    #[error("degenerate map: {0}")]
    DegenerateMap(&'static str),
    #[error("empty input")]
    EmptyInput,
    #[error("map is not a probability distribution: {0}")]
    NotNormalized(String),
    #[error("non-finite value at pixel index {0}")]
    NonFiniteValue(usize),
    #[error("no observer outcomes supplied")]
    NoObservers,
    #[error("every delay record is failure-forced")]
    AllFailed,
    #[error("instance {0} has no rank assigned")]
    MissingRank(String),
    #[error("ground truth mask is empty")]
    EmptyGroundTruth,
    #[error("fixation point set is empty")]
    EmptyFixations,
    #[error("every pixel is a fixation; no negatives available")]
    AllFixated,
    #[error("not enough non-fixated pixels to sample {needed} negatives (have {available})")]
    InsufficientNegatives { needed: usize, available: usize },
    #[error("negative fixation pool is empty")]
    EmptyNegativePool,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate vector: {0}")]
    DegenerateVector(&'static str),
    #[error("rank {0} has no matchable instance in the sampling pool")]
    RankUnderpopulated(RankLabel),
    #[error("no foreground superpixels")]
    NoForeground,
    #[error("no background region")]
    NoBackground,
    #[error("instance mask is empty")]
    EmptyMask,
    #[error("mask boundary too short for outline analysis ({0} pixels)")]
    DegenerateBoundary(usize),
    #[error("requested {requested} superpixels for {pixels} pixels")]
    TooManySuperpixels { requested: usize, pixels: usize },
    #[error("path is not writable: {path}: {source}")]
    UnwritablePath {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid penalty matrix: {0}")]
    InvalidPenaltyMatrix(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("image error for {path}: {message}")]
    Image { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn dims(found: (u32, u32), expected: (u32, u32)) -> Self {
        Error::DimensionMismatch {
            found_w: found.0,
            found_h: found.1,
            expected_w: expected.0,
            expected_h: expected.1,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-friendly kind tag, used in report error rows.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::FileMissing(_) => "FileMissing",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnsupportedPixelFormat(_) => "UnsupportedPixelFormat",
            Error::ZeroMass => "ZeroMass",
            Error::DegenerateMap(_) => "DegenerateMap",
            Error::EmptyInput => "EmptyInput",
            Error::NotNormalized(_) => "NotNormalized",
            Error::NonFiniteValue(_) => "NonFiniteValue",
            Error::NoObservers => "NoObservers",
            Error::AllFailed => "AllFailed",
            Error::MissingRank(_) => "MissingRank",
            Error::EmptyGroundTruth => "EmptyGroundTruth",
            Error::EmptyFixations => "EmptyFixations",
            Error::AllFixated => "AllFixated",
            Error::InsufficientNegatives { .. } => "InsufficientNegatives",
            Error::EmptyNegativePool => "EmptyNegativePool",
            Error::LengthMismatch(_, _) => "LengthMismatch",
            Error::DegenerateVector(_) => "DegenerateVector",
            Error::RankUnderpopulated(_) => "RankUnderpopulated",
            Error::NoForeground => "NoForeground",
            Error::NoBackground => "NoBackground",
            Error::EmptyMask => "EmptyMask",
            Error::DegenerateBoundary(_) => "DegenerateBoundary",
            Error::TooManySuperpixels { .. } => "TooManySuperpixels",
            Error::UnwritablePath { .. } => "UnwritablePath",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidPenaltyMatrix(_) => "InvalidPenaltyMatrix",
            Error::Parse { .. } => "Parse",
            Error::Io { .. } => "Io",
            Error::Image { .. } => "Image",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
