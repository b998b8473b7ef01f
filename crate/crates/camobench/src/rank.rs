//! Camouflage rank labels, per-pixel rank maps, and the misranking penalty
//! matrix.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::BinaryMask;

/// Instance difficulty tier. Numeric codes are fixed: ES=1, M1=2, M2=3,
/// M3=4, HD=5, BG=6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RankLabel {
    #[serde(rename = "ES")]
    Es,
    M1,
    M2,
    M3,
    #[serde(rename = "HD")]
    Hd,
    #[serde(rename = "BG")]
    Bg,
}

impl RankLabel {
    /// The five foreground tiers in ascending difficulty.
    pub const FOREGROUND: [RankLabel; 5] = [
        RankLabel::Es,
        RankLabel::M1,
        RankLabel::M2,
        RankLabel::M3,
        RankLabel::Hd,
    ];

    /// Fixed numeric code used by the pixel-level rank error metric.
    pub fn code(self) -> u8 {
        match self {
            RankLabel::Es => 1,
            RankLabel::M1 => 2,
            RankLabel::M2 => 3,
            RankLabel::M3 => 4,
            RankLabel::Hd => 5,
            RankLabel::Bg => 6,
        }
    }

    pub fn from_code(code: u8) -> Option<RankLabel> {
        match code {
            1 => Some(RankLabel::Es),
            2 => Some(RankLabel::M1),
            3 => Some(RankLabel::M2),
            4 => Some(RankLabel::M3),
            5 => Some(RankLabel::Hd),
            6 => Some(RankLabel::Bg),
            _ => None,
        }
    }

    /// Zero-based index into the penalty-matrix order (BG, ES, M1, M2, M3, HD).
    pub fn penalty_index(self) -> usize {
        match self {
            RankLabel::Bg => 0,
            RankLabel::Es => 1,
            RankLabel::M1 => 2,
            RankLabel::M2 => 3,
            RankLabel::M3 => 4,
            RankLabel::Hd => 5,
        }
    }

    /// 8-bit gray code used in rank map PNGs: BG=0, ES=51, M1=102, M2=153,
    /// M3=204, HD=255.
    pub fn gray_code(self) -> u8 {
        match self {
            RankLabel::Bg => 0,
            RankLabel::Es => 51,
            RankLabel::M1 => 102,
            RankLabel::M2 => 153,
            RankLabel::M3 => 204,
            RankLabel::Hd => 255,
        }
    }

    pub fn from_gray_code(gray: u8) -> Option<RankLabel> {
        match gray {
            0 => Some(RankLabel::Bg),
            51 => Some(RankLabel::Es),
            102 => Some(RankLabel::M1),
            153 => Some(RankLabel::M2),
            204 => Some(RankLabel::M3),
            255 => Some(RankLabel::Hd),
            _ => None,
        }
    }

    pub fn is_foreground(self) -> bool {
        self != RankLabel::Bg
    }

    pub fn parse(s: &str) -> Option<RankLabel> {
        match s {
            "ES" => Some(RankLabel::Es),
            "M1" => Some(RankLabel::M1),
            "M2" => Some(RankLabel::M2),
            "M3" => Some(RankLabel::M3),
            "HD" => Some(RankLabel::Hd),
            "BG" => Some(RankLabel::Bg),
            _ => None,
        }
    }
}

impl fmt::Display for RankLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RankLabel::Es => "ES",
            RankLabel::M1 => "M1",
            RankLabel::M2 => "M2",
            RankLabel::M3 => "M3",
            RankLabel::Hd => "HD",
            RankLabel::Bg => "BG",
        };
        f.write_str(s)
    }
}

/// Per-pixel rank labels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMap {
    width: u32,
    height: u32,
    labels: Vec<RankLabel>,
}

impl RankMap {
    pub fn new(width: u32, height: u32, labels: Vec<RankLabel>) -> Result<Self> {
        if labels.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidConfig(format!(
                "label count {} does not match {}x{}",
                labels.len(),
                width,
                height
            )));
        }
        Ok(RankMap {
            width,
            height,
            labels,
        })
    }

    /// All-background map.
    pub fn background(width: u32, height: u32) -> Self {
        RankMap {
            width,
            height,
            labels: vec![RankLabel::Bg; (width as usize) * (height as usize)],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[RankLabel] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> RankLabel {
        debug_assert!(x < self.width && y < self.height);
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// Mask of pixels carrying a foreground rank.
    pub fn foreground_mask(&self) -> BinaryMask {
        BinaryMask::new(
            self.width,
            self.height,
            self.labels.iter().map(|l| l.is_foreground()).collect(),
        )
        .expect("label count matches dims")
    }

    /// Numeric codes as a real-valued map (ES=1 .. BG=6).
    pub fn codes_as_scalar_map(&self) -> crate::map::ScalarMap {
        crate::map::ScalarMap::new(
            self.width,
            self.height,
            self.labels.iter().map(|l| l.code() as f64).collect(),
        )
        .expect("codes are finite")
    }
}

/// Paints ranked instance masks onto a background canvas.
///
/// Where masks overlap the instance with the higher score wins; a missing
/// score loses to any present score, and among equal scores the later
/// instance wins. Returns the map plus the number of overlapping pixel
/// conflicts that were decided without any score on either side (callers
/// may want to warn about those).
pub fn paint_ranks(
    width: u32,
    height: u32,
    items: &[(&BinaryMask, RankLabel, Option<f64>)],
) -> Result<(RankMap, usize)> {
    for (mask, _, _) in items {
        if mask.dims() != (width, height) {
            return Err(Error::dims(mask.dims(), (width, height)));
        }
    }
    // painting in ascending (score, index) order makes the winner the last
    // writer; None sorts below every real score
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let sa = items[a].2;
        let sb = items[b].2;
        match (sa, sb) {
            (None, None) => a.cmp(&b),
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.partial_cmp(&y).unwrap().then(a.cmp(&b)),
        }
    });
    let mut labels = vec![RankLabel::Bg; (width * height) as usize];
    let mut writer: Vec<Option<usize>> = vec![None; labels.len()];
    let mut unscored_conflicts = 0usize;
    for &idx in &order {
        let (mask, rank, score) = items[idx];
        for (pix, &on) in mask.bits().iter().enumerate() {
            if !on {
                continue;
            }
            if let Some(prev) = writer[pix] {
                if items[prev].2.is_none() && score.is_none() {
                    unscored_conflicts += 1;
                }
            }
            labels[pix] = rank;
            writer[pix] = Some(idx);
        }
    }
    Ok((RankMap::new(width, height, labels)?, unscored_conflicts))
}

/// Penalty-matrix rank order, 1-based in the lookup convention.
pub const PENALTY_ORDER: [&str; 6] = ["BG", "ES", "M1", "M2", "M3", "HD"];

/// 6x6 misranking cost table indexed (predicted, ground truth) over
/// (BG, ES, M1, M2, M3, HD).
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyMatrix {
    entries: [[f64; 6]; 6],
}

#[derive(Serialize, Deserialize)]
struct PenaltyMatrixFile {
    order: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl PenaltyMatrix {
    /// Linear-distance default: `w(m, n) = |m - n| / 5` over the 1-based
    /// (BG, ES, M1, M2, M3, HD) order.
    pub fn linear_default() -> Self {
        let mut entries = [[0.0; 6]; 6];
        for (m, row) in entries.iter_mut().enumerate() {
            for (n, cell) in row.iter_mut().enumerate() {
                *cell = (m as f64 - n as f64).abs() / 5.0;
            }
        }
        PenaltyMatrix { entries }
    }

    pub fn from_entries(entries: [[f64; 6]; 6]) -> Result<Self> {
        let m = PenaltyMatrix { entries };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for (i, row) in self.entries.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidPenaltyMatrix(format!(
                    "diagonal entry ({i},{i}) is {}, must be 0",
                    row[i]
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidPenaltyMatrix(format!(
                        "entry ({i},{j}) is {v}, must be finite and >= 0"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses the JSON wire format: `{"order": ["BG",...,"HD"], "matrix": [[..6]..6]}`.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: PenaltyMatrixFile = serde_json::from_str(json)
            .map_err(|e| Error::InvalidPenaltyMatrix(e.to_string()))?;
        if file.order != PENALTY_ORDER {
            return Err(Error::InvalidPenaltyMatrix(format!(
                "order must be {PENALTY_ORDER:?}, got {:?}",
                file.order
            )));
        }
        if file.matrix.len() != 6 || file.matrix.iter().any(|r| r.len() != 6) {
            return Err(Error::InvalidPenaltyMatrix("matrix must be 6x6".into()));
        }
        let mut entries = [[0.0; 6]; 6];
        for (i, row) in file.matrix.iter().enumerate() {
            entries[i].copy_from_slice(row);
        }
        Self::from_entries(entries)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            context: format!("reading penalty matrix {}", path.display()),
            source: e,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = PenaltyMatrixFile {
            order: PENALTY_ORDER.iter().map(|s| s.to_string()).collect(),
            matrix: self.entries.iter().map(|r| r.to_vec()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("penalty matrix serializes")
    }

    /// The shipped matrix pinning the one published entry, (M3, ES) = 0.4,
    /// on top of the linear default.
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED_PENALTY_JSON).expect("bundled matrix is valid")
    }

    pub fn lookup(&self, predicted: RankLabel, ground_truth: RankLabel) -> f64 {
        self.entries[predicted.penalty_index()][ground_truth.penalty_index()]
    }
}

/// Bundled copy of `assets/rank_penalty.json` so the shipped penalty table
/// is available without a file lookup.
pub const BUNDLED_PENALTY_JSON: &str = include_str!("../assets/rank_penalty.json");

/// Penalty for predicting rank `predicted` when the ground truth is
/// `ground_truth`, under the 1-based (BG, ES, M1, M2, M3, HD) order.
pub fn penalty_lookup(
    matrix: &PenaltyMatrix,
    predicted: RankLabel,
    ground_truth: RankLabel,
) -> f64 {
    matrix.lookup(predicted, ground_truth)
}
