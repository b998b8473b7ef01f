//! Per-instance records: mask, bounding box, rank, confidence score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::BinaryMask;
use crate::rank::RankLabel;

/// Axis-aligned bounding box in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    /// Intersection-over-union of two boxes; 0 when either is degenerate.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y1 = (self.y + self.h).min(other.y + other.h);
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let inter = (x1 - x0) as u64 * (y1 - y0) as u64;
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// One camouflaged instance: mask plus optional bbox, rank, and score.
#[derive(Debug, Clone)]
pub struct InstanceRecord {
    pub id: String,
    pub mask: BinaryMask,
    pub bbox: Option<BoundingBox>,
    pub rank: Option<RankLabel>,
    pub score: Option<f64>,
}

impl InstanceRecord {
    /// Fails on an empty mask; derives the bbox from the mask when absent.
    pub fn new(
        id: impl Into<String>,
        mask: BinaryMask,
        rank: Option<RankLabel>,
        score: Option<f64>,
    ) -> Result<Self> {
        let bbox = mask.bounding_box().ok_or(Error::EmptyMask)?;
        Ok(InstanceRecord {
            id: id.into(),
            mask,
            bbox: Some(bbox.into()),
            rank,
            score,
        })
    }

    /// The bbox, computing the tight bound from the mask when not stored.
    pub fn effective_bbox(&self) -> Result<BoundingBox> {
        match self.bbox {
            Some(b) => Ok(b),
            None => self
                .mask
                .bounding_box()
                .map(|(x, y, w, h)| BoundingBox { x, y, w, h })
                .ok_or(Error::EmptyMask),
        }
    }

    pub fn rank(&self) -> Result<RankLabel> {
        self.rank.ok_or_else(|| Error::MissingRank(self.id.clone()))
    }
}

impl From<(u32, u32, u32, u32)> for BoundingBox {
    fn from((x, y, w, h): (u32, u32, u32, u32)) -> Self {
        BoundingBox { x, y, w, h }
    }
}
