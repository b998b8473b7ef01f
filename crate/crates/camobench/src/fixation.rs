//! Eye-tracker fixation data: timestamped gaze events per observer and the
//! deduplicated point sets consumed by the location-based metrics.
//!
//! Log wire format (CSV, one file per observer per image):
//!
//! ```text
//! observer_id,image_id,t0_ms
//! obs1,img_0001,1000
//! 1200,14,55
//! 1450,30,61
//! ```
//!
//! Line 1 is the metadata header, line 2 the metadata values, and every
//! following row is one fixation event `t_ms,x,y`. An optional `t_ms,x,y`
//! header before the event rows is accepted on input and never written.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::BinaryMask;

/// One gaze event: device timestamp (ms) and the fixated pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixationEvent {
    pub t_ms: u64,
    pub x: u32,
    pub y: u32,
}

/// One observer's fixation log for one image. Events are kept sorted by
/// timestamp; every timestamp is at or after `t0_ms`.
#[derive(Debug, Clone)]
pub struct FixationSession {
    pub image_id: String,
    pub observer_id: String,
    pub t0_ms: u64,
    events: Vec<FixationEvent>,
}

impl FixationSession {
    pub fn new(
        image_id: impl Into<String>,
        observer_id: impl Into<String>,
        t0_ms: u64,
        mut events: Vec<FixationEvent>,
    ) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| e.t_ms < t0_ms) {
            return Err(Error::InvalidConfig(format!(
                "event at {} ms precedes session start {} ms",
                e.t_ms, t0_ms
            )));
        }
        events.sort_by_key(|e| e.t_ms);
        Ok(FixationSession {
            image_id: image_id.into(),
            observer_id: observer_id.into(),
            t0_ms,
            events,
        })
    }

    pub fn events(&self) -> &[FixationEvent] {
        &self.events
    }

    /// True when every event lies inside `width` x `height`.
    pub fn in_bounds(&self, width: u32, height: u32) -> bool {
        self.events.iter().all(|e| e.x < width && e.y < height)
    }

    /// Reads the CSV wire format described in the module docs.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileMissing(path.to_path_buf()),
            _ => Error::Io {
                context: format!("reading fixation log {}", path.display()),
                source: e,
            },
        })?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, "empty fixation log"))?;
        if header.trim() != "observer_id,image_id,t0_ms" {
            return Err(Error::parse(
                path,
                format!("expected header 'observer_id,image_id,t0_ms', got '{header}'"),
            ));
        }
        let (_, meta) = lines
            .next()
            .ok_or_else(|| Error::parse(path, "missing metadata row"))?;
        let fields: Vec<&str> = meta.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, format!("bad metadata row '{meta}'")));
        }
        let observer_id = fields[0].to_string();
        let image_id = fields[1].to_string();
        let t0_ms: u64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(path, format!("bad t0_ms '{}'", fields[2])))?;
        let mut events = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() || line == "t_ms,x,y" {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    path,
                    format!("line {}: expected 't_ms,x,y', got '{line}'", lineno + 1),
                ));
            }
            let parse_u = |s: &str, what: &str| -> Result<u64> {
                s.parse()
                    .map_err(|_| Error::parse(path, format!("line {}: bad {what} '{s}'", lineno + 1)))
            };
            events.push(FixationEvent {
                t_ms: parse_u(fields[0], "t_ms")?,
                x: parse_u(fields[1], "x")? as u32,
                y: parse_u(fields[2], "y")? as u32,
            });
        }
        FixationSession::new(image_id, observer_id, t0_ms, events)
            .map_err(|e| Error::parse(path, e.to_string()))
    }

    /// Writes the canonical CSV wire format.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::fs::File::create(path).map_err(|e| Error::UnwritablePath {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut body = String::from("observer_id,image_id,t0_ms\n");
        body.push_str(&format!(
            "{},{},{}\n",
            self.observer_id, self.image_id, self.t0_ms
        ));
        for e in &self.events {
            body.push_str(&format!("{},{},{}\n", e.t_ms, e.x, e.y));
        }
        out.write_all(body.as_bytes()).map_err(|e| Error::Io {
            context: format!("writing fixation log {}", path.display()),
            source: e,
        })
    }
}

/// Deduplicated fixation pixel locations on one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixationPointSet {
    width: u32,
    height: u32,
    points: Vec<(u32, u32)>,
}

impl FixationPointSet {
    /// Deduplicates and bounds-checks the given points.
    pub fn new(width: u32, height: u32, points: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (x, y) in points {
            if x >= width || y >= height {
                return Err(Error::InvalidConfig(format!(
                    "fixation point ({x},{y}) outside {width}x{height}"
                )));
            }
            set.insert((x, y));
        }
        Ok(FixationPointSet {
            width,
            height,
            points: set.into_iter().collect(),
        })
    }

    /// Collects the union of event locations over several sessions.
    pub fn from_sessions<'a>(
        width: u32,
        height: u32,
        sessions: impl IntoIterator<Item = &'a FixationSession>,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            sessions
                .into_iter()
                .flat_map(|s| s.events().iter().map(|e| (e.x, e.y))),
        )
    }

    /// Reads nonzero pixels of a binary fixation-point image as fixations.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        let mut points = Vec::new();
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                if mask.get(x, y) {
                    points.push((x, y));
                }
            }
        }
        FixationPointSet {
            width: mask.width(),
            height: mask.height(),
            points,
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in ascending (x, y) order.
    pub fn points(&self) -> &[(u32, u32)] {
        &self.points
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.points.binary_search(&(x, y)).is_ok()
    }
}
