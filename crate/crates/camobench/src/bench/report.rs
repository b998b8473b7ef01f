//! Report emission (CSV, JSON, Markdown) and the grouped views: metric
//! means per camouflage attribute, and instance counts per (attribute,
//! rank level). All emission is byte-deterministic for a given input.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attrs::{InstanceAttributes, ATTRIBUTE_NAMES};
use crate::error::{Error, Result};
use crate::manifest::DatasetManifest;
use crate::rank::RankLabel;

use super::{compute_aggregates, Aggregate, EvaluationReport, ReportRow};

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::UnwritablePath {
        path: path.to_path_buf(),
        source: e,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::UnwritablePath {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io {
        context: "formatting csv".into(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    }
}

/// Per-image rows as CSV (`image,method,metric,value,error`). Errored rows
/// leave `value` empty. Values print in shortest round-trip form, so a
/// reader recovers the exact binary float.
pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["image", "method", "metric", "value", "error"])
        .map_err(csv_err)?;
    for r in rows {
        let value = r.value.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.image.as_str(),
            r.method.as_str(),
            r.metric.as_str(),
            &value,
            r.error.as_deref().unwrap_or(""),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        context: "formatting csv".into(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(format!("csv not utf-8: {e}")))
}

/// Parses [`rows_to_csv`] output back into rows.
pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if record.len() != 5 {
            return Err(Error::InvalidConfig(format!(
                "csv row has {} fields, expected 5",
                record.len()
            )));
        }
        let value = match &record[3] {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|e| {
                Error::InvalidConfig(format!("csv value '{s}': {e}"))
            })?),
        };
        let error = match &record[4] {
            "" => None,
            s => Some(s.to_string()),
        };
        rows.push(ReportRow {
            image: record[0].to_string(),
            method: record[1].to_string(),
            metric: record[2].to_string(),
            value,
            error,
        });
    }
    Ok(rows)
}

fn fmt_mean(mean: Option<f64>) -> String {
    match mean {
        Some(v) => format!("{v:.6}"),
        None => "n/a".to_string(),
    }
}

impl EvaluationReport {
    /// Markdown summary. The single table is the aggregate grid with exactly
    /// one row per method; dataset-level values and errors follow as lists.
    pub fn to_markdown(&self) -> String {
        let md = &self.metadata;
        let mut s = String::new();
        let _ = writeln!(s, "# {} report: {}", md.operation, md.dataset);
        let _ = writeln!(s);
        let _ = writeln!(s, "- tool: {}", md.tool);
        let _ = writeln!(s, "- seed: {}", md.seed);
        let _ = writeln!(s, "- images: {}", md.images);
        let errored = self.rows.iter().filter(|r| r.error.is_some()).count();
        let _ = writeln!(s, "- rows: {} ({} errored)", self.rows.len(), errored);
        let _ = writeln!(s);
        let _ = writeln!(s, "| method | {} |", md.metrics.join(" | "));
        let _ = writeln!(s, "|{}|", vec!["---"; md.metrics.len() + 1].join("|"));
        for method in &md.methods {
            let cells: Vec<String> = md
                .metrics
                .iter()
                .map(|metric| {
                    self.aggregates
                        .iter()
                        .find(|a| a.method == *method && a.metric == *metric)
                        .map(|a| fmt_mean(a.mean))
                        .unwrap_or_else(|| "n/a".to_string())
                })
                .collect();
            let _ = writeln!(s, "| {} | {} |", method, cells.join(" | "));
        }
        if !self.dataset_values.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "Dataset-level values:");
            let _ = writeln!(s);
            for v in &self.dataset_values {
                match (&v.value, &v.error) {
                    (Some(val), _) => {
                        let _ = writeln!(s, "- {} {} = {}", v.method, v.metric, fmt_mean(Some(*val)));
                    }
                    (None, Some(err)) => {
                        let _ = writeln!(s, "- {} {}: error: {}", v.method, v.metric, err);
                    }
                    (None, None) => {
                        let _ = writeln!(s, "- {} {}: n/a", v.method, v.metric);
                    }
                }
            }
        }
        let notes = self.error_notes();
        if !notes.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "Errors:");
            let _ = writeln!(s);
            for note in notes {
                let _ = writeln!(s, "- {note}");
            }
        }
        s
    }
}

/// Writes `report.csv` (per-image rows), `report.json` (the full report),
/// and `report.md` (aggregate grid) into `out_dir`, returning the paths.
pub fn emit_report(report: &EvaluationReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    let csv_path = out_dir.join("report.csv");
    write_file(&csv_path, &rows_to_csv(&report.rows)?)?;
    let json_path = out_dir.join("report.json");
    write_file(&json_path, &report.to_json_string())?;
    let md_path = out_dir.join("report.md");
    write_file(&md_path, &report.to_markdown())?;
    Ok(vec![csv_path, json_path, md_path])
}

/// Metric means restricted to the images carrying each attribute.
///
/// Raw values; the presentation-side rescaling sometimes applied to such
/// tables is deliberately not. Images count toward every attribute they
/// carry; an image carries an attribute when any of its instances does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeBreakdown {
    pub dataset: String,
    pub operation: String,
    pub groups: Vec<AttributeGroup>,
    /// One note per attribute omitted for having no images.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeGroup {
    pub attribute: String,
    /// Evaluated images carrying the attribute.
    pub images: usize,
    pub means: Vec<Aggregate>,
}

/// Groups a report's rows by camouflage attribute and averages each
/// (method, metric) cell over the group, in the report's own order.
pub fn attr_breakdown(
    report: &EvaluationReport,
    attrs: &[InstanceAttributes],
) -> AttributeBreakdown {
    let report_images: BTreeSet<&str> = report.rows.iter().map(|r| r.image.as_str()).collect();
    let mut groups = Vec::new();
    let mut notes = Vec::new();
    for name in ATTRIBUTE_NAMES {
        let image_ids: BTreeSet<&str> = attrs
            .iter()
            .filter(|row| row.flag(name) == Some(true))
            .map(|row| row.image_id.as_str())
            .filter(|id| report_images.contains(id))
            .collect();
        if image_ids.is_empty() {
            notes.push(format!(
                "{name}: no evaluated images carry this attribute; group omitted"
            ));
            continue;
        }
        let rows: Vec<ReportRow> = report
            .rows
            .iter()
            .filter(|r| image_ids.contains(r.image.as_str()))
            .cloned()
            .collect();
        let means = compute_aggregates(&rows, &report.metadata.methods, &report.metadata.metrics);
        groups.push(AttributeGroup {
            attribute: name.to_string(),
            images: image_ids.len(),
            means,
        });
    }
    AttributeBreakdown {
        dataset: report.metadata.dataset.clone(),
        operation: report.metadata.operation.clone(),
        groups,
        notes,
    }
}

impl AttributeBreakdown {
    /// CSV rows: `attribute,images,method,metric,mean,count`.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["attribute", "images", "method", "metric", "mean", "count"])
            .map_err(csv_err)?;
        for g in &self.groups {
            for a in &g.means {
                w.write_record([
                    g.attribute.as_str(),
                    &g.images.to_string(),
                    a.method.as_str(),
                    a.metric.as_str(),
                    &a.mean.map(|v| v.to_string()).unwrap_or_default(),
                    &a.count.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            context: "formatting csv".into(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e),
        })?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(format!("csv not utf-8: {e}")))
    }

    /// One Markdown table per attribute group, plus the omission notes.
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# attribute breakdown: {} ({})", self.dataset, self.operation);
        for g in &self.groups {
            let metrics: Vec<&str> = {
                let mut seen = Vec::new();
                for a in &g.means {
                    if !seen.contains(&a.metric.as_str()) {
                        seen.push(a.metric.as_str());
                    }
                }
                seen
            };
            let methods: Vec<&str> = {
                let mut seen = Vec::new();
                for a in &g.means {
                    if !seen.contains(&a.method.as_str()) {
                        seen.push(a.method.as_str());
                    }
                }
                seen
            };
            let _ = writeln!(s);
            let _ = writeln!(s, "## {} ({} images)", g.attribute, g.images);
            let _ = writeln!(s);
            let _ = writeln!(s, "| method | {} |", metrics.join(" | "));
            let _ = writeln!(s, "|{}|", vec!["---"; metrics.len() + 1].join("|"));
            for method in &methods {
                let cells: Vec<String> = metrics
                    .iter()
                    .map(|metric| {
                        g.means
                            .iter()
                            .find(|a| a.method == *method && a.metric == *metric)
                            .map(|a| fmt_mean(a.mean))
                            .unwrap_or_else(|| "n/a".to_string())
                    })
                    .collect();
                let _ = writeln!(s, "| {} | {} |", method, cells.join(" | "));
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s);
            for note in &self.notes {
                let _ = writeln!(s, "- {note}");
            }
        }
        s
    }
}

/// Writes `breakdown.csv`, `breakdown.json`, and `breakdown.md`.
pub fn emit_breakdown(breakdown: &AttributeBreakdown, out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    let csv_path = out_dir.join("breakdown.csv");
    write_file(&csv_path, &breakdown.to_csv_string()?)?;
    let json_path = out_dir.join("breakdown.json");
    let mut json = serde_json::to_string_pretty(breakdown).expect("breakdown serializes");
    json.push('\n');
    write_file(&json_path, &json)?;
    let md_path = out_dir.join("breakdown.md");
    write_file(&md_path, &breakdown.to_markdown())?;
    Ok(vec![csv_path, json_path, md_path])
}

/// Instance counts per (attribute, rank level). Rows follow
/// [`ATTRIBUTE_NAMES`]; columns are the five foreground ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankHistogram {
    pub attributes: Vec<String>,
    pub ranks: Vec<RankLabel>,
    /// `counts[a][r]`: instances carrying attribute `a` with gt rank `r`.
    pub counts: Vec<Vec<usize>>,
}

impl RankHistogram {
    pub fn row_total(&self, attribute_index: usize) -> usize {
        self.counts[attribute_index].iter().sum()
    }

    pub fn cell(&self, attribute: &str, rank: RankLabel) -> Option<usize> {
        let a = self.attributes.iter().position(|n| n == attribute)?;
        let r = self.ranks.iter().position(|&l| l == rank)?;
        Some(self.counts[a][r])
    }

    /// CSV rows: `attribute,ES,M1,M2,M3,HD,total`.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["attribute".to_string()];
        header.extend(self.ranks.iter().map(|r| r.to_string()));
        header.push("total".to_string());
        w.write_record(&header).map_err(csv_err)?;
        for (a, name) in self.attributes.iter().enumerate() {
            let mut record = vec![name.clone()];
            record.extend(self.counts[a].iter().map(|c| c.to_string()));
            record.push(self.row_total(a).to_string());
            w.write_record(&record).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            context: "formatting csv".into(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e),
        })?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(format!("csv not utf-8: {e}")))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# instances per (attribute, rank)");
        let _ = writeln!(s);
        let ranks: Vec<String> = self.ranks.iter().map(|r| r.to_string()).collect();
        let _ = writeln!(s, "| attribute | {} | total |", ranks.join(" | "));
        let _ = writeln!(s, "|{}|", vec!["---"; self.ranks.len() + 2].join("|"));
        for (a, name) in self.attributes.iter().enumerate() {
            let cells: Vec<String> = self.counts[a].iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "| {} | {} | {} |", name, cells.join(" | "), self.row_total(a));
        }
        s
    }
}

/// Counts gt instances into (attribute, rank) cells, joining the manifest's
/// instance ranks with the attribute table on (image id, instance index).
/// Instances without a rank or without an attribute row are skipped.
pub fn rank_histogram(manifest: &DatasetManifest, attrs: &[InstanceAttributes]) -> RankHistogram {
    let flags: std::collections::BTreeMap<(&str, &str), &InstanceAttributes> = attrs
        .iter()
        .map(|row| ((row.image_id.as_str(), row.instance_id.as_str()), row))
        .collect();
    let ranks: Vec<RankLabel> = RankLabel::FOREGROUND.to_vec();
    let mut counts = vec![vec![0usize; ranks.len()]; ATTRIBUTE_NAMES.len()];
    for entry in &manifest.entries {
        let id = entry.id();
        for (k, inst) in entry.instances.iter().enumerate() {
            let Some(rank) = inst.rank else { continue };
            let Some(r) = ranks.iter().position(|&l| l == rank) else {
                continue;
            };
            let key = (id.as_str(), k.to_string());
            let Some(row) = flags.get(&(key.0, key.1.as_str())) else {
                continue;
            };
            for (a, name) in ATTRIBUTE_NAMES.iter().enumerate() {
                if row.flag(name) == Some(true) {
                    counts[a][r] += 1;
                }
            }
        }
    }
    RankHistogram {
        attributes: ATTRIBUTE_NAMES.iter().map(|s| s.to_string()).collect(),
        ranks,
        counts,
    }
}

/// Writes `rank_histogram.csv`, `rank_histogram.json`, and
/// `rank_histogram.md`.
pub fn emit_histogram(histogram: &RankHistogram, out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    let csv_path = out_dir.join("rank_histogram.csv");
    write_file(&csv_path, &histogram.to_csv_string()?)?;
    let json_path = out_dir.join("rank_histogram.json");
    let mut json = serde_json::to_string_pretty(histogram).expect("histogram serializes");
    json.push('\n');
    write_file(&json_path, &json)?;
    let md_path = out_dir.join("rank_histogram.md");
    write_file(&md_path, &histogram.to_markdown())?;
    Ok(vec![csv_path, json_path, md_path])
}
