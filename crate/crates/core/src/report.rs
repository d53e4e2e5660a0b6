//! Result tables: one section per noise kind, one row per input-IoU bin,
//! one column per method.
//!
//! The JSON form is an array of sections:
//!
//! ```json
//! [{"noise_kind": "salt_pepper",
//!   "bins": [{"lo": 0.5, "hi": 0.6, "n": 812,
//!             "methods": [{"name": "eigenshape", "mean_iou": 0.93, "bold": true}]}]}]
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{bold_flags, MethodScores};
use crate::noise::NoiseKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCell {
    pub name: String,
    pub mean_iou: f64,
    pub bold: bool,
    /// Records whose prediction was missing or failed (scored as 0).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub failed: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub methods: Vec<MethodCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSection {
    pub noise_kind: String,
    pub bins: Vec<BinRow>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportTable {
    pub sections: Vec<ReportSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::param(format!("unknown report format '{s}'"))),
        }
    }
}

/// Builds one section from per-method scores over the same bins. Empty
/// bins are omitted.
pub fn build_section(noise_kind: &str, methods: &[MethodScores], alpha: f64) -> Result<ReportSection> {
    if methods.is_empty() {
        return Err(Error::param("report needs at least one method"));
    }
    let n_bins = methods[0].bins.len();
    if methods.iter().any(|m| m.bins.len() != n_bins) {
        return Err(Error::param("methods were scored on different bins"));
    }
    let mut rows = Vec::new();
    for b in 0..n_bins {
        let first = &methods[0].bins[b];
        if first.n() == 0 {
            continue;
        }
        let ids: Vec<&str> = first.per_record.iter().map(|(id, _)| id.as_str()).collect();
        for m in methods {
            let other: Vec<&str> = m.bins[b].per_record.iter().map(|(id, _)| id.as_str()).collect();
            if other != ids {
                return Err(Error::param(format!(
                    "method '{}' is not paired with '{}' on bin {}",
                    m.name, methods[0].name, b
                )));
            }
        }
        let scores: Vec<Vec<f64>> = methods.iter().map(|m| m.bins[b].ious()).collect();
        let refs: Vec<&[f64]> = scores.iter().map(Vec::as_slice).collect();
        let flags = bold_flags(&refs, alpha)?;
        rows.push(BinRow {
            lo: first.lo,
            hi: first.hi,
            n: first.n(),
            methods: methods
                .iter()
                .zip(flags)
                .map(|(m, bold)| MethodCell {
                    name: m.name.clone(),
                    mean_iou: m.bins[b].mean_iou,
                    bold,
                    failed: m.bins[b].failed.len(),
                })
                .collect(),
        });
    }
    Ok(ReportSection {
        noise_kind: noise_kind.to_string(),
        bins: rows,
    })
}

fn edge(v: f64) -> String {
    let v = (v * 1e6).round() / 1e6;
    format!("{v}")
}

fn bin_label(row: &BinRow) -> String {
    format!("{}-{}", edge(row.lo), edge(row.hi))
}

fn section_title(kind: &str) -> String {
    kind.parse::<NoiseKind>()
        .map(|k| k.title().to_string())
        .unwrap_or_else(|_| kind.to_string())
}

impl ReportTable {
    pub fn new(sections: Vec<ReportSection>) -> Self {
        Self { sections }
    }

    /// Method names in first-seen order across all sections.
    pub fn method_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for cell in self.sections.iter().flat_map(|s| &s.bins).flat_map(|b| &b.methods) {
            if !names.contains(&cell.name) {
                names.push(cell.name.clone());
            }
        }
        names
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::param(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::param(format!("invalid report JSON: {e}")))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Text => Ok(self.to_text()),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }

    /// Aligned plain-text table; bold cells are wrapped in `**`.
    pub fn to_text(&self) -> String {
        let names = self.method_names();
        let mut grid: Vec<Option<Vec<String>>> = Vec::new();
        let mut header = vec!["Input IoU".to_string()];
        header.extend(names.iter().cloned());
        grid.push(Some(header));
        let mut titles = Vec::new();
        for section in &self.sections {
            titles.push((grid.len(), section_title(&section.noise_kind)));
            grid.push(None);
            for row in &section.bins {
                let mut line = vec![bin_label(row)];
                for name in &names {
                    let cell = row.methods.iter().find(|c| &c.name == name);
                    line.push(match cell {
                        Some(c) if c.bold => format!("**{:.3}**", c.mean_iou),
                        Some(c) => format!("{:.3}", c.mean_iou),
                        None => "-".to_string(),
                    });
                }
                grid.push(Some(line));
            }
        }
        let cols = names.len() + 1;
        let widths: Vec<usize> = (0..cols)
            .map(|c| grid.iter().flatten().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let mut titles = titles.into_iter().peekable();
        for (i, row) in grid.iter().enumerate() {
            match row {
                Some(cells) => {
                    let parts: Vec<String> = cells
                        .iter()
                        .zip(&widths)
                        .enumerate()
                        .map(|(c, (s, w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                        .collect();
                    let _ = writeln!(out, "{}", parts.join("  ").trim_end());
                }
                None => {
                    let (_, title) = titles.next().filter(|(at, _)| *at == i).expect("section title");
                    let _ = writeln!(out, "{title}");
                }
            }
        }
        out
    }

    /// Long-format CSV: one line per (section, bin, method).
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::param(e.to_string());
        w.write_record(["noise_kind", "lo", "hi", "n", "method", "mean_iou", "bold", "failed"])
            .map_err(csv_err)?;
        for s in &self.sections {
            for b in &s.bins {
                for c in &b.methods {
                    w.write_record([
                        s.noise_kind.clone(),
                        edge(b.lo),
                        edge(b.hi),
                        b.n.to_string(),
                        c.name.clone(),
                        format!("{:.6}", c.mean_iou),
                        c.bold.to_string(),
                        c.failed.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::param(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::BinScores;

    fn scores(name: &str, values: &[f64]) -> MethodScores {
        MethodScores {
            name: name.into(),
            bins: vec![BinScores {
                lo: 0.5,
                hi: 0.6,
                mean_iou: crate::eval::mean(values),
                per_record: values.iter().enumerate().map(|(i, v)| (format!("r{i}"), *v)).collect(),
                failed: vec![],
            }],
        }
    }

    #[test]
    fn section_marks_best() {
        let a = scores("a", &[0.9, 0.92, 0.95, 0.91]);
        let b = scores("b", &[0.5, 0.52, 0.55, 0.51]);
        let s = build_section("salt_pepper", &[a, b], 0.05).unwrap();
        assert_eq!(s.bins.len(), 1);
        assert!(s.bins[0].methods[0].bold);
        assert!(!s.bins[0].methods[1].bold);
        assert_eq!(s.bins[0].n, 4);
    }

    #[test]
    fn unpaired_methods_rejected() {
        let a = scores("a", &[0.9, 0.92]);
        let mut b = scores("b", &[0.5, 0.52]);
        b.bins[0].per_record[0].0 = "other".into();
        assert!(build_section("circle", &[a, b], 0.05).is_err());
    }

    #[test]
    fn json_schema_and_round_trip() {
        let s = build_section("circle", &[scores("a", &[0.7, 0.8])], 0.05).unwrap();
        let table = ReportTable::new(vec![s]);
        let json = table.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let bin = &v[0]["bins"][0];
        assert_eq!(v[0]["noise_kind"], "circle");
        assert_eq!(bin["n"], 2);
        assert_eq!(bin["methods"][0]["name"], "a");
        assert_eq!(bin["methods"][0]["bold"], true);
        assert!(bin["methods"][0].get("failed").is_none());
        assert_eq!(ReportTable::from_json(&json).unwrap(), table);
    }

    #[test]
    fn text_has_titles_and_labels() {
        let s = build_section("salt_pepper", &[scores("a", &[0.7, 0.8])], 0.05).unwrap();
        let text = ReportTable::new(vec![s]).to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Input IoU          a");
        assert_eq!(lines[1], "Salt and Pepper Noise");
        assert_eq!(lines[2], "0.5-0.6    **0.750**");
    }

    #[test]
    fn csv_is_long_format() {
        let s = build_section(
            "salt_pepper",
            &[scores("a", &[0.7, 0.8]), scores("b", &[0.7, 0.8])],
            0.05,
        )
        .unwrap();
        let csv = ReportTable::new(vec![s]).to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "salt_pepper,0.5,0.6,2,a,0.750000,true,0");
    }
}
