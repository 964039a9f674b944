//! Annotation and prediction files.
//!
//! Annotations use the DOTA line layout with semantically ordered corners:
//!
//! ```text
//! xA yA xB yB xC yC xD yD label difficulty
//! ```
//!
//! Predictions prepend the image id and replace the difficulty with a
//! confidence score. Corrections are `image_id record_index k` triples that
//! relabel a record's head corner with [`QuadBox::cyclic_shift`].

mod icdar;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::QuadBox;

pub use icdar::{icdar_to_r360, parse_icdar_xml, parse_icdar_xml_with, XmlSchema};
pub use validate::{validate_annotations, FindingKind, RecordReport, ValidationReport};

pub const DEFAULT_LABEL: &str = "table";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub quad: QuadBox,
    pub label: String,
    pub difficulty: u32,
}

impl AnnotationRecord {
    pub fn new(quad: QuadBox, label: impl Into<String>, difficulty: u32) -> Self {
        Self {
            quad,
            label: label.into(),
            difficulty,
        }
    }

    /// A `table` record with difficulty 0.
    pub fn table(quad: QuadBox) -> Self {
        Self::new(quad, DEFAULT_LABEL, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub quad: QuadBox,
    pub label: String,
    pub score: f64,
}

impl DetectionRecord {
    pub fn new(quad: QuadBox, label: impl Into<String>, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidValue(format!("score {score} outside [0, 1]")));
        }
        Ok(Self {
            quad,
            label: label.into(),
            score,
        })
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_coords(line: usize, tokens: &[&str]) -> Result<QuadBox> {
    let mut c = [0.0; 8];
    for (slot, tok) in c.iter_mut().zip(tokens) {
        *slot = tok
            .parse::<f64>()
            .map_err(|_| Error::parse(line, format!("coordinate {tok:?} is not a number")))?;
    }
    Ok(QuadBox::from_coords(c))
}

/// Parses a DOTA-style annotation file.
///
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_dota_file(text: &str) -> Result<Vec<AnnotationRecord>> {
    content_lines(text)
        .map(|(n, line)| {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 10 {
                return Err(Error::parse(
                    n,
                    format!(
                        "expected 10 fields (8 coordinates, label, difficulty), got {}",
                        tokens.len()
                    ),
                ));
            }
            let quad = parse_coords(n, &tokens[..8])?;
            let difficulty = tokens[9].parse::<u32>().map_err(|_| {
                Error::parse(
                    n,
                    format!("difficulty {:?} is not a non-negative integer", tokens[9]),
                )
            })?;
            Ok(AnnotationRecord::new(quad, tokens[8], difficulty))
        })
        .collect()
}

fn push_coords(out: &mut String, q: &QuadBox) {
    for (i, v) in q.coords().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // Display for f64 is the shortest string that parses back exactly
        let _ = write!(out, "{v}");
    }
}

/// Writes records one per line, LF-terminated.
pub fn write_dota_file(records: &[AnnotationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        push_coords(&mut out, &r.quad);
        let _ = writeln!(out, " {} {}", r.label, r.difficulty);
    }
    out
}

/// Parses `image_id x1 y1 ... x4 y4 label score` lines, in file order.
pub fn parse_predictions(text: &str) -> Result<Vec<(String, DetectionRecord)>> {
    content_lines(text)
        .map(|(n, line)| {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 11 {
                return Err(Error::parse(
                    n,
                    format!(
                        "expected 11 fields (image id, 8 coordinates, label, score), got {}",
                        tokens.len()
                    ),
                ));
            }
            let quad = parse_coords(n, &tokens[1..9])?;
            let score = tokens[10]
                .parse::<f64>()
                .map_err(|_| Error::parse(n, format!("score {:?} is not a number", tokens[10])))?;
            let det = DetectionRecord::new(quad, tokens[9], score)
                .map_err(|e| Error::parse(n, e.to_string()))?;
            Ok((tokens[0].to_string(), det))
        })
        .collect()
}

pub fn write_predictions(dets: &[(String, DetectionRecord)]) -> String {
    let mut out = String::new();
    for (id, d) in dets {
        out.push_str(id);
        out.push(' ');
        push_coords(&mut out, &d.quad);
        let _ = writeln!(out, " {} {}", d.label, d.score);
    }
    out
}

/// Groups predictions by image id, keeping file order within each image.
pub fn group_by_image(
    dets: Vec<(String, DetectionRecord)>,
) -> BTreeMap<String, Vec<DetectionRecord>> {
    let mut map: BTreeMap<String, Vec<DetectionRecord>> = BTreeMap::new();
    for (id, d) in dets {
        map.entry(id).or_default().push(d);
    }
    map
}

/// Per-record head relabelling: `(image_id, record_index) → k`.
pub type Corrections = HashMap<(String, usize), i64>;

/// Parses a corrections sidecar with `image_id record_index k` lines.
pub fn parse_corrections(text: &str) -> Result<Corrections> {
    let mut out = Corrections::new();
    for (n, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [id, idx, k] = tokens[..] else {
            return Err(Error::parse(
                n,
                format!(
                    "expected 3 fields (image id, record index, shift), got {}",
                    tokens.len()
                ),
            ));
        };
        let idx = idx
            .parse::<usize>()
            .map_err(|_| Error::parse(n, format!("record index {idx:?} is not an integer")))?;
        let k = k
            .parse::<i64>()
            .map_err(|_| Error::parse(n, format!("shift {k:?} is not an integer")))?;
        if out.insert((id.to_string(), idx), k).is_some() {
            return Err(Error::parse(
                n,
                format!("duplicate correction for {id} record {idx}"),
            ));
        }
    }
    Ok(out)
}
