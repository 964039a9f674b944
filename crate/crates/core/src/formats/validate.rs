use serde::{Deserialize, Serialize};

use super::AnnotationRecord;
use crate::error::Error;
use crate::transform::CanvasSize;

/// Corners may sit this far outside the canvas before they count as out of
/// bounds.
const BOUNDS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    NotClockwise,
    NotConvex,
    NotRectangular,
    OutOfBounds,
    Malformed,
}

impl FindingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::NotClockwise => "not_clockwise",
            FindingKind::NotConvex => "not_convex",
            FindingKind::NotRectangular => "not_rectangular",
            FindingKind::OutOfBounds => "out_of_bounds",
            FindingKind::Malformed => "malformed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordReport {
    pub index: usize,
    /// `"ok"` or the first finding's kind.
    pub status: String,
    pub findings: Vec<Finding>,
}

impl RecordReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, kind: FindingKind) -> bool {
        self.findings.iter().any(|f| f.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: Vec<RecordReport>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.records.iter().all(RecordReport::is_ok)
    }

    pub fn findings(&self) -> impl Iterator<Item = (usize, &Finding)> {
        self.records
            .iter()
            .flat_map(|r| r.findings.iter().map(move |f| (r.index, f)))
    }
}

fn check(record: &AnnotationRecord, canvas: Option<CanvasSize>) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Finding { kind, detail });
    let q = &record.quad;
    if !q.is_finite() {
        push(
            FindingKind::Malformed,
            format!("non-finite coordinate in {:?}", q.coords()),
        );
        return out;
    }
    if record.label.is_empty() || record.label.chars().any(char::is_whitespace) {
        push(
            FindingKind::Malformed,
            format!("label {:?} is empty or has whitespace", record.label),
        );
    }
    let area = q.signed_area();
    if area <= 0.0 {
        push(
            FindingKind::NotClockwise,
            format!("signed area {area} is not positive; corners must run clockwise on screen"),
        );
    }
    if !q.is_convex() {
        push(FindingKind::NotConvex, "quad is not convex".into());
    }
    match q.check_rectangle() {
        Ok(()) => {}
        Err(Error::NotRectangular(msg)) | Err(Error::Degenerate(msg)) => {
            push(FindingKind::NotRectangular, msg)
        }
        Err(e) => push(FindingKind::Malformed, e.to_string()),
    }
    if let Some(c) = canvas {
        for (name, p) in ["A", "B", "C", "D"].iter().zip(q.corners) {
            if !c.contains(p, BOUNDS_TOLERANCE) {
                push(
                    FindingKind::OutOfBounds,
                    format!(
                        "corner {name} ({}, {}) outside {}x{} canvas",
                        p.x, p.y, c.width, c.height
                    ),
                );
            }
        }
    }
    out
}

/// Checks the geometric constraints of head-first annotations: clockwise,
/// convex, rectangular and, when `canvas` is given, inside the image.
///
/// Whether `A` really is the table's top-left corner depends on the content
/// and cannot be checked here.
pub fn validate_annotations(
    records: &[AnnotationRecord],
    canvas: Option<CanvasSize>,
) -> ValidationReport {
    ValidationReport {
        records: records
            .iter()
            .enumerate()
            .map(|(index, r)| {
                let findings = check(r, canvas);
                let status = findings
                    .first()
                    .map_or("ok", |f| f.kind.as_str())
                    .to_string();
                RecordReport {
                    index,
                    status,
                    findings,
                }
            })
            .collect(),
    }
}
