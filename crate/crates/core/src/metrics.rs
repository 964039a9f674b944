//! Angle-constrained average precision for head/tail-aware boxes.
//!
//! A detection is a true positive when it overlaps an unclaimed ground truth
//! with rotated IoU above `T_IoU` *and* its head direction is within
//! `T_theta` degrees of the ground truth's (circular difference). With
//! `T_theta = 360` the angle gate never fires and the metric is ordinary
//! rotated AP; with `T_theta = 90` a box predicted upside down is a false
//! positive even when it covers the table perfectly.
//!
//! Matching is greedy by descending score (stable for ties), each detection
//! taking the unmatched ground truth with the highest IoU. AP is the
//! 11-point interpolated area under the precision/recall curve.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{AnnotationRecord, DetectionRecord};
use crate::geometry::{angle_difference, quad_to_box_lenient, OrientedBox, QuadBox};
use crate::polygon::rotated_iou;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub name: String,
    pub iou_threshold: f64,
    /// Degrees.
    pub angle_threshold: f64,
}

impl EvalConfig {
    pub fn new(name: impl Into<String>, iou_threshold: f64, angle_threshold: f64) -> Result<Self> {
        if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
            return Err(Error::InvalidValue(format!(
                "IoU threshold {iou_threshold} outside (0, 1)"
            )));
        }
        if !(angle_threshold > 0.0 && angle_threshold <= 360.0) {
            return Err(Error::InvalidValue(format!(
                "angle threshold {angle_threshold} outside (0, 360]"
            )));
        }
        Ok(Self {
            name: name.into(),
            iou_threshold,
            angle_threshold,
        })
    }

    /// A config named like the presets, e.g. `AP60(T<45)`.
    pub fn custom(iou_threshold: f64, angle_threshold: f64) -> Result<Self> {
        let name = format!("AP{}(T<{})", iou_threshold * 100.0, angle_threshold);
        Self::new(name, iou_threshold, angle_threshold)
    }

    fn accepts(&self, iou: f64, angle_deg: f64) -> bool {
        iou > self.iou_threshold && angle_deg < self.angle_threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Ap50T90,
    Ap75T40,
    Ap50T360,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Ap50T90, Preset::Ap75T40, Preset::Ap50T360];

    pub fn key(self) -> &'static str {
        match self {
            Preset::Ap50T90 => "ap50t90",
            Preset::Ap75T40 => "ap75t40",
            Preset::Ap50T360 => "ap50t360",
        }
    }

    pub fn config(self) -> EvalConfig {
        let (name, iou, angle) = match self {
            Preset::Ap50T90 => ("AP50(T<90)", 0.5, 90.0),
            Preset::Ap75T40 => ("AP75(T<40)", 0.75, 40.0),
            Preset::Ap50T360 => ("AP50(T<360)", 0.5, 360.0),
        };
        EvalConfig {
            name: name.into(),
            iou_threshold: iou,
            angle_threshold: angle,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.key().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidValue(format!(
                    "unknown preset {s:?} (expected ap50t90, ap75t40 or ap50t360)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Detection indices in descending score order.
    pub ranked: Vec<usize>,
    /// TP flag per ranked detection.
    pub is_tp: Vec<bool>,
    /// Ground truth claimed by each ranked detection, if it was a TP.
    pub matched_gt: Vec<Option<usize>>,
    /// Per ground truth, whether some detection claimed it.
    pub gt_matched: Vec<bool>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Box used for matching; `None` when the quad is too degenerate to have one.
fn prepare(q: &QuadBox) -> Option<OrientedBox> {
    quad_to_box_lenient(q).ok()
}

/// Stable ranking by descending score.
fn rank(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

fn match_prepared(
    dets: &[Option<OrientedBox>],
    scores: &[f64],
    gts: &[Option<OrientedBox>],
    cfg: &EvalConfig,
) -> MatchResult {
    let ranked = rank(scores);
    let mut gt_matched = vec![false; gts.len()];
    let mut is_tp = Vec::with_capacity(ranked.len());
    let mut matched_gt = Vec::with_capacity(ranked.len());

    for &d in &ranked {
        let mut best: Option<(usize, f64)> = None;
        if let Some(det) = &dets[d] {
            for (g, gt) in gts.iter().enumerate() {
                let Some(gt) = gt else { continue };
                if gt_matched[g] {
                    continue;
                }
                let iou = rotated_iou(det, gt);
                if best.is_none_or(|(_, b)| iou > b) {
                    best = Some((g, iou));
                }
            }
        }
        let hit = best.filter(|&(g, iou)| {
            let (det, gt) = (dets[d].as_ref(), gts[g].as_ref());
            match (det, gt) {
                (Some(det), Some(gt)) => {
                    let angle = angle_difference(det.theta(), gt.theta()).to_degrees();
                    cfg.accepts(iou, angle)
                }
                _ => false,
            }
        });
        match hit {
            Some((g, _)) => {
                gt_matched[g] = true;
                is_tp.push(true);
                matched_gt.push(Some(g));
            }
            None => {
                is_tp.push(false);
                matched_gt.push(None);
            }
        }
    }

    let tp = is_tp.iter().filter(|&&t| t).count();
    MatchResult {
        fp: ranked.len() - tp,
        fn_: gts.len() - tp,
        tp,
        ranked,
        is_tp,
        matched_gt,
        gt_matched,
    }
}

/// Matches one image's detections against its ground truths.
///
/// All records must carry the same class label.
pub fn match_detections(
    dets: &[DetectionRecord],
    gts: &[AnnotationRecord],
    cfg: &EvalConfig,
) -> Result<MatchResult> {
    let mut labels = dets
        .iter()
        .map(|d| d.label.as_str())
        .chain(gts.iter().map(|g| g.label.as_str()));
    if let Some(first) = labels.next() {
        if let Some(other) = labels.find(|l| *l != first) {
            return Err(Error::ContractViolation(format!(
                "records mix classes {first:?} and {other:?}"
            )));
        }
    }
    let det_boxes: Vec<_> = dets.iter().map(|d| prepare(&d.quad)).collect();
    let scores: Vec<f64> = dets.iter().map(|d| d.score).collect();
    let gt_boxes: Vec<_> = gts.iter().map(|g| prepare(&g.quad)).collect();
    Ok(match_prepared(&det_boxes, &scores, &gt_boxes, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Precision/recall after each detection of a global descending-score sweep.
///
/// `matches` holds `(score, is_tp)` for every detection; equal scores keep
/// their input order. With no ground truths, recall is reported as 0.
pub fn pr_curve(matches: &[(f64, bool)], total_gt: usize) -> Vec<PrPoint> {
    let scores: Vec<f64> = matches.iter().map(|m| m.0).collect();
    let mut tp = 0usize;
    rank(&scores)
        .into_iter()
        .enumerate()
        .map(|(k, i)| {
            if matches[i].1 {
                tp += 1;
            }
            PrPoint {
                recall: if total_gt == 0 {
                    0.0
                } else {
                    tp as f64 / total_gt as f64
                },
                precision: tp as f64 / (k + 1) as f64,
            }
        })
        .collect()
}

/// Mean over recall levels 0.0, 0.1, …, 1.0 of the best precision reached
/// at or beyond that recall.
pub fn average_precision_11pt(curve: &[PrPoint]) -> f64 {
    (0..=10)
        .map(|i| {
            let r = i as f64 / 10.0;
            curve
                .iter()
                .filter(|p| p.recall >= r)
                .map(|p| p.precision)
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / 11.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    pub label: String,
    pub ap: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub num_gt: usize,
    pub num_det: usize,
    pub pr: Vec<PrPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub name: String,
    pub iou_threshold: f64,
    pub angle_threshold: f64,
    /// Mean of the per-class APs.
    pub ap: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub num_gt: usize,
    pub num_det: usize,
    pub classes: Vec<ClassResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tool_version: String,
    pub num_images: usize,
    pub results: Vec<ConfigResult>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn get(&self, name: &str) -> Option<&ConfigResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn ap(&self, preset: Preset) -> Option<f64> {
        self.get(&preset.config().name).map(|r| r.ap)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

struct PreparedImage {
    dets: Vec<Option<OrientedBox>>,
    scores: Vec<f64>,
    gts: Vec<Option<OrientedBox>>,
}

/// Evaluates detections against ground truths for each config.
///
/// Images are visited in id order; detections on images without ground
/// truth are false positives. Matching only pairs records of the same
/// label and the reported AP is the mean over labels.
pub fn evaluate(
    dets_by_image: &BTreeMap<String, Vec<DetectionRecord>>,
    gts_by_image: &BTreeMap<String, Vec<AnnotationRecord>>,
    configs: &[EvalConfig],
) -> EvalReport {
    let images: BTreeSet<&String> = dets_by_image.keys().chain(gts_by_image.keys()).collect();
    let labels: BTreeSet<&str> = dets_by_image
        .values()
        .flat_map(|v| v.iter().map(|d| d.label.as_str()))
        .chain(
            gts_by_image
                .values()
                .flat_map(|v| v.iter().map(|g| g.label.as_str())),
        )
        .collect();

    // (label, image) groups in deterministic order
    let groups: Vec<(&str, PreparedImage)> = labels
        .iter()
        .flat_map(|&label| images.iter().map(move |&img| (label, img)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(label, img)| {
            let dets: Vec<&DetectionRecord> = dets_by_image
                .get(img)
                .into_iter()
                .flatten()
                .filter(|d| d.label == label)
                .collect();
            let gts: Vec<&AnnotationRecord> = gts_by_image
                .get(img)
                .into_iter()
                .flatten()
                .filter(|g| g.label == label)
                .collect();
            (
                label,
                PreparedImage {
                    dets: dets.iter().map(|d| prepare(&d.quad)).collect(),
                    scores: dets.iter().map(|d| d.score).collect(),
                    gts: gts.iter().map(|g| prepare(&g.quad)).collect(),
                },
            )
        })
        .collect();

    let results = configs
        .iter()
        .map(|cfg| {
            let matched: Vec<(&str, &PreparedImage, MatchResult)> = groups
                .par_iter()
                .map(|(label, p)| (*label, p, match_prepared(&p.dets, &p.scores, &p.gts, cfg)))
                .collect();
            let classes: Vec<ClassResult> = labels
                .iter()
                .map(|&label| {
                    let mut sweep = Vec::new();
                    let (mut tp, mut fp, mut fn_, mut num_gt) = (0, 0, 0, 0);
                    for (_, p, m) in matched.iter().filter(|(l, _, _)| *l == label) {
                        sweep.extend(
                            m.ranked
                                .iter()
                                .zip(&m.is_tp)
                                .map(|(&d, &t)| (p.scores[d], t)),
                        );
                        tp += m.tp;
                        fp += m.fp;
                        fn_ += m.fn_;
                        num_gt += p.gts.len();
                    }
                    let pr = pr_curve(&sweep, num_gt);
                    ClassResult {
                        label: label.to_string(),
                        ap: average_precision_11pt(&pr),
                        tp,
                        fp,
                        fn_,
                        num_gt,
                        num_det: sweep.len(),
                        pr,
                    }
                })
                .collect();
            let ap = if classes.is_empty() {
                0.0
            } else {
                classes.iter().map(|c| c.ap).sum::<f64>() / classes.len() as f64
            };
            ConfigResult {
                name: cfg.name.clone(),
                iou_threshold: cfg.iou_threshold,
                angle_threshold: cfg.angle_threshold,
                ap,
                tp: classes.iter().map(|c| c.tp).sum(),
                fp: classes.iter().map(|c| c.fp).sum(),
                fn_: classes.iter().map(|c| c.fn_).sum(),
                num_gt: classes.iter().map(|c| c.num_gt).sum(),
                num_det: classes.iter().map(|c| c.num_det).sum(),
                classes,
            }
        })
        .collect();

    EvalReport {
        tool_version: crate::VERSION.to_string(),
        num_images: images.len(),
        results,
        warnings: Vec::new(),
    }
}

/// Rotated-IoU regression loss, `1 - IoU`.
pub fn riou_loss(p: &OrientedBox, g: &OrientedBox) -> f64 {
    1.0 - rotated_iou(p, g)
}

/// Plain absolute angle difference in radians.
///
/// This is deliberately *not* circular: `(-179°, 179°)` gives 358°, not 2°.
/// Use [`angle_difference`] when comparing head directions.
pub fn angle_l1_loss(theta_p: f64, theta_g: f64) -> Result<f64> {
    let range = -std::f64::consts::PI..std::f64::consts::PI;
    for t in [theta_p, theta_g] {
        if !range.contains(&t) {
            return Err(Error::ContractViolation(format!(
                "angle {t} outside [-pi, pi)"
            )));
        }
    }
    Ok((theta_p - theta_g).abs())
}
