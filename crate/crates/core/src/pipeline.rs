//! Dataset-level workflows: ground-truth conversion, rotated dataset
//! generation and evaluation runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::{
    group_by_image, icdar_to_r360, parse_corrections, parse_dota_file, parse_icdar_xml_with,
    parse_predictions, validate_annotations, write_dota_file, AnnotationRecord, XmlSchema,
};
use crate::metrics::{evaluate, EvalConfig, EvalReport};
use crate::raster::RasterImage;
use crate::transform::{random_rotate, AngleRange, CanvasSize, Interpolation};

pub const MANIFEST_FILE: &str = "manifest.json";

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DatasetStats {
    pub images: usize,
    pub instances: usize,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn stem(path: &Path) -> Option<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
}

/// Files in `dir` whose extension (case-insensitive) is one of `exts`,
/// sorted by path.
fn list_files(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let matches = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| exts.iter().any(|x| x.eq_ignore_ascii_case(e)));
        if matches && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Loads every `*.txt` annotation file in `dir`, keyed by file stem.
pub fn load_annotation_dir(dir: &Path) -> Result<BTreeMap<String, Vec<AnnotationRecord>>> {
    list_files(dir, &["txt"])?
        .into_iter()
        .filter_map(|p| stem(&p).map(|s| (s, p)))
        .map(|(s, p)| {
            let recs = parse_dota_file(&read_to_string(&p)?).map_err(|e| e.in_file(&p))?;
            Ok((s, recs))
        })
        .collect()
}

/// Image and instance counts of an annotation directory.
pub fn dataset_stats(ann_dir: &Path) -> Result<DatasetStats> {
    let anns = load_annotation_dir(ann_dir)?;
    Ok(DatasetStats {
        images: anns.len(),
        instances: anns.values().map(Vec::len).sum(),
    })
}

/// Converts a directory of ground-truth XML files into head-first DOTA
/// text files, one per image.
pub fn convert_dataset(
    xml_dir: &Path,
    corrections: Option<&Path>,
    out_dir: &Path,
) -> Result<DatasetStats> {
    convert_dataset_with(xml_dir, corrections, out_dir, &XmlSchema::default())
}

/// [`convert_dataset`] with custom XML element names.
///
/// Every record must normalize and validate, and every correction must name
/// an existing record; otherwise nothing is written.
pub fn convert_dataset_with(
    xml_dir: &Path,
    corrections: Option<&Path>,
    out_dir: &Path,
    schema: &XmlSchema,
) -> Result<DatasetStats> {
    let mut fixes = match corrections {
        Some(p) => parse_corrections(&read_to_string(p)?).map_err(|e| e.in_file(p))?,
        None => Default::default(),
    };

    let mut outputs = Vec::new();
    let mut stats = DatasetStats::default();
    for path in list_files(xml_dir, &["xml"])? {
        let Some(id) = stem(&path) else { continue };
        let raw =
            parse_icdar_xml_with(&read_to_string(&path)?, schema).map_err(|e| e.in_file(&path))?;
        let records = raw
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let k = fixes.remove(&(id.clone(), i)).unwrap_or(0);
                icdar_to_r360(r, k)
                    .map_err(|e| Error::Validation(format!("record {i}: {e}")).in_file(&path))
            })
            .collect::<Result<Vec<_>>>()?;
        let report = validate_annotations(&records, None);
        if let Some((i, f)) = report.findings().next() {
            return Err(Error::Validation(format!(
                "record {i}: {}: {}",
                f.kind.as_str(),
                f.detail
            ))
            .in_file(&path));
        }
        stats.images += 1;
        stats.instances += records.len();
        outputs.push((id, records));
    }

    if !fixes.is_empty() {
        let mut unknown: Vec<String> = fixes.keys().map(|(id, i)| format!("{id}#{i}")).collect();
        unknown.sort();
        return Err(Error::Validation(format!(
            "corrections refer to unknown records: {}",
            unknown.join(", ")
        )));
    }

    create_dir(out_dir)?;
    for (id, records) in &outputs {
        write_file(&out_dir.join(format!("{id}.txt")), write_dota_file(records))?;
    }
    Ok(stats)
}

/// Per-sample seed derived from the global seed and the sample id, so the
/// drawn angle never depends on processing order.
pub fn derive_seed(global: u64, sample_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(sample_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub seed: u64,
    pub range: AngleRange,
    pub fill: [u8; 3],
    pub interpolation: Interpolation,
    /// Rotated copies per source image.
    pub copies: usize,
    /// Split name used in the output folder names.
    pub split: String,
    /// Worker threads; 0 uses the rayon default.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            range: AngleRange::default(),
            fill: [255; 3],
            interpolation: Interpolation::Bilinear,
            copies: 1,
            split: "train".into(),
            workers: 0,
        }
    }
}

/// Output folders for one split.
#[derive(Debug, Clone)]
pub struct SplitLayout {
    pub images: PathBuf,
    pub obbox: PathBuf,
    pub hbb: PathBuf,
}

impl SplitLayout {
    pub fn new(root: &Path, split: &str) -> Self {
        Self {
            images: root.join(format!("img_{split}")),
            obbox: root.join(format!("ann_{split}_obbox")),
            hbb: root.join(format!("ann_{split}_hbb")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source_id: String,
    pub output_id: String,
    pub seed: u64,
    pub phi: f64,
    pub canvas: CanvasSize,
    pub annotations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool_version: String,
    #[serde(flatten)]
    pub config: GenerateConfig,
    pub entries: Vec<ManifestEntry>,
    /// Stems present on only one side (image or annotation).
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
    pub warning_count: usize,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&read_to_string(path)?)?)
    }
}

struct Sample {
    source_id: String,
    output_id: String,
    seed: u64,
    image: PathBuf,
    annotations: PathBuf,
}

fn sample_output_name(stem: &str, copy: usize, copies: usize, phi: f64) -> String {
    if copies == 1 {
        format!("{stem}_rot{phi:.3}")
    } else {
        format!("{stem}_{copy}_rot{phi:.3}")
    }
}

fn process_sample(
    s: &Sample,
    cfg: &GenerateConfig,
    copies: usize,
    copy: usize,
    layout: &SplitLayout,
) -> Result<std::result::Result<(ManifestEntry, Vec<String>), String>> {
    let image = match RasterImage::load(&s.image) {
        Ok(i) => i,
        Err(e) => return Ok(Err(format!("{}: {e}", s.output_id))),
    };
    let records = match read_to_string(&s.annotations)
        .and_then(|t| parse_dota_file(&t).map_err(|e| e.in_file(&s.annotations)))
    {
        Ok(r) => r,
        Err(e) => return Ok(Err(format!("{}: {e}", s.output_id))),
    };
    let out = random_rotate(
        &image,
        &records,
        s.seed,
        cfg.range,
        cfg.fill,
        cfg.interpolation,
    )?;
    let name = sample_output_name(&s.source_id, copy, copies, out.phi);

    let mut warnings = Vec::new();
    let report = validate_annotations(&out.annotations, Some(out.canvas));
    for (i, f) in report.findings() {
        warnings.push(format!(
            "{name} record {i}: {}: {}",
            f.kind.as_str(),
            f.detail
        ));
    }

    out.image
        .save_png(&layout.images.join(format!("{name}.png")))?;
    write_file(
        &layout.obbox.join(format!("{name}.txt")),
        write_dota_file(&out.annotations),
    )?;
    let hbb: Vec<AnnotationRecord> = out
        .annotations
        .iter()
        .map(|r| AnnotationRecord {
            quad: r.quad.axis_aligned(),
            ..r.clone()
        })
        .collect();
    write_file(
        &layout.hbb.join(format!("{name}.txt")),
        write_dota_file(&hbb),
    )?;

    Ok(Ok((
        ManifestEntry {
            source_id: s.source_id.clone(),
            output_id: name,
            seed: s.seed,
            phi: out.phi,
            canvas: out.canvas,
            annotations: out.annotations.len(),
        },
        warnings,
    )))
}

/// Rotates every image/annotation pair by a random angle and writes the
/// rotated dataset plus `manifest.json` under `out_dir`.
///
/// Angles come from per-sample seeds derived from `cfg.seed` and the sample
/// id, so outputs are identical for any worker count. Unreadable inputs and
/// unmatched stems are skipped with a warning.
pub fn generate_rotated_dataset(
    images_dir: &Path,
    ann_dir: &Path,
    out_dir: &Path,
    cfg: &GenerateConfig,
) -> Result<DatasetManifest> {
    let range = AngleRange::new(cfg.range.lo, cfg.range.hi)?;
    if cfg.copies == 0 {
        return Err(Error::InvalidValue("copies must be at least 1".into()));
    }
    let copies = cfg.copies;

    let mut warnings = Vec::new();
    let mut images: BTreeMap<String, PathBuf> = BTreeMap::new();
    for p in list_files(images_dir, &IMAGE_EXTENSIONS)? {
        let Some(s) = stem(&p) else { continue };
        if images.contains_key(&s) {
            warnings.push(format!(
                "duplicate image stem {s}: ignoring {}",
                p.display()
            ));
            continue;
        }
        images.insert(s, p);
    }
    let anns: BTreeMap<String, PathBuf> = list_files(ann_dir, &["txt"])?
        .into_iter()
        .filter_map(|p| stem(&p).map(|s| (s, p)))
        .collect();

    let image_stems: BTreeSet<&String> = images.keys().collect();
    let ann_stems: BTreeSet<&String> = anns.keys().collect();
    let skipped: Vec<String> = image_stems
        .symmetric_difference(&ann_stems)
        .map(|s| s.to_string())
        .collect();
    for s in &skipped {
        let side = if images.contains_key(s) {
            "annotation"
        } else {
            "image"
        };
        warnings.push(format!("{s}: no matching {side}, skipped"));
    }

    let mut samples = Vec::new();
    for (s, image) in &images {
        let Some(annotations) = anns.get(s) else {
            continue;
        };
        for copy in 0..copies {
            let id = if copies == 1 {
                s.clone()
            } else {
                format!("{s}#{copy}")
            };
            samples.push((
                copy,
                Sample {
                    seed: derive_seed(cfg.seed, &id),
                    source_id: s.clone(),
                    output_id: id,
                    image: image.clone(),
                    annotations: annotations.clone(),
                },
            ));
        }
    }

    let layout = SplitLayout::new(out_dir, &cfg.split);
    for d in [&layout.images, &layout.obbox, &layout.hbb] {
        create_dir(d)?;
    }

    let cfg = GenerateConfig {
        range,
        ..cfg.clone()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidValue(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        samples
            .par_iter()
            .map(|(copy, s)| process_sample(s, &cfg, copies, *copy, &layout))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut entries = Vec::new();
    for r in results {
        match r {
            Ok((entry, w)) => {
                entries.push(entry);
                warnings.extend(w);
            }
            Err(w) => warnings.push(w),
        }
    }

    let manifest = DatasetManifest {
        tool_version: crate::VERSION.to_string(),
        config: GenerateConfig { workers: 0, ..cfg },
        entries,
        skipped,
        warning_count: warnings.len(),
        warnings,
    };
    write_file(
        &out_dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

/// Re-runs generation with the settings recorded in a manifest.
pub fn regenerate_from_manifest(
    manifest: &DatasetManifest,
    images_dir: &Path,
    ann_dir: &Path,
    out_dir: &Path,
    workers: usize,
) -> Result<DatasetManifest> {
    let cfg = GenerateConfig {
        workers,
        ..manifest.config.clone()
    };
    generate_rotated_dataset(images_dir, ann_dir, out_dir, &cfg)
}

/// Evaluates a prediction file against a directory of ground-truth
/// annotation files and optionally writes the report as JSON.
///
/// Predicted image ids with no ground-truth file are evaluated as images
/// without tables and listed in the report's warnings.
pub fn evaluate_run(
    pred_file: &Path,
    gt_dir: &Path,
    configs: &[EvalConfig],
    json_out: Option<&Path>,
) -> Result<EvalReport> {
    let preds = parse_predictions(&read_to_string(pred_file)?).map_err(|e| e.in_file(pred_file))?;
    let dets = group_by_image(preds);
    let gts = load_annotation_dir(gt_dir)?;
    let mut report = evaluate(&dets, &gts, configs);
    report.warnings = dets
        .keys()
        .filter(|id| !gts.contains_key(*id))
        .map(|id| format!("no ground truth for predicted image {id}; counted as false positives"))
        .collect();
    if let Some(path) = json_out {
        write_file(path, report.to_json()?)?;
    }
    Ok(report)
}
