//! Command implementations behind the `tabrot` binary.

pub mod args;
pub mod render;

use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use image::{ImageFormat, ImageReader};
use serde_json::json;
use tabrot_core::formats::{parse_dota_file, parse_predictions, validate_annotations};
use tabrot_core::pipeline::{
    convert_dataset, evaluate_run, generate_rotated_dataset, GenerateConfig,
};
use tabrot_core::transform::Interpolation;
use tabrot_core::{CanvasSize, EvalConfig, Preset};

use args::{Cli, Command, ConvertArgs, EvalArgs, RenderArgs, RotateArgs, ValidateArgs};
use render::{render_svg, Backdrop, Overlay, Style};

/// Exit status for inputs that fail validation or a metric threshold.
pub const EXIT_FAILURE: u8 = 1;
/// Exit status for usage and I/O errors.
pub const EXIT_USAGE_OR_IO: u8 = 2;

/// Maps an error to the process exit status: I/O trouble is 2, problems
/// with the data itself are 1.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<tabrot_core::Error>() {
            return if e.is_io() {
                EXIT_USAGE_OR_IO
            } else {
                EXIT_FAILURE
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<image::ImageError>().is_some()
        {
            return EXIT_USAGE_OR_IO;
        }
    }
    EXIT_FAILURE
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<ExitCode> {
    match cli.command {
        Command::Convert(a) => convert(a, out),
        Command::Rotate(a) => rotate(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Render(a) => render(a, out),
    }
}

fn convert(a: ConvertArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let stats = convert_dataset(&a.xml, a.corrections.as_deref(), &a.out)?;
    writeln!(
        out,
        "converted {} images, {} instances into {}",
        stats.images,
        stats.instances,
        a.out.display()
    )?;
    Ok(ExitCode::SUCCESS)
}

fn rotate(a: RotateArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let cfg = GenerateConfig {
        seed: a.seed,
        range: a.range,
        fill: a.fill.0,
        interpolation: if a.nearest {
            Interpolation::Nearest
        } else {
            Interpolation::Bilinear
        },
        copies: a.copies as usize,
        split: a.split,
        workers: a.workers,
    };
    let manifest = generate_rotated_dataset(&a.images, &a.ann, &a.out, &cfg)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    writeln!(
        out,
        "rotated {} samples into {} ({} warnings)",
        manifest.entries.len(),
        a.out.display(),
        manifest.warning_count
    )?;
    Ok(ExitCode::SUCCESS)
}

fn annotation_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        let meta = fs::metadata(p).with_context(|| format!("cannot read {}", p.display()))?;
        if meta.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            found.retain(|f| f.extension().is_some_and(|e| e == "txt") && f.is_file());
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn image_size(path: &Path) -> Result<(u32, u32)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let reader = ImageReader::new(Cursor::new(&bytes)).with_guessed_format()?;
    let dims = reader
        .into_dimensions()
        .with_context(|| format!("cannot decode {}", path.display()))?;
    Ok(dims)
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let canvas = match (&a.canvas, &a.image) {
        (Some(c), _) => Some(CanvasSize::new(c.width, c.height)?),
        (None, Some(img)) => {
            let (w, h) = image_size(img)?;
            Some(CanvasSize::new(w, h)?)
        }
        (None, None) => None,
    };
    let files = annotation_files(&a.paths)?;

    let mut failed = false;
    let mut entries = Vec::new();
    for f in &files {
        let text = fs::read_to_string(f).with_context(|| format!("cannot read {}", f.display()))?;
        match parse_dota_file(&text) {
            Ok(records) => {
                let report = validate_annotations(&records, canvas);
                let bad: Vec<_> = report.records.iter().filter(|r| !r.is_ok()).collect();
                writeln!(
                    out,
                    "{}: {} records, {} with findings",
                    f.display(),
                    records.len(),
                    bad.len()
                )?;
                for r in &bad {
                    for finding in &r.findings {
                        writeln!(
                            out,
                            "  record {}: {}: {}",
                            r.index,
                            finding.kind.as_str(),
                            finding.detail
                        )?;
                    }
                }
                failed |= !bad.is_empty();
                entries.push(json!({"path": f, "error": null, "records": report.records}));
            }
            Err(e) => {
                writeln!(out, "{}: unparseable: {e}", f.display())?;
                failed = true;
                entries.push(json!({"path": f, "error": e.to_string(), "records": []}));
            }
        }
    }
    if let Some(path) = &a.json {
        let doc = json!({"ok": !failed, "files": entries});
        fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(if failed {
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    })
}

fn eval_configs(a: &EvalArgs) -> Result<Vec<EvalConfig>> {
    let mut configs: Vec<EvalConfig> = a.preset.iter().map(|p| p.config()).collect();
    if let (Some(iou), Some(angle)) = (a.iou, a.angle) {
        configs.push(EvalConfig::custom(iou, angle)?);
    }
    if configs.is_empty() {
        configs = [Preset::Ap50T90, Preset::Ap75T40, Preset::Ap50T360]
            .iter()
            .map(|p| p.config())
            .collect();
    }
    let mut seen = std::collections::HashSet::new();
    configs.retain(|c| seen.insert(c.name.clone()));
    Ok(configs)
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let configs = eval_configs(&a)?;
    let report = evaluate_run(&a.pred, &a.gt, &configs, a.json.as_deref())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    writeln!(out, "images: {}", report.num_images)?;
    writeln!(
        out,
        "{:<16} {:>6} {:>7} {:>7} {:>7}",
        "config", "AP", "TP", "FP", "FN"
    )?;
    for r in &report.results {
        writeln!(
            out,
            "{:<16} {:>6.3} {:>7} {:>7} {:>7}",
            r.name, r.ap, r.tp, r.fp, r.fn_
        )?;
    }
    let below = a
        .fail_below
        .is_some_and(|t| report.results.iter().any(|r| r.ap < t));
    Ok(if below {
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    })
}

fn render(a: RenderArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let bytes = fs::read(&a.image).with_context(|| format!("cannot read {}", a.image.display()))?;
    let format = image::guess_format(&bytes)
        .with_context(|| format!("unknown image format: {}", a.image.display()))?;
    let mime = match format {
        ImageFormat::Png => "image/png",
        ImageFormat::Jpeg => "image/jpeg",
        other => bail!("unsupported image format {other:?}: {}", a.image.display()),
    };
    let (width, height) = image_size(&a.image)?;

    let overlays: Vec<Overlay> = if let Some(ann) = &a.ann {
        let text =
            fs::read_to_string(ann).with_context(|| format!("cannot read {}", ann.display()))?;
        parse_dota_file(&text)
            .with_context(|| format!("in {}", ann.display()))?
            .into_iter()
            .map(|r| Overlay {
                quad: r.quad,
                label: r.label,
                score: None,
            })
            .collect()
    } else if let Some(pred) = &a.pred {
        let id = match &a.image_id {
            Some(id) => id.clone(),
            None => a
                .image
                .file_stem()
                .and_then(|s| s.to_str())
                .context("image path has no usable stem; pass --image-id")?
                .to_string(),
        };
        let text =
            fs::read_to_string(pred).with_context(|| format!("cannot read {}", pred.display()))?;
        parse_predictions(&text)
            .with_context(|| format!("in {}", pred.display()))?
            .into_iter()
            .filter(|(img, _)| *img == id)
            .map(|(_, d)| Overlay {
                quad: d.quad,
                label: d.label,
                score: Some(d.score),
            })
            .collect()
    } else {
        Vec::new()
    };

    let style = Style {
        head_color: a.head_color,
        tail_color: a.tail_color,
        side_color: a.side_color,
        stroke_width: a.stroke_width,
    };
    let svg = render_svg(
        &Backdrop {
            bytes: &bytes,
            mime,
            width,
            height,
        },
        &overlays,
        &style,
    );
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(&a.out, svg).with_context(|| format!("cannot write {}", a.out.display()))?;
    writeln!(
        out,
        "drew {} boxes into {}",
        overlays.len(),
        a.out.display()
    )?;
    Ok(ExitCode::SUCCESS)
}
