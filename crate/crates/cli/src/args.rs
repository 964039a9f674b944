use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use tabrot_core::{AngleRange, Preset};

#[derive(Debug, Parser)]
#[command(
    name = "tabrot",
    version,
    about = "Head/tail-aware rotated table annotation tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert ground-truth XML into head-first DOTA text files.
    Convert(ConvertArgs),
    /// Generate a randomly rotated dataset with adaptively bounded canvases.
    Rotate(RotateArgs),
    /// Check annotation files for winding, shape and bounds problems.
    Validate(ValidateArgs),
    /// Score predictions with angle-constrained AP.
    Eval(EvalArgs),
    /// Draw annotations or predictions over an image as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Directory of XML ground-truth files.
    #[arg(long)]
    pub xml: PathBuf,
    /// Output directory for the text annotations.
    #[arg(long)]
    pub out: PathBuf,
    /// Sidecar with `image_id record_index shift` lines.
    #[arg(long)]
    pub corrections: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[arg(long)]
    pub images: PathBuf,
    /// Annotation directory with one text file per image stem.
    #[arg(long)]
    pub ann: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rotation range in degrees, `lo:hi`.
    #[arg(long, default_value = "-180:180", allow_hyphen_values = true)]
    pub range: AngleRange,
    /// Canvas fill colour, `r,g,b`.
    #[arg(long, default_value = "255,255,255")]
    pub fill: Rgb,
    /// Nearest-neighbour sampling instead of bilinear.
    #[arg(long)]
    pub nearest: bool,
    /// Rotated copies per source image.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub copies: u32,
    #[arg(long, default_value = "train", value_parser = parse_split)]
    pub split: String,
    /// Worker threads; 0 picks one per core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Annotation files or directories of `*.txt` files.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Canvas for the bounds check, `WxH`.
    #[arg(long, conflicts_with = "image")]
    pub canvas: Option<Canvas>,
    /// Take the bounds canvas from this image.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Write the findings as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth annotation directory.
    #[arg(long)]
    pub gt: PathBuf,
    /// Metric preset; repeatable. Defaults to all three.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Vec<Preset>,
    /// IoU threshold of an extra custom config.
    #[arg(long, requires = "angle", value_parser = parse_unit)]
    pub iou: Option<f64>,
    /// Angle threshold in degrees of an extra custom config.
    #[arg(long, requires = "iou", value_parser = parse_angle_threshold)]
    pub angle: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Exit with status 1 when any AP is below this value.
    #[arg(long, value_parser = parse_unit)]
    pub fail_below: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Annotation file to draw.
    #[arg(long, conflicts_with = "pred", required_unless_present = "pred")]
    pub ann: Option<PathBuf>,
    /// Prediction file to draw; scores are shown next to each box.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Image id to pick from the prediction file; defaults to the image stem.
    #[arg(long, requires = "pred")]
    pub image_id: Option<String>,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "#e6194b", value_parser = parse_color)]
    pub head_color: String,
    #[arg(long, default_value = "#4363d8", value_parser = parse_color)]
    pub tail_color: String,
    #[arg(long, default_value = "#ffe119", value_parser = parse_color)]
    pub side_color: String,
    #[arg(long, default_value_t = 3.0, value_parser = parse_width)]
    pub stroke_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub [u8; 3]);

impl FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [r, g, b] = parts[..] else {
            return Err(format!("expected r,g,b, got {s:?}"));
        };
        let channel = |c: &str| {
            c.parse::<u8>()
                .map_err(|_| format!("channel {c:?} is not in 0..=255"))
        };
        Ok(Rgb([channel(r)?, channel(g)?, channel(b)?]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

impl FromStr for Canvas {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
        let dim = |d: &str| match d.trim().parse::<u32>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(format!("dimension {d:?} is not a positive integer")),
        };
        Ok(Canvas {
            width: dim(w)?,
            height: dim(h)?,
        })
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

fn parse_unit(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("{s:?} is not a number in [0, 1]")),
    }
}

fn parse_angle_threshold(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=360.0).contains(&v) => Ok(v),
        _ => Err(format!("{s:?} is not an angle in [0, 360]")),
    }
}

fn parse_width(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("{s:?} is not a positive width")),
    }
}

/// Hex colours or plain colour names; anything else could break the markup.
fn parse_color(s: &str) -> Result<String, String> {
    let hex = s.strip_prefix('#').is_some_and(|h| {
        matches!(h.len(), 3 | 4 | 6 | 8) && h.chars().all(|c| c.is_ascii_hexdigit())
    });
    let name = !s.is_empty() && s.chars().all(|c| c.is_ascii_alphabetic());
    if hex || name {
        Ok(s.to_string())
    } else {
        Err(format!("{s:?} is not a #hex colour or colour name"))
    }
}

fn parse_split(s: &str) -> Result<String, String> {
    if !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        Ok(s.to_string())
    } else {
        Err(format!("split name {s:?} must be alphanumeric"))
    }
}
