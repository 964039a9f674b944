//! Rotation of images and their annotations without cropping.
//!
//! A plain rotation about the image center keeps the canvas size and cuts
//! off whatever rotates past the border, tables included. Here the canvas is
//! grown to the rotated image's bounding box and the matrix translated so
//! the rotated content is centered in it: for a `w × h` image rotated by
//! `phi`, the canvas becomes `⌈h·|sin| + w·|cos|⌉ × ⌈h·|cos| + w·|sin|⌉`.
//!
//! Annotation corners go through the same matrix in their stored order, so
//! corner `A` stays first and the head direction rotates with the content:
//! `theta' = theta - phi`.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::AnnotationRecord;
use crate::geometry::{Point, QuadBox};
use crate::raster::RasterImage;

/// 2×3 matrix mapping `(x, y)` to `(m00·x + m01·y + m02, m10·x + m11·y + m12)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub m: [[f64; 3]; 2],
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };

    pub fn apply(&self, p: Point) -> Point {
        let m = &self.m;
        Point::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Result<AffineTransform> {
        let det = self.determinant();
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(Error::ContractViolation(format!(
                "affine transform is singular (det = {det:e})"
            )));
        }
        let [[a, b, tx], [c, d, ty]] = self.m;
        let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
        Ok(AffineTransform {
            m: [
                [ia, ib, -(ia * tx + ib * ty)],
                [ic, id, -(ic * tx + id * ty)],
            ],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanvasSize {
    pub width: u32,
    pub height: u32,
}

impl CanvasSize {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidValue(format!(
                "canvas {width}x{height} must be positive"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn of(image: &RasterImage) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
        }
    }

    /// Whether `p` lies in `[0, width] × [0, height]` up to `tol` pixels.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= -tol
            && p.y >= -tol
            && p.x <= self.width as f64 + tol
            && p.y <= self.height as f64 + tol
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
fn sin_cos_deg(phi: f64) -> (f64, f64) {
    let r = phi.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}

/// Rotation about `center` by `phi` degrees, counterclockwise on screen.
pub fn rotation_matrix(center: Point, phi: f64) -> AffineTransform {
    let (beta, alpha) = sin_cos_deg(phi);
    let (cx, cy) = (center.x, center.y);
    AffineTransform {
        m: [
            [alpha, beta, (1.0 - alpha) * cx - beta * cy],
            [-beta, alpha, beta * cx + (1.0 - alpha) * cy],
        ],
    }
}

/// Grows the canvas of a `w × h` image so a rotation about its center keeps
/// every source pixel, and shifts the translation to center the result.
pub fn adapt_bounds(t: &AffineTransform, w: u32, h: u32) -> (AffineTransform, CanvasSize) {
    let cos = t.m[0][0].abs();
    let sin = t.m[0][1].abs();
    let (wf, hf) = (w as f64, h as f64);
    // the slack keeps rounding noise from adding a whole pixel
    let grow = |x: f64| ((x - 1e-9).ceil().max(1.0)) as u32;
    let new_w = grow(hf * sin + wf * cos);
    let new_h = grow(hf * cos + wf * sin);
    let mut out = *t;
    out.m[0][2] += (new_w as f64 - wf) * 0.5;
    out.m[1][2] += (new_h as f64 - hf) * 0.5;
    (
        out,
        CanvasSize {
            width: new_w,
            height: new_h,
        },
    )
}

/// Adapted rotation of a `w × h` image by `phi` degrees about its center.
pub fn bounded_rotation(w: u32, h: u32, phi: f64) -> (AffineTransform, CanvasSize) {
    let center = Point::new(w as f64 / 2.0, h as f64 / 2.0);
    adapt_bounds(&rotation_matrix(center, phi), w, h)
}

pub fn apply_to_points(t: &AffineTransform, points: &[Point]) -> Vec<Point> {
    points.iter().map(|&p| t.apply(p)).collect()
}

pub fn apply_to_quad(t: &AffineTransform, q: &QuadBox) -> QuadBox {
    QuadBox::new(q.corners.map(|p| t.apply(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Bilinear,
    Nearest,
}

/// Inverse-mapping warp.
///
/// Each destination pixel center is mapped back through `t` and sampled
/// from the source; pixel `(i, j)` covers `[i, i+1) × [j, j+1)` so its center
/// is `(i + 0.5, j + 0.5)`. Points outside the source rectangle take `fill`
/// (only its first component for grayscale images).
pub fn warp_image(
    src: &RasterImage,
    t: &AffineTransform,
    canvas: CanvasSize,
    fill: [u8; 3],
    interpolation: Interpolation,
) -> Result<RasterImage> {
    let inv = t.inverse()?;
    let ch = src.channels() as usize;
    let mut out = RasterImage::filled(canvas.width, canvas.height, src.channels(), fill)?;
    let (sw, sh) = (src.width() as f64, src.height() as f64);
    let (wi, hi) = (src.width() as i64, src.height() as i64);
    let data = src.pixels();
    let at = |x: i64, y: i64, c: usize| -> f64 {
        let x = x.clamp(0, wi - 1) as usize;
        let y = y.clamp(0, hi - 1) as usize;
        data[(y * wi as usize + x) * ch + c] as f64
    };

    let row_len = canvas.width as usize * ch;
    let dst = out.pixels_mut();
    for j in 0..canvas.height as usize {
        let row = &mut dst[j * row_len..(j + 1) * row_len];
        for i in 0..canvas.width as usize {
            let p = inv.apply(Point::new(i as f64 + 0.5, j as f64 + 0.5));
            if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= sw && p.y <= sh) {
                continue;
            }
            let px = &mut row[i * ch..(i + 1) * ch];
            match interpolation {
                Interpolation::Nearest => {
                    let x = (p.x.floor() as i64).min(wi - 1);
                    let y = (p.y.floor() as i64).min(hi - 1);
                    for (c, v) in px.iter_mut().enumerate() {
                        *v = at(x, y, c) as u8;
                    }
                }
                Interpolation::Bilinear => {
                    let u = p.x - 0.5;
                    let v = p.y - 0.5;
                    let x0 = u.floor();
                    let y0 = v.floor();
                    let (fx, fy) = (u - x0, v - y0);
                    let (x0, y0) = (x0 as i64, y0 as i64);
                    for (c, out_v) in px.iter_mut().enumerate() {
                        let top = at(x0, y0, c) * (1.0 - fx) + at(x0 + 1, y0, c) * fx;
                        let bottom = at(x0, y0 + 1, c) * (1.0 - fx) + at(x0 + 1, y0 + 1, c) * fx;
                        let val = top * (1.0 - fy) + bottom * fy;
                        *out_v = val.round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Rotation angle and warp settings for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    /// Degrees; positive turns content counterclockwise on screen.
    pub phi: f64,
    pub fill: [u8; 3],
    pub interpolation: Interpolation,
}

impl RotationSpec {
    pub fn new(phi: f64) -> Self {
        Self {
            phi,
            fill: [255; 3],
            interpolation: Interpolation::Bilinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotatedSample {
    pub image: RasterImage,
    pub annotations: Vec<AnnotationRecord>,
    pub transform: AffineTransform,
    pub canvas: CanvasSize,
    pub phi: f64,
}

/// Maps every annotation's corners through `t`, keeping corner order.
pub fn rotate_annotations(
    records: &[AnnotationRecord],
    t: &AffineTransform,
) -> Vec<AnnotationRecord> {
    records
        .iter()
        .map(|r| AnnotationRecord {
            quad: apply_to_quad(t, &r.quad),
            ..r.clone()
        })
        .collect()
}

/// Rotates an image and its annotations together on an adapted canvas.
pub fn rotate_sample(
    image: &RasterImage,
    annotations: &[AnnotationRecord],
    spec: &RotationSpec,
) -> Result<RotatedSample> {
    if !spec.phi.is_finite() {
        return Err(Error::InvalidValue(format!(
            "rotation angle {} is not finite",
            spec.phi
        )));
    }
    let (transform, canvas) = bounded_rotation(image.width(), image.height(), spec.phi);
    let rotated = warp_image(image, &transform, canvas, spec.fill, spec.interpolation)?;
    Ok(RotatedSample {
        image: rotated,
        annotations: rotate_annotations(annotations, &transform),
        transform,
        canvas,
        phi: spec.phi,
    })
}

/// Closed range of rotation angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub lo: f64,
    pub hi: f64,
}

impl AngleRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidValue(format!(
                "invalid angle range [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, phi: f64) -> bool {
        phi >= self.lo && phi <= self.hi
    }
}

impl Default for AngleRange {
    fn default() -> Self {
        Self {
            lo: -180.0,
            hi: 180.0,
        }
    }
}

impl FromStr for AngleRange {
    type Err = Error;

    /// Parses `lo:hi` in degrees, e.g. `-180:180`.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidValue(format!("range {s:?} is not lo:hi")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidValue(format!("range bound {t:?} is not a number")))
        };
        AngleRange::new(num(lo)?, num(hi)?)
    }
}

/// Draws a rotation angle uniformly from `range` with a generator seeded by
/// `seed`.
pub fn sample_angle(seed: u64, range: AngleRange) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.random_range(range.lo..=range.hi)
}

/// Random rotation augmentation: draws `phi` from `range` and applies
/// [`rotate_sample`]. The drawn angle is returned in the sample.
pub fn random_rotate(
    image: &RasterImage,
    annotations: &[AnnotationRecord],
    seed: u64,
    range: AngleRange,
    fill: [u8; 3],
    interpolation: Interpolation,
) -> Result<RotatedSample> {
    let range = AngleRange::new(range.lo, range.hi)?;
    let spec = RotationSpec {
        phi: sample_angle(seed, range),
        fill,
        interpolation,
    };
    rotate_sample(image, annotations, &spec)
}
