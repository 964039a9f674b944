//! Oriented boxes with head/tail semantics.
//!
//! A table box is stored either as four labelled corners ([`QuadBox`]) or as
//! center, size and angle ([`OrientedBox`]). Corner `A` is the top-left corner
//! of the table *as read*, so the edge `A→B` is the table head and `D→C` its
//! tail. Corners run clockwise on screen (y grows downward), which makes the
//! shoelace sum positive.
//!
//! The angle `theta` is the direction of the head edge `A→B`, measured from
//! the +x axis towards +y, and always lies in `[-π, π)`. Unlike the 180°
//! conventions used by most rotated detectors it tells the head from the
//! tail: a box and the same box with `theta + π` cover the same pixels but
//! point in opposite directions.

mod convention;
mod min_rect;

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use convention::{convert_convention, AngleConvention};
pub use min_rect::{convex_hull, min_area_rect};

/// Relative tolerance used when deciding whether a quad is a rectangle.
pub const RECT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;

    fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }
}

impl Sub for Point {
    type Output = Point;

    fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;

    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Normalizes an angle in radians to `[-π, π)`.
pub fn wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::InvalidValue(format!("angle {theta} is not finite")));
    }
    Ok(wrap(theta))
}

pub(crate) fn wrap(theta: f64) -> f64 {
    let r = (theta + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Circular distance between two angles, in `[0, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}

/// Four labelled corners `A, B, C, D`.
///
/// The type does not enforce the clockwise/convex invariants so that
/// annotations can be loaded as written and then checked with
/// [`crate::formats::validate_annotations`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadBox {
    pub corners: [Point; 4],
}

impl QuadBox {
    pub const fn new(corners: [Point; 4]) -> Self {
        Self { corners }
    }

    /// Builds a quad from `[xA, yA, xB, yB, xC, yC, xD, yD]`.
    pub fn from_coords(c: [f64; 8]) -> Self {
        Self::new([
            Point::new(c[0], c[1]),
            Point::new(c[2], c[3]),
            Point::new(c[4], c[5]),
            Point::new(c[6], c[7]),
        ])
    }

    pub fn coords(&self) -> [f64; 8] {
        let [a, b, c, d] = self.corners;
        [a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y]
    }

    pub fn is_finite(&self) -> bool {
        self.corners.iter().all(|p| p.is_finite())
    }

    /// Shoelace sum; positive when `ABCD` runs clockwise on screen.
    pub fn signed_area(&self) -> f64 {
        let c = &self.corners;
        let twice: f64 = (0..4).map(|i| c[i].cross(c[(i + 1) % 4])).sum();
        twice / 2.0
    }

    /// Relabels the corners so that the new `A` is the old corner at index
    /// `k mod 4`; cyclic order is kept.
    pub fn cyclic_shift(&self, k: i64) -> QuadBox {
        let k = k.rem_euclid(4) as usize;
        QuadBox::new(std::array::from_fn(|i| self.corners[(i + k) % 4]))
    }

    /// Same corners in the opposite winding, keeping `A` first.
    pub fn reversed(&self) -> QuadBox {
        let [a, b, c, d] = self.corners;
        QuadBox::new([a, d, c, b])
    }

    pub fn centroid(&self) -> Point {
        let s = self
            .corners
            .iter()
            .fold(Point::default(), |acc, &p| acc + p);
        s * 0.25
    }

    /// True when every turn has the same sign and the quad has nonzero area.
    pub fn is_convex(&self) -> bool {
        let c = &self.corners;
        let scale = self.edge_scale();
        let eps = 1e-12 * scale * scale;
        let mut pos = false;
        let mut neg = false;
        for i in 0..4 {
            let e1 = c[(i + 1) % 4] - c[i];
            let e2 = c[(i + 2) % 4] - c[(i + 1) % 4];
            let z = e1.cross(e2);
            if z > eps {
                pos = true;
            } else if z < -eps {
                neg = true;
            }
        }
        pos != neg
    }

    /// Axis-aligned bounds as `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.corners {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// The axis-aligned box around this quad, as a clockwise quad starting
    /// at its top-left corner.
    pub fn axis_aligned(&self) -> QuadBox {
        let (lo, hi) = self.bounds();
        QuadBox::new([lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)])
    }

    fn edge_scale(&self) -> f64 {
        let c = &self.corners;
        (0..4)
            .map(|i| c[(i + 1) % 4].distance(c[i]))
            .fold(0.0, f64::max)
    }

    /// Checks that the quad is a rectangle: opposite edges of equal length
    /// and every corner a right angle, both within [`RECT_TOLERANCE`]
    /// relative.
    pub fn check_rectangle(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidValue("quad has non-finite corner".into()));
        }
        let c = &self.corners;
        let edges: [Point; 4] = std::array::from_fn(|i| c[(i + 1) % 4] - c[i]);
        let lens = edges.map(Point::norm);
        if lens.contains(&0.0) {
            return Err(Error::Degenerate("quad has a zero-length edge".into()));
        }
        for (i, j) in [(0, 2), (1, 3)] {
            let (a, b) = (lens[i], lens[j]);
            if (a - b).abs() > RECT_TOLERANCE * a.max(b) {
                return Err(Error::NotRectangular(format!(
                    "opposite edges differ in length ({a} vs {b})"
                )));
            }
        }
        for i in 0..4 {
            let j = (i + 1) % 4;
            let cos = edges[i].dot(edges[j]) / (lens[i] * lens[j]);
            if cos.abs() > RECT_TOLERANCE {
                return Err(Error::NotRectangular(format!(
                    "corner {} is not a right angle (cos = {cos:e})",
                    ["B", "C", "D", "A"][i]
                )));
            }
        }
        Ok(())
    }

    /// Converts a rectangular quad to center/size/angle form.
    ///
    /// `w = |AB|`, `h = |BC|` and `theta` is the direction of `A→B`. Quads
    /// that are only approximately rectangular must go through
    /// [`min_area_rect`] instead.
    pub fn to_oriented(&self) -> Result<OrientedBox> {
        self.check_rectangle()?;
        let [a, b, c, _] = self.corners;
        let ab = b - a;
        let center = self.centroid();
        OrientedBox::new(
            center.x,
            center.y,
            ab.norm(),
            (c - b).norm(),
            ab.y.atan2(ab.x),
        )
    }
}

/// A rectangle as center, size and head direction.
///
/// `w` is the length of the head edge `A→B`, `h` the length of `B→C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl OrientedBox {
    /// Validates the size and wraps `theta` into `[-π, π)`.
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "center ({cx}, {cy}) is not finite"
            )));
        }
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return Err(Error::InvalidValue(format!(
                "box size {w}x{h} must be positive and finite"
            )));
        }
        Ok(Self {
            cx,
            cy,
            w,
            h,
            theta: wrap_angle(theta)?,
        })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_degrees(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Same box with its head direction changed.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.cx, self.cy, self.w, self.h, theta)
    }

    /// Corners `A, B, C, D` of the box.
    pub fn to_quad(&self) -> QuadBox {
        let (s, c) = self.theta.sin_cos();
        let (cx, cy) = (self.cx, self.cy);
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        QuadBox::new([
            Point::new(cx + hh * s - hw * c, cy - hh * c - hw * s),
            Point::new(cx + hh * s + hw * c, cy - hh * c + hw * s),
            Point::new(cx - hh * s + hw * c, cy + hh * c + hw * s),
            Point::new(cx - hh * s - hw * c, cy + hh * c - hw * s),
        ])
    }
}

/// Free-function form of [`OrientedBox::to_quad`].
pub fn rbox_to_qbox(b: &OrientedBox) -> QuadBox {
    b.to_quad()
}

/// Free-function form of [`QuadBox::to_oriented`].
pub fn qbox_to_rbox(q: &QuadBox) -> Result<OrientedBox> {
    q.to_oriented()
}

/// Oriented box for a quad that may be slightly off-rectangular: exact
/// conversion when the quad is a rectangle, otherwise its minimum-area
/// enclosing rectangle with `A` nearest the quad's first corner.
pub fn quad_to_box_lenient(q: &QuadBox) -> Result<OrientedBox> {
    match q.to_oriented() {
        Ok(b) => Ok(b),
        Err(Error::NotRectangular(_)) => min_area_rect(&q.corners, q.corners[0]),
        Err(e) => Err(e),
    }
}
