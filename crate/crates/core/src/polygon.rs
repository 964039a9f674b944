//! Convex polygon clipping and rotated IoU.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, Point, QuadBox};

/// Points closer than this to a clip edge count as inside.
pub const CLIP_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

fn shoelace(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum::<f64>()
        / 2.0
}

impl ConvexPolygon {
    /// Validates that `vertices` form a convex polygon with consistent
    /// winding (either direction) and no repeated vertices.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::ContractViolation(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if !vertices.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidValue("polygon vertex is not finite".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= CLIP_EPSILON {
                return Err(Error::ContractViolation(format!(
                    "polygon repeats vertex {i}"
                )));
            }
        }
        let area = shoelace(&vertices);
        if area == 0.0 {
            return Err(Error::ContractViolation("polygon has zero area".into()));
        }
        let sign = area.signum();
        for i in 0..n {
            let e1 = vertices[(i + 1) % n] - vertices[i];
            let e2 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            let turn = sign * e1.cross(e2);
            if turn < -CLIP_EPSILON * e1.norm() * e2.norm() {
                return Err(Error::ContractViolation(format!(
                    "polygon is not convex at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Shoelace sum; positive for clockwise-on-screen winding.
    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }
}

impl TryFrom<&QuadBox> for ConvexPolygon {
    type Error = Error;

    fn try_from(q: &QuadBox) -> Result<Self> {
        ConvexPolygon::new(q.corners.to_vec())
    }
}

/// Area of a clipping result; an empty intersection has area zero.
pub fn polygon_area(poly: Option<&ConvexPolygon>) -> f64 {
    poly.map_or(0.0, ConvexPolygon::area)
}

/// Intersection of two convex polygons by Sutherland–Hodgman clipping.
///
/// Returns `None` when the polygons are disjoint or only touch along a
/// point or segment.
pub fn clip_convex(subject: &ConvexPolygon, clipper: &ConvexPolygon) -> Option<ConvexPolygon> {
    let sign = clipper.signed_area().signum();
    let edges = clipper.vertices.len();
    let mut output = subject.vertices.clone();
    let mut input = Vec::with_capacity(output.len() + edges);

    for k in 0..edges {
        if output.is_empty() {
            return None;
        }
        std::mem::swap(&mut input, &mut output);
        output.clear();

        let p = clipper.vertices[k];
        let e = clipper.vertices[(k + 1) % edges] - p;
        let len = e.norm();
        let dist = |x: Point| sign * e.cross(x - p) / len;

        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            let (dc, dp) = (dist(cur), dist(prev));
            let cur_in = dc >= -CLIP_EPSILON;
            let prev_in = dp >= -CLIP_EPSILON;
            if cur_in != prev_in {
                let t = dp / (dp - dc);
                output.push(prev + (cur - prev) * t);
            }
            if cur_in {
                output.push(cur);
            }
        }
    }

    let mut vertices: Vec<Point> = Vec::with_capacity(output.len());
    for p in output {
        if vertices
            .last()
            .is_none_or(|&q: &Point| q.distance(p) > CLIP_EPSILON)
        {
            vertices.push(p);
        }
    }
    while vertices.len() > 1 && vertices[0].distance(vertices[vertices.len() - 1]) <= CLIP_EPSILON {
        vertices.pop();
    }
    if vertices.len() < 3 {
        return None;
    }
    let area = shoelace(&vertices).abs();
    let scale = subject.area().max(clipper.area());
    if area <= 1e-12 * scale {
        return None;
    }
    Some(ConvexPolygon { vertices })
}

fn box_key(b: &OrientedBox) -> [f64; 5] {
    [b.cx(), b.cy(), b.w(), b.h(), b.theta()]
}

fn total_order(a: &OrientedBox, b: &OrientedBox) -> Ordering {
    box_key(a)
        .iter()
        .zip(box_key(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn box_polygon(b: &OrientedBox) -> ConvexPolygon {
    // rbox_to_qbox always yields a positive-area rectangle
    ConvexPolygon {
        vertices: b.to_quad().corners.to_vec(),
    }
}

/// Intersection over union of two oriented boxes, in `[0, 1]`.
///
/// The arguments are put in a canonical order first, so the result is
/// bit-for-bit symmetric. The head direction does not matter: `theta` and
/// `theta + π` cover the same region.
pub fn rotated_iou(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let (a, b) = match total_order(a, b) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    };
    let pa = box_polygon(a);
    let pb = box_polygon(b);
    let inter = polygon_area(clip_convex(&pa, &pb).as_ref());
    if inter == 0.0 {
        return 0.0;
    }
    let union = pa.area() + pb.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn square(x0: f64, y0: f64, side: f64) -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point::new(x0, y0),
            Point::new(x0 + side, y0),
            Point::new(x0 + side, y0 + side),
            Point::new(x0, y0 + side),
        ])
        .unwrap()
    }

    #[test]
    fn clip_examples() {
        let s = square(0.0, 0.0, 1.0);
        let same = clip_convex(&s, &s).unwrap();
        assert_eq!(same.area(), 1.0);

        assert!(clip_convex(&s, &square(3.0, 3.0, 1.0)).is_none());

        let overlap = clip_convex(&s, &square(0.5, 0.5, 1.0)).unwrap();
        assert!((overlap.area() - 0.25).abs() < 1e-15);
        for v in overlap.vertices() {
            assert!((0.5..=1.0).contains(&v.x) && (0.5..=1.0).contains(&v.y));
        }
    }

    #[test]
    fn touching_squares_are_empty() {
        let s = square(0.0, 0.0, 1.0);
        assert!(clip_convex(&s, &square(1.0, 0.0, 1.0)).is_none());
        assert!(clip_convex(&s, &square(1.0, 1.0, 1.0)).is_none());
    }

    #[test]
    fn clip_handles_either_winding() {
        let s = square(0.0, 0.0, 2.0);
        let rev = ConvexPolygon::new(s.vertices().iter().rev().copied().collect()).unwrap();
        let other = square(1.0, 1.0, 2.0);
        let a = clip_convex(&other, &s).unwrap().area();
        let b = clip_convex(&other, &rev).unwrap().area();
        assert_eq!(a, 1.0);
        assert_eq!(b, 1.0);
    }

    #[test]
    fn area_examples() {
        assert_eq!(square(0.0, 0.0, 1.0).area(), 1.0);
        assert_eq!(polygon_area(None), 0.0);
        let tri = ConvexPolygon::new(vec![
            Point::new(0., 0.),
            Point::new(2., 0.),
            Point::new(0., 2.),
        ])
        .unwrap();
        assert_eq!(tri.area(), 2.0);
    }

    #[test]
    fn non_convex_rejected() {
        let dart = ConvexPolygon::new(vec![
            Point::new(0., 0.),
            Point::new(4., 0.),
            Point::new(1., 1.),
            Point::new(0., 4.),
        ]);
        assert!(matches!(dart, Err(Error::ContractViolation(_))));
        let repeated = ConvexPolygon::new(vec![
            Point::new(0., 0.),
            Point::new(0., 0.),
            Point::new(1., 0.),
            Point::new(0., 1.),
        ]);
        assert!(repeated.is_err());
    }

    #[test]
    fn iou_examples() {
        let a = OrientedBox::new(1.0, 1.0, 2.0, 2.0, 0.0).unwrap();
        assert_eq!(rotated_iou(&a, &a), 1.0);

        let b = OrientedBox::new(2.0, 1.0, 2.0, 2.0, 0.0).unwrap();
        assert!((rotated_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);

        let s0 = OrientedBox::new(0.0, 0.0, 2.0, 2.0, 0.0).unwrap();
        let s45 = OrientedBox::new(0.0, 0.0, 2.0, 2.0, FRAC_PI_4).unwrap();
        assert!((rotated_iou(&s0, &s45) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);

        let far = OrientedBox::new(100.0, 1.0, 2.0, 2.0, 0.3).unwrap();
        assert_eq!(rotated_iou(&a, &far), 0.0);
    }

    #[test]
    fn iou_ignores_head_direction() {
        let a = OrientedBox::new(3.0, -2.0, 7.0, 2.5, 0.4).unwrap();
        let flipped = a.with_theta(a.theta() + std::f64::consts::PI).unwrap();
        assert!((rotated_iou(&a, &flipped) - 1.0).abs() < 1e-9);
    }
}
