use std::f64::consts::FRAC_PI_4;

use super::{OrientedBox, Point};
use crate::error::{Error, Result};

/// Convex hull by monotone chain. Returns vertices with positive shoelace
/// orientation (clockwise on screen) and no collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }

    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

struct Candidate {
    area: f64,
    /// Unit direction of the first rectangle side, rotated by quarter turns
    /// so that its angle lies in `[-π/4, π/4)`.
    axis: Point,
    angle: f64,
}

fn quarter_turn(p: Point) -> Point {
    Point::new(-p.y, p.x)
}

fn canonical_axis(mut u: Point) -> (Point, f64) {
    for _ in 0..4 {
        let a = u.y.atan2(u.x);
        if (-FRAC_PI_4..FRAC_PI_4).contains(&a) {
            return (u, a);
        }
        u = quarter_turn(u);
    }
    // only reachable through rounding right at ±45°
    (u, u.y.atan2(u.x))
}

/// Minimum-area rectangle enclosing `points`, by rotating calipers over the
/// convex hull.
///
/// Corner `A` of the result is the rectangle corner closest to `head_hint`
/// and the corners run clockwise on screen. When several orientations give
/// the same minimal area (within 1e-12 relative), the one whose side
/// direction folded into `[-45°, 45°)` has the smallest magnitude wins, then
/// the smaller signed angle.
pub fn min_area_rect(points: &[Point], head_hint: Point) -> Result<OrientedBox> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if !points.iter().all(|p| p.is_finite()) || !head_hint.is_finite() {
        return Err(Error::InvalidValue("non-finite point".into()));
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::Degenerate("points are collinear".into()));
    }

    let mut best: Option<Candidate> = None;
    for i in 0..hull.len() {
        let edge = hull[(i + 1) % hull.len()] - hull[i];
        let len = edge.norm();
        if len == 0.0 {
            continue;
        }
        let (u, angle) = canonical_axis(edge * (1.0 / len));
        let v = quarter_turn(u);
        let (lo_u, hi_u, lo_v, hi_v) = extents(&hull, u, v);
        let area = (hi_u - lo_u) * (hi_v - lo_v);
        let replace = match &best {
            None => true,
            Some(b) => {
                let tol = 1e-12 * b.area.max(area);
                if area < b.area - tol {
                    true
                } else if area <= b.area + tol {
                    (angle.abs(), angle) < (b.angle.abs(), b.angle)
                } else {
                    false
                }
            }
        };
        if replace {
            best = Some(Candidate {
                area,
                axis: u,
                angle,
            });
        }
    }
    let best = best.ok_or_else(|| Error::Degenerate("empty hull".into()))?;
    if best.area.is_nan() || best.area <= 0.0 {
        return Err(Error::Degenerate("points are collinear".into()));
    }

    let u = best.axis;
    let v = quarter_turn(u);
    let (lo_u, hi_u, lo_v, hi_v) = extents(&hull, u, v);
    let at = |a: f64, b: f64| u * a + v * b;
    // u × v = 1, so this order has a positive shoelace sum
    let corners = [
        at(lo_u, lo_v),
        at(hi_u, lo_v),
        at(hi_u, hi_v),
        at(lo_u, hi_v),
    ];

    let start = (0..4)
        .min_by(|&i, &j| {
            corners[i]
                .distance(head_hint)
                .total_cmp(&corners[j].distance(head_hint))
        })
        .unwrap_or(0);
    let a = corners[start];
    let b = corners[(start + 1) % 4];
    let c = corners[(start + 2) % 4];
    let center = at((lo_u + hi_u) / 2.0, (lo_v + hi_v) / 2.0);
    let ab = b - a;
    OrientedBox::new(
        center.x,
        center.y,
        ab.norm(),
        (c - b).norm(),
        ab.y.atan2(ab.x),
    )
}

fn extents(points: &[Point], u: Point, v: Point) -> (f64, f64, f64, f64) {
    points.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(lu, hu, lv, hv), p| {
            let pu = p.dot(u);
            let pv = p.dot(v);
            (lu.min(pu), hu.max(pu), lv.min(pv), hv.max(pv))
        },
    )
}
