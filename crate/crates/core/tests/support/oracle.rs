//! Reference implementations that share no code with the library's
//! clipping or matching paths.

#![allow(dead_code)]

use rand::Rng;
use tabrot_core::{Point, QuadBox};

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn shoelace(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        / 2.0
}

/// Inside-or-on test for a convex polygon of either winding.
pub fn inside(poly: &[Point], p: Point, eps: f64) -> bool {
    let n = poly.len();
    let signs: Vec<f64> = (0..n)
        .map(|i| cross(poly[i], poly[(i + 1) % n], p))
        .collect();
    signs.iter().all(|&s| s >= -eps) || signs.iter().all(|&s| s <= eps)
}

/// Intersection area by vertex collection: contained corners plus pairwise
/// edge crossings, sorted by angle about their mean.
pub fn intersection_area(a: &QuadBox, b: &QuadBox) -> f64 {
    let (pa, pb) = (a.corners, b.corners);
    let scale = pa
        .iter()
        .chain(&pb)
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let mut pts: Vec<Point> = Vec::new();
    pts.extend(pa.iter().copied().filter(|&p| inside(&pb, p, eps)));
    pts.extend(pb.iter().copied().filter(|&p| inside(&pa, p, eps)));
    for i in 0..4 {
        let (p, p2) = (pa[i], pa[(i + 1) % 4]);
        let r = Point::new(p2.x - p.x, p2.y - p.y);
        for j in 0..4 {
            let (q, q2) = (pb[j], pb[(j + 1) % 4]);
            let s = Point::new(q2.x - q.x, q2.y - q.y);
            let d = r.x * s.y - r.y * s.x;
            if d.abs() < 1e-300 {
                continue;
            }
            let qp = Point::new(q.x - p.x, q.y - p.y);
            let t = (qp.x * s.y - qp.y * s.x) / d;
            let u = (qp.x * r.y - qp.y * r.x) / d;
            if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                pts.push(Point::new(p.x + t * r.x, p.y + t * r.y));
            }
        }
    }
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
    pts.sort_by(|p, q| {
        (p.y - my)
            .atan2(p.x - mx)
            .total_cmp(&(q.y - my).atan2(q.x - mx))
    });
    shoelace(&pts).abs()
}

pub fn iou(a: &QuadBox, b: &QuadBox) -> f64 {
    let inter = intersection_area(a, b);
    let union = shoelace(&a.corners).abs() + shoelace(&b.corners).abs() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Monte-Carlo IoU with one jittered sample per cell of an `n`×`n` grid over
/// the joint bounding box.
pub fn monte_carlo_iou(a: &QuadBox, b: &QuadBox, n: usize, rng: &mut impl Rng) -> f64 {
    let all: Vec<Point> = a.corners.iter().chain(&b.corners).copied().collect();
    let x0 = all.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let x1 = all.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let y0 = all.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let y1 = all.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let (dx, dy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let (mut both, mut either) = (0u64, 0u64);
    for i in 0..n {
        for j in 0..n {
            let p = Point::new(
                x0 + (i as f64 + rng.random::<f64>()) * dx,
                y0 + (j as f64 + rng.random::<f64>()) * dy,
            );
            let (ia, ib) = (inside(&a.corners, p, 0.0), inside(&b.corners, p, 0.0));
            both += u64::from(ia && ib);
            either += u64::from(ia || ib);
        }
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// Circular head-direction difference in degrees.
pub fn angle_gap_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d).to_degrees()
}

#[derive(Debug, Clone)]
pub struct RefBox {
    pub quad: QuadBox,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct RefDet {
    pub image: usize,
    pub boxed: RefBox,
    pub score: f64,
}

/// Greedy matching of the given detections (already in rank order) against
/// one image's ground truths; returns the number of true positives.
fn greedy_tp(dets: &[&RefDet], gts: &[RefBox], t_iou: f64, t_angle: f64) -> usize {
    let mut used = vec![false; gts.len()];
    let mut tp = 0;
    for d in dets {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if used[g] {
                continue;
            }
            let v = iou(&d.boxed.quad, &gt.quad);
            if best.is_none() || v > best.unwrap().1 {
                best = Some((g, v));
            }
        }
        if let Some((g, v)) = best {
            if v > t_iou && angle_gap_deg(d.boxed.theta, gts[g].theta) < t_angle {
                used[g] = true;
                tp += 1;
            }
        }
    }
    tp
}

/// 11-point AP computed by re-running matching on every top-k prefix of the
/// global ranking.
pub fn brute_force_ap(gts: &[Vec<RefBox>], dets: &[RefDet], t_iou: f64, t_angle: f64) -> f64 {
    let total_gt: usize = gts.iter().map(Vec::len).sum();
    let mut order: Vec<&RefDet> = dets.iter().collect();
    // ties: image order, then input order
    order.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut curve = Vec::new();
    for k in 1..=order.len() {
        let top = &order[..k];
        let tp: usize = (0..gts.len())
            .map(|img| {
                let mine: Vec<&RefDet> = top.iter().copied().filter(|d| d.image == img).collect();
                greedy_tp(&mine, &gts[img], t_iou, t_angle)
            })
            .sum();
        let recall = if total_gt == 0 {
            0.0
        } else {
            tp as f64 / total_gt as f64
        };
        curve.push((recall, tp as f64 / k as f64));
    }
    (0..=10)
        .map(|i| {
            let r = i as f64 / 10.0;
            curve
                .iter()
                .filter(|(rec, _)| *rec >= r)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / 11.0
}
