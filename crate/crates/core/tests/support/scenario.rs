//! Random evaluation scenarios shared by the AP tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabrot_core::{AnnotationRecord, DetectionRecord, EvalConfig, OrientedBox, Preset};

use crate::oracle::{RefBox, RefDet};

pub struct Scenario {
    pub gts: Vec<Vec<RefBox>>,
    pub dets: Vec<RefDet>,
}

pub fn ref_box(b: OrientedBox) -> RefBox {
    RefBox {
        quad: b.to_quad(),
        theta: b.theta(),
    }
}

pub fn random_box(rng: &mut impl Rng) -> OrientedBox {
    OrientedBox::new(
        rng.random_range(0.0..100.0),
        rng.random_range(0.0..100.0),
        rng.random_range(5.0..40.0),
        rng.random_range(5.0..40.0),
        rng.random_range(-PI..PI),
    )
    .unwrap()
}

/// Up to `max_gt` ground truths over 1–3 images and up to `max_det`
/// detections, most of them jittered copies of a ground truth.
pub fn scenario(seed: u64, max_gt: usize, max_det: usize, tied_scores: bool) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = rng.random_range(1..=3);
    let mut gts = vec![Vec::new(); images];
    for _ in 0..rng.random_range(0..=max_gt) {
        gts[rng.random_range(0..images)].push(ref_box(random_box(&mut rng)));
    }
    let mut dets = Vec::new();
    for _ in 0..rng.random_range(0..=max_det) {
        let image = rng.random_range(0..images);
        let boxed = match gts[image].len() {
            n if n > 0 && rng.random_bool(0.8) => {
                let g = &gts[image][rng.random_range(0..n)];
                let b = g.quad.to_oriented().unwrap();
                let turn = [0.0, FRAC_PI_2, -FRAC_PI_2, PI][rng.random_range(0..4)];
                OrientedBox::new(
                    b.cx() + rng.random_range(-4.0..4.0),
                    b.cy() + rng.random_range(-4.0..4.0),
                    b.w() * rng.random_range(0.8..1.25),
                    b.h() * rng.random_range(0.8..1.25),
                    b.theta() + turn + rng.random_range(-0.7..0.7),
                )
                .unwrap()
            }
            _ => random_box(&mut rng),
        };
        let score = if tied_scores {
            [0.3, 0.6, 0.9][rng.random_range(0..3)]
        } else {
            rng.random_range(0.0..1.0)
        };
        dets.push(RefDet {
            image,
            boxed: ref_box(boxed),
            score,
        });
    }
    dets.sort_by_key(|d| d.image);
    Scenario { gts, dets }
}

pub fn image_id(i: usize) -> String {
    format!("img{i}")
}

pub fn to_maps(
    s: &Scenario,
) -> (
    BTreeMap<String, Vec<DetectionRecord>>,
    BTreeMap<String, Vec<AnnotationRecord>>,
) {
    let mut dets: BTreeMap<String, Vec<DetectionRecord>> = BTreeMap::new();
    for d in &s.dets {
        dets.entry(image_id(d.image))
            .or_default()
            .push(DetectionRecord::new(d.boxed.quad, "table", d.score).unwrap());
    }
    let gts = s
        .gts
        .iter()
        .enumerate()
        .map(|(i, g)| {
            (
                image_id(i),
                g.iter().map(|b| AnnotationRecord::table(b.quad)).collect(),
            )
        })
        .collect();
    (dets, gts)
}

pub fn configs() -> Vec<EvalConfig> {
    vec![
        Preset::Ap50T90.config(),
        Preset::Ap75T40.config(),
        Preset::Ap50T360.config(),
        EvalConfig::custom(0.3, 135.0).unwrap(),
        EvalConfig::custom(0.1, 20.0).unwrap(),
    ]
}
