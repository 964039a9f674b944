use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::OrientedBox;
use crate::error::{Error, Result};

/// Angle conventions for `(cx, cy, w, h, theta)` boxes.
///
/// Every convention except [`AngleConvention::R360`] spans at most 180° and
/// identifies a box with its 180° rotation, so it cannot carry head/tail
/// information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleConvention {
    /// Pre-4.5.1 OpenCV `minAreaRect`: theta in `[-90°, 0°)`.
    OcOld,
    /// OpenCV ≥ 4.5.1 `minAreaRect`: theta in `(0°, 90°]`.
    OcNew,
    /// Long edge as width, theta in `[-90°, 90°)`.
    Le90,
    /// Long edge as width, theta in `[-45°, 135°)`.
    Le135,
    /// Head-edge direction, theta in `[-180°, 180°)`.
    R360,
}

#[derive(Clone, Copy)]
enum Interval {
    /// `[lo, lo + len)`
    ClosedOpen(f64, f64),
    /// `(hi - len, hi]`
    OpenClosed(f64, f64),
}

impl Interval {
    fn contains(self, t: f64) -> bool {
        match self {
            Interval::ClosedOpen(lo, len) => t >= lo && t < lo + len,
            Interval::OpenClosed(hi, len) => t > hi - len && t <= hi,
        }
    }

    /// Representative of `t` modulo `period` inside the interval.
    fn fold(self, t: f64, period: f64) -> f64 {
        match self {
            Interval::ClosedOpen(lo, len) => {
                let mut r = lo + (t - lo).rem_euclid(period);
                if r >= lo + len {
                    r -= period;
                }
                r
            }
            Interval::OpenClosed(hi, len) => {
                let mut r = hi - (hi - t).rem_euclid(period);
                if r <= hi - len {
                    r += period;
                }
                r
            }
        }
    }
}

impl AngleConvention {
    pub const ALL: [AngleConvention; 5] = [
        AngleConvention::OcOld,
        AngleConvention::OcNew,
        AngleConvention::Le90,
        AngleConvention::Le135,
        AngleConvention::R360,
    ];

    fn interval(self) -> Interval {
        match self {
            AngleConvention::OcOld => Interval::ClosedOpen(-FRAC_PI_2, FRAC_PI_2),
            AngleConvention::OcNew => Interval::OpenClosed(FRAC_PI_2, FRAC_PI_2),
            AngleConvention::Le90 => Interval::ClosedOpen(-FRAC_PI_2, PI),
            AngleConvention::Le135 => Interval::ClosedOpen(-PI / 4.0, PI),
            AngleConvention::R360 => Interval::ClosedOpen(-PI, 2.0 * PI),
        }
    }

    fn long_edge_width(self) -> bool {
        matches!(self, AngleConvention::Le90 | AngleConvention::Le135)
    }

    /// Whether `b` is a legal representation under this convention.
    pub fn is_legal(self, b: &OrientedBox) -> bool {
        self.interval().contains(b.theta()) && (!self.long_edge_width() || b.w() >= b.h())
    }

    /// Rewrites a box into this convention, keeping the covered region.
    /// Returns `None` for R360, which cannot be reached from the region
    /// alone.
    fn canonicalize(self, b: &OrientedBox) -> Option<OrientedBox> {
        let (mut w, mut h, mut t) = (b.w(), b.h(), b.theta());
        let interval = self.interval();
        match self {
            AngleConvention::R360 => return None,
            AngleConvention::Le90 | AngleConvention::Le135 => {
                if w < h {
                    std::mem::swap(&mut w, &mut h);
                    t += FRAC_PI_2;
                }
                t = interval.fold(t, PI);
            }
            AngleConvention::OcOld | AngleConvention::OcNew => {
                let folded = interval.fold(t, FRAC_PI_2);
                let quarter_turns = ((folded - t) / FRAC_PI_2).round() as i64;
                if quarter_turns.rem_euclid(2) == 1 {
                    std::mem::swap(&mut w, &mut h);
                }
                t = folded;
            }
        }
        OrientedBox::new(b.cx(), b.cy(), w, h, t).ok()
    }
}

/// Converts a box between angle conventions.
///
/// Converting out of R360 is lossy: head and tail are forgotten. Converting
/// into R360 from a 180° convention is refused, since there is no way to
/// know which end of the box was the head.
pub fn convert_convention(
    b: &OrientedBox,
    from: AngleConvention,
    to: AngleConvention,
) -> Result<OrientedBox> {
    if !from.is_legal(b) {
        return Err(Error::InvalidValue(format!(
            "box with theta {:.6}° and size {}x{} is not legal under {from:?}",
            b.theta_degrees(),
            b.w(),
            b.h()
        )));
    }
    if to == AngleConvention::R360 {
        return if from == AngleConvention::R360 {
            Ok(*b)
        } else {
            Err(Error::Ambiguity(format!(
                "{from:?} -> R360: head/tail unrecoverable"
            )))
        };
    }
    to.canonicalize(b)
        .ok_or_else(|| Error::InvalidValue(format!("cannot express box in {to:?}")))
}
