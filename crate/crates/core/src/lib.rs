//! Head/tail-aware oriented boxes for rotated table detection.
//!
//! - [`geometry`]: corner and center/size/angle box forms with a full 360°
//!   head direction, legacy 180° conventions, minimum-area rectangles.
//! - [`polygon`]: convex clipping and rotated IoU.
//! - [`transform`]: rotation of images and annotations on a canvas that
//!   grows to fit, plus seeded random rotation.
//! - [`formats`]: DOTA-style annotation text, predictions, ground-truth XML,
//!   validation.
//! - [`metrics`]: angle-constrained AP (`AP50(T<90)` and friends).
//! - [`pipeline`]: dataset conversion, generation and evaluation runs.

pub mod error;
pub mod formats;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod polygon;
pub mod raster;
pub mod transform;

pub use error::{Error, Result};
pub use formats::{AnnotationRecord, DetectionRecord};
pub use geometry::{angle_difference, wrap_angle, AngleConvention, OrientedBox, Point, QuadBox};
pub use metrics::{EvalConfig, EvalReport, Preset};
pub use polygon::{rotated_iou, ConvexPolygon};
pub use raster::RasterImage;
pub use transform::{AffineTransform, AngleRange, CanvasSize, RotationSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
