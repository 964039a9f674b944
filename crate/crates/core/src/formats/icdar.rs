use roxmltree::{Document, Node};

use super::AnnotationRecord;
use crate::error::{Error, Result};
use crate::geometry::QuadBox;

/// Element and attribute names of the competition-style ground truth:
///
/// ```xml
/// <document filename="10497.jpg">
///   <table><Coords points="63,119 63,1006 666,1006 666,119"/></table>
/// </document>
/// ```
///
/// A region may also carry the points attribute itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlSchema {
    pub region: String,
    pub coords: String,
    pub points: String,
}

impl Default for XmlSchema {
    fn default() -> Self {
        Self {
            region: "table".into(),
            coords: "Coords".into(),
            points: "points".into(),
        }
    }
}

fn element_path(node: Node) -> String {
    let mut parts: Vec<String> = node
        .ancestors()
        .filter(Node::is_element)
        .map(|n| {
            let name = n.tag_name().name();
            // prev_siblings starts with the node itself
            let index = n
                .prev_siblings()
                .filter(|s| s.is_element() && s.tag_name().name() == name)
                .count();
            if n.parent().is_some_and(|p| p.is_root()) {
                name.to_string()
            } else {
                format!("{name}[{index}]")
            }
        })
        .collect();
    parts.reverse();
    parts.join("/")
}

fn parse_points(raw: &str, path: &str) -> Result<QuadBox> {
    let nums: Vec<&str> = raw
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if nums.len() != 8 {
        return Err(Error::Xml {
            path: path.to_string(),
            message: format!(
                "expected 4 coordinate pairs, got {}{}",
                nums.len() / 2,
                if nums.len() % 2 == 1 {
                    " and a dangling value"
                } else {
                    ""
                }
            ),
        });
    }
    let mut c = [0.0; 8];
    for (slot, tok) in c.iter_mut().zip(&nums) {
        *slot = tok.parse::<f64>().map_err(|_| Error::Xml {
            path: path.to_string(),
            message: format!("coordinate {tok:?} is not a number"),
        })?;
    }
    Ok(QuadBox::from_coords(c))
}

/// Parses table regions from ground-truth XML with the default schema.
pub fn parse_icdar_xml(text: &str) -> Result<Vec<AnnotationRecord>> {
    parse_icdar_xml_with(text, &XmlSchema::default())
}

/// Parses every `schema.region` element into a `table` record, keeping the
/// corner order exactly as written.
pub fn parse_icdar_xml_with(text: &str, schema: &XmlSchema) -> Result<Vec<AnnotationRecord>> {
    let doc = Document::parse(text).map_err(|e| Error::Xml {
        path: "/".into(),
        message: e.to_string(),
    })?;
    doc.descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == schema.region)
        .map(|region| {
            let source = region
                .children()
                .find(|c| c.is_element() && c.tag_name().name() == schema.coords)
                .and_then(|c| c.attribute(schema.points.as_str()).map(|p| (c, p)))
                .or_else(|| {
                    region
                        .attribute(schema.points.as_str())
                        .map(|p| (region, p))
                });
            let Some((node, points)) = source else {
                return Err(Error::Xml {
                    path: element_path(region),
                    message: format!(
                        "no {} element or attribute with {:?}",
                        schema.coords, schema.points
                    ),
                });
            };
            let quad = parse_points(points, &element_path(node))?;
            Ok(AnnotationRecord::table(quad))
        })
        .collect()
}

/// Normalizes a ground-truth record to head-first clockwise order.
///
/// The winding is flipped when the corners run counterclockwise on screen,
/// then the corner with the smallest `x + y` (the image-frame top-left)
/// becomes `A`. Tables whose head is not at that corner need an explicit
/// `extra_shift`, applied last.
pub fn icdar_to_r360(record: &AnnotationRecord, extra_shift: i64) -> Result<AnnotationRecord> {
    let q = record.quad;
    if !q.is_finite() {
        return Err(Error::Validation("quad has non-finite corner".into()));
    }
    let area = q.signed_area();
    if area == 0.0 || !q.is_convex() {
        return Err(Error::Validation(format!(
            "degenerate or non-convex quad {:?}",
            q.coords()
        )));
    }
    let q = if area < 0.0 { q.reversed() } else { q };
    let start = (0..4)
        .min_by(|&i, &j| {
            let (a, b) = (q.corners[i], q.corners[j]);
            (a.x + a.y)
                .total_cmp(&(b.x + b.y))
                .then(a.y.total_cmp(&b.y))
        })
        .unwrap_or(0);
    let q = q.cyclic_shift(start as i64).cyclic_shift(extra_shift);
    Ok(AnnotationRecord {
        quad: q,
        ..record.clone()
    })
}
