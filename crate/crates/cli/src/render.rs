//! SVG overlays that make head/tail labelling visible: edge `AB` is drawn
//! as the head, edge `DC` as the tail, and corner `A` gets a dot.

use std::fmt::Write;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use tabrot_core::{Point, QuadBox};

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub head_color: String,
    pub tail_color: String,
    pub side_color: String,
    pub stroke_width: f64,
}

impl Default for Style {
    fn default() -> Self {
        Self {
            head_color: "#e6194b".into(),
            tail_color: "#4363d8".into(),
            side_color: "#ffe119".into(),
            stroke_width: 3.0,
        }
    }
}

/// One box to draw; `score` is shown for predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub quad: QuadBox,
    pub label: String,
    pub score: Option<f64>,
}

/// Embedded raster: encoded bytes plus their MIME type and pixel size.
#[derive(Debug, Clone, Copy)]
pub struct Backdrop<'a> {
    pub bytes: &'a [u8],
    pub mime: &'a str,
    pub width: u32,
    pub height: u32,
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn line(out: &mut String, class: &str, a: Point, b: Point, color: &str, width: f64) {
    let _ = writeln!(
        out,
        r#"    <line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{width}" stroke-linecap="round"/>"#,
        a.x, a.y, b.x, b.y
    );
}

/// Builds the SVG document. Output depends only on the arguments.
pub fn render_svg(backdrop: &Backdrop, overlays: &[Overlay], style: &Style) -> String {
    let (w, h) = (backdrop.width, backdrop.height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        out,
        r#"  <image x="0" y="0" width="{w}" height="{h}" href="data:{};base64,{}"/>"#,
        backdrop.mime,
        STANDARD.encode(backdrop.bytes)
    );
    let sw = style.stroke_width;
    for (i, o) in overlays.iter().enumerate() {
        let [a, b, c, d] = o.quad.corners;
        let _ = writeln!(
            out,
            r#"  <g class="box" data-index="{i}" data-label="{}">"#,
            escape(&o.label)
        );
        line(&mut out, "side", b, c, &style.side_color, sw);
        line(&mut out, "side", d, a, &style.side_color, sw);
        line(&mut out, "head", a, b, &style.head_color, sw);
        line(&mut out, "tail", d, c, &style.tail_color, sw);
        let _ = writeln!(
            out,
            r#"    <circle class="corner-a" cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            a.x,
            a.y,
            sw * 1.5,
            style.head_color
        );
        if let Some(score) = o.score {
            let _ = writeln!(
                out,
                r#"    <text class="score" x="{}" y="{}" font-size="{}" fill="{}">{score:.3}</text>"#,
                a.x + sw * 2.0,
                a.y - sw * 2.0,
                (sw * 5.0).max(10.0),
                style.head_color
            );
        }
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}
