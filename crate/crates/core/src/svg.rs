//! Schematic arc diagrams of linear layouts.
//!
//! Vertices sit on a horizontal spine at fixed spacing and every edge is a
//! semicircle above it, so an arc's height is half its span. Each page has
//! its own color. Output depends only on the layout, byte for byte.

use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use thiserror::Error;

use crate::io::write_atomic;
use crate::layout::LinearLayout;

const SPACING: usize = 60;
const MARGIN: usize = 30;
const LABEL_GAP: usize = 20;
const LEGEND_ROW: usize = 18;
const RADIUS: usize = 5;

/// Page colors in order; the first two are a blue and a lilac.
pub const PALETTE: [&str; 8] = [
    "#3b6fd8", "#b48ce0", "#2e9e5b", "#d8553b", "#e0a32e", "#7a5a3c", "#d25fa6", "#2ab3c0",
];

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("edge `{0} {1}` has an endpoint that is not on the spine")]
    UnknownEndpoint(String, String),
    #[error("edge `{0} {1}` is on page {2} of a {3}-page layout")]
    PageOutOfRange(String, String, usize, usize),
    #[error("cannot write {path}: {err}")]
    Write {
        path: String,
        err: std::io::Error,
    },
}

pub fn page_color(page: usize) -> &'static str {
    PALETTE[page % PALETTE.len()]
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
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

/// Half units, printed without a trailing `.0`.
fn half(twice: usize) -> String {
    if twice % 2 == 0 {
        (twice / 2).to_string()
    } else {
        format!("{}.5", twice / 2)
    }
}

pub fn render_svg(layout: &LinearLayout) -> Result<String, SvgError> {
    let pos: HashMap<&str, usize> = layout.spine.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut arcs: Vec<(usize, usize, usize)> = Vec::with_capacity(layout.pages.len());
    for ((a, b), &p) in &layout.pages {
        let (Some(&i), Some(&j)) = (pos.get(a.as_str()), pos.get(b.as_str())) else {
            return Err(SvgError::UnknownEndpoint(a.clone(), b.clone()));
        };
        if p >= layout.page_count {
            return Err(SvgError::PageOutOfRange(a.clone(), b.clone(), p + 1, layout.page_count));
        }
        arcs.push((p, i.min(j), i.max(j)));
    }
    // Long arcs first so short ones are drawn on top.
    arcs.sort_by_key(|&(p, i, j)| (p, usize::MAX - (j - i), i));

    let n = layout.spine.len();
    let x = |i: usize| MARGIN + i * SPACING;
    let span_max = arcs.iter().map(|&(_, i, j)| j - i).max().unwrap_or(0);
    let spine_y = MARGIN + span_max * SPACING / 2;
    let width = 2 * MARGIN + n.saturating_sub(1) * SPACING;
    let legend_y = spine_y + LABEL_GAP + LEGEND_ROW;
    let height = legend_y + layout.page_count * LEGEND_ROW + MARGIN / 2;

    let mut out = String::new();
    let w = &mut out;
    // Writing to a String cannot fail.
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(w, "<title>{}-page {} layout, {} vertices</title>", layout.page_count, layout.kind, n);
    let _ = writeln!(w, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    if n > 1 {
        let _ = writeln!(
            w,
            r##"<line x1="{}" y1="{spine_y}" x2="{}" y2="{spine_y}" stroke="#444" stroke-width="1.5"/>"##,
            x(0),
            x(n - 1)
        );
    }
    for &(p, i, j) in &arcs {
        let r2 = (j - i) * SPACING;
        let _ = writeln!(
            w,
            r#"<path d="M {} {spine_y} A {r} {r} 0 0 1 {} {spine_y}" fill="none" stroke="{}" stroke-width="2"/>"#,
            x(i),
            x(j),
            page_color(p),
            r = half(r2),
        );
    }
    for (i, v) in layout.spine.iter().enumerate() {
        let _ = writeln!(w, r#"<circle cx="{}" cy="{spine_y}" r="{RADIUS}" fill="black"/>"#, x(i));
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="middle">{}</text>"#,
            x(i),
            spine_y + LABEL_GAP,
            escape(v)
        );
    }
    for p in 0..layout.page_count {
        let _ = writeln!(
            w,
            r#"<text x="{MARGIN}" y="{}" font-family="monospace" font-size="12" fill="{}">page {}</text>"#,
            legend_y + p * LEGEND_ROW,
            page_color(p),
            p + 1
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(out)
}

/// Renders `layout` and writes it to `path` atomically.
pub fn emit_svg(layout: &LinearLayout, path: &Path) -> Result<(), SvgError> {
    let svg = render_svg(layout)?;
    write_atomic(path, svg.as_bytes()).map_err(|err| SvgError::Write {
        path: path.display().to_string(),
        err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{edge_key, LayoutKind};

    fn layout(kind: LayoutKind, pages: usize, spine: &str, edges: &[(&str, &str, usize)]) -> LinearLayout {
        LinearLayout {
            kind,
            page_count: pages,
            spine: spine.split_whitespace().map(String::from).collect(),
            pages: edges.iter().map(|&(a, b, p)| (edge_key(a, b), p)).collect(),
        }
    }

    #[test]
    fn k2_has_two_dots_and_one_arc() {
        let svg = render_svg(&layout(LayoutKind::Stack, 1, "a b", &[("a", "b", 0)])).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains(r#"A 30 30 0 0 1 90 60"#));
    }

    #[test]
    fn pages_get_their_colors() {
        let l = layout(LayoutKind::Queue, 2, "a b c", &[("a", "b", 0), ("b", "c", 1), ("a", "c", 1)]);
        let svg = render_svg(&l).unwrap();
        assert_eq!(svg.matches(PALETTE[0]).count(), 2);
        assert_eq!(svg.matches(PALETTE[1]).count(), 3);
        assert_eq!(svg, render_svg(&l).unwrap());
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_svg(&layout(LayoutKind::Stack, 1, "a<b c&d", &[("a<b", "c&d", 0)])).unwrap();
        assert!(svg.contains("a&lt;b") && svg.contains("c&amp;d"));
    }

    #[test]
    fn rejects_foreign_edges() {
        let l = layout(LayoutKind::Stack, 1, "a b", &[("a", "z", 0)]);
        assert!(matches!(render_svg(&l), Err(SvgError::UnknownEndpoint(..))));
        let l = layout(LayoutKind::Stack, 1, "a b", &[("a", "b", 1)]);
        assert!(matches!(render_svg(&l), Err(SvgError::PageOutOfRange(..))));
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let l = layout(LayoutKind::Stack, 1, "a b", &[("a", "b", 0)]);
        let err = emit_svg(&l, Path::new("/nonexistent-dir/x/out.svg")).unwrap_err();
        assert!(matches!(err, SvgError::Write { .. }));
    }
}
