//! SVG rendering of layout documents.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::document::{ChannelEntry, LayoutDocument};
use crate::geometry::{Axis, Point, Rect};
use crate::partition::PartitionTree;

pub const MIN_FONT: f64 = 6.0;
pub const MAX_FONT: f64 = 24.0;
/// Approximate advance of one character, in ems.
const CHAR_WIDTH: f64 = 0.6;
const CHANNEL_COLOR: &str = "#e31a1c";
const CUT_COLOR: &str = "#1f78b4";

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    pub channels: Vec<ChannelEntry>,
    /// Vertex ids drawn with a red outline.
    pub highlighted: Vec<String>,
    pub hide_labels: bool,
    /// Debug overlay of splitting lines; earlier cuts are drawn thicker.
    pub cuts: Vec<CutLine>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutLine {
    pub from: Point,
    pub to: Point,
    /// Depth of the cutting node, root = 0.
    pub depth: usize,
}

/// Splitting lines of every internal node, spanning the node rectangle.
pub fn cut_lines(tree: &PartitionTree) -> Vec<CutLine> {
    let mut out = Vec::new();
    tree.visit_internal(&mut |node, depth| {
        if let PartitionTree::Internal { rect, orientation, split, .. } = node {
            let (from, to) = match orientation.split_axis() {
                Axis::X => (Point::new(*split, rect.y), Point::new(*split, rect.y + rect.h)),
                Axis::Y => (Point::new(rect.x, *split), Point::new(rect.x + rect.w, *split)),
            };
            out.push(CutLine { from, to, depth });
        }
    });
    out
}

/// Largest font size in [`MIN_FONT`, `MAX_FONT`] at which `text` fits 90% of
/// the rectangle width and height, or `None` if even the minimum does not.
pub fn fit_label(text: &str, rect: Rect) -> Option<f64> {
    let chars = text.chars().count().max(1) as f64;
    let fits = |size: f64| size * CHAR_WIDTH * chars <= 0.9 * rect.w && size <= 0.9 * rect.h;
    if !fits(MIN_FONT) {
        return None;
    }
    if fits(MAX_FONT) {
        return Some(MAX_FONT);
    }
    let (mut lo, mut hi) = (MIN_FONT, MAX_FONT);
    for _ in 0..40 {
        let mid = (lo + hi) / 2.0;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo * 100.0).floor() / 100.0)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn rect_element(out: &mut String, r: Rect, attrs: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" {attrs}/>"#,
        r.x, r.y, r.w, r.h
    );
}

/// Number of elements [`render_svg`] emits for `doc` and `options`.
pub fn expected_element_count(doc: &LayoutDocument, options: &RenderOptions) -> usize {
    let labels = if options.hide_labels {
        0
    } else {
        doc.vertices.iter().filter(|v| fit_label(&v.label, v.rect).is_some()).count()
    };
    let highlighted: BTreeSet<&str> = options.highlighted.iter().map(String::as_str).collect();
    let highlights = doc.vertices.iter().filter(|v| highlighted.contains(v.id.as_str())).count();
    1 + doc.vertices.len() + 2 * doc.bridges.len() + labels + options.channels.len() + highlights + options.cuts.len()
}

/// Black border space, bridge halves, cluster-colored rectangles with
/// white outlines, fitted labels, then the red channel overlay.
pub fn render_svg(doc: &LayoutDocument, options: &RenderOptions) -> String {
    let d = doc.display();
    let colors: HashMap<&str, &str> = doc
        .render
        .clusters
        .iter()
        .zip(&doc.render.palette)
        .map(|(c, p)| (c.as_str(), p.as_str()))
        .collect();
    let by_id: HashMap<&str, usize> = doc.vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    let fill = |id: &str| colors[doc.vertices[by_id[id]].cluster.as_str()];
    let stroke = (doc.render.border_width / 4.0).clamp(0.25, 2.0);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = d.w,
        h = d.h
    );
    rect_element(&mut out, d, r#"fill="black""#);

    for b in &doc.bridges {
        let r = b.rect;
        let (low, high) = match b.across {
            Axis::X => (Rect::new(r.x, r.y, r.w / 2.0, r.h), Rect::new(r.x + r.w / 2.0, r.y, r.w / 2.0, r.h)),
            Axis::Y => (Rect::new(r.x, r.y, r.w, r.h / 2.0), Rect::new(r.x, r.y + r.h / 2.0, r.w, r.h / 2.0)),
        };
        rect_element(&mut out, low, &format!(r#"fill="{}""#, fill(&b.low)));
        rect_element(&mut out, high, &format!(r#"fill="{}""#, fill(&b.high)));
    }

    for v in &doc.vertices {
        rect_element(
            &mut out,
            v.rect,
            &format!(r#"fill="{}" stroke="white" stroke-width="{stroke}""#, colors[v.cluster.as_str()]),
        );
    }

    if !options.hide_labels {
        for v in &doc.vertices {
            if let Some(size) = fit_label(&v.label, v.rect) {
                let c = v.rect.center();
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" font-size="{size}" font-family="sans-serif" text-anchor="middle" dominant-baseline="central">{}</text>"#,
                    c.x,
                    c.y,
                    escape(&v.label)
                );
            }
        }
    }

    let highlighted: BTreeSet<&str> = options.highlighted.iter().map(String::as_str).collect();
    for v in doc.vertices.iter().filter(|v| highlighted.contains(v.id.as_str())) {
        rect_element(
            &mut out,
            v.rect,
            &format!(r#"fill="none" stroke="{CHANNEL_COLOR}" stroke-width="{}""#, 2.0 * stroke),
        );
    }

    let width = (doc.render.border_width * 0.6).max(0.5);
    for ch in &options.channels {
        let pts: Vec<String> = ch.points.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{CHANNEL_COLOR}" stroke-width="{width}" stroke-linejoin="round"/>"#,
            pts.join(" ")
        );
    }
    for cut in &options.cuts {
        let w = (4.0 * 0.7f64.powi(cut.depth as i32)).max(0.5);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{CUT_COLOR}" stroke-width="{w}"/>"#,
            cut.from.x, cut.from.y, cut.to.x, cut.to.y
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Number of drawable elements in an SVG string produced by [`render_svg`].
pub fn count_elements(svg: &str) -> usize {
    ["<rect ", "<text ", "<polyline ", "<line "].iter().map(|tag| svg.matches(tag).count()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_fitting() {
        let wide = Rect::new(0.0, 0.0, 400.0, 100.0);
        assert_eq!(fit_label("Javert", wide), Some(MAX_FONT));
        let narrow = Rect::new(0.0, 0.0, 40.0, 100.0);
        let size = fit_label("Javert", narrow).unwrap();
        assert!(size > MIN_FONT && size < MAX_FONT);
        assert!(size * CHAR_WIDTH * 6.0 <= 0.9 * 40.0);
        assert_eq!(fit_label("Mademoiselle Baptistine", Rect::new(0.0, 0.0, 30.0, 30.0)), None);
    }

    #[test]
    fn cut_lines_follow_tree_depth() {
        use crate::partition::{dar_partition, PartitionItem};
        let items: Vec<PartitionItem> = (0..4)
            .map(|i| PartitionItem {
                index: i,
                weight: 0.25,
                position: [i as f64, (i % 2) as f64],
            })
            .collect();
        let tree = dar_partition(Rect::new(0.0, 0.0, 4.0, 2.0), &items, 1.5);
        let cuts = cut_lines(&tree);
        assert_eq!(cuts.len(), 3);
        assert_eq!(cuts[0].depth, 0);
        assert!(cuts.iter().skip(1).all(|c| (1..3).contains(&c.depth)));
        let root = cuts[0];
        assert!((root.from.x - root.to.x).abs() + (root.from.y - root.to.y).abs() > 1.9);
        for c in &cuts {
            assert!(c.from.x == c.to.x || c.from.y == c.to.y);
        }
    }

    #[test]
    fn escaping() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
