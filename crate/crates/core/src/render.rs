//! SVG rendering of a document and its computed reading order.
//!
//! Paragraph hulls are filled (column paragraphs yellow, row
//! paragraphs pink), line boxes are drawn as thin gray outlines on
//! top, and a dark blue polyline traces the paragraph reading order
//! through the hull centers. Output is deterministic: fixed element
//! order, six-decimal coordinates.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::clustering::{ParagraphId, Pattern};
use crate::geometry::{circular_mean, min_containing_box, Point, RotatedBox};
use crate::ordering::ReadingOrderResult;
use crate::signals::{Document, LineId};

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("result references unknown line {0}")]
    UnknownLine(LineId),
    #[error("result references unknown paragraph {0}")]
    UnknownParagraph(ParagraphId),
}

fn polygon(out: &mut String, corners: &[Point; 4], style: &str) {
    out.push_str("<polygon points=\"");
    for (i, c) in corners.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{:.6},{:.6}", c.x, c.y).expect("writing to a string");
    }
    out.push_str("\" ");
    out.push_str(style);
    out.push_str("/>\n");
}

/// Render the document and its reading order as a standalone SVG.
pub fn render_svg(doc: &Document, result: &ReadingOrderResult) -> Result<String, RenderError> {
    let lines: BTreeMap<LineId, &RotatedBox> =
        doc.lines.iter().map(|l| (l.id, &l.bbox)).collect();

    // Paragraph hulls first (painted underneath), in paragraph order.
    let mut hulls: BTreeMap<ParagraphId, (RotatedBox, Pattern)> = BTreeMap::new();
    for p in &result.paragraphs {
        let mut corners = Vec::with_capacity(p.line_ids.len() * 4);
        let mut angles = Vec::with_capacity(p.line_ids.len());
        for id in &p.line_ids {
            let b = lines.get(id).ok_or(RenderError::UnknownLine(*id))?;
            corners.extend(b.corners());
            angles.push(b.angle);
        }
        if corners.is_empty() {
            continue;
        }
        let angle = circular_mean(&angles).expect("non-empty angle list");
        let hull = min_containing_box(&corners, angle).expect("non-empty corner list");
        hulls.insert(p.id, (hull, p.pattern));
    }
    for pid in &result.reading_order {
        if !hulls.contains_key(pid) && result.paragraphs.iter().all(|p| p.id != *pid) {
            return Err(RenderError::UnknownParagraph(*pid));
        }
    }

    // View box from the line geometry plus a small margin.
    let mut view = (0.0, 0.0, 100.0, 100.0);
    if !doc.lines.is_empty() {
        let pts: Vec<Point> = doc.lines.iter().flat_map(|l| l.bbox.corners()).collect();
        let bb = crate::geometry::AABox::from_points(&pts).expect("document has lines");
        let margin = 0.02 * bb.width().max(bb.height()).max(1.0);
        view = (
            bb.x_min - margin,
            bb.y_min - margin,
            bb.width() + 2.0 * margin,
            bb.height() + 2.0 * margin,
        );
    }
    let stroke = 0.0015 * view.2.max(view.3);

    let mut out = String::new();
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        view.0, view.1, view.2, view.3
    )
    .expect("writing to a string");

    for p in &result.paragraphs {
        if let Some((hull, pattern)) = hulls.get(&p.id) {
            let fill = match pattern {
                Pattern::Col => "yellow",
                Pattern::Row => "pink",
            };
            let style = format!("fill=\"{fill}\" fill-opacity=\"0.5\" stroke=\"none\"");
            polygon(&mut out, &hull.corners(), &style);
        }
    }
    let line_style = format!("fill=\"none\" stroke=\"gray\" stroke-width=\"{stroke:.6}\"");
    for l in &doc.lines {
        polygon(&mut out, &l.bbox.corners(), &line_style);
    }
    let path: Vec<Point> = result
        .reading_order
        .iter()
        .filter_map(|pid| hulls.get(pid).map(|(h, _)| h.center()))
        .collect();
    if path.len() > 1 {
        out.push_str("<polyline points=\"");
        for (i, c) in path.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{:.6},{:.6}", c.x, c.y).expect("writing to a string");
        }
        write!(
            out,
            "\" fill=\"none\" stroke=\"darkblue\" stroke-width=\"{:.6}\"/>\n",
            2.0 * stroke
        )
        .expect("writing to a string");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
