//! Weak pattern labels for annotated paragraph sequences.
//!
//! Given a group of paragraph boxes listed in reading order, each
//! consecutive pair is classified as vertically or horizontally
//! related from the pair's joint geometry, and each paragraph then
//! takes a column/row label from its two surrounding relations. The
//! labels serve as training targets, so ambiguous geometry yields
//! `Unknown` rather than a guess.

use crate::clustering::ParagraphId;
use crate::geometry::{axis_overlap, circular_mean, intersection_area, Axis, RotatedBox};

/// Largest axis gap overlap, as a fraction of the joint box extent,
/// still read as "separated" along that axis.
const REL_GAP_FRAC: f64 = 0.1;
/// Fraction of a bystander paragraph's area the joint box must eat for
/// the pair to count as spanning other content.
const COVER_FRAC: f64 = 0.5;

/// How two consecutive paragraphs sit relative to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRelation {
    /// First above the second, reading flows downward.
    Vertical,
    /// First left of the second, reading flows sideways.
    Horizontal,
    Unknown,
}

/// Reading-flow label for a single paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternLabel {
    Col,
    Row,
    Unknown,
}

impl PatternLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternLabel::Col => "col",
            PatternLabel::Row => "row",
            PatternLabel::Unknown => "unknown",
        }
    }
}

/// One annotated paragraph: an opaque id and its bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedParagraph {
    pub id: ParagraphId,
    pub bbox: RotatedBox,
}

/// A group of paragraphs annotated in reading order. Relations are
/// only judged between neighbors of the same group.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedGroup {
    pub id: u32,
    pub paragraphs: Vec<AnnotatedParagraph>,
}

/// Classify the relation from `a` to `b`, judged in the pair's mean
/// reading frame. `others` are the remaining paragraphs of the group:
/// a horizontally separated pair whose joint box swallows one of them
/// is a column break, not a side-by-side read.
pub fn pair_relation(a: &RotatedBox, b: &RotatedBox, others: &[RotatedBox]) -> PairRelation {
    let alpha = circular_mean(&[a.angle, b.angle]).expect("pair of angles");
    let ra = a.rotate_about_origin(-alpha).aabb();
    let rb = b.rotate_about_origin(-alpha).aabb();
    let joint = ra.union(&rb);

    if axis_overlap(&ra, &rb, Axis::Y) < REL_GAP_FRAC * joint.height()
        && ra.y_center() < rb.y_center()
    {
        return PairRelation::Vertical;
    }
    if axis_overlap(&ra, &rb, Axis::X) < REL_GAP_FRAC * joint.width()
        && ra.x_center() < rb.x_center()
    {
        let joint_box = RotatedBox::new(
            joint.x_center(),
            joint.y_center(),
            joint.width(),
            joint.height(),
            0.0,
        );
        let spans_other = others.iter().any(|o| {
            let od = o.rotate_about_origin(-alpha);
            intersection_area(&joint_box, &od) > COVER_FRAC * od.area()
        });
        return if spans_other {
            PairRelation::Vertical
        } else {
            PairRelation::Horizontal
        };
    }
    PairRelation::Unknown
}

/// A paragraph's label from the relations to its predecessor and
/// successor; a missing neighbor contributes `Unknown`.
fn combine(prev: PairRelation, next: PairRelation) -> PatternLabel {
    use PairRelation::*;
    match (prev, next) {
        (Unknown, Unknown) => PatternLabel::Unknown,
        (Unknown, Vertical) | (Vertical, Unknown) | (Vertical, Vertical) => PatternLabel::Col,
        (Unknown, Horizontal) | (Horizontal, Unknown) => PatternLabel::Row,
        // Mixed or doubly horizontal neighborhoods read sideways.
        _ => PatternLabel::Row,
    }
}

/// Label every paragraph of an annotated group, in group order.
pub fn label_patterns(group: &AnnotatedGroup) -> Vec<(ParagraphId, PatternLabel)> {
    let n = group.paragraphs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut rels = Vec::with_capacity(n - 1);
    for k in 0..n.saturating_sub(1) {
        let others: Vec<RotatedBox> = group
            .paragraphs
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != k && m != k + 1)
            .map(|(_, p)| p.bbox)
            .collect();
        rels.push(pair_relation(
            &group.paragraphs[k].bbox,
            &group.paragraphs[k + 1].bbox,
            &others,
        ));
    }
    (0..n)
        .map(|k| {
            let prev = if k == 0 { PairRelation::Unknown } else { rels[k - 1] };
            let next = if k + 1 == n { PairRelation::Unknown } else { rels[k] };
            (group.paragraphs[k].id, combine(prev, next))
        })
        .collect()
}
