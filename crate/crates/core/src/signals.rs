//! Document model and the classifier boundary.
//!
//! The clustering stage consumes two kinds of scores over the skeleton
//! graph: a per-line probability that the line belongs to a row-pattern
//! (table-like) region, and a per-edge probability that the endpoints
//! belong to the same paragraph. Scores normally come from a trained
//! model via a predictions file; this module also provides a constant
//! baseline and a ground-truth oracle so the rest of the pipeline can be
//! exercised without one.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::clustering::{ParagraphId, Pattern};
use crate::geometry::RotatedBox;
use crate::skeleton::SkeletonGraph;

pub type LineId = u32;
pub type WordId = u32;

/// Number of values in a per-line spatial feature vector.
pub const NODE_FEATURE_LEN: usize = 28;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("missing node score for line {0}")]
    MissingNodeScore(LineId),
    #[error("missing edge score ({0},{1})")]
    MissingEdgeScore(LineId, LineId),
    #[error("node score for line {line} is {value}, outside [0,1]")]
    NodeScoreOutOfRange { line: LineId, value: f64 },
    #[error("edge score ({a},{b}) is {value}, outside [0,1]")]
    EdgeScoreOutOfRange { a: LineId, b: LineId, value: f64 },
    #[error("prediction references unknown line {0}")]
    UnknownLine(LineId),
    #[error("prediction references edge ({0},{1}) which is not in the skeleton")]
    UnknownEdge(LineId, LineId),
    #[error("ground truth does not assign line {0} to a paragraph")]
    MissingTruth(LineId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub id: WordId,
    pub text: String,
    pub bbox: RotatedBox,
}

/// One OCR text line: a rotated box and the words it contains, in
/// reading (OCR) order.
#[derive(Debug, Clone, PartialEq)]
pub struct TextLine {
    pub id: LineId,
    pub bbox: RotatedBox,
    pub words: Vec<Word>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub lines: Vec<TextLine>,
}

impl Document {
    pub fn line(&self, id: LineId) -> Option<&TextLine> {
        self.lines.iter().find(|l| l.id == id)
    }

    pub fn line_ids(&self) -> impl Iterator<Item = LineId> + '_ {
        self.lines.iter().map(|l| l.id)
    }
}

/// Reference segmentation of a document: which paragraph each line
/// belongs to, each paragraph's pattern, the global paragraph order,
/// and each paragraph's words in reading order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub line_to_paragraph: BTreeMap<LineId, ParagraphId>,
    pub paragraph_patterns: BTreeMap<ParagraphId, Pattern>,
    pub paragraph_order: Vec<ParagraphId>,
    pub paragraph_words: BTreeMap<ParagraphId, Vec<WordId>>,
}

/// Scores covering every line and every skeleton edge of one document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Predictions {
    node_scores: BTreeMap<LineId, f64>,
    edge_scores: BTreeMap<(LineId, LineId), f64>,
}

fn ordered(a: LineId, b: LineId) -> (LineId, LineId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Predictions {
    pub fn set_node(&mut self, line: LineId, p_row: f64) {
        self.node_scores.insert(line, p_row);
    }

    pub fn set_edge(&mut self, a: LineId, b: LineId, p_same: f64) {
        self.edge_scores.insert(ordered(a, b), p_same);
    }

    pub fn p_row(&self, line: LineId) -> Result<f64, SignalError> {
        self.node_scores
            .get(&line)
            .copied()
            .ok_or(SignalError::MissingNodeScore(line))
    }

    pub fn p_same_paragraph(&self, a: LineId, b: LineId) -> Result<f64, SignalError> {
        let (a, b) = ordered(a, b);
        self.edge_scores
            .get(&(a, b))
            .copied()
            .ok_or(SignalError::MissingEdgeScore(a, b))
    }

    /// Node scores in ascending line order.
    pub fn node_scores(&self) -> impl Iterator<Item = (LineId, f64)> + '_ {
        self.node_scores.iter().map(|(&k, &v)| (k, v))
    }

    /// Edge scores keyed by the canonical `(low, high)` pair, ascending.
    pub fn edge_scores(&self) -> impl Iterator<Item = (LineId, LineId, f64)> + '_ {
        self.edge_scores.iter().map(|(&(a, b), &v)| (a, b, v))
    }

    /// Check that the scores exactly cover `doc`'s lines and `graph`'s
    /// edges, with every score in `[0, 1]`.
    pub fn validate(&self, doc: &Document, graph: &SkeletonGraph) -> Result<(), SignalError> {
        for line in &doc.lines {
            let v = self.p_row(line.id)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(SignalError::NodeScoreOutOfRange {
                    line: line.id,
                    value: v,
                });
            }
        }
        for &(a, b) in graph.edges() {
            let v = self.p_same_paragraph(a, b)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(SignalError::EdgeScoreOutOfRange { a, b, value: v });
            }
        }
        let ids: BTreeSet<LineId> = doc.lines.iter().map(|l| l.id).collect();
        for &line in self.node_scores.keys() {
            if !ids.contains(&line) {
                return Err(SignalError::UnknownLine(line));
            }
        }
        for &(a, b) in self.edge_scores.keys() {
            if !graph.has_edge(a, b) {
                return Err(SignalError::UnknownEdge(a, b));
            }
        }
        Ok(())
    }
}

/// Spatial feature vector for one line, recomputable from its box alone.
///
/// Layout: the four corner coordinates in corner order
/// `[x0, y0, x1, y1, x2, y2, x3, y3]`, then `[cx, cy, w, h]`, then the
/// eight corner coordinates multiplied by `cos(angle)`, then the same
/// eight multiplied by `sin(angle)`.
pub fn node_spatial_features(line: &TextLine) -> [f64; NODE_FEATURE_LEN] {
    let b = &line.bbox;
    let corners = b.corners();
    let (sin, cos) = b.angle.sin_cos();
    let mut out = [0.0; NODE_FEATURE_LEN];
    for (i, c) in corners.iter().enumerate() {
        out[2 * i] = c.x;
        out[2 * i + 1] = c.y;
    }
    out[8] = b.cx;
    out[9] = b.cy;
    out[10] = b.w;
    out[11] = b.h;
    for i in 0..8 {
        out[12 + i] = out[i] * cos;
        out[20 + i] = out[i] * sin;
    }
    out
}

/// Predictions that assign every line the same pattern and every edge
/// the same paragraph decision. The column-pattern, split-everything
/// variant (`pattern = Col`, `same_paragraph = false`) is the classic
/// layout-free baseline.
pub fn constant_predictor(
    doc: &Document,
    graph: &SkeletonGraph,
    pattern: Pattern,
    same_paragraph: bool,
) -> Predictions {
    let node = match pattern {
        Pattern::Row => 1.0,
        Pattern::Col => 0.0,
    };
    let edge = if same_paragraph { 1.0 } else { 0.0 };
    let mut preds = Predictions::default();
    for line in &doc.lines {
        preds.set_node(line.id, node);
    }
    for &(a, b) in graph.edges() {
        preds.set_edge(a, b, edge);
    }
    preds
}

/// Perfect predictions derived from ground truth: `p_row = 1` iff the
/// line's paragraph has the row pattern, `p_same_paragraph = 1` iff the
/// edge endpoints share a paragraph.
pub fn oracle_predictor(
    doc: &Document,
    graph: &SkeletonGraph,
    truth: &GroundTruth,
) -> Result<Predictions, SignalError> {
    let mut preds = Predictions::default();
    for line in &doc.lines {
        let para = truth
            .line_to_paragraph
            .get(&line.id)
            .ok_or(SignalError::MissingTruth(line.id))?;
        let pattern = truth
            .paragraph_patterns
            .get(para)
            .ok_or(SignalError::MissingTruth(line.id))?;
        preds.set_node(
            line.id,
            match pattern {
                Pattern::Row => 1.0,
                Pattern::Col => 0.0,
            },
        );
    }
    for &(a, b) in graph.edges() {
        let pa = truth
            .line_to_paragraph
            .get(&a)
            .ok_or(SignalError::MissingTruth(a))?;
        let pb = truth
            .line_to_paragraph
            .get(&b)
            .ok_or(SignalError::MissingTruth(b))?;
        preds.set_edge(a, b, if pa == pb { 1.0 } else { 0.0 });
    }
    Ok(preds)
}
