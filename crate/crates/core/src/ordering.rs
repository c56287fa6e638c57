//! Bidimensional topological sort and the end-to-end ordering pipeline.
//!
//! Units (lines, paragraphs, or nested clusters) are sorted inside
//! their cluster after derotating by the cluster's mean angle. A `Col`
//! cluster emits top-to-bottom within overlapping x-spans, seeded
//! left-to-right; a `Row` cluster is the transpose. Ordering
//! constraints are consumed by a stable topological sort that always
//! emits the earliest seed-ranked available unit.
//!
//! Materializing every pairwise constraint is quadratic (a single tall
//! column constrains all pairs), so constraints are built by a sweep
//! over a segment "canvas" that only records each unit's most recent
//! overlapping predecessors. The sparse set has the same transitive
//! closure as the full relation, and the stable topological sort is
//! invariant under closure-preserving rewrites: a unit becomes
//! available exactly when all its relation predecessors are emitted in
//! both graphs, so the emitted order is identical.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::ops::Bound;

use thiserror::Error;

use crate::clustering::{
    build_hierarchy, cluster_paragraphs, merge_clusters, ClusterTree, Paragraph, ParagraphId,
    Pattern,
};
use crate::geometry::{circular_mean, AABox, RotatedBox};
use crate::signals::{Document, LineId, Predictions, SignalError};
use crate::skeleton::{build_skeleton, SkeletonError, SkeletonGraph};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("result references unknown line {0}")]
    UnknownLine(LineId),
}

/// Knobs for the ordering pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Minimum same-paragraph edge score for two lines to share a
    /// paragraph.
    pub cluster_threshold: f64,
    /// Fraction of a cluster's own box area that must be covered by a
    /// larger cluster's box before it nests inside it.
    pub hierarchy_overlap: f64,
    /// When set, column merging skips skeleton edges whose line centers
    /// are farther apart than this.
    pub max_col_edge_len: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            cluster_threshold: 0.5,
            hierarchy_overlap: 0.9,
            max_col_edge_len: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderedParagraph {
    pub id: ParagraphId,
    pub pattern: Pattern,
    /// Member lines in reading order.
    pub line_ids: Vec<LineId>,
}

/// Output of the ordering pipeline: the paragraph partition (sorted by
/// id), the paragraph reading order, and the flat line order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReadingOrderResult {
    pub paragraphs: Vec<OrderedParagraph>,
    pub reading_order: Vec<ParagraphId>,
    pub line_order: Vec<LineId>,
}

/// One maximal painted span of the sweep canvas: the units that most
/// recently covered `[start, end)`, all painted at the same batch
/// level.
#[derive(Debug, Clone)]
struct Segment {
    start: f64,
    end: f64,
    level: usize,
    owners: Vec<usize>,
}

/// Monotone mapping from a (non-NaN) coordinate to an orderable key, so
/// the canvas can live in a [`BTreeMap`]. Jittered inputs keep leaving
/// sliver remnants behind, so the canvas grows with the unit count and
/// every operation has to stay logarithmic in its size.
fn fkey(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Canvas segments keyed by [`fkey`] of their start; disjoint spans.
type Canvas = BTreeMap<u64, Segment>;

/// The single segment containing `lo`, if any: at most one exists
/// because spans are disjoint.
fn straddler(canvas: &Canvas, lo: f64) -> Option<(u64, &Segment)> {
    canvas
        .range(..=fkey(lo))
        .next_back()
        .filter(|(_, s)| s.end > lo)
        .map(|(&k, s)| (k, s))
}

fn query_owners(canvas: &Canvas, lo: f64, hi: f64, out: &mut Vec<usize>) {
    if hi <= lo {
        return;
    }
    if let Some((_, s)) = straddler(canvas, lo) {
        if s.end.min(hi) - s.start.max(lo) > 0.0 {
            out.extend_from_slice(&s.owners);
        }
    }
    for s in canvas
        .range((Bound::Excluded(fkey(lo)), Bound::Excluded(fkey(hi))))
        .map(|(_, s)| s)
    {
        if s.end.min(hi) - s.start.max(lo) > 0.0 {
            out.extend_from_slice(&s.owners);
        }
    }
}

fn paint(canvas: &mut Canvas, lo: f64, hi: f64, unit: usize, level: usize) {
    if hi <= lo {
        return;
    }
    let solo = |start: f64, end: f64| Segment {
        start,
        end,
        level,
        owners: vec![unit],
    };
    let mut keys: Vec<u64> = straddler(canvas, lo).map(|(k, _)| k).into_iter().collect();
    keys.extend(
        canvas
            .range((Bound::Excluded(fkey(lo)), Bound::Excluded(fkey(hi))))
            .map(|(&k, _)| k),
    );
    let mut pieces: Vec<Segment> = Vec::with_capacity(4);
    // Everything painted over that is not a same-level merge collapses
    // into maximal solo runs; preserving the old fragment boundaries
    // would shatter the canvas a little more on every paint and turn
    // the sweep quadratic.
    let mut solo_from = lo;
    for k in keys {
        let s = canvas.remove(&k).expect("collected key is present");
        if s.start < lo {
            let mut left = s.clone();
            left.end = lo;
            pieces.push(left);
        }
        let ov_start = s.start.max(lo);
        let ov_end = s.end.min(hi);
        if ov_end > ov_start && s.level == level {
            // Same batch: equal sort-axis centers never constrain
            // each other, so both stay visible to later units.
            if ov_start > solo_from {
                pieces.push(solo(solo_from, ov_start));
            }
            let mut owners = s.owners.clone();
            owners.push(unit);
            pieces.push(Segment {
                start: ov_start,
                end: ov_end,
                level,
                owners,
            });
            solo_from = ov_end;
        }
        if s.end > hi {
            let mut right = s;
            right.start = hi;
            pieces.push(right);
        }
    }
    if hi > solo_from {
        pieces.push(solo(solo_from, hi));
    }
    for p in pieces {
        canvas.insert(fkey(p.start), p);
    }
}

/// Constraint edges for one cluster's units: `i -> j` whenever the
/// units' cross-axis spans overlap and `i`'s sort-axis center strictly
/// precedes `j`'s. Only a sparse closure-equivalent subset is stored.
fn build_constraints(rects: &[AABox], pattern: Pattern) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = rects.len();
    let key = |i: usize| match pattern {
        Pattern::Col => rects[i].y_center(),
        Pattern::Row => rects[i].x_center(),
    };
    let span = |i: usize| match pattern {
        Pattern::Col => (rects[i].x_min, rects[i].x_max),
        Pattern::Row => (rects[i].y_min, rects[i].y_max),
    };

    let mut by_key: Vec<usize> = (0..n).collect();
    by_key.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    let mut canvas = Canvas::new();
    let mut owners: Vec<usize> = Vec::new();

    let mut start = 0;
    let mut level = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && key(by_key[end]) == key(by_key[start]) {
            end += 1;
        }
        for &u in &by_key[start..end] {
            let (lo, hi) = span(u);
            owners.clear();
            query_owners(&canvas, lo, hi, &mut owners);
            owners.sort_unstable();
            owners.dedup();
            for &o in &owners {
                adj[o].push(u);
                indeg[u] += 1;
            }
        }
        for &u in &by_key[start..end] {
            let (lo, hi) = span(u);
            paint(&mut canvas, lo, hi, u, level);
        }
        level += 1;
        start = end;
    }
    (adj, indeg)
}

/// Seed order: ascending sort-axis center, ties by cross-axis center,
/// then by position in the input.
fn seed_order(rects: &[AABox], pattern: Pattern) -> Vec<usize> {
    let mut seed: Vec<usize> = (0..rects.len()).collect();
    seed.sort_by(|&a, &b| {
        let (ma, ca, mb, cb) = match pattern {
            Pattern::Col => (
                rects[a].x_center(),
                rects[a].y_center(),
                rects[b].x_center(),
                rects[b].y_center(),
            ),
            Pattern::Row => (
                rects[a].y_center(),
                rects[a].x_center(),
                rects[b].y_center(),
                rects[b].x_center(),
            ),
        };
        ma.total_cmp(&mb).then(ca.total_cmp(&cb)).then(a.cmp(&b))
    });
    seed
}

/// Stable topological sort: among available units, always emit the one
/// earliest in seed order. The constraints are acyclic by construction
/// (each edge strictly increases the sort-axis center).
fn stable_topo(adj: &[Vec<usize>], indeg: &mut [usize], seed: &[usize]) -> Vec<usize> {
    let n = adj.len();
    let mut rank = vec![0usize; n];
    for (r, &idx) in seed.iter().enumerate() {
        rank[idx] = r;
    }
    let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    for idx in 0..n {
        if indeg[idx] == 0 {
            heap.push(Reverse(rank[idx]));
        }
    }
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(r)) = heap.pop() {
        let idx = seed[r];
        order.push(idx);
        for &succ in &adj[idx] {
            indeg[succ] -= 1;
            if indeg[succ] == 0 {
                heap.push(Reverse(rank[succ]));
            }
        }
    }
    debug_assert_eq!(order.len(), n, "constraints must be acyclic");
    order
}

/// Order a cluster's units: derotate by the mean angle, take
/// axis-aligned boxes, build the pattern's constraints, and emit the
/// stable topological order. Returns a permutation of `0..boxes.len()`.
pub fn sort_within(boxes: &[RotatedBox], pattern: Pattern) -> Vec<usize> {
    let n = boxes.len();
    if n <= 1 {
        return (0..n).collect();
    }
    let angles: Vec<f64> = boxes.iter().map(|b| b.angle).collect();
    let alpha = circular_mean(&angles).expect("at least two angles");
    let rects: Vec<AABox> = boxes
        .iter()
        .map(|b| b.rotate_about_origin(-alpha).aabb())
        .collect();
    let (adj, mut indeg) = build_constraints(&rects, pattern);
    let seed = seed_order(&rects, pattern);
    stable_topo(&adj, &mut indeg, &seed)
}

fn order_lines_indexed(
    index: &BTreeMap<LineId, RotatedBox>,
    line_ids: &[LineId],
) -> Result<Vec<LineId>, PipelineError> {
    let boxes: Vec<RotatedBox> = line_ids
        .iter()
        .map(|id| index.get(id).copied().ok_or(PipelineError::UnknownLine(*id)))
        .collect::<Result<_, _>>()?;
    let perm = sort_within(&boxes, Pattern::Col);
    Ok(perm.into_iter().map(|i| line_ids[i]).collect())
}

/// Reading order of the lines inside one paragraph (always `Col`:
/// lines stack along the paragraph's reading direction).
pub fn order_lines_in_paragraph(
    doc: &Document,
    line_ids: &[LineId],
) -> Result<Vec<LineId>, PipelineError> {
    let index: BTreeMap<LineId, RotatedBox> =
        doc.lines.iter().map(|l| (l.id, l.bbox)).collect();
    order_lines_indexed(&index, line_ids)
}

enum UnitRef {
    Para(ParagraphId),
    Child(usize),
}

fn emit_cluster(
    tree: &ClusterTree,
    paragraphs: &[Paragraph],
    line_orders: &BTreeMap<ParagraphId, Vec<LineId>>,
    cluster: usize,
    para_order: &mut Vec<ParagraphId>,
    line_order: &mut Vec<LineId>,
) {
    let c = &tree.clusters[cluster];
    let mut unit_boxes = Vec::with_capacity(c.paragraph_ids.len() + c.child_ids.len());
    let mut refs = Vec::with_capacity(unit_boxes.capacity());
    for &pid in &c.paragraph_ids {
        unit_boxes.push(paragraphs[pid as usize].bbox);
        refs.push(UnitRef::Para(pid));
    }
    for &child in &c.child_ids {
        unit_boxes.push(tree.clusters[child as usize].bbox);
        refs.push(UnitRef::Child(child as usize));
    }
    for i in sort_within(&unit_boxes, c.pattern) {
        match refs[i] {
            UnitRef::Para(pid) => {
                para_order.push(pid);
                line_order.extend_from_slice(&line_orders[&pid]);
            }
            UnitRef::Child(child) => {
                emit_cluster(tree, paragraphs, line_orders, child, para_order, line_order);
            }
        }
    }
}

/// Linearize the cluster tree: inside each cluster, paragraphs and
/// child clusters participate as opaque boxes sorted by the cluster's
/// pattern; paragraphs expand to their ordered lines, children recurse.
pub fn traverse(
    tree: &ClusterTree,
    paragraphs: &[Paragraph],
    line_orders: &BTreeMap<ParagraphId, Vec<LineId>>,
) -> (Vec<ParagraphId>, Vec<LineId>) {
    let mut para_order = Vec::with_capacity(paragraphs.len());
    let mut line_order = Vec::new();
    emit_cluster(
        tree,
        paragraphs,
        line_orders,
        tree.root as usize,
        &mut para_order,
        &mut line_order,
    );
    (para_order, line_order)
}

/// Run clustering and ordering over an already-built skeleton.
pub fn read_order_with_graph(
    doc: &Document,
    graph: &SkeletonGraph,
    preds: &Predictions,
    config: &PipelineConfig,
) -> Result<ReadingOrderResult, PipelineError> {
    if doc.lines.is_empty() {
        return Ok(ReadingOrderResult::default());
    }
    preds.validate(doc, graph)?;
    let paragraphs = cluster_paragraphs(doc, graph, preds, config.cluster_threshold)?;
    let clusters = merge_clusters(doc, graph, &paragraphs, config.max_col_edge_len);
    let tree = build_hierarchy(clusters, config.hierarchy_overlap);

    let index: BTreeMap<LineId, RotatedBox> =
        doc.lines.iter().map(|l| (l.id, l.bbox)).collect();
    let mut line_orders: BTreeMap<ParagraphId, Vec<LineId>> = BTreeMap::new();
    for p in &paragraphs {
        line_orders.insert(p.id, order_lines_indexed(&index, &p.line_ids)?);
    }

    let (reading_order, line_order) = traverse(&tree, &paragraphs, &line_orders);
    let out_paragraphs = paragraphs
        .iter()
        .map(|p| OrderedParagraph {
            id: p.id,
            pattern: p.pattern,
            line_ids: line_orders[&p.id].clone(),
        })
        .collect();
    Ok(ReadingOrderResult {
        paragraphs: out_paragraphs,
        reading_order,
        line_order,
    })
}

/// Full pipeline: build the skeleton, validate the predictions against
/// it, cluster, and order. An empty document yields an empty result.
pub fn read_order_pipeline(
    doc: &Document,
    preds: &Predictions,
    config: &PipelineConfig,
) -> Result<ReadingOrderResult, PipelineError> {
    if doc.lines.is_empty() {
        return Ok(ReadingOrderResult::default());
    }
    let graph = build_skeleton(&doc.lines)?;
    read_order_with_graph(doc, &graph, preds, config)
}
