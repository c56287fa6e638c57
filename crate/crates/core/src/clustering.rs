//! Hierarchical clustering of scored lines into paragraphs and
//! column/row clusters.
//!
//! Paragraphs are connected components of skeleton edges whose
//! same-paragraph score clears a threshold. Each paragraph votes itself
//! a pattern from its lines' row scores, then same-pattern paragraphs
//! merge: column paragraphs across direct edges, row paragraphs across
//! direct and hop edges (tables spread sideways, so two-hop reach is
//! needed to bridge cell gaps). Finally clusters nest by box
//! containment into a tree whose root is a synthetic column cluster.

use std::collections::BTreeMap;

use crate::geometry::{circular_mean, intersection_area, min_containing_box, Point, RotatedBox};
use crate::signals::{Document, LineId, Predictions, SignalError};
use crate::skeleton::SkeletonGraph;

pub type ParagraphId = u32;
pub type ClusterId = u32;

/// Reading pattern of a paragraph or cluster: `Col` reads stacked units
/// top-to-bottom (prose), `Row` reads side-by-side units left-to-right
/// (table rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    Col,
    Row,
}

impl Pattern {
    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Col => "col",
            Pattern::Row => "row",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paragraph {
    pub id: ParagraphId,
    /// Member line ids, ascending.
    pub line_ids: Vec<LineId>,
    pub bbox: RotatedBox,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: ClusterId,
    /// Member paragraph ids, ascending.
    pub paragraph_ids: Vec<ParagraphId>,
    /// Nested clusters, ascending; filled by [`build_hierarchy`].
    pub child_ids: Vec<ClusterId>,
    pub pattern: Pattern,
    pub bbox: RotatedBox,
}

/// Cluster forest rooted at a synthetic top-level cluster. Cluster ids
/// equal their index in `clusters`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    pub clusters: Vec<Cluster>,
    pub root: ClusterId,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index wins so representatives are stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Smallest box containing all the given boxes, oriented at the mean
/// of their angles.
fn containing_box(boxes: &[RotatedBox]) -> RotatedBox {
    let angles: Vec<f64> = boxes.iter().map(|b| b.angle).collect();
    let mean = circular_mean(&angles).expect("containing_box of nothing");
    let pts: Vec<Point> = boxes.iter().flat_map(|b| b.corners()).collect();
    min_containing_box(&pts, mean).expect("containing_box of nothing")
}

/// Majority vote over member lines' row scores: `Row` only on a strict
/// majority of lines with `p_row >= 0.5`; an exact tie stays `Col`.
pub fn vote_pattern(line_ids: &[LineId], preds: &Predictions) -> Result<Pattern, SignalError> {
    let mut rows = 0usize;
    for &id in line_ids {
        if preds.p_row(id)? >= 0.5 {
            rows += 1;
        }
    }
    Ok(if rows * 2 > line_ids.len() {
        Pattern::Row
    } else {
        Pattern::Col
    })
}

/// Partition lines into paragraphs: connected components of edges with
/// `p_same_paragraph >= threshold` (a score exactly at the threshold
/// merges). Paragraph ids are assigned by ascending smallest member
/// line id.
pub fn cluster_paragraphs(
    doc: &Document,
    graph: &SkeletonGraph,
    preds: &Predictions,
    threshold: f64,
) -> Result<Vec<Paragraph>, SignalError> {
    let n = doc.lines.len();
    let index_of: BTreeMap<LineId, usize> = doc
        .lines
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id, i))
        .collect();
    let mut dsu = DisjointSet::new(n);
    for &(a, b) in graph.edges() {
        if preds.p_same_paragraph(a, b)? >= threshold {
            dsu.union(index_of[&a], index_of[&b]);
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = dsu.find(i);
        groups.entry(root).or_default().push(i);
    }

    let mut keyed: Vec<(LineId, Vec<usize>)> = groups
        .into_values()
        .map(|members| {
            let min_id = members.iter().map(|&i| doc.lines[i].id).min().unwrap();
            (min_id, members)
        })
        .collect();
    keyed.sort_by_key(|(min_id, _)| *min_id);

    let mut paragraphs = Vec::with_capacity(keyed.len());
    for (pid, (_, members)) in keyed.into_iter().enumerate() {
        let mut line_ids: Vec<LineId> = members.iter().map(|&i| doc.lines[i].id).collect();
        line_ids.sort_unstable();
        let boxes: Vec<RotatedBox> = members.iter().map(|&i| doc.lines[i].bbox).collect();
        let pattern = vote_pattern(&line_ids, preds)?;
        paragraphs.push(Paragraph {
            id: pid as ParagraphId,
            line_ids,
            bbox: containing_box(&boxes),
            pattern,
        });
    }
    Ok(paragraphs)
}

/// Merge same-pattern paragraphs into clusters: column pairs across
/// direct skeleton edges (optionally skipping edges whose line centers
/// are farther apart than `max_col_edge_len`), then row pairs across
/// direct and hop edges. Cluster ids are assigned by ascending smallest
/// member paragraph id.
pub fn merge_clusters(
    doc: &Document,
    graph: &SkeletonGraph,
    paragraphs: &[Paragraph],
    max_col_edge_len: Option<f64>,
) -> Vec<Cluster> {
    let para_of: BTreeMap<LineId, usize> = paragraphs
        .iter()
        .enumerate()
        .flat_map(|(pi, p)| p.line_ids.iter().map(move |&l| (l, pi)))
        .collect();
    let center_of: BTreeMap<LineId, Point> = doc
        .lines
        .iter()
        .map(|l| (l.id, l.bbox.center()))
        .collect();

    let mut dsu = DisjointSet::new(paragraphs.len());
    for &(a, b) in graph.edges() {
        let (pa, pb) = (para_of[&a], para_of[&b]);
        if pa == pb {
            continue;
        }
        if paragraphs[pa].pattern != Pattern::Col || paragraphs[pb].pattern != Pattern::Col {
            continue;
        }
        if let Some(limit) = max_col_edge_len {
            if center_of[&a].dist(center_of[&b]) > limit {
                continue;
            }
        }
        dsu.union(pa, pb);
    }
    for &(a, b) in graph.edges().iter().chain(graph.hop_edges().iter()) {
        let (pa, pb) = (para_of[&a], para_of[&b]);
        if pa == pb {
            continue;
        }
        if paragraphs[pa].pattern == Pattern::Row && paragraphs[pb].pattern == Pattern::Row {
            dsu.union(pa, pb);
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for pi in 0..paragraphs.len() {
        let root = dsu.find(pi);
        groups.entry(root).or_default().push(pi);
    }
    let mut keyed: Vec<(ParagraphId, Vec<usize>)> = groups
        .into_values()
        .map(|members| {
            let min_id = members.iter().map(|&i| paragraphs[i].id).min().unwrap();
            (min_id, members)
        })
        .collect();
    keyed.sort_by_key(|(min_id, _)| *min_id);

    keyed
        .into_iter()
        .enumerate()
        .map(|(cid, (_, members))| {
            let pattern = paragraphs[members[0]].pattern;
            debug_assert!(
                members.iter().all(|&i| paragraphs[i].pattern == pattern),
                "merged clusters mix patterns"
            );
            let mut paragraph_ids: Vec<ParagraphId> =
                members.iter().map(|&i| paragraphs[i].id).collect();
            paragraph_ids.sort_unstable();
            let boxes: Vec<RotatedBox> = members.iter().map(|&i| paragraphs[i].bbox).collect();
            Cluster {
                id: cid as ClusterId,
                paragraph_ids,
                child_ids: Vec::new(),
                pattern,
                bbox: containing_box(&boxes),
            }
        })
        .collect()
}

/// Nest clusters by containment: in ascending box area, each cluster
/// attaches to the smallest strictly-larger cluster whose box overlaps
/// more than `overlap_threshold` of its own area. Whatever remains
/// unattached becomes a child of a synthetic column-pattern root.
pub fn build_hierarchy(mut clusters: Vec<Cluster>, overlap_threshold: f64) -> ClusterTree {
    let k = clusters.len();
    debug_assert!(clusters.iter().enumerate().all(|(i, c)| c.id as usize == i));

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        clusters[a]
            .bbox
            .area()
            .total_cmp(&clusters[b].bbox.area())
            .then(a.cmp(&b))
    });

    let mut parent: Vec<Option<usize>> = vec![None; k];
    for &i in &order {
        let area_i = clusters[i].bbox.area();
        let mut best: Option<(f64, usize)> = None;
        for (j, cj) in clusters.iter().enumerate() {
            if j == i {
                continue;
            }
            let area_j = cj.bbox.area();
            if area_j <= area_i {
                continue;
            }
            if intersection_area(&clusters[i].bbox, &cj.bbox) <= overlap_threshold * area_i {
                continue;
            }
            let better = match best {
                None => true,
                Some((best_area, best_j)) => {
                    area_j < best_area || (area_j == best_area && j < best_j)
                }
            };
            if better {
                best = Some((area_j, j));
            }
        }
        parent[i] = best.map(|(_, j)| j);
    }

    let root_bbox = if clusters.is_empty() {
        RotatedBox::new(0.0, 0.0, 0.0, 0.0, 0.0)
    } else {
        let boxes: Vec<RotatedBox> = clusters.iter().map(|c| c.bbox).collect();
        containing_box(&boxes)
    };
    let root_id = k as ClusterId;
    let mut root = Cluster {
        id: root_id,
        paragraph_ids: Vec::new(),
        child_ids: Vec::new(),
        pattern: Pattern::Col,
        bbox: root_bbox,
    };
    for i in 0..k {
        match parent[i] {
            Some(j) => clusters[j].child_ids.push(i as ClusterId),
            None => root.child_ids.push(i as ClusterId),
        }
    }
    for c in &mut clusters {
        c.child_ids.sort_unstable();
    }
    clusters.push(root);
    ClusterTree {
        clusters,
        root: root_id,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::TextLine;
    use crate::skeleton::build_skeleton;

    fn line(id: LineId, cx: f64, cy: f64) -> TextLine {
        TextLine {
            id,
            bbox: RotatedBox::new(cx, cy, 8.0, 2.0, 0.0),
            words: vec![],
        }
    }

    /// Four stacked lines; the skeleton chains them 0-1-2-3.
    fn stacked_doc() -> (Document, SkeletonGraph) {
        let doc = Document {
            lines: vec![
                line(0, 0.0, 0.0),
                line(1, 0.0, 3.0),
                line(2, 0.0, 6.0),
                line(3, 0.0, 9.0),
            ],
        };
        let graph = build_skeleton(&doc.lines).unwrap();
        assert!(graph.has_edge(0, 1) && graph.has_edge(1, 2) && graph.has_edge(2, 3));
        (doc, graph)
    }

    fn preds_with(
        doc: &Document,
        graph: &SkeletonGraph,
        p_row: f64,
        edge_score: impl Fn(LineId, LineId) -> f64,
    ) -> Predictions {
        let mut p = Predictions::default();
        for l in &doc.lines {
            p.set_node(l.id, p_row);
        }
        for &(a, b) in graph.edges() {
            p.set_edge(a, b, edge_score(a, b));
        }
        p
    }

    #[test]
    fn components_split_where_scores_fall_below_threshold() {
        let (doc, graph) = stacked_doc();
        let preds = preds_with(&doc, &graph, 0.0, |a, b| {
            if (a, b) == (1, 2) {
                0.2
            } else {
                0.9
            }
        });
        let paras = cluster_paragraphs(&doc, &graph, &preds, 0.5).unwrap();
        assert_eq!(paras.len(), 2);
        assert_eq!(paras[0].line_ids, vec![0, 1]);
        assert_eq!(paras[1].line_ids, vec![2, 3]);
        assert_eq!(paras[0].id, 0);
        assert_eq!(paras[1].id, 1);
    }

    #[test]
    fn score_exactly_at_threshold_merges() {
        let (doc, graph) = stacked_doc();
        let preds = preds_with(&doc, &graph, 0.0, |_, _| 0.5);
        let paras = cluster_paragraphs(&doc, &graph, &preds, 0.5).unwrap();
        assert_eq!(paras.len(), 1);
        assert_eq!(paras[0].line_ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn vote_ties_go_to_col() {
        let (doc, graph) = stacked_doc();
        let mut preds = preds_with(&doc, &graph, 0.0, |_, _| 0.0);
        preds.set_node(0, 0.9);
        preds.set_node(1, 0.1);
        assert_eq!(vote_pattern(&[0, 1], &preds).unwrap(), Pattern::Col);
        preds.set_node(2, 0.8);
        assert_eq!(vote_pattern(&[0, 1, 2], &preds).unwrap(), Pattern::Row);
        assert_eq!(vote_pattern(&[1], &preds).unwrap(), Pattern::Col);
        assert_eq!(vote_pattern(&[0], &preds).unwrap(), Pattern::Row);
    }

    #[test]
    fn paragraph_box_contains_member_lines() {
        let (doc, graph) = stacked_doc();
        let preds = preds_with(&doc, &graph, 0.0, |_, _| 1.0);
        let paras = cluster_paragraphs(&doc, &graph, &preds, 0.5).unwrap();
        let bbox = paras[0].bbox;
        for l in &doc.lines {
            for c in l.bbox.corners() {
                assert!(
                    bbox.contains_point(c) || {
                        // Allow boundary points to sit within fp slack.
                        let grown =
                            RotatedBox::new(bbox.cx, bbox.cy, bbox.w + 1e-9, bbox.h + 1e-9, bbox.angle);
                        grown.contains_point(c)
                    }
                );
            }
        }
    }

    #[test]
    fn col_paragraphs_merge_across_direct_edges_only() {
        let (doc, graph) = stacked_doc();
        // Two col paragraphs {0,1} and {2,3}, direct edge (1,2) between them.
        let preds = preds_with(&doc, &graph, 0.0, |a, b| {
            if (a, b) == (1, 2) {
                0.0
            } else {
                1.0
            }
        });
        let paras = cluster_paragraphs(&doc, &graph, &preds, 0.5).unwrap();
        assert_eq!(paras.len(), 2);
        let clusters = merge_clusters(&doc, &graph, &paras, None);
        assert_eq!(clusters.len(), 1, "direct col-col edge merges");
        assert_eq!(clusters[0].paragraph_ids, vec![0, 1]);
        assert_eq!(clusters[0].pattern, Pattern::Col);
    }

    #[test]
    fn hop_only_col_paragraphs_stay_separate_but_row_merge() {
        // Singleton paragraphs 0, 1, 2 on a path; (0, 2) is a hop pair.
        let doc = Document {
            lines: vec![line(0, 0.0, 0.0), line(1, 10.0, 0.0), line(2, 20.0, 0.0)],
        };
        let graph = build_skeleton(&doc.lines).unwrap();
        let col_preds = preds_with(&doc, &graph, 0.0, |_, _| 0.0);
        let paras = cluster_paragraphs(&doc, &graph, &col_preds, 0.5).unwrap();
        assert_eq!(paras.len(), 3);

        // Make paragraph 1 row so col merging cannot bridge 0 and 2:
        // the only col-col pair (0, 2) is a hop pair, which the col
        // pass must ignore.
        let mut mixed = col_preds.clone();
        mixed.set_node(1, 1.0);
        let paras_mixed = cluster_paragraphs(&doc, &graph, &mixed, 0.5).unwrap();
        let clusters = merge_clusters(&doc, &graph, &paras_mixed, None);
        assert_eq!(
            clusters.len(),
            3,
            "col paragraphs reachable only through a hop pair must not merge"
        );

        // Invert the patterns: row paragraphs 0 and 2 around col
        // paragraph 1 merge through the hop pair (0, 2).
        let mut outer_row = col_preds;
        outer_row.set_node(0, 1.0);
        outer_row.set_node(2, 1.0);
        let paras_row = cluster_paragraphs(&doc, &graph, &outer_row, 0.5).unwrap();
        let clusters = merge_clusters(&doc, &graph, &paras_row, None);
        assert_eq!(clusters.len(), 2, "hop pair merges the row paragraphs");
        assert_eq!(clusters[0].paragraph_ids, vec![0, 2]);
        assert_eq!(clusters[1].paragraph_ids, vec![1]);
    }

    #[test]
    fn col_merge_respects_edge_length_limit() {
        let (doc, graph) = stacked_doc();
        let preds = preds_with(&doc, &graph, 0.0, |a, b| {
            if (a, b) == (1, 2) {
                0.0
            } else {
                1.0
            }
        });
        let paras = cluster_paragraphs(&doc, &graph, &preds, 0.5).unwrap();
        // Centers of lines 1 and 2 are 3 apart; a limit below that
        // suppresses the merge, a limit at exactly 3 allows it.
        let clusters = merge_clusters(&doc, &graph, &paras, Some(2.0));
        assert_eq!(clusters.len(), 2);
        let clusters = merge_clusters(&doc, &graph, &paras, Some(3.0));
        assert_eq!(clusters.len(), 1);
    }

    fn bare_cluster(id: ClusterId, bbox: RotatedBox) -> Cluster {
        Cluster {
            id,
            paragraph_ids: vec![id],
            child_ids: vec![],
            pattern: Pattern::Col,
            bbox,
        }
    }

    #[test]
    fn hierarchy_nests_contained_clusters() {
        let big = bare_cluster(0, RotatedBox::new(0.0, 0.0, 100.0, 100.0, 0.0));
        let small = bare_cluster(1, RotatedBox::new(10.0, 10.0, 10.0, 10.0, 0.0));
        let far = bare_cluster(2, RotatedBox::new(500.0, 0.0, 20.0, 20.0, 0.0));
        let tree = build_hierarchy(vec![big, small, far], 0.9);
        assert_eq!(tree.clusters.len(), 4);
        let root = &tree.clusters[tree.root as usize];
        assert_eq!(root.pattern, Pattern::Col);
        assert_eq!(root.child_ids, vec![0, 2]);
        assert_eq!(tree.clusters[0].child_ids, vec![1]);
    }

    #[test]
    fn hierarchy_attaches_to_smallest_containing_cluster() {
        let huge = bare_cluster(0, RotatedBox::new(0.0, 0.0, 1000.0, 1000.0, 0.0));
        let mid = bare_cluster(1, RotatedBox::new(0.0, 0.0, 100.0, 100.0, 0.0));
        let tiny = bare_cluster(2, RotatedBox::new(0.0, 0.0, 10.0, 10.0, 0.0));
        let tree = build_hierarchy(vec![huge, mid, tiny], 0.9);
        assert_eq!(tree.clusters[1].child_ids, vec![2], "tiny picks mid, not huge");
        assert_eq!(tree.clusters[0].child_ids, vec![1]);
        assert_eq!(tree.clusters[tree.root as usize].child_ids, vec![0]);
    }

    #[test]
    fn hierarchy_overlap_is_strict_and_parents_are_strictly_larger() {
        // Overlap of exactly 90% of the small box: not enough at T=0.9.
        let big = bare_cluster(0, RotatedBox::new(0.0, 0.0, 100.0, 100.0, 0.0));
        // 10x10 box shifted so exactly 9x10 = 90 of 100 overlaps.
        let partial = bare_cluster(1, RotatedBox::new(-46.0, 0.0, 10.0, 10.0, 0.0));
        let tree = build_hierarchy(vec![big, partial], 0.9);
        assert_eq!(
            tree.clusters[tree.root as usize].child_ids,
            vec![0, 1],
            "exactly-at-threshold overlap must not attach"
        );

        // Equal-area identical boxes never nest.
        let a = bare_cluster(0, RotatedBox::new(0.0, 0.0, 50.0, 50.0, 0.0));
        let b = bare_cluster(1, RotatedBox::new(0.0, 0.0, 50.0, 50.0, 0.0));
        let tree = build_hierarchy(vec![a, b], 0.9);
        assert_eq!(tree.clusters[tree.root as usize].child_ids, vec![0, 1]);
    }

    #[test]
    fn zero_overlap_threshold_attaches_on_any_overlap() {
        let big = bare_cluster(0, RotatedBox::new(0.0, 0.0, 100.0, 100.0, 0.0));
        let corner = bare_cluster(1, RotatedBox::new(-50.0, -50.0, 10.0, 10.0, 0.0));
        let tree = build_hierarchy(vec![big, corner], 0.0);
        assert_eq!(tree.clusters[0].child_ids, vec![1]);
    }

    #[test]
    fn partition_matches_component_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(2usize..40);
            let lines: Vec<TextLine> = (0..n)
                .map(|i| {
                    line(
                        i as LineId,
                        rng.gen_range(0.0..200.0),
                        rng.gen_range(0.0..200.0),
                    )
                })
                .collect();
            let doc = Document { lines };
            let graph = build_skeleton(&doc.lines).unwrap();
            let mut preds = Predictions::default();
            for l in &doc.lines {
                preds.set_node(l.id, 0.0);
            }
            let mut kept: Vec<(LineId, LineId)> = Vec::new();
            for &(a, b) in graph.edges() {
                let score: f64 = if rng.gen_bool(0.5) { 0.9 } else { 0.1 };
                if score >= 0.5 {
                    kept.push((a, b));
                }
                preds.set_edge(a, b, score);
            }
            let paras = cluster_paragraphs(&doc, &graph, &preds, 0.5).unwrap();

            // Oracle: DFS over the kept edges.
            let mut comp: BTreeMap<LineId, usize> = BTreeMap::new();
            let mut next = 0;
            for l in &doc.lines {
                if comp.contains_key(&l.id) {
                    continue;
                }
                let mut stack = vec![l.id];
                while let Some(x) = stack.pop() {
                    if comp.insert(x, next).is_some() {
                        continue;
                    }
                    for &(a, b) in &kept {
                        if a == x && !comp.contains_key(&b) {
                            stack.push(b);
                        } else if b == x && !comp.contains_key(&a) {
                            stack.push(a);
                        }
                    }
                }
                next += 1;
            }

            // Same partition: two lines share a paragraph iff they share
            // an oracle component.
            let mut para_of: BTreeMap<LineId, ParagraphId> = BTreeMap::new();
            for p in &paras {
                for &l in &p.line_ids {
                    assert!(para_of.insert(l, p.id).is_none(), "line in two paragraphs");
                }
            }
            assert_eq!(para_of.len(), n, "every line placed");
            for a in doc.line_ids() {
                for b in doc.line_ids() {
                    assert_eq!(
                        para_of[&a] == para_of[&b],
                        comp[&a] == comp[&b],
                        "partition mismatch for ({a},{b})"
                    );
                }
            }
        }
    }
}
