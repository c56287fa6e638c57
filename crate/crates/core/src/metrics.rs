//! Reading-order quality metric over annotated word groups.
//!
//! A predicted order is serialized to a flat word sequence `S`. Each
//! annotated group contributes its words `W` in annotated order; the
//! group's score is the insert/delete distance between `W` and the
//! shortest contiguous window of `S` spanning all of `W`'s
//! occurrences, normalized by `|W|`. Perfect ordering scores 0; the
//! score is unbounded above (a scattered group drags in a long
//! window).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::clustering::ParagraphId;
use crate::labeling::AnnotatedGroup;
use crate::ordering::ReadingOrderResult;
use crate::signals::{Document, LineId, WordId};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("dataset has no documents")]
    EmptyDataset,
    #[error("no result for document {0}")]
    MissingResult(String),
    #[error("group {group_id} in document {doc_id} contains no words")]
    EmptyGroup { doc_id: String, group_id: u32 },
    #[error("word list for distance is empty")]
    EmptyWords,
    #[error("result references unknown paragraph {0}")]
    UnknownParagraph(ParagraphId),
    #[error("result references unknown line {0}")]
    UnknownLine(LineId),
}

/// Flatten a result to the word sequence it implies: paragraphs in
/// reading order, each paragraph's lines in their stored order, each
/// line's words in document order.
pub fn serialize_words(
    result: &ReadingOrderResult,
    doc: &Document,
) -> Result<Vec<WordId>, MetricError> {
    let paragraphs: BTreeMap<ParagraphId, &[LineId]> = result
        .paragraphs
        .iter()
        .map(|p| (p.id, p.line_ids.as_slice()))
        .collect();
    let lines: BTreeMap<LineId, usize> = doc
        .lines
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id, i))
        .collect();
    let mut out = Vec::new();
    for pid in &result.reading_order {
        let line_ids = paragraphs
            .get(pid)
            .ok_or(MetricError::UnknownParagraph(*pid))?;
        for lid in *line_ids {
            let &i = lines.get(lid).ok_or(MetricError::UnknownLine(*lid))?;
            out.extend(doc.lines[i].words.iter().map(|w| w.id));
        }
    }
    Ok(out)
}

/// A group's reference word sequence plus the annotated paragraphs
/// that matched no words at all.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupWords {
    pub words: Vec<WordId>,
    pub empty_paragraph_ids: Vec<ParagraphId>,
}

/// Collect a group's reference sequence: every document word whose
/// center falls in one of the group's paragraph boxes, attributed to
/// the first containing paragraph; words follow the annotated
/// paragraph order and document order within a paragraph.
pub fn group_words(group: &AnnotatedGroup, doc: &Document) -> GroupWords {
    let mut assigned: Vec<Vec<WordId>> = vec![Vec::new(); group.paragraphs.len()];
    for line in &doc.lines {
        for word in &line.words {
            let center = word.bbox.center();
            if let Some(k) = group
                .paragraphs
                .iter()
                .position(|p| p.bbox.contains_point(center))
            {
                assigned[k].push(word.id);
            }
        }
    }
    let mut empty_paragraph_ids = Vec::new();
    for (k, words) in assigned.iter().enumerate() {
        if words.is_empty() {
            log::warn!(
                "group {}: paragraph {} matched no words",
                group.id,
                group.paragraphs[k].id
            );
            empty_paragraph_ids.push(group.paragraphs[k].id);
        }
    }
    GroupWords {
        words: assigned.concat(),
        empty_paragraph_ids,
    }
}

/// Length of the longest common subsequence, rolling two DP rows.
fn lcs_len(a: &[WordId], b: &[WordId]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Distance between a group's reference sequence `w` and the serialized
/// order `s`: insert/delete edits between `w` and the window of `s`
/// from the first to the last occurrence of `w`'s ids, divided by
/// `|w|`. When some of `w` never occurs in `s`, the window widens to
/// all of `s` and the returned flag is set.
pub fn group_distance(w: &[WordId], s: &[WordId]) -> Result<(f64, bool), MetricError> {
    if w.is_empty() {
        return Err(MetricError::EmptyWords);
    }
    let wanted: BTreeSet<WordId> = w.iter().copied().collect();
    let mut seen: BTreeSet<WordId> = BTreeSet::new();
    let mut first = None;
    let mut last = 0;
    for (i, id) in s.iter().enumerate() {
        if wanted.contains(id) {
            first.get_or_insert(i);
            last = i;
            seen.insert(*id);
        }
    }
    let incomplete = seen.len() < wanted.len();
    let window: &[WordId] = match (incomplete, first) {
        (false, Some(f)) => &s[f..=last],
        _ => s,
    };
    let lcs = lcs_len(w, window);
    let distance = (window.len() + w.len() - 2 * lcs) as f64 / w.len() as f64;
    Ok((distance, incomplete))
}

/// One document to evaluate: its lines plus the annotated groups that
/// define reference word sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalDocument {
    pub doc_id: String,
    pub document: Document,
    pub groups: Vec<AnnotatedGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub group_id: u32,
    pub distance: f64,
    pub word_count: usize,
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocReport {
    pub doc_id: String,
    pub groups: Vec<GroupReport>,
    /// Unweighted mean over this document's groups (0 when it has
    /// none).
    pub mean: f64,
}

/// Corpus-level scores. `micro_average` (the headline number) weights
/// each group by its word count; `macro_average` weights groups
/// equally.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub documents: Vec<DocReport>,
    pub micro_average: f64,
    pub macro_average: f64,
    pub group_count: usize,
    pub word_count: usize,
}

/// Score one result set (keyed by document id) against a dataset.
pub fn evaluate(
    docs: &[EvalDocument],
    results: &BTreeMap<String, ReadingOrderResult>,
) -> Result<EvalReport, MetricError> {
    if docs.is_empty() {
        return Err(MetricError::EmptyDataset);
    }
    let mut documents = Vec::with_capacity(docs.len());
    let mut weighted_sum = 0.0;
    let mut word_count = 0usize;
    let mut distance_sum = 0.0;
    let mut group_count = 0usize;
    for d in docs {
        let result = results
            .get(&d.doc_id)
            .ok_or_else(|| MetricError::MissingResult(d.doc_id.clone()))?;
        let s = serialize_words(result, &d.document)?;
        let mut groups = Vec::with_capacity(d.groups.len());
        let mut doc_sum = 0.0;
        for g in &d.groups {
            let gw = group_words(g, &d.document);
            if gw.words.is_empty() {
                return Err(MetricError::EmptyGroup {
                    doc_id: d.doc_id.clone(),
                    group_id: g.id,
                });
            }
            let (distance, incomplete) = group_distance(&gw.words, &s)?;
            weighted_sum += distance * gw.words.len() as f64;
            word_count += gw.words.len();
            distance_sum += distance;
            group_count += 1;
            doc_sum += distance;
            groups.push(GroupReport {
                group_id: g.id,
                distance,
                word_count: gw.words.len(),
                incomplete,
            });
        }
        let mean = if groups.is_empty() {
            0.0
        } else {
            doc_sum / groups.len() as f64
        };
        documents.push(DocReport {
            doc_id: d.doc_id.clone(),
            groups,
            mean,
        });
    }
    Ok(EvalReport {
        documents,
        micro_average: if word_count == 0 {
            0.0
        } else {
            weighted_sum / word_count as f64
        },
        macro_average: if group_count == 0 {
            0.0
        } else {
            distance_sum / group_count as f64
        },
        group_count,
        word_count,
    })
}
