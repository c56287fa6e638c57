//! Deterministic synthetic document generator.
//!
//! Produces line/word geometry together with the ground-truth
//! paragraph partition, patterns, reading order, and one annotated
//! group covering the page. Three layout families: multi-column text
//! (read column by column), a table grid (read row by row), and a
//! mixed page with a column region above a table region. All sampling
//! comes from a single seeded stream, so equal configs yield equal
//! documents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clustering::Pattern;
use crate::geometry::{axis_overlap, min_containing_box, AABox, Axis, Point, RotatedBox};
use crate::labeling::{AnnotatedGroup, AnnotatedParagraph};
use crate::signals::{Document, GroundTruth, TextLine, Word};

/// Page margin on each side, as a fraction of the page extent.
const MARGIN_FRAC: f64 = 0.05;
/// Nominal line height as a fraction of the layout region's height,
/// so a half-page region holds the same content as a half-size page.
const LINE_H_FRAC: f64 = 0.0133;
/// Gap between lines of a paragraph, as a fraction of line height.
const LINE_GAP_FACTOR: f64 = 0.5;
/// Gap between stacked paragraphs, as a fraction of line height.
const PARA_GAP_FACTOR: f64 = 2.0;
/// Gutter between columns, as a fraction of the column stride.
const GUTTER_FRAC: f64 = 0.2;
/// Occupied fraction of a table cell's stride, per axis.
const CELL_FILL: f64 = 0.8;
/// Occupied fraction of a word's slot within its line.
const WORD_FILL: f64 = 0.8;
/// Line width factor range (left-aligned ragged right edge).
const LINE_W_RANGE: (f64, f64) = (0.55, 1.0);
/// Jitter never exceeds this fraction of the smallest structural gap,
/// which keeps gaps positive and their ordering intact.
const JITTER_GAP_FRAC: f64 = 0.24;
/// Attempts before giving up on disjoint mixed regions.
const MIXED_RETRY_LIMIT: u32 = 10;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("layout does not fit: {0}")]
    Infeasible(String),
    #[error("mixed regions still overlap after {0} attempts")]
    RegionOverlap(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Columns,
    Table,
    Mixed,
}

/// Generator parameters. Inclusive `(min, max)` ranges are sampled per
/// column, paragraph, cell, or line.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub kind: SynthKind,
    pub seed: u64,
    pub columns: u32,
    pub rows: u32,
    pub paragraphs_per_column: (u32, u32),
    pub lines_per_paragraph: (u32, u32),
    pub lines_per_cell: (u32, u32),
    pub words_per_line: (u32, u32),
    pub page_w: f64,
    pub page_h: f64,
    /// Requested center jitter; the effective amount is clamped
    /// against the layout's smallest gap.
    pub jitter: f64,
    /// Whole-page rotation, applied about the page center after
    /// layout. Must stay in (-90, 90).
    pub rotation_deg: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            kind: SynthKind::Columns,
            seed: 0,
            columns: 3,
            rows: 4,
            paragraphs_per_column: (2, 4),
            lines_per_paragraph: (3, 6),
            lines_per_cell: (1, 2),
            words_per_line: (3, 8),
            page_w: 800.0,
            page_h: 1000.0,
            jitter: 0.5,
            rotation_deg: 0.0,
        }
    }
}

/// A generated document plus its ground truth and the page-wide
/// annotated group (paragraph boxes in reading order).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDoc {
    pub document: Document,
    pub truth: GroundTruth,
    pub groups: Vec<AnnotatedGroup>,
}

/// One paragraph's line boxes in reading order, before ids and words
/// are attached.
struct RawPara {
    lines: Vec<RotatedBox>,
    pattern: Pattern,
}

fn validate(cfg: &SynthConfig) -> Result<(), SynthError> {
    let bad = |msg: &str| Err(SynthError::InvalidConfig(msg.to_string()));
    if !(cfg.page_w > 0.0 && cfg.page_h > 0.0) {
        return bad("page size must be positive");
    }
    if cfg.columns == 0 || cfg.rows == 0 {
        return bad("grid dimensions must be at least 1");
    }
    for (name, (lo, hi)) in [
        ("paragraphs_per_column", cfg.paragraphs_per_column),
        ("lines_per_paragraph", cfg.lines_per_paragraph),
        ("lines_per_cell", cfg.lines_per_cell),
        ("words_per_line", cfg.words_per_line),
    ] {
        if lo == 0 || lo > hi {
            return Err(SynthError::InvalidConfig(format!(
                "{name} range ({lo}, {hi}) must satisfy 1 <= min <= max"
            )));
        }
    }
    if !(cfg.jitter >= 0.0) {
        return bad("jitter must be non-negative");
    }
    if !(cfg.rotation_deg.abs() < 90.0) {
        return bad("rotation must stay in (-90, 90) degrees");
    }
    Ok(())
}

fn sample(rng: &mut ChaCha8Rng, range: (u32, u32)) -> u32 {
    rng.gen_range(range.0..=range.1)
}

/// Columns of stacked paragraphs inside `region`, reading order column
/// by column. Returns the paragraphs and the smallest structural gap.
fn layout_columns(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    region: &AABox,
) -> Result<(Vec<RawPara>, f64), SynthError> {
    let line_h = LINE_H_FRAC * region.height();
    let line_gap = LINE_GAP_FACTOR * line_h;
    let para_gap = PARA_GAP_FACTOR * line_h;
    let stride = region.width() / cfg.columns as f64;
    let gutter = GUTTER_FRAC * stride;
    let col_w = stride - gutter;
    let min_gap = line_gap.min(para_gap).min(gutter);

    let mut paras = Vec::new();
    for c in 0..cfg.columns {
        let x0 = region.x_min + c as f64 * stride + gutter / 2.0;
        let np = sample(rng, cfg.paragraphs_per_column);
        let counts: Vec<u32> = (0..np)
            .map(|_| sample(rng, cfg.lines_per_paragraph))
            .collect();
        let need: f64 = counts
            .iter()
            .map(|&nl| nl as f64 * line_h + (nl - 1) as f64 * line_gap)
            .sum::<f64>()
            + (np - 1) as f64 * para_gap;
        if need > region.height() {
            return Err(SynthError::Infeasible(format!(
                "column {c} needs height {need:.1} of {:.1}",
                region.height()
            )));
        }
        let mut y = region.y_min;
        for nl in counts {
            let mut lines = Vec::with_capacity(nl as usize);
            for _ in 0..nl {
                let w = col_w * rng.gen_range(LINE_W_RANGE.0..LINE_W_RANGE.1);
                lines.push(RotatedBox::new(x0 + w / 2.0, y + line_h / 2.0, w, line_h, 0.0));
                y += line_h + line_gap;
            }
            y += para_gap - line_gap;
            paras.push(RawPara {
                lines,
                pattern: Pattern::Col,
            });
        }
    }
    Ok((paras, min_gap))
}

/// A `rows x columns` grid of one-paragraph cells inside `region`,
/// reading order row by row. The line height shrinks as needed so the
/// fullest cell still fits.
fn layout_table(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    region: &AABox,
) -> Result<(Vec<RawPara>, f64), SynthError> {
    let stride_x = region.width() / cfg.columns as f64;
    let stride_y = region.height() / cfg.rows as f64;
    let cell_w = CELL_FILL * stride_x;
    let cell_h = CELL_FILL * stride_y;
    let nl_max = cfg.lines_per_cell.1 as f64;
    let height_units = nl_max + (nl_max - 1.0) * LINE_GAP_FACTOR;
    let line_h = (LINE_H_FRAC * region.height()).min(cell_h / height_units);
    let line_gap = LINE_GAP_FACTOR * line_h;
    let gap_x = stride_x - cell_w;
    let gap_y = stride_y - cell_h;
    let min_gap = line_gap.min(gap_x).min(gap_y);

    let mut paras = Vec::with_capacity((cfg.rows * cfg.columns) as usize);
    for r in 0..cfg.rows {
        for c in 0..cfg.columns {
            let x0 = region.x_min + c as f64 * stride_x + gap_x / 2.0;
            let y0 = region.y_min + r as f64 * stride_y + gap_y / 2.0;
            let nl = sample(rng, cfg.lines_per_cell);
            let mut lines = Vec::with_capacity(nl as usize);
            let mut y = y0;
            for _ in 0..nl {
                let w = cell_w * rng.gen_range(LINE_W_RANGE.0..LINE_W_RANGE.1);
                lines.push(RotatedBox::new(x0 + w / 2.0, y + line_h / 2.0, w, line_h, 0.0));
                y += line_h + line_gap;
            }
            paras.push(RawPara {
                lines,
                pattern: Pattern::Row,
            });
        }
    }
    Ok((paras, min_gap))
}

fn rotate_about(b: &RotatedBox, theta: f64, cx: f64, cy: f64) -> RotatedBox {
    let mut t = *b;
    t.cx -= cx;
    t.cy -= cy;
    let mut r = t.rotate_about_origin(theta);
    r.cx += cx;
    r.cy += cy;
    r
}

/// Corner hull of a set of line boxes.
fn hull(paras: &[RawPara]) -> AABox {
    let pts: Vec<Point> = paras
        .iter()
        .flat_map(|p| p.lines.iter())
        .flat_map(|b| b.corners())
        .collect();
    AABox::from_points(&pts).expect("regions are never empty")
}

fn build_once(cfg: &SynthConfig, seed: u64, jitter: f64) -> Result<SynthDoc, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let content = AABox {
        x_min: MARGIN_FRAC * cfg.page_w,
        x_max: (1.0 - MARGIN_FRAC) * cfg.page_w,
        y_min: MARGIN_FRAC * cfg.page_h,
        y_max: (1.0 - MARGIN_FRAC) * cfg.page_h,
    };

    let (mut paras, min_gap, column_count) = match cfg.kind {
        SynthKind::Columns => {
            let (p, g) = layout_columns(&mut rng, cfg, &content)?;
            let n = p.len();
            (p, g, n)
        }
        SynthKind::Table => {
            let (p, g) = layout_table(&mut rng, cfg, &content)?;
            (p, g, 0)
        }
        SynthKind::Mixed => {
            let split_frac = rng.gen_range(0.45..0.6);
            let split = content.y_min + split_frac * content.height();
            let region_gap = PARA_GAP_FACTOR * LINE_H_FRAC * content.height();
            let top = AABox {
                y_max: split - region_gap / 2.0,
                ..content
            };
            let bottom = AABox {
                y_min: split + region_gap / 2.0,
                ..content
            };
            let (mut a, ga) = layout_columns(&mut rng, cfg, &top)?;
            let (b, gb) = layout_table(&mut rng, cfg, &bottom)?;
            let n = a.len();
            a.extend(b);
            (a, ga.min(gb).min(region_gap), n)
        }
    };

    let j = jitter.min(JITTER_GAP_FRAC * min_gap);
    for p in &mut paras {
        for b in &mut p.lines {
            b.cx += rng.gen_range(-j..=j);
            b.cy += rng.gen_range(-j..=j);
        }
    }

    if cfg.kind == SynthKind::Mixed {
        let ha = hull(&paras[..column_count]);
        let hb = hull(&paras[column_count..]);
        if axis_overlap(&ha, &hb, Axis::X) > 0.0 && axis_overlap(&ha, &hb, Axis::Y) > 0.0 {
            return Err(SynthError::RegionOverlap(1));
        }
    }

    // Attach ids, words, rotation, truth, and the annotated group; all
    // ids run sequentially in reading order.
    let theta = cfg.rotation_deg.to_radians();
    let (pcx, pcy) = (cfg.page_w / 2.0, cfg.page_h / 2.0);
    let mut doc = Document::default();
    let mut truth = GroundTruth::default();
    let mut group_paras = Vec::with_capacity(paras.len());
    let mut line_id = 0u32;
    let mut word_id = 0u32;
    for (pid, p) in paras.iter().enumerate() {
        let pid = pid as u32;
        truth.paragraph_patterns.insert(pid, p.pattern);
        truth.paragraph_order.push(pid);
        let mut para_words = Vec::new();
        let mut corners: Vec<Point> = Vec::with_capacity(p.lines.len() * 4);
        for line_box in &p.lines {
            let nw = sample(&mut rng, cfg.words_per_line);
            let slot = line_box.w / nw as f64;
            let mut words = Vec::with_capacity(nw as usize);
            for k in 0..nw {
                let w = WORD_FILL * slot;
                let wx = line_box.cx - line_box.w / 2.0 + k as f64 * slot + w / 2.0;
                let word_box = RotatedBox::new(wx, line_box.cy, w, line_box.h, 0.0);
                words.push(Word {
                    id: word_id,
                    text: format!("w{word_id:04}"),
                    bbox: rotate_about(&word_box, theta, pcx, pcy),
                });
                para_words.push(word_id);
                word_id += 1;
            }
            let final_box = rotate_about(line_box, theta, pcx, pcy);
            corners.extend(final_box.corners());
            doc.lines.push(TextLine {
                id: line_id,
                bbox: final_box,
                words,
            });
            truth.line_to_paragraph.insert(line_id, pid);
            line_id += 1;
        }
        truth.paragraph_words.insert(pid, para_words);
        group_paras.push(AnnotatedParagraph {
            id: pid,
            bbox: min_containing_box(&corners, theta).expect("paragraphs have lines"),
        });
    }
    Ok(SynthDoc {
        document: doc,
        truth,
        groups: vec![AnnotatedGroup {
            id: 0,
            paragraphs: group_paras,
        }],
    })
}

/// Generate one document. Mixed pages whose two regions collide after
/// jitter are regenerated with a shifted seed and halved jitter, up to
/// a small attempt limit.
pub fn generate(cfg: &SynthConfig) -> Result<SynthDoc, SynthError> {
    validate(cfg)?;
    match cfg.kind {
        SynthKind::Columns | SynthKind::Table => build_once(cfg, cfg.seed, cfg.jitter),
        SynthKind::Mixed => {
            let mut jitter = cfg.jitter;
            for attempt in 0..MIXED_RETRY_LIMIT {
                let seed = cfg
                    .seed
                    .wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                match build_once(cfg, seed, jitter) {
                    Err(SynthError::RegionOverlap(_)) => jitter /= 2.0,
                    other => return other,
                }
            }
            Err(SynthError::RegionOverlap(MIXED_RETRY_LIMIT))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::intersection_area;

    #[test]
    fn equal_configs_generate_equal_documents() {
        for kind in [SynthKind::Columns, SynthKind::Table, SynthKind::Mixed] {
            let cfg = SynthConfig {
                kind,
                seed: 42,
                rotation_deg: 12.0,
                ..SynthConfig::default()
            };
            assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        }
    }

    #[test]
    fn different_seeds_generate_different_documents() {
        let a = generate(&SynthConfig {
            seed: 1,
            ..SynthConfig::default()
        })
        .unwrap();
        let b = generate(&SynthConfig {
            seed: 2,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn paragraph_boxes_are_pairwise_disjoint() {
        for kind in [SynthKind::Columns, SynthKind::Table, SynthKind::Mixed] {
            for seed in 0..5 {
                let cfg = SynthConfig {
                    kind,
                    seed,
                    ..SynthConfig::default()
                };
                let doc = generate(&cfg).unwrap();
                let boxes: Vec<RotatedBox> =
                    doc.groups[0].paragraphs.iter().map(|p| p.bbox).collect();
                for i in 0..boxes.len() {
                    for j in i + 1..boxes.len() {
                        assert!(
                            intersection_area(&boxes[i], &boxes[j]) < 1e-9,
                            "{kind:?} seed {seed}: paragraphs {i} and {j} overlap"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn truth_ids_run_sequentially_in_reading_order() {
        let doc = generate(&SynthConfig {
            kind: SynthKind::Mixed,
            seed: 7,
            ..SynthConfig::default()
        })
        .unwrap();
        let n_lines = doc.document.lines.len() as u32;
        let ids: Vec<u32> = doc.document.lines.iter().map(|l| l.id).collect();
        assert_eq!(ids, (0..n_lines).collect::<Vec<_>>());

        let n_paras = doc.truth.paragraph_order.len() as u32;
        assert_eq!(doc.truth.paragraph_order, (0..n_paras).collect::<Vec<_>>());
        assert_eq!(doc.groups.len(), 1);
        assert_eq!(doc.groups[0].paragraphs.len(), n_paras as usize);

        // Every line is mapped; paragraph word lists chain the global
        // word ids without gaps.
        for id in 0..n_lines {
            assert!(doc.truth.line_to_paragraph.contains_key(&id));
        }
        let mut expected = 0u32;
        for pid in &doc.truth.paragraph_order {
            for &w in &doc.truth.paragraph_words[pid] {
                assert_eq!(w, expected);
                expected += 1;
            }
        }
        let total_words: usize = doc.document.lines.iter().map(|l| l.words.len()).sum();
        assert_eq!(expected as usize, total_words);
    }

    #[test]
    fn kinds_set_the_expected_patterns() {
        let cols = generate(&SynthConfig::default()).unwrap();
        assert!(cols
            .truth
            .paragraph_patterns
            .values()
            .all(|&p| p == Pattern::Col));

        let table = generate(&SynthConfig {
            kind: SynthKind::Table,
            ..SynthConfig::default()
        })
        .unwrap();
        assert!(table
            .truth
            .paragraph_patterns
            .values()
            .all(|&p| p == Pattern::Row));

        let mixed = generate(&SynthConfig {
            kind: SynthKind::Mixed,
            seed: 3,
            ..SynthConfig::default()
        })
        .unwrap();
        let patterns: Vec<Pattern> = mixed
            .truth
            .paragraph_order
            .iter()
            .map(|pid| mixed.truth.paragraph_patterns[pid])
            .collect();
        // Column region first, table region second, no interleaving.
        let first_row = patterns.iter().position(|&p| p == Pattern::Row).unwrap();
        assert!(patterns[..first_row].iter().all(|&p| p == Pattern::Col));
        assert!(patterns[first_row..].iter().all(|&p| p == Pattern::Row));
    }

    #[test]
    fn huge_jitter_is_clamped_to_structural_gaps() {
        let cfg = SynthConfig {
            jitter: 1e6,
            ..SynthConfig::default()
        };
        let doc = generate(&cfg).unwrap();
        let boxes: Vec<RotatedBox> = doc.groups[0].paragraphs.iter().map(|p| p.bbox).collect();
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                assert!(intersection_area(&boxes[i], &boxes[j]) < 1e-9);
            }
        }
    }

    #[test]
    fn overfull_column_config_is_infeasible() {
        let cfg = SynthConfig {
            paragraphs_per_column: (10, 10),
            lines_per_paragraph: (12, 12),
            ..SynthConfig::default()
        };
        assert!(matches!(generate(&cfg), Err(SynthError::Infeasible(_))));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SynthConfig::default();
        for cfg in [
            SynthConfig {
                columns: 0,
                ..base.clone()
            },
            SynthConfig {
                words_per_line: (0, 3),
                ..base.clone()
            },
            SynthConfig {
                lines_per_paragraph: (5, 2),
                ..base.clone()
            },
            SynthConfig {
                jitter: -1.0,
                ..base.clone()
            },
            SynthConfig {
                rotation_deg: 90.0,
                ..base.clone()
            },
            SynthConfig {
                page_w: 0.0,
                ..base.clone()
            },
        ] {
            assert!(matches!(generate(&cfg), Err(SynthError::InvalidConfig(_))));
        }
    }

    #[test]
    fn mixed_regions_stay_disjoint() {
        for seed in 0..10 {
            let doc = generate(&SynthConfig {
                kind: SynthKind::Mixed,
                seed,
                ..SynthConfig::default()
            })
            .unwrap();
            let split = doc
                .truth
                .paragraph_order
                .iter()
                .position(|pid| doc.truth.paragraph_patterns[pid] == Pattern::Row)
                .unwrap();
            let bottom_of_cols = doc.groups[0].paragraphs[..split]
                .iter()
                .map(|p| p.bbox.aabb().y_max)
                .fold(f64::NEG_INFINITY, f64::max);
            let top_of_table = doc.groups[0].paragraphs[split..]
                .iter()
                .map(|p| p.bbox.aabb().y_min)
                .fold(f64::INFINITY, f64::min);
            assert!(bottom_of_cols < top_of_table, "seed {seed}");
        }
    }

    #[test]
    fn rotation_tilts_every_box() {
        let cfg = SynthConfig {
            rotation_deg: 30.0,
            ..SynthConfig::default()
        };
        let doc = generate(&cfg).unwrap();
        let theta = 30.0f64.to_radians();
        for line in &doc.document.lines {
            assert!((line.bbox.angle - theta).abs() < 1e-12);
            for word in &line.words {
                assert!((word.bbox.angle - theta).abs() < 1e-12);
                assert!(line.bbox.contains_point(word.bbox.center()));
            }
        }
    }

    #[test]
    fn words_are_named_by_global_id() {
        let doc = generate(&SynthConfig::default()).unwrap();
        let w = &doc.document.lines[0].words[0];
        assert_eq!(w.id, 0);
        assert_eq!(w.text, "w0000");
        let last = doc.document.lines.last().unwrap().words.last().unwrap();
        assert_eq!(last.text, format!("w{:04}", last.id));
    }
}
