//! JSON file formats and atomic file IO.
//!
//! All on-disk formats store angles in degrees in `(-180, 180]` and
//! floats with exactly six decimals, so serializing the same value
//! twice yields identical bytes. Files end with a newline and are
//! written atomically (temp file in the target directory, then rename).
//! In-memory types keep angles in radians; conversions validate
//! geometry and id uniqueness on the way in.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::clustering::{ParagraphId, Pattern};
use crate::geometry::RotatedBox;
use crate::labeling::{AnnotatedGroup, AnnotatedParagraph};
use crate::metrics::{DocReport, EvalDocument, EvalReport, GroupReport};
use crate::ordering::{OrderedParagraph, ReadingOrderResult};
use crate::signals::{
    node_spatial_features, Document, LineId, Predictions, TextLine, Word, WordId,
};
use crate::synthgen::SynthDoc;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid json in {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("duplicate line id {0}")]
    DuplicateLineId(LineId),
    #[error("duplicate word id {0}")]
    DuplicateWordId(WordId),
    #[error("duplicate paragraph id {0}")]
    DuplicateParagraphId(ParagraphId),
    #[error("duplicate score entry for {0}")]
    DuplicateScore(String),
    #[error("invalid pattern {0:?} (expected \"col\" or \"row\")")]
    InvalidPattern(String),
}

/// Serde formatter that prints every float with six decimals and folds
/// negative zero into zero.
struct SixDecimalFormatter;

impl serde_json::ser::Formatter for SixDecimalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        let v = if value == 0.0 { 0.0 } else { value };
        write!(writer, "{v:.6}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize to the canonical JSON text: compact, six-decimal floats,
/// trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SixDecimalFormatter);
    value
        .serialize(&mut ser)
        .expect("serializing plain data in memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json is utf-8")
}

/// Write bytes atomically: readers see either the old file or the new
/// one, never a prefix.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io_err = |source: std::io::Error| FormatError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    write_atomic(path, to_json_string(value).as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let bytes = std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|source| FormatError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_pattern(s: &str) -> Result<Pattern, FormatError> {
    match s {
        "col" => Ok(Pattern::Col),
        "row" => Ok(Pattern::Row),
        other => Err(FormatError::InvalidPattern(other.to_string())),
    }
}

/// A rotated rectangle with the angle in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDto {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub angle_deg: f64,
}

impl BoxDto {
    pub fn from_box(b: &RotatedBox) -> BoxDto {
        BoxDto {
            cx: b.cx,
            cy: b.cy,
            w: b.w,
            h: b.h,
            angle_deg: b.angle.to_degrees(),
        }
    }

    pub fn to_box(&self) -> Result<RotatedBox, FormatError> {
        let fields = [self.cx, self.cy, self.w, self.h, self.angle_deg];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(FormatError::InvalidBox(format!("non-finite field in {self:?}")));
        }
        if self.w < 0.0 || self.h < 0.0 {
            return Err(FormatError::InvalidBox(format!("negative extent in {self:?}")));
        }
        if !(self.angle_deg > -180.0 && self.angle_deg <= 180.0) {
            return Err(FormatError::InvalidBox(format!(
                "angle {} out of (-180, 180]",
                self.angle_deg
            )));
        }
        Ok(RotatedBox::new(
            self.cx,
            self.cy,
            self.w,
            self.h,
            self.angle_deg.to_radians(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordDto {
    pub id: WordId,
    pub text: String,
    #[serde(rename = "box")]
    pub bbox: BoxDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineDto {
    pub id: LineId,
    #[serde(rename = "box")]
    pub bbox: BoxDto,
    pub words: Vec<WordDto>,
}

/// The OCR-side input: every text line with its words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentFile {
    pub lines: Vec<LineDto>,
}

fn line_from_dto(dto: &LineDto) -> Result<TextLine, FormatError> {
    Ok(TextLine {
        id: dto.id,
        bbox: dto.bbox.to_box()?,
        words: dto
            .words
            .iter()
            .map(|w| {
                Ok(Word {
                    id: w.id,
                    text: w.text.clone(),
                    bbox: w.bbox.to_box()?,
                })
            })
            .collect::<Result<_, FormatError>>()?,
    })
}

fn lines_to_document(lines: &[LineDto]) -> Result<Document, FormatError> {
    let mut line_ids = BTreeSet::new();
    let mut word_ids = BTreeSet::new();
    let mut doc = Document::default();
    for dto in lines {
        if !line_ids.insert(dto.id) {
            return Err(FormatError::DuplicateLineId(dto.id));
        }
        for w in &dto.words {
            if !word_ids.insert(w.id) {
                return Err(FormatError::DuplicateWordId(w.id));
            }
        }
        doc.lines.push(line_from_dto(dto)?);
    }
    Ok(doc)
}

fn line_to_dto(line: &TextLine) -> LineDto {
    LineDto {
        id: line.id,
        bbox: BoxDto::from_box(&line.bbox),
        words: line
            .words
            .iter()
            .map(|w| WordDto {
                id: w.id,
                text: w.text.clone(),
                bbox: BoxDto::from_box(&w.bbox),
            })
            .collect(),
    }
}

impl DocumentFile {
    pub fn from_document(doc: &Document) -> DocumentFile {
        DocumentFile {
            lines: doc.lines.iter().map(line_to_dto).collect(),
        }
    }

    pub fn to_document(&self) -> Result<Document, FormatError> {
        lines_to_document(&self.lines)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScoreDto {
    pub line_id: LineId,
    pub p_row: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeScoreDto {
    pub a: LineId,
    pub b: LineId,
    pub p_same_paragraph: f64,
}

/// Model scores: one row probability per line, one same-paragraph
/// probability per skeleton edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionsFile {
    pub nodes: Vec<NodeScoreDto>,
    pub edges: Vec<EdgeScoreDto>,
}

impl PredictionsFile {
    pub fn from_predictions(preds: &Predictions) -> PredictionsFile {
        PredictionsFile {
            nodes: preds
                .node_scores()
                .map(|(line_id, p_row)| NodeScoreDto { line_id, p_row })
                .collect(),
            edges: preds
                .edge_scores()
                .map(|(a, b, p_same_paragraph)| EdgeScoreDto {
                    a,
                    b,
                    p_same_paragraph,
                })
                .collect(),
        }
    }

    pub fn to_predictions(&self) -> Result<Predictions, FormatError> {
        let mut preds = Predictions::default();
        let mut seen_nodes = BTreeSet::new();
        let mut seen_edges = BTreeSet::new();
        for n in &self.nodes {
            if !seen_nodes.insert(n.line_id) {
                return Err(FormatError::DuplicateScore(format!("node {}", n.line_id)));
            }
            preds.set_node(n.line_id, n.p_row);
        }
        for e in &self.edges {
            let key = (e.a.min(e.b), e.a.max(e.b));
            if !seen_edges.insert(key) {
                return Err(FormatError::DuplicateScore(format!(
                    "edge ({}, {})",
                    key.0, key.1
                )));
            }
            preds.set_edge(e.a, e.b, e.p_same_paragraph);
        }
        Ok(preds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphDto {
    pub id: ParagraphId,
    pub pattern: String,
    pub line_ids: Vec<LineId>,
}

/// A computed reading order: the paragraph partition (lines already in
/// reading order), the paragraph sequence, and the flat line sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub paragraphs: Vec<ParagraphDto>,
    pub reading_order: Vec<ParagraphId>,
    pub line_order: Vec<LineId>,
}

impl ResultFile {
    pub fn from_result(result: &ReadingOrderResult) -> ResultFile {
        ResultFile {
            paragraphs: result
                .paragraphs
                .iter()
                .map(|p| ParagraphDto {
                    id: p.id,
                    pattern: p.pattern.as_str().to_string(),
                    line_ids: p.line_ids.clone(),
                })
                .collect(),
            reading_order: result.reading_order.clone(),
            line_order: result.line_order.clone(),
        }
    }

    pub fn to_result(&self) -> Result<ReadingOrderResult, FormatError> {
        let mut seen = BTreeSet::new();
        let mut paragraphs = Vec::with_capacity(self.paragraphs.len());
        for p in &self.paragraphs {
            if !seen.insert(p.id) {
                return Err(FormatError::DuplicateParagraphId(p.id));
            }
            paragraphs.push(OrderedParagraph {
                id: p.id,
                pattern: parse_pattern(&p.pattern)?,
                line_ids: p.line_ids.clone(),
            });
        }
        Ok(ReadingOrderResult {
            paragraphs,
            reading_order: self.reading_order.clone(),
            line_order: self.line_order.clone(),
        })
    }
}

/// One pattern label per paragraph, flattened across groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDto {
    pub paragraph_id: ParagraphId,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedParagraphDto {
    pub id: ParagraphId,
    #[serde(rename = "box")]
    pub bbox: BoxDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDto {
    pub id: u32,
    pub paragraphs: Vec<AnnotatedParagraphDto>,
}

/// Human annotations: groups of paragraph boxes listed in reading
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationsFile {
    pub groups: Vec<GroupDto>,
}

fn group_from_dto(dto: &GroupDto) -> Result<AnnotatedGroup, FormatError> {
    Ok(AnnotatedGroup {
        id: dto.id,
        paragraphs: dto
            .paragraphs
            .iter()
            .map(|p| {
                Ok(AnnotatedParagraph {
                    id: p.id,
                    bbox: p.bbox.to_box()?,
                })
            })
            .collect::<Result<_, FormatError>>()?,
    })
}

fn group_to_dto(g: &AnnotatedGroup) -> GroupDto {
    GroupDto {
        id: g.id,
        paragraphs: g
            .paragraphs
            .iter()
            .map(|p| AnnotatedParagraphDto {
                id: p.id,
                bbox: BoxDto::from_box(&p.bbox),
            })
            .collect(),
    }
}

impl AnnotationsFile {
    pub fn from_groups(groups: &[AnnotatedGroup]) -> AnnotationsFile {
        AnnotationsFile {
            groups: groups.iter().map(group_to_dto).collect(),
        }
    }

    pub fn to_groups(&self) -> Result<Vec<AnnotatedGroup>, FormatError> {
        self.groups.iter().map(group_from_dto).collect()
    }
}

/// Ground truth as explicit pair lists, so the JSON shape is stable
/// and self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDto {
    pub line_to_paragraph: Vec<(LineId, ParagraphId)>,
    pub paragraph_patterns: Vec<(ParagraphId, String)>,
    pub paragraph_order: Vec<ParagraphId>,
    pub paragraph_words: Vec<(ParagraphId, Vec<WordId>)>,
}

impl TruthDto {
    pub fn from_truth(truth: &crate::signals::GroundTruth) -> TruthDto {
        TruthDto {
            line_to_paragraph: truth
                .line_to_paragraph
                .iter()
                .map(|(&l, &p)| (l, p))
                .collect(),
            paragraph_patterns: truth
                .paragraph_patterns
                .iter()
                .map(|(&p, &pat)| (p, pat.as_str().to_string()))
                .collect(),
            paragraph_order: truth.paragraph_order.clone(),
            paragraph_words: truth
                .paragraph_words
                .iter()
                .map(|(&p, ws)| (p, ws.clone()))
                .collect(),
        }
    }

    pub fn to_truth(&self) -> Result<crate::signals::GroundTruth, FormatError> {
        let mut truth = crate::signals::GroundTruth::default();
        for &(l, p) in &self.line_to_paragraph {
            truth.line_to_paragraph.insert(l, p);
        }
        for (p, s) in &self.paragraph_patterns {
            truth.paragraph_patterns.insert(*p, parse_pattern(s)?);
        }
        truth.paragraph_order = self.paragraph_order.clone();
        for (p, ws) in &self.paragraph_words {
            truth.paragraph_words.insert(*p, ws.clone());
        }
        Ok(truth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDocDto {
    pub doc_id: String,
    pub lines: Vec<LineDto>,
    pub groups: Vec<GroupDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthDto>,
}

/// An evaluation corpus: documents with annotations and (optionally)
/// generator ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub documents: Vec<DatasetDocDto>,
}

impl DatasetDocDto {
    pub fn from_synth(doc_id: &str, synth: &SynthDoc) -> DatasetDocDto {
        DatasetDocDto {
            doc_id: doc_id.to_string(),
            lines: synth.document.lines.iter().map(line_to_dto).collect(),
            groups: synth.groups.iter().map(group_to_dto).collect(),
            truth: Some(TruthDto::from_truth(&synth.truth)),
        }
    }

    pub fn to_eval_document(&self) -> Result<EvalDocument, FormatError> {
        Ok(EvalDocument {
            doc_id: self.doc_id.clone(),
            document: lines_to_document(&self.lines)?,
            groups: self
                .groups
                .iter()
                .map(group_from_dto)
                .collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocResultDto {
    pub doc_id: String,
    pub result: ResultFile,
}

/// One method's results over a dataset, keyed by document id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub results: Vec<DocResultDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReportDto {
    pub group_id: u32,
    pub distance: f64,
    pub word_count: usize,
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocReportDto {
    pub doc_id: String,
    pub mean: f64,
    pub groups: Vec<GroupReportDto>,
}

/// Evaluation scores for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub micro_average: f64,
    pub macro_average: f64,
    pub group_count: usize,
    pub word_count: usize,
    pub documents: Vec<DocReportDto>,
}

impl ReportFile {
    pub fn from_report(method: Option<&str>, report: &EvalReport) -> ReportFile {
        let doc_dto = |d: &DocReport| DocReportDto {
            doc_id: d.doc_id.clone(),
            mean: d.mean,
            groups: d
                .groups
                .iter()
                .map(|g: &GroupReport| GroupReportDto {
                    group_id: g.group_id,
                    distance: g.distance,
                    word_count: g.word_count,
                    incomplete: g.incomplete,
                })
                .collect(),
        };
        ReportFile {
            method: method.map(str::to_string),
            micro_average: report.micro_average,
            macro_average: report.macro_average,
            group_count: report.group_count,
            word_count: report.word_count,
            documents: report.documents.iter().map(doc_dto).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRowDto {
    pub line_id: LineId,
    pub features: Vec<f64>,
}

/// Per-line spatial feature vectors (see
/// [`node_spatial_features`] for the layout).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesFile {
    pub lines: Vec<FeatureRowDto>,
}

impl FeaturesFile {
    pub fn from_document(doc: &Document) -> FeaturesFile {
        FeaturesFile {
            lines: doc
                .lines
                .iter()
                .map(|l| FeatureRowDto {
                    line_id: l.id,
                    features: node_spatial_features(l).to_vec(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate, SynthConfig};

    fn sample_doc() -> Document {
        Document {
            lines: vec![TextLine {
                id: 4,
                bbox: RotatedBox::new(10.0, 20.0, 30.0, 8.0, 0.25),
                words: vec![Word {
                    id: 9,
                    text: "w0009".into(),
                    bbox: RotatedBox::new(10.0, 20.0, 10.0, 8.0, 0.25),
                }],
            }],
        }
    }

    #[test]
    fn floats_print_with_six_decimals() {
        let dto = BoxDto {
            cx: 0.1,
            cy: -0.0,
            w: 2.0,
            h: 1.0 / 3.0,
            angle_deg: 0.0,
        };
        let s = to_json_string(&dto);
        assert!(s.contains("\"cx\":0.100000"), "{s}");
        assert!(s.contains("\"cy\":0.000000"), "{s}");
        assert!(s.contains("\"h\":0.333333"), "{s}");
        assert!(s.ends_with('\n'));
        assert_eq!(s, to_json_string(&dto));
    }

    #[test]
    fn document_round_trips_through_degrees() {
        let doc = sample_doc();
        let dto = DocumentFile::from_document(&doc);
        let back = dto.to_document().unwrap();
        assert_eq!(back.lines[0].id, 4);
        assert!((back.lines[0].bbox.angle - 0.25).abs() < 1e-12);
        assert_eq!(back.lines[0].words[0].text, "w0009");

        let text = to_json_string(&dto);
        let parsed: DocumentFile = serde_json::from_str(&text).unwrap();
        // Six decimals round to 1e-6; the round trip stays within that.
        let b = parsed.to_document().unwrap().lines[0].bbox;
        assert!((b.cx - 10.0).abs() < 1e-6);
        assert!((b.angle - 0.25).abs() < 1e-6);
    }

    #[test]
    fn invalid_boxes_are_rejected() {
        let mut dto = BoxDto {
            cx: 0.0,
            cy: 0.0,
            w: 1.0,
            h: 1.0,
            angle_deg: 0.0,
        };
        dto.angle_deg = 180.0;
        assert!(dto.to_box().is_ok());
        dto.angle_deg = -180.0;
        assert!(matches!(dto.to_box(), Err(FormatError::InvalidBox(_))));
        dto.angle_deg = 200.0;
        assert!(matches!(dto.to_box(), Err(FormatError::InvalidBox(_))));
        dto.angle_deg = f64::NAN;
        assert!(matches!(dto.to_box(), Err(FormatError::InvalidBox(_))));
        dto.angle_deg = 0.0;
        dto.w = -1.0;
        assert!(matches!(dto.to_box(), Err(FormatError::InvalidBox(_))));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let doc = sample_doc();
        let mut dto = DocumentFile::from_document(&doc);
        dto.lines.push(dto.lines[0].clone());
        assert!(matches!(
            dto.to_document(),
            Err(FormatError::DuplicateLineId(4))
        ));

        let mut dto = DocumentFile::from_document(&doc);
        dto.lines[0].id = 5;
        dto.lines.push(dto.lines[0].clone());
        dto.lines[1].id = 6;
        assert!(matches!(
            dto.to_document(),
            Err(FormatError::DuplicateWordId(9))
        ));
    }

    #[test]
    fn predictions_round_trip_and_reject_duplicates() {
        let mut preds = Predictions::default();
        preds.set_node(0, 0.25);
        preds.set_node(1, 1.0);
        preds.set_edge(1, 0, 0.5);
        let dto = PredictionsFile::from_predictions(&preds);
        assert_eq!(dto.to_predictions().unwrap(), preds);

        let mut dup = dto.clone();
        dup.edges.push(EdgeScoreDto {
            a: 0,
            b: 1,
            p_same_paragraph: 0.9,
        });
        assert!(matches!(
            dup.to_predictions(),
            Err(FormatError::DuplicateScore(_))
        ));
    }

    #[test]
    fn result_round_trip_validates_patterns() {
        let result = ReadingOrderResult {
            paragraphs: vec![OrderedParagraph {
                id: 0,
                pattern: Pattern::Row,
                line_ids: vec![2, 1],
            }],
            reading_order: vec![0],
            line_order: vec![2, 1],
        };
        let dto = ResultFile::from_result(&result);
        assert_eq!(dto.paragraphs[0].pattern, "row");
        assert_eq!(dto.to_result().unwrap(), result);

        let mut bad = dto.clone();
        bad.paragraphs[0].pattern = "diagonal".into();
        assert!(matches!(
            bad.to_result(),
            Err(FormatError::InvalidPattern(_))
        ));
        let mut dup = dto.clone();
        dup.paragraphs.push(dto.paragraphs[0].clone());
        assert!(matches!(
            dup.to_result(),
            Err(FormatError::DuplicateParagraphId(0))
        ));
    }

    #[test]
    fn dataset_round_trips_synthetic_documents() {
        let synth = generate(&SynthConfig::default()).unwrap();
        let dto = DatasetDocDto::from_synth("doc-000", &synth);
        let text = to_json_string(&DatasetFile {
            documents: vec![dto.clone()],
        });
        let parsed: DatasetFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.documents[0].doc_id, "doc-000");
        let eval = parsed.documents[0].to_eval_document().unwrap();
        assert_eq!(eval.document.lines.len(), synth.document.lines.len());
        assert_eq!(eval.groups.len(), 1);
        let truth = parsed.documents[0].truth.as_ref().unwrap().to_truth().unwrap();
        assert_eq!(truth.paragraph_order, synth.truth.paragraph_order);
        assert_eq!(truth.paragraph_patterns, synth.truth.paragraph_patterns);
    }

    #[test]
    fn atomic_write_replaces_content_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_json_atomic(&path, &vec![1u32, 2, 3]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "[1,2,3]\n");
        write_json_atomic(&path, &vec![9u32]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "[9]\n");
        // No stray temp files left behind.
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn read_json_reports_the_failing_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("absent.json");
        let err = read_json::<DocumentFile>(&missing).unwrap_err();
        assert!(matches!(err, FormatError::Io { .. }));
        assert!(err.to_string().contains("absent.json"));

        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, b"{ nope").unwrap();
        let err = read_json::<DocumentFile>(&bad).unwrap_err();
        assert!(matches!(err, FormatError::Parse { .. }));
        assert!(err.to_string().contains("bad.json"));
    }

    #[test]
    fn feature_rows_match_the_line_features() {
        let doc = sample_doc();
        let f = FeaturesFile::from_document(&doc);
        assert_eq!(f.lines.len(), 1);
        assert_eq!(f.lines[0].line_id, 4);
        assert_eq!(
            f.lines[0].features,
            node_spatial_features(&doc.lines[0]).to_vec()
        );
        assert_eq!(f.lines[0].features.len(), crate::signals::NODE_FEATURE_LEN);
    }

    #[test]
    fn serialization_is_byte_identical_across_runs() {
        let synth = generate(&SynthConfig {
            rotation_deg: -17.5,
            ..SynthConfig::default()
        })
        .unwrap();
        let a = to_json_string(&DocumentFile::from_document(&synth.document));
        let b = to_json_string(&DocumentFile::from_document(&synth.document));
        assert_eq!(a, b);
    }
}
