//! Reading-order inference for OCR text lines.
//!
//! The pipeline turns a bag of rotated line boxes into a reading order:
//! a sparse proximity graph over line centers ([`skeleton`]), per-node and
//! per-edge scores ([`signals`]), hierarchical clustering into paragraphs
//! and column/row clusters ([`clustering`]), and a bidimensional
//! topological sort that linearizes the hierarchy ([`ordering`]).
//! [`labeling`] derives column/row patterns from ordered ground-truth
//! annotations, [`metrics`] scores predicted orders against them, and
//! [`synthgen`] generates deterministic synthetic documents for testing.

pub mod clustering;
pub mod formats;
pub mod geometry;
pub mod labeling;
pub mod metrics;
pub mod ordering;
pub mod render;
pub mod signals;
pub mod skeleton;
pub mod synthgen;

pub use clustering::{Cluster, ClusterId, ClusterTree, Paragraph, ParagraphId, Pattern};
pub use geometry::{AABox, Axis, GeometryError, Point, RotatedBox};
pub use ordering::{PipelineConfig, ReadingOrderResult};
pub use signals::{Document, GroundTruth, LineId, Predictions, TextLine, Word, WordId};
pub use skeleton::SkeletonGraph;
