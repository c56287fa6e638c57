//! Command-line frontend for the reading-order engine.
//!
//! Subcommands: `order` infers the reading order of a page, `label`
//! derives weak pattern labels from annotations, `eval` scores result
//! files against a dataset, `synth` generates synthetic datasets, and
//! `render` draws a result as SVG. Exit codes: 0 success, 1 write or
//! internal failure, 2 invalid input, 3 inputs that are individually
//! valid but inconsistent with each other.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use readorder_core::formats::{
    read_json, to_json_string, write_atomic, AnnotationsFile, DatasetDocDto, DatasetFile,
    DocResultDto, DocumentFile, LabelDto, PredictionsFile, ReportFile, ResultFile, ResultsFile,
};
use readorder_core::labeling::label_patterns;
use readorder_core::metrics::{evaluate, EvalDocument, MetricError};
use readorder_core::ordering::{read_order_with_graph, PipelineError};
use readorder_core::render::render_svg;
use readorder_core::signals::{constant_predictor, oracle_predictor, SignalError};
use readorder_core::skeleton::build_skeleton;
use readorder_core::synthgen::{generate, SynthConfig, SynthKind};
use readorder_core::{Pattern, PipelineConfig, ReadingOrderResult};

#[derive(Parser)]
#[command(
    name = "readorder",
    version,
    about = "Reading order inference for OCR text lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer paragraphs and reading order for a page of text lines.
    Order(OrderArgs),
    /// Derive weak pattern labels from annotated paragraph groups.
    Label(LabelArgs),
    /// Score result files against a dataset's annotated groups.
    Eval(EvalArgs),
    /// Generate a synthetic document with ground truth.
    Synth(SynthArgs),
    /// Render a document and a result file as an SVG drawing.
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Col,
    Row,
}

impl From<BaselineArg> for Pattern {
    fn from(b: BaselineArg) -> Pattern {
        match b {
            BaselineArg::Col => Pattern::Col,
            BaselineArg::Row => Pattern::Row,
        }
    }
}

#[derive(Args)]
struct OrderArgs {
    /// Input document JSON (text lines with word boxes).
    #[arg(long)]
    lines: PathBuf,
    /// Model scores JSON; without it a constant baseline is used.
    #[arg(long, conflicts_with = "baseline")]
    predictions: Option<PathBuf>,
    /// Constant predictor: every line gets this pattern, no two lines
    /// share a paragraph.
    #[arg(long, value_enum, default_value_t = BaselineArg::Col)]
    baseline: BaselineArg,
    /// Cluster nesting threshold: fraction of a cluster's area that
    /// must be covered before it nests inside a larger cluster.
    #[arg(long = "T", value_name = "FRACTION", default_value_t = 0.9)]
    hierarchy_overlap: f64,
    /// Minimum same-paragraph edge score for merging two lines.
    #[arg(long, value_name = "SCORE", default_value_t = 0.5)]
    threshold: f64,
    /// Write the result JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG rendering of the result.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct LabelArgs {
    /// Annotations JSON (groups of paragraph boxes in reading order).
    #[arg(long)]
    annotations: PathBuf,
    /// Write the label JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset JSON with documents and annotated groups.
    #[arg(long)]
    dataset: PathBuf,
    /// Results JSON; repeat the flag to compare several methods.
    #[arg(long, required = true)]
    results: Vec<PathBuf>,
    /// Write the full reports JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Columns,
    Table,
    Mixed,
}

#[derive(Args)]
struct SynthArgs {
    /// Layout family to generate.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Generator seed; equal seeds give identical output.
    #[arg(long)]
    seed: u64,
    /// Column count (also the table's column count).
    #[arg(long, default_value_t = 3)]
    columns: u32,
    /// Table row count.
    #[arg(long, default_value_t = 4)]
    rows: u32,
    /// Minimum lines per paragraph.
    #[arg(long, default_value_t = 3)]
    min_lines: u32,
    /// Maximum lines per paragraph.
    #[arg(long, default_value_t = 6)]
    max_lines: u32,
    #[arg(long, default_value_t = 800.0)]
    page_w: f64,
    #[arg(long, default_value_t = 1000.0)]
    page_h: f64,
    /// Random offset added to each line center (clamped to the
    /// layout's smallest gap).
    #[arg(long, default_value_t = 0.5)]
    jitter: f64,
    /// Whole-page rotation in degrees, in (-90, 90).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rotation_deg: f64,
    /// Directory for lines.json, predictions.json, annotations.json,
    /// and dataset.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Input document JSON.
    #[arg(long)]
    lines: PathBuf,
    /// Result JSON produced by `order`.
    #[arg(long)]
    result: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

/// Failures grouped by exit code.
enum CliError {
    /// Unreadable or invalid input (exit 2).
    Input(String),
    /// Inputs valid on their own but inconsistent together (exit 3).
    Referential(String),
    /// Write failures and other internal errors (exit 1).
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Referential(m) | CliError::Internal(m) => {
                f.write_str(m)
            }
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Input(_) => 2,
            CliError::Referential(_) => 3,
        }
    }
}

fn input(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn internal(e: impl fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn signal_err(e: SignalError) -> CliError {
    match e {
        SignalError::NodeScoreOutOfRange { .. } | SignalError::EdgeScoreOutOfRange { .. } => {
            input(e)
        }
        // Scores that don't line up with the document's skeleton graph.
        _ => CliError::Referential(e.to_string()),
    }
}

fn pipeline_err(e: PipelineError) -> CliError {
    match e {
        PipelineError::Signal(s) => signal_err(s),
        PipelineError::Skeleton(k) => input(k),
        PipelineError::UnknownLine(_) => CliError::Referential(e.to_string()),
    }
}

fn metric_err(e: MetricError) -> CliError {
    match e {
        MetricError::EmptyDataset => input(e),
        _ => CliError::Referential(e.to_string()),
    }
}

/// Write canonical JSON text to `out`, or to stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(internal),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_order(args: &OrderArgs) -> Result<(), CliError> {
    let doc = read_json::<DocumentFile>(&args.lines)
        .map_err(input)?
        .to_document()
        .map_err(input)?;
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(CliError::Input(format!(
            "--threshold {} out of [0, 1]",
            args.threshold
        )));
    }
    if !(args.hierarchy_overlap >= 0.0) {
        return Err(CliError::Input(format!(
            "--T {} must be non-negative",
            args.hierarchy_overlap
        )));
    }

    let result = if doc.lines.is_empty() {
        ReadingOrderResult::default()
    } else {
        let graph = build_skeleton(&doc.lines).map_err(input)?;
        let preds = match &args.predictions {
            Some(path) => read_json::<PredictionsFile>(path)
                .map_err(input)?
                .to_predictions()
                .map_err(input)?,
            None => constant_predictor(&doc, &graph, args.baseline.into(), false),
        };
        let config = PipelineConfig {
            cluster_threshold: args.threshold,
            hierarchy_overlap: args.hierarchy_overlap,
            max_col_edge_len: None,
        };
        read_order_with_graph(&doc, &graph, &preds, &config).map_err(pipeline_err)?
    };

    emit(
        args.out.as_deref(),
        &to_json_string(&ResultFile::from_result(&result)),
    )?;
    if let Some(path) = &args.svg {
        let svg = render_svg(&doc, &result).map_err(|e| CliError::Referential(e.to_string()))?;
        write_atomic(path, svg.as_bytes()).map_err(internal)?;
    }
    Ok(())
}

fn cmd_label(args: &LabelArgs) -> Result<(), CliError> {
    let groups = read_json::<AnnotationsFile>(&args.annotations)
        .map_err(input)?
        .to_groups()
        .map_err(input)?;
    let labels: Vec<LabelDto> = groups
        .iter()
        .flat_map(|g| label_patterns(g))
        .map(|(paragraph_id, label)| LabelDto {
            paragraph_id,
            pattern: label.as_str().to_string(),
        })
        .collect();
    emit(args.out.as_deref(), &to_json_string(&labels))
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let dataset = read_json::<DatasetFile>(&args.dataset).map_err(input)?;
    let docs: Vec<EvalDocument> = dataset
        .documents
        .iter()
        .map(DatasetDocDto::to_eval_document)
        .collect::<Result<_, _>>()
        .map_err(input)?;

    let mut reports = Vec::with_capacity(args.results.len());
    for path in &args.results {
        let file = read_json::<ResultsFile>(path).map_err(input)?;
        let method = file
            .method
            .clone()
            .unwrap_or_else(|| path.display().to_string());
        let mut by_doc: BTreeMap<String, ReadingOrderResult> = BTreeMap::new();
        for DocResultDto { doc_id, result } in &file.results {
            let parsed = result.to_result().map_err(input)?;
            if by_doc.insert(doc_id.clone(), parsed).is_some() {
                return Err(CliError::Input(format!(
                    "duplicate result for document {doc_id} in {}",
                    path.display()
                )));
            }
        }
        let report = evaluate(&docs, &by_doc).map_err(metric_err)?;
        println!("{method} {:.6}", report.micro_average);
        reports.push(ReportFile::from_report(Some(&method), &report));
    }
    if let Some(out) = &args.out {
        write_atomic(out, to_json_string(&reports).as_bytes()).map_err(internal)?;
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let kind = match args.kind {
        KindArg::Columns => SynthKind::Columns,
        KindArg::Table => SynthKind::Table,
        KindArg::Mixed => SynthKind::Mixed,
    };
    let config = SynthConfig {
        kind,
        seed: args.seed,
        columns: args.columns,
        rows: args.rows,
        lines_per_paragraph: (args.min_lines, args.max_lines),
        page_w: args.page_w,
        page_h: args.page_h,
        jitter: args.jitter,
        rotation_deg: args.rotation_deg,
        ..SynthConfig::default()
    };
    let synth = generate(&config).map_err(input)?;

    let graph = build_skeleton(&synth.document.lines).map_err(input)?;
    let preds = oracle_predictor(&synth.document, &graph, &synth.truth).map_err(internal)?;

    std::fs::create_dir_all(&args.out_dir).map_err(internal)?;
    let kind_name = match kind {
        SynthKind::Columns => "columns",
        SynthKind::Table => "table",
        SynthKind::Mixed => "mixed",
    };
    let doc_id = format!("{kind_name}-{:08}", args.seed);
    let files: [(&str, String); 4] = [
        (
            "lines.json",
            to_json_string(&DocumentFile::from_document(&synth.document)),
        ),
        (
            "predictions.json",
            to_json_string(&PredictionsFile::from_predictions(&preds)),
        ),
        (
            "annotations.json",
            to_json_string(&AnnotationsFile::from_groups(&synth.groups)),
        ),
        (
            "dataset.json",
            to_json_string(&DatasetFile {
                documents: vec![DatasetDocDto::from_synth(&doc_id, &synth)],
            }),
        ),
    ];
    for (name, text) in &files {
        write_atomic(&args.out_dir.join(name), text.as_bytes()).map_err(internal)?;
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<(), CliError> {
    let doc = read_json::<DocumentFile>(&args.lines)
        .map_err(input)?
        .to_document()
        .map_err(input)?;
    let result = read_json::<ResultFile>(&args.result)
        .map_err(input)?
        .to_result()
        .map_err(input)?;
    let svg = render_svg(&doc, &result).map_err(|e| CliError::Referential(e.to_string()))?;
    write_atomic(&args.out, svg.as_bytes()).map_err(internal)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Order(args) => cmd_order(args),
        Command::Label(args) => cmd_label(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Render(args) => cmd_render(args),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
