//! BLEU, the quatrain continuation protocol, random-text baselines and
//! cross-model reports.

mod bleu;
mod continuation;
mod generator;
mod report;

pub use bleu::{bleu, BleuConfig, BleuMode};
pub use continuation::{continuation_bleu_eval, quatrains, ContinuationConfig, ContinuationResult};
pub use generator::{random_baseline_text, BaselineMode, ModelGenerator, RandomBaseline, TextGenerator};
pub use report::{
    build_report, compare_stylization, parse_report_csv, sample_ce_matrix, ComparisonSpec, EvalReport, LabelledRow,
    Provenance, ReportConfig, ReportRow, StylizationComparison, MIXED, SELF_ROW,
};
