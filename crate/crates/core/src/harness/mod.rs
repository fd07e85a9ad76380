//! Dataset preparation, the filter cascade and KPI reporting.

mod cascade;
mod eval;
mod pair;
mod prep;
mod report;

pub use cascade::{filter_cascade, filter_cascade_with, Assessment, CascadeContext, GenerationRecord};
pub use eval::{compare_reports, eval_reconstructions, Comparison, EvalMetrics};
pub use pair::{bundled_reference_pairs, find_pair, parse_reference_pairs, read_latent_pair, LatentPair, ReferencePair};
pub use prep::{prep_dataset, prep_records, PrepConfig, PrepOutput, PrepStats, RejectReason};
pub use report::{
    export_distributions, histogram_csv, kpi_report, rds_bin, scatter_csv, DeltaSas, RunMeta, RunReport, RunTiming,
    StageCounts, StageRates, Summary, RDS_BINS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{file}:{line}: {message}")]
    Data { file: String, line: usize, message: String },
    #[error("reference pair '{0}' not found")]
    UnknownPair(String),
    #[error("invalid reference pair {class}: {message}")]
    BadPair { class: String, message: String },
    #[error("baseline mismatch: {0}")]
    BaselineMismatch(String),
    #[error("malformed report: {0}")]
    Report(#[from] serde_json::Error),
    #[error(transparent)]
    Fingerprint(#[from] crate::fingerprint::FingerprintError),
    #[error(transparent)]
    Decoder(#[from] crate::decoder::DecoderError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
