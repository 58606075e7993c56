//! Data ingestion, configuration, reports and diagnostics.

pub mod config;
pub mod diagnose;
pub mod ingest;
pub mod report;
pub mod summary;

pub use config::{Grid, RunConfig, TruthSpec};
pub use diagnose::{diagnose, DiagnosticSeries};
pub use ingest::{ingest_csv, ingest_reader, write_history_csv, Ingested, TypeMapping, Window};
pub use report::{FitReport, SCHEMA_VERSION};
pub use summary::{summarize, Summary, TypeSummary};
