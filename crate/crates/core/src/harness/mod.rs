//! End-to-end experiments driven by one JSON config document: the β-flip
//! simulation sweep, the rating-versus-percentile comparison and the
//! reranker study, with their report tables and plot files.

pub mod commands;
mod config;
pub mod fixture;
mod output;
mod pipeline;
mod stats;
mod studies;

pub use config::{
    ComparisonSpec, DatasetSource, DatasetSpec, GridChoice, InputTransform, PipelineSpec,
    RerankerStudySpec, SimulationSpec, StudyConfig, SCHEMA_VERSION,
};
pub use fixture::{generate as generate_fixture, FixtureConfig};
pub use output::{write_diagnostics, write_report, RESULTS_HEADER};
pub use pipeline::{dataset_hash, fit, load_dataset, prepare, run_pipeline, Prepared, TrainInput};
pub use stats::spearman;
pub use studies::{
    metric_gains, run_comparison, run_reranker_study, run_simulation_sweep, run_study,
    ComparisonRow, GainRow, Provenance, RerankCell, ResultRow, StudyReport, SweepRow, SweepTrend,
};
