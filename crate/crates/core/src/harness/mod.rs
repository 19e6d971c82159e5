//! End-to-end experiments: folds, selection, labeling, training, evaluation and reports.

mod report;
mod run;
pub mod sidecar;
mod spec;
pub mod synthetic;

pub use report::{
    emit_report, load_report, to_csv, Aggregate, Cell, Comparison, ExperimentReport, ReportFormat, RuntimeInfo,
    SelectionAudit, CI_LEVEL, CSV_HEADER,
};
pub use run::{run_experiment, sweep_lsi_dims};
pub use sidecar::{invoke_sidecar, SidecarConfig, SidecarReply, SidecarRequest, Variant};
pub use spec::{
    ClassifierSettings, ExperimentSpec, ReprPair, ReprSpec, SelectionSettings, DEFAULT_BUDGETS, DEFAULT_SWEEP_DIMS,
};
