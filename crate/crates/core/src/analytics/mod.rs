//! Per-student metrics, cohort statistics, and the CSV report.

mod metrics;
mod report;
mod stats;

pub use metrics::{
    aggregate_hints, attempt_window, classify_attempted, compute_metrics, hint_outcomes, metrics_by_student,
    metrics_from_replays, HintAggregates, HintOutcome, HintStatus, PhaseMetrics, SessionMetrics, UnusedCase,
};
pub use report::{
    cohort_rows, csv_header, hint_correlations, phase_scores, to_csv, write_csv, CorrelationRow, StudentRow,
    HINT_FIELDS, PHASE_FIELDS,
};
pub use stats::{
    assign_conditions, correlate, median, median_split, percentiles, score, Correlation, Group, ScoreWeights,
    StatsError,
};
