//! Clip accuracy, confusion matrices, inclusion ROC/P-R curves, temporal
//! prediction accuracy and review efficiency.

mod curves;
mod metrics;
pub mod plot;
mod report;

pub use curves::{default_thresholds, dense_thresholds, inclusion_curves, CurvePoint};
pub use metrics::{
    clip_accuracy, confusion, mean_by_class, mean_temporal_accuracy, review_efficiency,
    temporal_accuracy, ConfusionMatrix,
};
pub use report::{parse_report, CurveResult, MetricsReport};

/// Share of cell-phone behavior in unreviewed video.
pub const DEFAULT_BASE_RATE: f64 = 0.06;
