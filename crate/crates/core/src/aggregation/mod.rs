//! From per-window scores to behavior chunks: 2 s majority vote, rough
//! aggregation, boundary peak selection and refined aggregation.

mod merge;
mod peaks;
mod vote;

pub use merge::{refined_aggregate, rough_aggregate};
pub use peaks::{peak_positions, select_peaks, BoundaryKind, Peak};
pub use vote::{vote_segments, Segment};

use crate::domain::{AggregationMode, Chunk, ClipScores, ClipWindow};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct AggregationConfig {
    /// Minimum peak score kept for refinement.
    pub theta: f64,
    /// Largest same-class gap (seconds) that still merges.
    pub gap: f64,
    /// Peaks this close (seconds between window starts) suppress each other.
    pub peak_min_separation: f64,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        AggregationConfig {
            theta: 0.8,
            gap: 4.0,
            peak_min_separation: 4.0,
        }
    }
}

impl AggregationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::Config(format!(
                "theta {} must be in [0, 1)",
                self.theta
            )));
        }
        if !(self.gap >= 0.0 && self.gap.is_finite()) {
            return Err(Error::Config(format!("gap {} must be >= 0", self.gap)));
        }
        if !(self.peak_min_separation >= 0.0 && self.peak_min_separation.is_finite()) {
            return Err(Error::Config("peak_min_separation must be >= 0".into()));
        }
        Ok(())
    }
}

/// Votes and aggregates one video's windows in the requested mode.
pub fn aggregate_video(
    windows: &[ClipWindow],
    scores: &[ClipScores],
    mode: AggregationMode,
    config: &AggregationConfig,
) -> Result<Vec<Chunk>> {
    config.validate()?;
    let segments = vote_segments(windows, scores)?;
    Ok(match mode {
        AggregationMode::Rough => rough_aggregate(&segments, config),
        AggregationMode::Refined => {
            let peaks = select_peaks(windows, scores, config)?;
            refined_aggregate(&segments, &peaks, config)
        }
    })
}
