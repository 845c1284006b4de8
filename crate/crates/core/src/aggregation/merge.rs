//! Rough and refined aggregation of voted segments into chunks.
//!
//! 1. Maximal runs of one nonzero class on contiguous cells become
//!    proto-chunks, grouped by class.
//! 2. Within a class, consecutive proto-chunks whose gap is at most
//!    `config.gap` seconds merge, absorbing the gap. Refined aggregation also
//!    requires that no peak time lies strictly inside the gap.
//! 3. Across classes, a chunk contained in a longer one is dropped; partial
//!    overlaps between survivors are cut out of both, and empty remainders
//!    are dropped.

use crate::aggregation::peaks::Peak;
use crate::aggregation::vote::Segment;
use crate::aggregation::AggregationConfig;
use crate::domain::{BehaviorClass, Chunk, STRIDE_SECONDS};

/// Half-open cell range `[start, end)` of one class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct CellSpan {
    pub class: BehaviorClass,
    pub start: usize,
    pub end: usize,
}

impl CellSpan {
    fn len(&self) -> usize {
        self.end - self.start
    }

    fn contains(&self, other: &CellSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// Chunks from class labels and the gap rule only.
pub fn rough_aggregate(segments: &[Segment], config: &AggregationConfig) -> Vec<Chunk> {
    aggregate(segments, &[], config)
}

/// Rough aggregation with merges across a gap blocked by any peak
/// (start or end) whose time lies strictly inside the gap.
pub fn refined_aggregate(
    segments: &[Segment],
    peaks: &[Peak],
    config: &AggregationConfig,
) -> Vec<Chunk> {
    let mut times: Vec<f64> = peaks.iter().map(|p| p.time).collect();
    times.sort_by(|a, b| a.total_cmp(b));
    aggregate(segments, &times, config)
}

fn aggregate(
    segments: &[Segment],
    blocking_times: &[f64],
    config: &AggregationConfig,
) -> Vec<Chunk> {
    let runs = class_runs(segments);
    let merged = merge_within_class(&runs, blocking_times, config.gap);
    resolve_overlaps(&merged)
        .into_iter()
        .map(|s| Chunk::from_cells(s.class, s.start, s.end))
        .collect()
}

/// Step 1: maximal runs of equal nonzero class over contiguous cells.
pub(crate) fn class_runs(segments: &[Segment]) -> Vec<CellSpan> {
    let mut sorted: Vec<(usize, BehaviorClass)> =
        segments.iter().map(|s| (s.cell, s.class)).collect();
    sorted.sort_by_key(|&(cell, _)| cell);

    let mut runs: Vec<CellSpan> = Vec::new();
    for (cell, class) in sorted {
        if !class.is_behavior() {
            continue;
        }
        match runs.last_mut() {
            Some(run) if run.class == class && run.end == cell => run.end = cell + 1,
            _ => runs.push(CellSpan {
                class,
                start: cell,
                end: cell + 1,
            }),
        }
    }
    runs
}

/// Step 2 over each class list. Output is ordered by class, then start.
fn merge_within_class(runs: &[CellSpan], blocking_times: &[f64], gap: f64) -> Vec<CellSpan> {
    let mut by_class: Vec<CellSpan> = runs.to_vec();
    by_class.sort_by_key(|r| (r.class, r.start));

    let mut out: Vec<CellSpan> = Vec::with_capacity(by_class.len());
    for run in by_class {
        if let Some(last) = out.last_mut() {
            if last.class == run.class {
                let gap_start = last.end as f64 * STRIDE_SECONDS;
                let gap_end = run.start as f64 * STRIDE_SECONDS;
                let close = gap_end - gap_start <= gap + 1e-9;
                if close && !blocked(blocking_times, gap_start, gap_end) {
                    last.end = run.end;
                    continue;
                }
            }
        }
        out.push(run);
    }
    out
}

/// Whether any sorted time lies in the open interval `(lo, hi)`.
fn blocked(times: &[f64], lo: f64, hi: f64) -> bool {
    let first_after = times.partition_point(|&t| t <= lo);
    times.get(first_after).is_some_and(|&t| t < hi)
}

/// Step 3: cover rule, then boundary trimming. Output sorted by start.
fn resolve_overlaps(spans: &[CellSpan]) -> Vec<CellSpan> {
    // Equal-length containment only happens for identical spans; the
    // earlier-ordered one (lower class) wins.
    let beats = |y: &CellSpan, x: &CellSpan| {
        y.contains(x)
            && (y.len() > x.len()
                || (y.len() == x.len() && (y.start, y.class) < (x.start, x.class)))
    };
    let survivors: Vec<CellSpan> = spans
        .iter()
        .filter(|x| !spans.iter().any(|y| y != *x && beats(y, x)))
        .copied()
        .collect();

    let mut out: Vec<CellSpan> = survivors
        .iter()
        .filter_map(|x| {
            let mut start = x.start;
            let mut end = x.end;
            for y in survivors.iter().filter(|y| *y != x) {
                if y.start < x.start && y.end > x.start {
                    start = start.max(y.end);
                }
                if y.start > x.start && y.start < x.end {
                    end = end.min(y.start);
                }
            }
            (start < end).then_some(CellSpan {
                class: x.class,
                start,
                end,
            })
        })
        .collect();
    out.sort_by_key(|s| (s.start, s.class));
    out
}
