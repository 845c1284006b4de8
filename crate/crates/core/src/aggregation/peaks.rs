use crate::aggregation::AggregationConfig;
use crate::domain::{ClipScores, ClipWindow};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryKind {
    Start,
    End,
}

/// A window whose inclusion score is a retained local maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    /// Position in the input window list.
    pub window_index: usize,
    pub kind: BoundaryKind,
    pub score: f64,
    /// Window midpoint, in seconds.
    pub time: f64,
}

/// Boundary peaks of both kinds, sorted by time then kind.
///
/// Per kind: keep strict local maxima (a missing neighbor counts as -inf),
/// suppress peaks within `peak_min_separation` of a higher one (greedy from the
/// highest score; equal scores keep the earlier), then keep scores `>= theta`.
pub fn select_peaks(
    windows: &[ClipWindow],
    scores: &[ClipScores],
    config: &AggregationConfig,
) -> Result<Vec<Peak>> {
    if windows.len() != scores.len() {
        return Err(Error::Misaligned {
            windows: windows.len(),
            scores: scores.len(),
        });
    }
    let mut order: Vec<usize> = (0..windows.len()).collect();
    order.sort_by(|&a, &b| windows[a].start.total_cmp(&windows[b].start));
    let starts: Vec<f64> = order.iter().map(|&i| windows[i].start).collect();

    let mut peaks = Vec::new();
    for kind in [BoundaryKind::Start, BoundaryKind::End] {
        let values: Vec<f64> = order
            .iter()
            .map(|&i| match kind {
                BoundaryKind::Start => scores[i].p_start,
                BoundaryKind::End => scores[i].p_end,
            })
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("inclusion scores"));
        }
        for pos in peak_positions(&starts, &values, config.peak_min_separation, config.theta) {
            let index = order[pos];
            peaks.push(Peak {
                window_index: index,
                kind,
                score: values[pos],
                time: windows[index].midpoint(),
            });
        }
    }
    peaks.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.kind.cmp(&b.kind)));
    Ok(peaks)
}

/// Positions (into `starts`/`values`, sorted by start) of retained peaks, ascending.
pub fn peak_positions(
    starts: &[f64],
    values: &[f64],
    min_separation: f64,
    theta: f64,
) -> Vec<usize> {
    let n = values.len();
    let local_max: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i == 0 {
                f64::NEG_INFINITY
            } else {
                values[i - 1]
            };
            let right = if i + 1 == n {
                f64::NEG_INFINITY
            } else {
                values[i + 1]
            };
            values[i] > left && values[i] > right
        })
        .collect();

    let mut by_score = local_max;
    by_score.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for cand in by_score {
        if kept
            .iter()
            .all(|&k| (starts[k] - starts[cand]).abs() > min_separation)
        {
            kept.push(cand);
        }
    }
    kept.retain(|&k| values[k] >= theta);
    kept.sort_unstable();
    kept
}
