mod common;

use common::peak_violations;
use phoneloc::aggregation::{peak_positions, select_peaks, AggregationConfig, BoundaryKind};
use phoneloc::domain::{ClipScores, ClipWindow};
use phoneloc::rng::SimRng;
use proptest::prelude::*;

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * k as f64).collect()
}

#[test]
fn random_sequences_satisfy_peak_properties() {
    let mut rng = SimRng::new(31);
    for case in 0..1000 {
        let n = 1 + rng.below(60) as usize;
        // Coarse values make equal neighbours and equal peaks common.
        let values: Vec<f64> = (0..n).map(|_| rng.below(20) as f64 / 20.0).collect();
        let kept = peak_positions(&grid(n), &values, 4.0, 0.8);
        let bad = peak_violations(&values, &kept, 4.0, 0.8);
        assert!(bad.is_empty(), "case {case}: {bad:?} for {values:?}");
    }
}

#[test]
fn select_peaks_reports_midpoints_and_kinds() {
    let windows: Vec<ClipWindow> = (0..5)
        .map(|k| ClipWindow::new("v", 2.0 * k as f64).unwrap())
        .collect();
    let starts = [0.1, 0.9, 0.3, 0.85, 0.2];
    let ends = [0.1, 0.2, 0.3, 0.2, 0.95];
    let scores: Vec<ClipScores> = starts
        .iter()
        .zip(ends)
        .map(|(&s, e)| ClipScores {
            class_logits: vec![0.0, 0.0, 0.0],
            p_start: s,
            p_end: e,
        })
        .collect();
    let peaks = select_peaks(&windows, &scores, &AggregationConfig::default()).unwrap();
    assert_eq!(peaks.len(), 2);
    assert_eq!(
        (peaks[0].kind, peaks[0].window_index, peaks[0].time),
        (BoundaryKind::Start, 1, 6.0)
    );
    assert_eq!(
        (peaks[1].kind, peaks[1].window_index, peaks[1].time),
        (BoundaryKind::End, 4, 12.0)
    );
}

proptest! {
    #[test]
    fn peak_properties_hold(values in proptest::collection::vec(0.0f64..1.0, 0..80), theta in 0.0f64..1.0) {
        let kept = peak_positions(&grid(values.len()), &values, 4.0, theta);
        let bad = peak_violations(&values, &kept, 4.0, theta);
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }
}
