mod common;

use common::{expand_chunks, oracle_aggregate, random_segments};
use phoneloc::aggregation::{
    refined_aggregate, rough_aggregate, AggregationConfig, BoundaryKind, Peak,
};
use phoneloc::domain::chunks_sorted_disjoint;
use phoneloc::rng::SimRng;
use proptest::prelude::*;

fn classes(segs: &[phoneloc::aggregation::Segment]) -> Vec<usize> {
    segs.iter().map(|s| s.class.index()).collect()
}

fn random_peaks(rng: &mut SimRng, horizon: f64) -> Vec<Peak> {
    (0..rng.below(5))
        .map(|i| Peak {
            window_index: i as usize,
            kind: if rng.bernoulli(0.5) {
                BoundaryKind::Start
            } else {
                BoundaryKind::End
            },
            score: 0.9,
            // Grid window midpoints, sometimes shifted off the grid by 1 s.
            time: 4.0
                + 2.0 * rng.below((horizon / 2.0) as u64 + 1) as f64
                + if rng.bernoulli(0.3) { 1.0 } else { 0.0 },
        })
        .collect()
}

#[test]
fn rough_matches_oracle_on_random_sequences() {
    let cfg = AggregationConfig::default();
    let mut rng = SimRng::new(2024);
    for case in 0..1000 {
        let segs = random_segments(&mut rng, 50, 3);
        let got = rough_aggregate(&segs, &cfg);
        assert_eq!(
            got,
            oracle_aggregate(&classes(&segs), cfg.gap, &[]),
            "case {case}: {:?}",
            classes(&segs)
        );
    }
}

#[test]
fn refined_matches_oracle_with_blocking_peaks() {
    let cfg = AggregationConfig::default();
    let mut rng = SimRng::new(77);
    for case in 0..1000 {
        let segs = random_segments(&mut rng, 50, 3);
        let peaks = random_peaks(&mut rng, 2.0 * segs.len() as f64);
        let times: Vec<f64> = peaks.iter().map(|p| p.time).collect();
        let got = refined_aggregate(&segs, &peaks, &cfg);
        assert_eq!(
            got,
            oracle_aggregate(&classes(&segs), cfg.gap, &times),
            "case {case}"
        );
        assert!(chunks_sorted_disjoint(&got));
    }
}

#[test]
fn four_class_sequences_match_oracle() {
    let cfg = AggregationConfig::default();
    let mut rng = SimRng::new(4);
    for _ in 0..300 {
        let segs = random_segments(&mut rng, 50, 4);
        assert_eq!(
            rough_aggregate(&segs, &cfg),
            oracle_aggregate(&classes(&segs), cfg.gap, &[])
        );
    }
}

proptest! {
    #[test]
    fn output_is_sorted_disjoint_and_nonzero(cls in proptest::collection::vec(0usize..3, 0..50)) {
        let segs: Vec<_> = cls.iter().enumerate()
            .map(|(i, &c)| phoneloc::aggregation::Segment::labeled(i, phoneloc::domain::BehaviorClass(c)))
            .collect();
        let out = rough_aggregate(&segs, &AggregationConfig::default());
        prop_assert!(chunks_sorted_disjoint(&out));
        for c in &out {
            prop_assert!(c.class.is_behavior());
            prop_assert!(c.start < c.end);
            prop_assert_eq!((c.start / 2.0).fract(), 0.0);
            prop_assert_eq!((c.end / 2.0).fract(), 0.0);
        }
    }

    #[test]
    fn rough_is_idempotent(cls in proptest::collection::vec(0usize..3, 0..50)) {
        let cfg = AggregationConfig::default();
        let segs: Vec<_> = cls.iter().enumerate()
            .map(|(i, &c)| phoneloc::aggregation::Segment::labeled(i, phoneloc::domain::BehaviorClass(c)))
            .collect();
        let once = rough_aggregate(&segs, &cfg);
        let twice = rough_aggregate(&expand_chunks(&once, cls.len()), &cfg);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn refined_without_peaks_is_rough(cls in proptest::collection::vec(0usize..3, 0..50), gap in 0u32..4) {
        let cfg = AggregationConfig { gap: 2.0 * gap as f64, ..AggregationConfig::default() };
        let segs: Vec<_> = cls.iter().enumerate()
            .map(|(i, &c)| phoneloc::aggregation::Segment::labeled(i, phoneloc::domain::BehaviorClass(c)))
            .collect();
        prop_assert_eq!(refined_aggregate(&segs, &[], &cfg), rough_aggregate(&segs, &cfg));
    }
}
