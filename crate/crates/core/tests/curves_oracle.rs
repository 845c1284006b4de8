mod common;

use common::recount;
use phoneloc::evaluation::{default_thresholds, dense_thresholds, inclusion_curves};
use phoneloc::rng::SimRng;

fn instance(rng: &mut SimRng) -> (Vec<f64>, Vec<bool>) {
    loop {
        let n = 2 + rng.below(199) as usize;
        // Scores on a 0.05 grid so many land exactly on thresholds.
        let scores: Vec<f64> = (0..n).map(|_| rng.below(21) as f64 / 20.0).collect();
        let truths: Vec<bool> = scores
            .iter()
            .map(|&s| rng.bernoulli(0.2 + 0.6 * s))
            .collect();
        if truths.iter().any(|&t| t) && truths.iter().any(|&t| !t) {
            return (scores, truths);
        }
    }
}

#[test]
fn curves_match_brute_force_recount() {
    let mut rng = SimRng::new(8);
    for case in 0..100 {
        let (scores, truths) = instance(&mut rng);
        for thresholds in [default_thresholds(), dense_thresholds(100)] {
            let points = inclusion_curves(&scores, &truths, &thresholds).unwrap();
            for p in &points {
                let (tpr, fpr, precision) = recount(&scores, &truths, p.threshold);
                assert_eq!(
                    (p.tpr, p.fpr, p.precision),
                    (tpr, fpr, precision),
                    "case {case} t {}",
                    p.threshold
                );
                assert_eq!(p.recall, p.tpr);
            }
        }
    }
}

#[test]
fn rates_never_increase_with_threshold() {
    let mut rng = SimRng::new(9);
    for _ in 0..100 {
        let (scores, truths) = instance(&mut rng);
        let points = inclusion_curves(&scores, &truths, &default_thresholds()).unwrap();
        for w in points.windows(2) {
            assert!(w[1].tpr <= w[0].tpr && w[1].fpr <= w[0].fpr);
        }
        assert_eq!((points[0].tpr, points[0].fpr), (1.0, 1.0));
    }
}

#[test]
fn degenerate_labels_name_the_missing_side() {
    let err = inclusion_curves(&[0.2, 0.4], &[false, false], &default_thresholds()).unwrap_err();
    assert!(err.to_string().contains("positive"));
    let err = inclusion_curves(&[0.2, 0.4], &[true, true], &default_thresholds()).unwrap_err();
    assert!(err.to_string().contains("negative"));
}
