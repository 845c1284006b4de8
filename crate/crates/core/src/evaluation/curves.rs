use crate::error::{Error, Result};

/// One operating point of the inclusion detector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Thresholds `0.0, 0.1, …, 0.9`.
pub fn default_thresholds() -> Vec<f64> {
    (0..10).map(|k| k as f64 / 10.0).collect()
}

/// Thresholds `k / steps` for `k = 0 … steps - 1`.
pub fn dense_thresholds(steps: usize) -> Vec<f64> {
    (0..steps).map(|k| k as f64 / steps as f64).collect()
}

/// ROC and precision-recall points: a sample is predicted positive when its
/// score is `>= threshold`. Precision with no predicted positives is 1.
pub fn inclusion_curves(
    scores: &[f64],
    truths: &[bool],
    thresholds: &[f64],
) -> Result<Vec<CurvePoint>> {
    if scores.len() != truths.len() {
        return Err(Error::Dimension {
            what: "truth list",
            expected: scores.len(),
            got: truths.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("inclusion scores"));
    }
    let positives = truths.iter().filter(|&&t| t).count();
    let negatives = truths.len() - positives;
    if positives == 0 {
        return Err(Error::DegenerateLabels("positive"));
    }
    if negatives == 0 {
        return Err(Error::DegenerateLabels("negative"));
    }

    // Sort once, then each threshold is a suffix of the score order.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
    // tp_suffix[i] = positives among order[i..]
    let mut tp_suffix = vec![0usize; scores.len() + 1];
    for i in (0..scores.len()).rev() {
        tp_suffix[i] = tp_suffix[i + 1] + usize::from(truths[order[i]]);
    }

    Ok(thresholds
        .iter()
        .map(|&t| {
            let first = sorted.partition_point(|&s| s < t);
            let predicted = scores.len() - first;
            let tp = tp_suffix[first];
            let fp = predicted - tp;
            let tpr = tp as f64 / positives as f64;
            CurvePoint {
                threshold: t,
                tpr,
                fpr: fp as f64 / negatives as f64,
                precision: if predicted == 0 {
                    1.0
                } else {
                    tp as f64 / predicted as f64
                },
                recall: tpr,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sample_point() {
        let pts = inclusion_curves(&[0.9, 0.1], &[true, false], &[0.5]).unwrap();
        assert_eq!((pts[0].tpr, pts[0].fpr, pts[0].precision), (1.0, 0.0, 1.0));
    }

    #[test]
    fn zero_threshold_takes_everything() {
        let pts = inclusion_curves(&[0.9, 0.1, 0.0], &[true, false, false], &[0.0]).unwrap();
        assert_eq!((pts[0].tpr, pts[0].fpr), (1.0, 1.0));
    }

    #[test]
    fn four_sample_counting() {
        let pts =
            inclusion_curves(&[0.9, 0.8, 0.4, 0.3], &[true, false, true, false], &[0.5]).unwrap();
        assert_eq!((pts[0].tpr, pts[0].fpr, pts[0].precision), (0.5, 0.5, 0.5));
    }

    #[test]
    fn nothing_predicted_has_unit_precision() {
        let pts = inclusion_curves(&[0.2, 0.1], &[true, false], &[0.9]).unwrap();
        assert_eq!(pts[0].precision, 1.0);
        assert_eq!(pts[0].recall, 0.0);
    }

    #[test]
    fn degenerate_labels_named() {
        assert!(matches!(
            inclusion_curves(&[0.1], &[false], &[0.5]),
            Err(Error::DegenerateLabels("positive"))
        ));
        assert!(matches!(
            inclusion_curves(&[0.1], &[true], &[0.5]),
            Err(Error::DegenerateLabels("negative"))
        ));
    }

    #[test]
    fn threshold_grids() {
        let t = default_thresholds();
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[9], 0.9);
        assert_eq!(t[3], 0.3);
        assert_eq!(dense_thresholds(100).len(), 100);
    }
}
