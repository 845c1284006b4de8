use std::collections::BTreeMap;

use crate::domain::{interval_intersection, BehaviorClass, Chunk, LabeledEvent};
use crate::error::{Error, Result};

/// Fraction of positions where `predicted` equals `truth`.
pub fn clip_accuracy(predicted: &[BehaviorClass], truth: &[BehaviorClass]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension {
            what: "prediction list",
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("prediction list"));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts indexed `[truth][prediction]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n: usize) -> Self {
        ConfusionMatrix {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, truth: BehaviorClass, predicted: BehaviorClass) -> Result<()> {
        for c in [truth, predicted] {
            if c.index() >= self.n {
                return Err(Error::ClassOutOfRange {
                    class: c.index(),
                    n_classes: self.n,
                });
            }
        }
        self.counts[truth.index() * self.n + predicted.index()] += 1;
        Ok(())
    }

    pub fn count(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n + predicted]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.n..(truth + 1) * self.n]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Each row divided by its sum; empty rows stay all zero.
    pub fn row_percents(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|t| {
                let row = self.row(t);
                let sum: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if sum == 0 { 0.0 } else { c as f64 / sum as f64 })
                    .collect()
            })
            .collect()
    }
}

pub fn confusion(
    predicted: &[BehaviorClass],
    truth: &[BehaviorClass],
    n: usize,
) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension {
            what: "prediction list",
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let mut m = ConfusionMatrix::new(n);
    for (&p, &t) in predicted.iter().zip(truth) {
        m.add(t, p)?;
    }
    Ok(m)
}

/// Share of `chunk` covered by ground-truth events of its class.
///
/// Same-class events must not overlap each other.
pub fn temporal_accuracy(chunk: &Chunk, gt: &[LabeledEvent]) -> Result<f64> {
    let mut same: Vec<&LabeledEvent> = gt.iter().filter(|e| e.class == chunk.class).collect();
    same.sort_by(|a, b| a.start.total_cmp(&b.start));
    if let Some(w) = same.windows(2).find(|w| w[1].start < w[0].end) {
        return Err(Error::OverlappingGroundTruth {
            class: chunk.class.index(),
            at: w[1].start,
        });
    }
    let covered: f64 = same
        .iter()
        .map(|e| interval_intersection(e.interval(), chunk.interval()))
        .sum();
    Ok(covered / chunk.len())
}

/// Unweighted mean temporal accuracy per chunk class. Classes without chunks
/// are absent.
pub fn mean_temporal_accuracy(
    chunks: &[Chunk],
    gt: &[LabeledEvent],
) -> Result<BTreeMap<BehaviorClass, f64>> {
    let mut scored = Vec::with_capacity(chunks.len());
    for c in chunks {
        scored.push((c.class, temporal_accuracy(c, gt)?));
    }
    Ok(mean_by_class(scored))
}

/// Per-class mean of `(class, value)` pairs, summed in input order.
pub fn mean_by_class(
    values: impl IntoIterator<Item = (BehaviorClass, f64)>,
) -> BTreeMap<BehaviorClass, f64> {
    let mut acc: BTreeMap<BehaviorClass, (f64, usize)> = BTreeMap::new();
    for (c, v) in values {
        let e = acc.entry(c).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(c, (s, n))| (c, s / n as f64))
        .collect()
}

/// How many more behavior clips a reviewer finds per unit time by reviewing
/// only model-selected clips instead of all video.
pub fn review_efficiency(precision: f64, base_rate: f64) -> Result<f64> {
    if !(base_rate > 0.0 && base_rate <= 1.0) {
        return Err(Error::Config(format!(
            "base rate {base_rate} must be in (0, 1]"
        )));
    }
    if !(0.0..=1.0).contains(&precision) {
        return Err(Error::Config(format!(
            "precision {precision} must be in [0, 1]"
        )));
    }
    Ok(precision / base_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn classes(v: &[usize]) -> Vec<BehaviorClass> {
        v.iter().map(|&c| BehaviorClass(c)).collect()
    }

    fn ev(c: usize, s: f64, e: f64) -> LabeledEvent {
        LabeledEvent::new("v", BehaviorClass(c), s, e).unwrap()
    }

    fn chunk(c: usize, s: f64, e: f64) -> Chunk {
        Chunk::new(BehaviorClass(c), s, e).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(
            clip_accuracy(&classes(&[1, 2, 0]), &classes(&[1, 2, 0])).unwrap(),
            1.0
        );
        assert_abs_diff_eq!(
            clip_accuracy(&classes(&[1, 2, 0]), &classes(&[1, 1, 0])).unwrap(),
            2.0 / 3.0
        );
        assert!(clip_accuracy(&[], &[]).is_err());
        assert!(clip_accuracy(&classes(&[1]), &classes(&[1, 2])).is_err());
    }

    #[test]
    fn confusion_examples() {
        let m = confusion(&classes(&[0, 1, 2]), &classes(&[0, 1, 2]), 3).unwrap();
        for t in 0..3 {
            for p in 0..3 {
                assert_eq!(m.count(t, p), u64::from(t == p));
            }
        }
        let m = confusion(&classes(&[2]), &classes(&[1]), 3).unwrap();
        assert_eq!(m.count(1, 2), 1);
        assert_eq!(m.total(), 1);

        let m = confusion(&classes(&[0, 0, 1, 1]), &classes(&[0, 0, 0, 0]), 3).unwrap();
        assert_eq!(m.row(0), &[2, 2, 0]);
        assert_eq!(m.row_percents()[0], vec![0.5, 0.5, 0.0]);
        assert_eq!(m.row_percents()[1], vec![0.0; 3]);
        assert!(confusion(&classes(&[3]), &classes(&[0]), 3).is_err());
    }

    #[test]
    fn temporal_accuracy_examples() {
        assert_abs_diff_eq!(
            temporal_accuracy(&chunk(2, 10.0, 20.0), &[ev(2, 12.0, 18.0)]).unwrap(),
            0.6,
            epsilon = 1e-12
        );
        assert_eq!(
            temporal_accuracy(&chunk(1, 4.0, 8.0), &[ev(1, 4.0, 8.0)]).unwrap(),
            1.0
        );
        assert_eq!(
            temporal_accuracy(&chunk(1, 0.0, 8.0), &[ev(1, 0.0, 4.0), ev(1, 6.0, 8.0)]).unwrap(),
            0.75
        );
        // Other classes do not count.
        assert_eq!(
            temporal_accuracy(&chunk(1, 0.0, 8.0), &[ev(2, 0.0, 8.0)]).unwrap(),
            0.0
        );
    }

    #[test]
    fn overlapping_ground_truth_rejected() {
        let err = temporal_accuracy(&chunk(1, 0.0, 8.0), &[ev(1, 0.0, 5.0), ev(1, 4.0, 8.0)])
            .unwrap_err();
        assert!(matches!(
            err,
            Error::OverlappingGroundTruth { class: 1, .. }
        ));
    }

    #[test]
    fn mean_temporal_accuracy_per_class() {
        let gt = [ev(1, 0.0, 4.0), ev(1, 10.0, 20.0)];
        let chunks = [chunk(1, 0.0, 8.0), chunk(1, 10.0, 20.0)];
        let m = mean_temporal_accuracy(&chunks, &gt).unwrap();
        assert_eq!(m.get(&BehaviorClass(1)), Some(&0.75));
        assert_eq!(m.get(&BehaviorClass(2)), None);
    }

    #[test]
    fn review_efficiency_examples() {
        assert_abs_diff_eq!(
            review_efficiency(0.79, 0.06).unwrap(),
            13.17,
            epsilon = 0.01
        );
        assert_eq!(review_efficiency(0.3, 0.3).unwrap(), 1.0);
        assert_eq!(review_efficiency(0.5, 0.25).unwrap(), 2.0);
        assert!(review_efficiency(0.5, 0.0).is_err());
    }
}
