//! Classification and inclusion losses.

use crate::domain::{ClipLabels, ClipScores};

/// Probability clamp applied inside [`bce`].
pub const BCE_EPS: f64 = 1e-7;

/// Default weight of the inclusion loss.
pub const DEFAULT_LAMBDA: f64 = 0.2;

/// `log(sum(exp(logits)))`, shifted by the maximum for stability.
pub fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Softmax cross entropy of `logits` against the true `class`.
pub fn cls_loss(logits: &[f64], class: usize) -> f64 {
    debug_assert!(class < logits.len());
    // lse >= logits[class]; the max() only guards the last-bit rounding.
    (log_sum_exp(logits) - logits[class]).max(0.0)
}

/// Binary cross entropy with `x` clamped to `[ε, 1-ε]`.
pub fn bce(x: f64, y: bool) -> f64 {
    let x = x.clamp(BCE_EPS, 1.0 - BCE_EPS);
    if y {
        -x.ln()
    } else {
        -(1.0 - x).ln()
    }
}

/// Mean of the start and end inclusion BCE terms.
pub fn inc_loss(scores: &ClipScores, labels: &ClipLabels) -> f64 {
    0.5 * (bce(scores.p_start, labels.start_inclusion) + bce(scores.p_end, labels.end_inclusion))
}

/// Classification loss plus `lambda`-weighted inclusion loss on behavior clips.
///
/// The indicator is a branch, not a multiply: class-0 clips return the
/// classification loss unchanged.
pub fn total_loss(scores: &ClipScores, labels: &ClipLabels, lambda: f64) -> f64 {
    let cls = cls_loss(&scores.class_logits, labels.class.index());
    if labels.class.is_behavior() {
        cls + lambda * inc_loss(scores, labels)
    } else {
        cls
    }
}
