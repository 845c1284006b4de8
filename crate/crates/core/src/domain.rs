//! Core value types shared by every stage: classes, videos, events, clip
//! windows and their labels/scores, and aggregated chunks.
//!
//! Times are seconds on a real-valued timeline. Frame indices are derived
//! from a view's rate when needed and are never stored.

use std::fmt;

use crate::error::{Error, Result};

/// Length of every clip window, in seconds.
pub const CLIP_SECONDS: f64 = 8.0;
/// Sliding-window stride and segment length, in seconds.
pub const STRIDE_SECONDS: f64 = 2.0;
/// Cabin camera frame rate (Hz).
pub const CABIN_RATE: f64 = 2.0;
/// Face camera frame rate (Hz).
pub const FACE_RATE: f64 = 10.0;

const GRID_EPS: f64 = 1e-9;

/// Index into the configured class scheme. Index 0 is always "no behavior".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BehaviorClass(pub usize);

impl BehaviorClass {
    pub const NONE: BehaviorClass = BehaviorClass(0);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_behavior(self) -> bool {
        self.0 >= 1
    }
}

impl fmt::Display for BehaviorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The two label schemes: dialing and interacting merged (3 classes) or kept
/// apart (4 classes).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ClassScheme {
    #[default]
    Three,
    Four,
}

impl ClassScheme {
    pub fn from_count(n: usize) -> Result<Self> {
        match n {
            3 => Ok(ClassScheme::Three),
            4 => Ok(ClassScheme::Four),
            _ => Err(Error::Config(format!(
                "class scheme must have 3 or 4 classes, got {n}"
            ))),
        }
    }

    pub fn n_classes(self) -> usize {
        match self {
            ClassScheme::Three => 3,
            ClassScheme::Four => 4,
        }
    }

    pub fn names(self) -> &'static [&'static str] {
        match self {
            ClassScheme::Three => &["none", "interacting/dialing", "talking"],
            ClassScheme::Four => &["none", "dialing", "interacting", "talking"],
        }
    }

    pub fn name(self, class: BehaviorClass) -> Option<&'static str> {
        self.names().get(class.index()).copied()
    }

    pub fn check(self, class: BehaviorClass) -> Result<()> {
        if class.index() < self.n_classes() {
            Ok(())
        } else {
            Err(Error::ClassOutOfRange {
                class: class.index(),
                n_classes: self.n_classes(),
            })
        }
    }
}

/// A half-open span `[start, end)` in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start > end {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Interval { start, end })
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Length of the overlap of two intervals; zero when they are disjoint or touch.
pub fn interval_intersection(a: Interval, b: Interval) -> f64 {
    (a.end.min(b.end) - a.start.max(b.start)).max(0.0)
}

/// Per-video metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoMeta {
    pub video_id: String,
    pub duration: f64,
    pub cabin_rate: f64,
    pub face_rate: f64,
}

impl VideoMeta {
    pub fn new(video_id: impl Into<String>, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::Config(format!(
                "video duration {duration} must be >= 0"
            )));
        }
        Ok(VideoMeta {
            video_id: video_id.into(),
            duration,
            cabin_rate: CABIN_RATE,
            face_rate: FACE_RATE,
        })
    }
}

/// A ground-truth behavior interval.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledEvent {
    pub video_id: String,
    pub class: BehaviorClass,
    pub start: f64,
    pub end: f64,
}

impl LabeledEvent {
    pub fn new(
        video_id: impl Into<String>,
        class: BehaviorClass,
        start: f64,
        end: f64,
    ) -> Result<Self> {
        if !class.is_behavior() {
            return Err(Error::NoBehaviorClass);
        }
        if !(start.is_finite() && end.is_finite()) || start < 0.0 || start >= end {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(LabeledEvent {
            video_id: video_id.into(),
            class,
            start,
            end,
        })
    }

    pub fn interval(&self) -> Interval {
        Interval {
            start: self.start,
            end: self.end,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// An 8 s clip window on one video.
#[derive(Clone, Debug, PartialEq)]
pub struct ClipWindow {
    pub video_id: String,
    pub start: f64,
}

impl ClipWindow {
    pub fn new(video_id: impl Into<String>, start: f64) -> Result<Self> {
        if !start.is_finite() || start < 0.0 {
            return Err(Error::InvalidInterval {
                start,
                end: start + CLIP_SECONDS,
            });
        }
        Ok(ClipWindow {
            video_id: video_id.into(),
            start,
        })
    }

    pub fn end(&self) -> f64 {
        self.start + CLIP_SECONDS
    }

    pub fn interval(&self) -> Interval {
        Interval {
            start: self.start,
            end: self.end(),
        }
    }

    pub fn midpoint(&self) -> f64 {
        self.start + CLIP_SECONDS / 2.0
    }

    /// Whether a behavior starting at `t` starts inside this window: `t ∈ [start, end)`.
    pub fn holds_start(&self, t: f64) -> bool {
        self.start <= t && t < self.end()
    }

    /// Whether a behavior ending at `t` ends inside this window: `t ∈ (start, end]`.
    ///
    /// Event ends are exclusive, so the last covered instant of an event
    /// ending exactly at the window end is still inside the window.
    pub fn holds_end(&self, t: f64) -> bool {
        self.start < t && t <= self.end()
    }
}

/// Training targets for one clip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ClipLabels {
    pub class: BehaviorClass,
    pub start_inclusion: bool,
    pub end_inclusion: bool,
}

impl ClipLabels {
    pub fn none() -> Self {
        ClipLabels::default()
    }
}

/// Classifier output for one clip.
#[derive(Clone, Debug, PartialEq)]
pub struct ClipScores {
    pub class_logits: Vec<f64>,
    pub p_start: f64,
    pub p_end: f64,
}

impl ClipScores {
    /// Highest-logit class; ties resolve to the lower index.
    pub fn argmax(&self) -> BehaviorClass {
        let mut best = 0;
        for (i, &v) in self.class_logits.iter().enumerate() {
            if v > self.class_logits[best] {
                best = i;
            }
        }
        BehaviorClass(best)
    }

    pub fn softmax(&self) -> Vec<f64> {
        softmax(&self.class_logits)
    }
}

/// Numerically stable softmax. The denominator is summed in ascending order,
/// so permuting the logits permutes the output exactly.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let mut sorted = exps.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let sum: f64 = sorted.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Which aggregation produced a chunk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AggregationMode {
    Rough,
    Refined,
}

impl AggregationMode {
    pub fn tag(self) -> &'static str {
        match self {
            AggregationMode::Rough => "rough",
            AggregationMode::Refined => "refined",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "rough" => Some(AggregationMode::Rough),
            "refined" => Some(AggregationMode::Refined),
            _ => None,
        }
    }
}

/// An aggregated behavior interval on the 2 s segment grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chunk {
    pub class: BehaviorClass,
    pub start: f64,
    pub end: f64,
}

impl Chunk {
    pub fn new(class: BehaviorClass, start: f64, end: f64) -> Result<Self> {
        if !class.is_behavior() {
            return Err(Error::NoBehaviorClass);
        }
        let start_cell = to_grid_cell(start)?;
        let end_cell = to_grid_cell(end)?;
        if start_cell >= end_cell || start_cell < 0 {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Chunk::from_cells(
            class,
            start_cell as usize,
            end_cell as usize,
        ))
    }

    /// Builds a chunk from segment-grid cell indices `[start_cell, end_cell)`.
    pub(crate) fn from_cells(class: BehaviorClass, start_cell: usize, end_cell: usize) -> Self {
        debug_assert!(start_cell < end_cell && class.is_behavior());
        Chunk {
            class,
            start: start_cell as f64 * STRIDE_SECONDS,
            end: end_cell as f64 * STRIDE_SECONDS,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval {
            start: self.start,
            end: self.end,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

fn to_grid_cell(t: f64) -> Result<i64> {
    let cell = (t / STRIDE_SECONDS).round();
    if !t.is_finite() || (cell * STRIDE_SECONDS - t).abs() > GRID_EPS {
        return Err(Error::OffGrid(t));
    }
    Ok(cell as i64)
}

/// Checks that a chunk list is sorted by start and pairwise disjoint.
pub fn chunks_sorted_disjoint(chunks: &[Chunk]) -> bool {
    chunks.windows(2).all(|w| w[0].end <= w[1].start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(interval_intersection(iv(10.0, 20.0), iv(12.0, 18.0)), 6.0);
        assert_eq!(interval_intersection(iv(0.0, 4.0), iv(4.0, 8.0)), 0.0);
        assert_eq!(interval_intersection(iv(0.0, 8.0), iv(6.0, 14.0)), 2.0);
    }

    #[test]
    fn chunk_rejects_off_grid_and_class_zero() {
        assert!(matches!(
            Chunk::new(BehaviorClass(1), 1.0, 4.0),
            Err(Error::OffGrid(_))
        ));
        assert!(matches!(
            Chunk::new(BehaviorClass::NONE, 0.0, 4.0),
            Err(Error::NoBehaviorClass)
        ));
        assert!(Chunk::new(BehaviorClass(1), 4.0, 4.0).is_err());
        let c = Chunk::new(BehaviorClass(2), 4.0, 10.0).unwrap();
        assert_eq!(c.len(), 6.0);
    }

    #[test]
    fn event_validation() {
        assert!(LabeledEvent::new("v", BehaviorClass(0), 0.0, 1.0).is_err());
        assert!(LabeledEvent::new("v", BehaviorClass(1), 3.0, 3.0).is_err());
        assert!(LabeledEvent::new("v", BehaviorClass(1), -1.0, 3.0).is_err());
    }

    #[test]
    fn scheme_names() {
        assert_eq!(ClassScheme::Three.name(BehaviorClass(0)), Some("none"));
        assert_eq!(ClassScheme::Four.n_classes(), 4);
        assert!(ClassScheme::from_count(5).is_err());
        assert!(ClassScheme::Three.check(BehaviorClass(3)).is_err());
    }

    #[test]
    fn argmax_ties_take_lower_index() {
        let s = ClipScores {
            class_logits: vec![1.0, 3.0, 3.0],
            p_start: 0.5,
            p_end: 0.5,
        };
        assert_eq!(s.argmax(), BehaviorClass(1));
    }

    proptest! {
        #[test]
        fn intersection_symmetric_and_bounded(
            a in 0.0f64..100.0, la in 0.0f64..50.0,
            b in 0.0f64..100.0, lb in 0.0f64..50.0,
        ) {
            let x = iv(a, a + la);
            let y = iv(b, b + lb);
            let i = interval_intersection(x, y);
            prop_assert_eq!(i, interval_intersection(y, x));
            prop_assert!(i >= 0.0);
            prop_assert!(i <= x.len() + 1e-12 && i <= y.len() + 1e-12);
        }
    }
}
