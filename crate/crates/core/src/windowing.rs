//! Clip generation: three training clips per labeled event plus sampled
//! negatives, the 8 s / 2 s inference sliding grid, per-view frame index
//! selection, and ground-truth labeling of arbitrary windows.

use crate::domain::{
    interval_intersection, BehaviorClass, ClipLabels, ClipWindow, LabeledEvent, VideoMeta,
    CLIP_SECONDS, STRIDE_SECONDS,
};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Frames per view after downsampling.
pub const FRAMES_PER_CLIP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClipKind {
    Start,
    End,
    Interior,
    Negative,
}

impl ClipKind {
    pub fn tag(self) -> &'static str {
        match self {
            ClipKind::Start => "start",
            ClipKind::End => "end",
            ClipKind::Interior => "interior",
            ClipKind::Negative => "negative",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "start" => Some(ClipKind::Start),
            "end" => Some(ClipKind::End),
            "interior" => Some(ClipKind::Interior),
            "negative" => Some(ClipKind::Negative),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingClip {
    pub window: ClipWindow,
    pub labels: ClipLabels,
    pub kind: ClipKind,
}

/// How many class-0 clips to sample per video.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NegativeCount {
    /// A fraction of the positive clip count, rounded to nearest.
    Fraction(f64),
    Exact(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClipConfig {
    pub negatives: NegativeCount,
    /// Minimum distance between a negative window and any event.
    pub negative_margin: f64,
    pub seed: u64,
}

impl Default for ClipConfig {
    fn default() -> Self {
        ClipConfig {
            negatives: NegativeCount::Fraction(0.1),
            negative_margin: CLIP_SECONDS,
            seed: 0,
        }
    }
}

fn clamp_start(start: f64, duration: f64) -> f64 {
    start.clamp(0.0, duration - CLIP_SECONDS)
}

fn inclusion_labels(window: &ClipWindow, event: &LabeledEvent) -> ClipLabels {
    ClipLabels {
        class: event.class,
        start_inclusion: window.holds_start(event.start),
        end_inclusion: window.holds_end(event.end),
    }
}

/// Emits start, end and interior clips for each event, then negatives.
///
/// Start and end clips are centered on the boundary, the interior clip on the
/// event midpoint; all are clamped into the video.
pub fn generate_training_clips(
    events: &[LabeledEvent],
    meta: &VideoMeta,
    config: &ClipConfig,
) -> Result<Vec<TrainingClip>> {
    if !events.is_empty() && meta.duration < CLIP_SECONDS {
        return Err(Error::VideoTooShort {
            video_id: meta.video_id.clone(),
            duration: meta.duration,
        });
    }
    let mut clips = Vec::with_capacity(events.len() * 3);
    for ev in events {
        if ev.end > meta.duration || ev.start < 0.0 {
            return Err(Error::EventOutOfBounds {
                video_id: meta.video_id.clone(),
                start: ev.start,
                end: ev.end,
                duration: meta.duration,
            });
        }
        let half = CLIP_SECONDS / 2.0;
        let placements = [
            (ClipKind::Start, ev.start - half),
            (ClipKind::End, ev.end - half),
            (ClipKind::Interior, (ev.start + ev.end) / 2.0 - half),
        ];
        for (kind, start) in placements {
            let window = ClipWindow::new(meta.video_id.clone(), clamp_start(start, meta.duration))?;
            let labels = inclusion_labels(&window, ev);
            clips.push(TrainingClip {
                window,
                labels,
                kind,
            });
        }
    }

    let wanted = match config.negatives {
        NegativeCount::Fraction(f) => (f * clips.len() as f64).round() as usize,
        NegativeCount::Exact(n) => n,
    };
    if wanted > 0 && meta.duration >= CLIP_SECONDS {
        let mut candidates = negative_candidates(events, meta, config.negative_margin);
        let mut rng = SimRng::new(config.seed);
        let take = wanted.min(candidates.len());
        // Partial Fisher-Yates: the first `take` slots become the sample.
        for i in 0..take {
            let j = i + rng.below((candidates.len() - i) as u64) as usize;
            candidates.swap(i, j);
        }
        let mut picked: Vec<f64> = candidates[..take].to_vec();
        picked.sort_by(|a, b| a.total_cmp(b));
        for start in picked {
            clips.push(TrainingClip {
                window: ClipWindow::new(meta.video_id.clone(), start)?,
                labels: ClipLabels::none(),
                kind: ClipKind::Negative,
            });
        }
    }
    Ok(clips)
}

/// Grid-aligned window starts at least `margin` seconds from every event.
fn negative_candidates(events: &[LabeledEvent], meta: &VideoMeta, margin: f64) -> Vec<f64> {
    let last = ((meta.duration - CLIP_SECONDS) / STRIDE_SECONDS).floor() as usize;
    (0..=last)
        .map(|k| k as f64 * STRIDE_SECONDS)
        .filter(|&a| {
            events
                .iter()
                .all(|ev| a + CLIP_SECONDS <= ev.start - margin || a >= ev.end + margin)
        })
        .collect()
}

/// The inference windows of one video plus the span they leave uncovered.
#[derive(Clone, Debug, PartialEq)]
pub struct SlidingWindows {
    pub windows: Vec<ClipWindow>,
    /// Seconds after the last window's end (the whole video if no window fits).
    pub uncovered_tail: f64,
}

/// Windows `[2k, 2k + 8)` for every `k` that fits inside the video.
pub fn sliding_windows(meta: &VideoMeta) -> SlidingWindows {
    if meta.duration < CLIP_SECONDS {
        return SlidingWindows {
            windows: Vec::new(),
            uncovered_tail: meta.duration.max(0.0),
        };
    }
    let last = ((meta.duration - CLIP_SECONDS) / STRIDE_SECONDS).floor() as usize;
    let windows: Vec<ClipWindow> = (0..=last)
        .map(|k| ClipWindow {
            video_id: meta.video_id.clone(),
            start: k as f64 * STRIDE_SECONDS,
        })
        .collect();
    let covered = last as f64 * STRIDE_SECONDS + CLIP_SECONDS;
    SlidingWindows {
        windows,
        uncovered_tail: meta.duration - covered,
    }
}

/// Source-frame indices for a clip downsampled to `target` frames by
/// nearest-index rounding of linearly spaced positions.
pub fn frame_indices(window: &ClipWindow, rate: f64, target: usize) -> Result<Vec<u64>> {
    let exact = rate * CLIP_SECONDS;
    let source = exact.round();
    if !rate.is_finite() || rate <= 0.0 || (exact - source).abs() > 1e-9 {
        return Err(Error::FractionalFrameCount(rate));
    }
    let source = source as u64;
    if (source as usize) < target || target == 0 {
        return Err(Error::Upsampling {
            source_frames: source as usize,
            target,
        });
    }
    let first = (window.start * rate).round() as u64;
    if target == 1 {
        return Ok(vec![first]);
    }
    let span = source - 1;
    let steps = target as u64 - 1;
    // round(k * span / steps) with halves rounded up, in exact integer arithmetic.
    Ok((0..target as u64)
        .map(|k| first + (2 * k * span + steps) / (2 * steps))
        .collect())
}

/// Labels a window against ground truth: the class of the event overlapping
/// it most, when that overlap exceeds half the window; inclusion flags mark
/// boundaries of events of that class inside the window.
pub fn label_window(window: &ClipWindow, events: &[LabeledEvent]) -> ClipLabels {
    let w = window.interval();
    let mut best: Option<(&LabeledEvent, f64)> = None;
    for ev in events {
        let overlap = interval_intersection(w, ev.interval());
        if best.is_none_or(|(_, o)| overlap > o) {
            best = Some((ev, overlap));
        }
    }
    match best {
        Some((ev, overlap)) if overlap > CLIP_SECONDS / 2.0 => {
            let class = ev.class;
            let same = events.iter().filter(|e| e.class == class);
            let (mut st, mut en) = (false, false);
            for e in same {
                st |= window.holds_start(e.start);
                en |= window.holds_end(e.end);
            }
            ClipLabels {
                class,
                start_inclusion: st,
                end_inclusion: en,
            }
        }
        _ => ClipLabels {
            class: BehaviorClass::NONE,
            ..ClipLabels::default()
        },
    }
}
