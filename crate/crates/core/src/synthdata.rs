//! Seeded synthetic world used to verify the pipeline end to end.
//!
//! Each video draws from its own generators, derived from
//! `(master seed, video index, stream)`, so videos can be produced in any
//! order or in parallel with identical results. Event times are quantized to
//! 0.1 s (one face-view frame).

use crate::classifier::{FeatureDims, FeatureRecord};
use crate::domain::{BehaviorClass, ClassScheme, ClipScores, ClipWindow, LabeledEvent, VideoMeta};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{SimRng, Stream};
use crate::windowing::{
    generate_training_clips, label_window, sliding_windows, ClipConfig, NegativeCount, TrainingClip,
};

/// Logit margin of the true class in oracle scores.
pub const ORACLE_MARGIN: f64 = 5.0;
/// Oracle inclusion probability for a window holding a boundary.
pub const ORACLE_P_HIT: f64 = 0.95;
/// Oracle inclusion probability otherwise.
pub const ORACLE_P_MISS: f64 = 0.05;

const TICKS_PER_SECOND: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub videos: usize,
    pub duration: f64,
    pub events_min: usize,
    pub events_max: usize,
    pub event_duration_min: f64,
    pub event_duration_max: f64,
    pub gap_min: f64,
    pub gap_max: f64,
    pub scheme: ClassScheme,
    /// Probabilities of behavior classes `1 … N-1`.
    pub class_mix: Vec<f64>,
    pub dims: FeatureDims,
    pub separation: f64,
    pub feature_noise: f64,
    /// Probability that an oracle window's class logits are permuted.
    pub label_noise: f64,
    /// Half-width (seconds) of the uniform shift applied to oracle boundaries.
    pub boundary_blur: f64,
    pub negatives: NegativeCount,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 7,
            videos: 50,
            duration: 600.0,
            events_min: 3,
            events_max: 8,
            event_duration_min: 14.0,
            event_duration_max: 60.0,
            gap_min: 10.0,
            gap_max: 60.0,
            scheme: ClassScheme::Three,
            class_mix: vec![0.5, 0.5],
            dims: FeatureDims { cabin: 8, face: 8 },
            separation: 4.0,
            feature_noise: 1.0,
            label_noise: 0.0,
            boundary_blur: 0.0,
            negatives: NegativeCount::Fraction(0.1),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("simulate: {m}")));
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return bad(format!("duration {} must be >= 0", self.duration));
        }
        if self.events_min > self.events_max {
            return bad("events_min exceeds events_max".into());
        }
        if !(self.event_duration_min > 0.0 && self.event_duration_min <= self.event_duration_max) {
            return bad("event duration range must be positive and ordered".into());
        }
        if !(self.gap_min >= 10.0 && self.gap_min <= self.gap_max) {
            return bad("gap range must start at >= 10 s and be ordered".into());
        }
        let n = self.scheme.n_classes();
        if self.class_mix.len() != n - 1 {
            return bad(format!(
                "class_mix needs {} entries, got {}",
                n - 1,
                self.class_mix.len()
            ));
        }
        if self.class_mix.iter().any(|&p| !(0.0..=1.0).contains(&p))
            || (self.class_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad("class_mix must be probabilities summing to 1".into());
        }
        if !(self.separation.is_finite()
            && self.feature_noise >= 0.0
            && self.feature_noise.is_finite())
        {
            return bad("separation and feature_noise must be finite, noise >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return bad("label_noise must be in [0, 1]".into());
        }
        if !(self.boundary_blur >= 0.0 && self.boundary_blur.is_finite()) {
            return bad("boundary_blur must be >= 0".into());
        }
        Ok(())
    }

    pub fn video_id(index: usize) -> String {
        format!("vid{index:04}")
    }

    /// Per-video copy with one fixed event count.
    pub fn with_event_count(&self, n: usize) -> Self {
        SimConfig {
            events_min: n,
            events_max: n,
            ..self.clone()
        }
    }
}

fn ticks(seconds: f64) -> u64 {
    (seconds * TICKS_PER_SECOND).round() as u64
}

fn seconds(ticks: u64) -> f64 {
    ticks as f64 / TICKS_PER_SECOND
}

/// Non-overlapping events separated by at least `gap_min`, within the video.
pub fn generate_timeline(
    config: &SimConfig,
    video_index: usize,
) -> Result<(VideoMeta, Vec<LabeledEvent>)> {
    config.validate()?;
    let id = SimConfig::video_id(video_index);
    let meta = VideoMeta::new(id.clone(), config.duration)?;
    let mut rng = SimRng::derived(config.seed, video_index as u64, Stream::Timeline);

    let count = rng.int_inclusive(config.events_min as u64, config.events_max as u64) as usize;
    let limit = ticks(config.duration);
    let (dmin, dmax) = (
        ticks(config.event_duration_min).max(1),
        ticks(config.event_duration_max),
    );
    let (gmin, gmax) = (ticks(config.gap_min), ticks(config.gap_max));
    let mut events = Vec::with_capacity(count);
    let mut t = rng.int_inclusive(0, gmax);
    for _ in 0..count {
        let len = rng.int_inclusive(dmin, dmax.max(dmin));
        let class = BehaviorClass(1 + rng.categorical(&config.class_mix));
        if t + len > limit {
            break;
        }
        events.push(LabeledEvent::new(
            id.clone(),
            class,
            seconds(t),
            seconds(t + len),
        )?);
        t += len + rng.int_inclusive(gmin, gmax);
    }
    Ok((meta, events))
}

/// Cluster center of `class`: `separation` on every coordinate `d` with
/// `d mod N == class`, zero elsewhere, independently for each view.
pub fn cluster_center(class: BehaviorClass, config: &SimConfig) -> (Vec<f64>, Vec<f64>) {
    let n = config.scheme.n_classes();
    let view = |dim: usize| -> Vec<f64> {
        (0..dim)
            .map(|d| {
                if d % n == class.index() {
                    config.separation
                } else {
                    0.0
                }
            })
            .collect()
    };
    (view(config.dims.cabin), view(config.dims.face))
}

fn draw_features(
    video_id: &str,
    items: impl IntoIterator<Item = (usize, BehaviorClass)>,
    config: &SimConfig,
    rng: &mut SimRng,
) -> Vec<FeatureRecord> {
    items
        .into_iter()
        .map(|(index, class)| {
            let (mut cabin, mut face) = cluster_center(class, config);
            for v in cabin.iter_mut().chain(face.iter_mut()) {
                *v += config.feature_noise * rng.normal();
            }
            FeatureRecord {
                video_id: video_id.to_string(),
                window_index: index,
                cabin,
                face,
            }
        })
        .collect()
}

/// Features for each window, drawn around the center of its ground-truth class.
pub fn generate_features(
    events: &[LabeledEvent],
    windows: &[ClipWindow],
    config: &SimConfig,
    video_index: usize,
) -> Vec<FeatureRecord> {
    let mut rng = SimRng::derived(config.seed, video_index as u64, Stream::Features);
    let id = windows
        .first()
        .map_or_else(String::new, |w| w.video_id.clone());
    let items = windows
        .iter()
        .enumerate()
        .map(|(i, w)| (i, label_window(w, events).class));
    draw_features(&id, items, config, &mut rng)
}

/// Features for training clips, drawn around the center of each clip's label.
pub fn generate_clip_features(
    clips: &[TrainingClip],
    config: &SimConfig,
    video_index: usize,
) -> Vec<FeatureRecord> {
    let mut rng = SimRng::derived(config.seed, video_index as u64, Stream::ClipFeatures);
    let id = clips
        .first()
        .map_or_else(String::new, |c| c.window.video_id.clone());
    let items = clips.iter().enumerate().map(|(i, c)| (i, c.labels.class));
    draw_features(&id, items, config, &mut rng)
}

/// Scores a perfect classifier would emit, optionally degraded.
///
/// Noiseless: the ground-truth class gets logit [`ORACLE_MARGIN`], others 0;
/// `p_start` (`p_end`) is [`ORACLE_P_HIT`] when some event starts (ends)
/// inside the window, else [`ORACLE_P_MISS`]. With `label_noise` the logits
/// of a window are randomly permuted with that probability; with
/// `boundary_blur` each event boundary is shifted once by a uniform draw in
/// `±boundary_blur` before the inclusion test.
pub fn oracle_scores(
    events: &[LabeledEvent],
    windows: &[ClipWindow],
    config: &SimConfig,
    video_index: usize,
) -> Vec<ClipScores> {
    let mut rng = SimRng::derived(config.seed, video_index as u64, Stream::Oracle);
    let n = config.scheme.n_classes();
    let blur = config.boundary_blur;
    let boundaries: Vec<(f64, f64)> = events
        .iter()
        .map(|e| {
            let ds = rng.range(-blur, blur);
            let de = rng.range(-blur, blur);
            (e.start + ds, e.end + de)
        })
        .collect();

    windows
        .iter()
        .map(|w| {
            let class = label_window(w, events).class;
            let mut logits = vec![0.0; n];
            logits[class.index()] = ORACLE_MARGIN;
            if rng.bernoulli(config.label_noise) {
                rng.shuffle(&mut logits);
            }
            let p = |hit: bool| if hit { ORACLE_P_HIT } else { ORACLE_P_MISS };
            ClipScores {
                class_logits: logits,
                p_start: p(boundaries.iter().any(|&(s, _)| w.holds_start(s))),
                p_end: p(boundaries.iter().any(|&(_, e)| w.holds_end(e))),
            }
        })
        .collect()
}

/// Everything simulated for one video.
#[derive(Clone, Debug, PartialEq)]
pub struct SimVideo {
    pub index: usize,
    pub meta: VideoMeta,
    pub events: Vec<LabeledEvent>,
    pub windows: Vec<ClipWindow>,
    pub features: Vec<FeatureRecord>,
    pub scores: Vec<ClipScores>,
    pub clips: Vec<TrainingClip>,
    pub clip_features: Vec<FeatureRecord>,
}

pub fn simulate_video(config: &SimConfig, index: usize) -> Result<SimVideo> {
    let (meta, events) = generate_timeline(config, index)?;
    let windows = sliding_windows(&meta).windows;
    let features = generate_features(&events, &windows, config, index);
    let scores = oracle_scores(&events, &windows, config, index);
    let clip_cfg = ClipConfig {
        negatives: config.negatives,
        seed: crate::rng::derive_seed(config.seed, index as u64, Stream::NegativeClips),
        ..ClipConfig::default()
    };
    let clips = generate_training_clips(&events, &meta, &clip_cfg)?;
    let clip_features = generate_clip_features(&clips, config, index);
    Ok(SimVideo {
        index,
        meta,
        events,
        windows,
        features,
        scores,
        clips,
        clip_features,
    })
}

/// All `config.videos` videos, generated concurrently, in index order.
pub fn simulate(config: &SimConfig) -> Result<Vec<SimVideo>> {
    config.validate()?;
    par::map_range(config.videos, |i| simulate_video(config, i))
        .into_iter()
        .collect()
}
