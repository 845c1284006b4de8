//! File-to-file stages: simulate, train, infer, aggregate, evaluate and
//! summarize. Every stage is a pure function of its inputs and settings.
//!
//! Per-video work runs through [`crate::par`]; results are always collected
//! in input order, so outputs do not depend on the worker count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::aggregation::{aggregate_video, AggregationConfig};
use crate::classifier::{
    stack_features, train, EpochLog, Example, FeatureDims, FeatureRecord, TrainConfig, ViewMode,
};
use crate::domain::{AggregationMode, ClassScheme, ClipWindow, LabeledEvent};
use crate::error::{Error, Result};
use crate::evaluation::plot::{confusion_csv, confusion_svg, curve_csv, curve_svg, CurveKind};
use crate::evaluation::{
    confusion, inclusion_curves, mean_by_class, parse_report, review_efficiency, temporal_accuracy,
    CurveResult, MetricsReport,
};
use crate::io::{
    render_chunks, render_clips, render_events, render_features, render_scores, render_train_log,
    render_videos, render_windows, write_model, write_table, ChunkRecord, ClipRecord,
    IndexedWindow, ModelFile, ScoreRecord,
};
use crate::par;
use crate::split::{Split, SplitRatios};
use crate::synthdata::{simulate, SimConfig};
use crate::windowing::label_window;

/// File names written by [`simulate_to_dir`].
pub mod names {
    pub const VIDEOS: &str = "videos.csv";
    pub const EVENTS: &str = "events.csv";
    pub const WINDOWS: &str = "windows.csv";
    pub const FEATURES: &str = "features.csv";
    pub const ORACLE_SCORES: &str = "oracle_scores.csv";
    pub const CLIPS: &str = "clips.csv";
    pub const CLIP_FEATURES: &str = "clip_features.csv";
    pub const METRICS: &str = "metrics.txt";
}

fn record_err(path: &Path, record: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        record,
        message: message.into(),
    }
}

/// Keeps only videos assigned to one split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitFilter {
    pub ratios: SplitRatios,
    pub keep: Split,
}

impl SplitFilter {
    fn admits(filter: Option<&SplitFilter>, video_id: &str) -> bool {
        filter.is_none_or(|f| f.ratios.assign(video_id) == f.keep)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulateSummary {
    pub videos: usize,
    pub events: usize,
    pub windows: usize,
    pub clips: usize,
}

/// Simulates every video and writes the full artifact set into `dir`.
pub fn simulate_to_dir(config: &SimConfig, dir: &Path) -> Result<SimulateSummary> {
    let videos = simulate(config)?;
    let metas: Vec<_> = videos.iter().map(|v| v.meta.clone()).collect();
    let events: Vec<LabeledEvent> = videos
        .iter()
        .flat_map(|v| v.events.iter().cloned())
        .collect();
    let windows: Vec<IndexedWindow> = videos
        .iter()
        .flat_map(|v| {
            v.windows
                .iter()
                .enumerate()
                .map(|(index, w)| IndexedWindow {
                    index,
                    window: w.clone(),
                })
        })
        .collect();
    let features: Vec<FeatureRecord> = videos
        .iter()
        .flat_map(|v| v.features.iter().cloned())
        .collect();
    let scores: Vec<ScoreRecord> = videos
        .iter()
        .flat_map(|v| {
            v.scores.iter().enumerate().map(|(i, s)| ScoreRecord {
                video_id: v.meta.video_id.clone(),
                window_index: i,
                scores: s.clone(),
            })
        })
        .collect();
    let clips: Vec<ClipRecord> = videos
        .iter()
        .flat_map(|v| {
            v.clips
                .iter()
                .enumerate()
                .map(|(clip_index, c)| ClipRecord {
                    clip_index,
                    clip: c.clone(),
                })
        })
        .collect();
    let clip_features: Vec<FeatureRecord> = videos
        .iter()
        .flat_map(|v| v.clip_features.iter().cloned())
        .collect();
    let n = config.scheme.n_classes();

    write_table(&dir.join(names::VIDEOS), &render_videos(&metas))?;
    write_table(&dir.join(names::EVENTS), &render_events(&events))?;
    write_table(&dir.join(names::WINDOWS), &render_windows(&windows))?;
    write_table(&dir.join(names::FEATURES), &render_features(&features))?;
    write_table(&dir.join(names::ORACLE_SCORES), &render_scores(&scores, n))?;
    write_table(&dir.join(names::CLIPS), &render_clips(&clips))?;
    write_table(
        &dir.join(names::CLIP_FEATURES),
        &render_features(&clip_features),
    )?;
    Ok(SimulateSummary {
        videos: metas.len(),
        events: events.len(),
        windows: windows.len(),
        clips: clips.len(),
    })
}

/// Dimensions shared by every record, or an error at the first that differs.
pub fn feature_dims(records: &[FeatureRecord], path: &Path) -> Result<FeatureDims> {
    let first = records.first().ok_or(Error::Empty("feature table"))?;
    let dims = FeatureDims::new(first.cabin.len(), first.face.len())?;
    for (i, r) in records.iter().enumerate() {
        if r.cabin.len() != dims.cabin || r.face.len() != dims.face {
            return Err(record_err(
                path,
                i + 1,
                "feature dimensions differ from the first record",
            ));
        }
    }
    Ok(dims)
}

fn feature_index(records: &[FeatureRecord]) -> HashMap<(&str, usize), &FeatureRecord> {
    records
        .iter()
        .map(|r| ((r.video_id.as_str(), r.window_index), r))
        .collect()
}

/// Paths used only for diagnostics.
#[derive(Clone, Debug)]
pub struct Sources {
    pub primary: PathBuf,
    pub features: PathBuf,
}

/// Joins training clips with their features and trains the head.
pub fn train_model(
    clips: &[ClipRecord],
    features: &[FeatureRecord],
    sources: &Sources,
    scheme: ClassScheme,
    view: ViewMode,
    config: &TrainConfig,
    split: Option<&SplitFilter>,
) -> Result<(ModelFile, Vec<EpochLog>)> {
    let dims = feature_dims(features, &sources.features)?;
    let index = feature_index(features);
    let mut data = Vec::with_capacity(clips.len());
    for (i, c) in clips.iter().enumerate() {
        let vid = c.clip.window.video_id.as_str();
        if !SplitFilter::admits(split, vid) {
            continue;
        }
        scheme
            .check(c.clip.labels.class)
            .map_err(|e| record_err(&sources.primary, i + 1, e.to_string()))?;
        let rec = index.get(&(vid, c.clip_index)).ok_or_else(|| {
            record_err(
                &sources.primary,
                i + 1,
                format!("no features for clip {vid}/{}", c.clip_index),
            )
        })?;
        data.push(Example {
            features: stack_features(rec, dims, view)?,
            labels: c.clip.labels,
        });
    }
    if data.is_empty() {
        return Err(Error::Empty("training set after split filtering"));
    }
    let outcome = train(&data, scheme.n_classes(), config)?;
    let model = ModelFile {
        scheme,
        dims,
        view,
        config: config.clone(),
        params: outcome.params,
    };
    Ok((model, outcome.log))
}

pub fn write_training(
    model_path: &Path,
    log_path: &Path,
    model: &ModelFile,
    log: &[EpochLog],
) -> Result<()> {
    write_model(model_path, model)?;
    write_table(log_path, &render_train_log(log))
}

/// Scores every window (in file order) with the trained head.
pub fn infer_scores(
    model: &ModelFile,
    windows: &[IndexedWindow],
    features: &[FeatureRecord],
    sources: &Sources,
    split: Option<&SplitFilter>,
) -> Result<Vec<ScoreRecord>> {
    let index = feature_index(features);
    let picked: Vec<(usize, &IndexedWindow)> = windows
        .iter()
        .enumerate()
        .filter(|(_, w)| SplitFilter::admits(split, &w.window.video_id))
        .collect();
    let scored = par::map(&picked, |&(i, w)| -> Result<ScoreRecord> {
        let vid = w.window.video_id.as_str();
        let rec = index.get(&(vid, w.index)).ok_or_else(|| {
            record_err(
                &sources.primary,
                i + 1,
                format!("no features for window {vid}/{}", w.index),
            )
        })?;
        let x = stack_features(rec, model.dims, model.view)
            .map_err(|e| record_err(&sources.features, i + 1, e.to_string()))?;
        Ok(ScoreRecord {
            video_id: vid.to_string(),
            window_index: w.index,
            scores: model.params.forward(&x)?,
        })
    });
    scored.into_iter().collect()
}

pub fn write_scores(path: &Path, scores: &[ScoreRecord], n_classes: usize) -> Result<()> {
    write_table(path, &render_scores(scores, n_classes))
}

/// One video's windows paired with its score records.
type VideoScores<'a> = (String, Vec<ClipWindow>, Vec<&'a ScoreRecord>);

/// Score records grouped by video in order of first appearance, each paired
/// with its windows.
fn join_scores<'a>(
    windows: &'a [IndexedWindow],
    scores: &'a [ScoreRecord],
    scores_path: &Path,
) -> Result<Vec<VideoScores<'a>>> {
    let lookup: HashMap<(&str, usize), &ClipWindow> = windows
        .iter()
        .map(|w| ((w.window.video_id.as_str(), w.index), &w.window))
        .collect();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<&str, (Vec<ClipWindow>, Vec<&ScoreRecord>)> = HashMap::new();
    for (i, s) in scores.iter().enumerate() {
        let w = lookup
            .get(&(s.video_id.as_str(), s.window_index))
            .ok_or_else(|| {
                record_err(
                    scores_path,
                    i + 1,
                    format!("no window {}/{}", s.video_id, s.window_index),
                )
            })?;
        let g = groups.entry(s.video_id.as_str()).or_insert_with(|| {
            order.push(s.video_id.clone());
            (Vec::new(), Vec::new())
        });
        g.0.push((*w).clone());
        g.1.push(s);
    }
    Ok(order
        .into_iter()
        .map(|vid| {
            let (w, s) = groups.remove(vid.as_str()).expect("grouped");
            (vid, w, s)
        })
        .collect())
}

/// Chunks for every video and requested mode, videos in score-file order.
pub fn aggregate_scores(
    windows: &[IndexedWindow],
    scores: &[ScoreRecord],
    scores_path: &Path,
    modes: &[AggregationMode],
    config: &AggregationConfig,
) -> Result<Vec<ChunkRecord>> {
    config.validate()?;
    let groups = join_scores(windows, scores, scores_path)?;
    let per_video = par::map(&groups, |(vid, wins, recs)| -> Result<Vec<ChunkRecord>> {
        let s: Vec<_> = recs.iter().map(|r| r.scores.clone()).collect();
        let mut out = Vec::new();
        for &mode in modes {
            let chunks = aggregate_video(wins, &s, mode, config)
                .map_err(|e| record_err(scores_path, 0, format!("video {vid}: {e}")))?;
            out.extend(chunks.into_iter().map(|chunk| ChunkRecord {
                video_id: vid.clone(),
                mode,
                chunk,
            }));
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for part in per_video {
        all.extend(part?);
    }
    Ok(all)
}

pub fn write_chunks(path: &Path, chunks: &[ChunkRecord]) -> Result<()> {
    write_table(path, &render_chunks(chunks))
}

/// Everything `evaluate` reads, with paths for diagnostics.
#[derive(Clone, Debug)]
pub struct EvalInputs<'a> {
    pub events: &'a [LabeledEvent],
    pub windows: &'a [IndexedWindow],
    pub scores: &'a [ScoreRecord],
    pub scores_path: &'a Path,
    pub chunks: &'a [ChunkRecord],
    pub chunks_path: &'a Path,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    pub scheme: ClassScheme,
    pub thresholds: Vec<f64>,
    pub base_rate: f64,
}

fn events_by_video(events: &[LabeledEvent]) -> HashMap<&str, Vec<LabeledEvent>> {
    let mut map: HashMap<&str, Vec<LabeledEvent>> = HashMap::new();
    for e in events {
        map.entry(e.video_id.as_str()).or_default().push(e.clone());
    }
    map
}

fn curve(scores: &[f64], truths: &[bool], thresholds: &[f64]) -> Result<CurveResult> {
    match inclusion_curves(scores, truths, thresholds) {
        Ok(points) => Ok(CurveResult::Points(points)),
        Err(e @ Error::DegenerateLabels(_)) => Ok(CurveResult::Unavailable(e.to_string())),
        Err(e) => Err(e),
    }
}

/// Clip metrics from scores against ground truth, temporal accuracy per
/// aggregation mode found in the chunk table, and review efficiency.
///
/// Inclusion truth for a window is whether any event starts (ends) inside it.
pub fn evaluate(inputs: &EvalInputs<'_>, options: &EvalOptions) -> Result<MetricsReport> {
    let n = options.scheme.n_classes();
    let gt = events_by_video(inputs.events);
    let none: Vec<LabeledEvent> = Vec::new();
    let groups = join_scores(inputs.windows, inputs.scores, inputs.scores_path)?;

    let (mut predicted, mut truth) = (Vec::new(), Vec::new());
    let (mut p_start, mut t_start, mut p_end, mut t_end) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut record = 0;
    for (vid, wins, recs) in &groups {
        let events = gt.get(vid.as_str()).unwrap_or(&none);
        for (w, r) in wins.iter().zip(recs) {
            record += 1;
            if r.scores.class_logits.len() != n {
                return Err(record_err(
                    inputs.scores_path,
                    record,
                    format!(
                        "{} logits for a {n}-class scheme",
                        r.scores.class_logits.len()
                    ),
                ));
            }
            predicted.push(r.scores.argmax());
            truth.push(label_window(w, events).class);
            p_start.push(r.scores.p_start);
            t_start.push(events.iter().any(|e| w.holds_start(e.start)));
            p_end.push(r.scores.p_end);
            t_end.push(events.iter().any(|e| w.holds_end(e.end)));
        }
    }
    if predicted.is_empty() {
        return Err(Error::Empty("score table"));
    }
    let clip_accuracy = crate::evaluation::clip_accuracy(&predicted, &truth)?;
    let matrix = confusion(&predicted, &truth, n)?;

    let mut temporal = Vec::new();
    for mode in [AggregationMode::Rough, AggregationMode::Refined] {
        let mut values = Vec::new();
        for (i, c) in inputs
            .chunks
            .iter()
            .enumerate()
            .filter(|(_, c)| c.mode == mode)
        {
            options
                .scheme
                .check(c.chunk.class)
                .map_err(|e| record_err(inputs.chunks_path, i + 1, e.to_string()))?;
            let events = gt.get(c.video_id.as_str()).unwrap_or(&none);
            let acc = temporal_accuracy(&c.chunk, events)
                .map_err(|e| record_err(inputs.chunks_path, i + 1, e.to_string()))?;
            values.push((c.chunk.class, acc));
        }
        if inputs.chunks.iter().any(|c| c.mode == mode) {
            temporal.push((mode, mean_by_class(values)));
        }
    }

    let flagged = predicted.iter().filter(|c| c.is_behavior()).count();
    let hits = predicted
        .iter()
        .zip(&truth)
        .filter(|(p, t)| p.is_behavior() && t.is_behavior())
        .count();
    let behavior_precision = (flagged > 0).then(|| hits as f64 / flagged as f64);
    let efficiency = match behavior_precision {
        Some(p) => Some(review_efficiency(p, options.base_rate)?),
        None => {
            review_efficiency(0.0, options.base_rate)?;
            None
        }
    };

    Ok(MetricsReport {
        scheme: options.scheme,
        videos: groups.len(),
        clips: predicted.len(),
        clip_accuracy,
        confusion: matrix,
        start_curve: curve(&p_start, &t_start, &options.thresholds)?,
        end_curve: curve(&p_end, &t_end, &options.thresholds)?,
        temporal,
        behavior_precision,
        base_rate: options.base_rate,
        review_efficiency: efficiency,
    })
}

/// Writes the report and its CSV/SVG sidecars into `dir`; returns the paths.
pub fn write_evaluation(dir: &Path, report: &MetricsReport) -> Result<Vec<PathBuf>> {
    let names = report.scheme.names();
    let mut files: Vec<(String, String)> = vec![
        (names::METRICS.to_string(), report.render()),
        (
            "confusion.csv".into(),
            confusion_csv(&report.confusion, names),
        ),
        (
            "confusion.svg".into(),
            confusion_svg(&report.confusion, names, "Clip confusion (row percent)"),
        ),
    ];
    for (kind, curve) in [("start", &report.start_curve), ("end", &report.end_curve)] {
        if let CurveResult::Points(points) = curve {
            files.push((format!("curve_{kind}.csv"), curve_csv(points)));
            files.push((
                format!("roc_{kind}.svg"),
                curve_svg(points, CurveKind::Roc, &format!("{kind} inclusion ROC")),
            ));
            files.push((
                format!("pr_{kind}.svg"),
                curve_svg(
                    points,
                    CurveKind::PrecisionRecall,
                    &format!("{kind} inclusion precision-recall"),
                ),
            ));
        }
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        write_table(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

/// Human-readable Markdown summary of a rendered metrics report.
pub fn summarize_report(text: &str, path: &Path) -> Result<String> {
    let sections = parse_report(text).map_err(|m| record_err(path, 0, m))?;
    let get = |section: &str, key: &str| -> Option<&str> {
        sections
            .get(section)?
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let need = |section: &str, key: &str| -> Result<&str> {
        get(section, key).ok_or_else(|| record_err(path, 0, format!("missing [{section}] {key}")))
    };
    let real = |v: &str| -> String {
        v.parse::<f64>()
            .map_or_else(|_| v.to_string(), |x| format!("{x:.4}"))
    };

    let n: usize = need("run", "classes")?
        .parse()
        .map_err(|_| record_err(path, 0, "bad class count"))?;
    let class_names: Vec<&str> = need("run", "class_names")?.split(',').collect();
    let mut out = String::new();
    let _ = writeln!(out, "# Evaluation summary\n");
    let _ = writeln!(
        out,
        "{} videos, {} clips, clip accuracy {}.\n",
        need("run", "videos")?,
        need("run", "clips")?,
        real(need("accuracy", "clip_accuracy")?)
    );

    let _ = writeln!(out, "## Confusion (row percent)\n");
    let _ = writeln!(out, "| truth \\ predicted | {} |", class_names.join(" | "));
    let _ = writeln!(out, "|---|{}", "---|".repeat(n));
    for t in 0..n {
        let row = need("confusion", &format!("row_percent.{t}"))?;
        let cells: Vec<String> = row.split(',').map(real).collect();
        let _ = writeln!(
            out,
            "| {} | {} |",
            class_names.get(t).unwrap_or(&"?"),
            cells.join(" | ")
        );
    }

    let modes: BTreeSet<&str> = sections
        .keys()
        .filter_map(|k| k.strip_prefix("temporal."))
        .collect();
    if !modes.is_empty() {
        let _ = writeln!(out, "\n## Mean temporal accuracy\n");
        let _ = writeln!(
            out,
            "| class | {} |",
            modes.iter().copied().collect::<Vec<_>>().join(" | ")
        );
        let _ = writeln!(out, "|---|{}", "---|".repeat(modes.len()));
        for c in 1..n {
            let cells: Vec<String> = modes
                .iter()
                .map(|m| {
                    get(&format!("temporal.{m}"), &format!("class.{c}"))
                        .map_or_else(|| "absent".into(), real)
                })
                .collect();
            let _ = writeln!(
                out,
                "| {} | {} |",
                class_names.get(c).unwrap_or(&"?"),
                cells.join(" | ")
            );
        }
    }

    for kind in ["start", "end"] {
        let section = format!("curve.{kind}");
        let _ = writeln!(out, "\n## {kind} inclusion\n");
        if let Some(why) = get(&section, "unavailable") {
            let _ = writeln!(out, "Unavailable: {why}");
            continue;
        }
        let _ = writeln!(out, "| threshold | tpr | fpr | precision |");
        let _ = writeln!(out, "|---|---|---|---|");
        let points: BTreeMap<usize, &str> = sections
            .get(&section)
            .into_iter()
            .flatten()
            .filter_map(|(k, v)| Some((k.strip_prefix("point.")?.parse().ok()?, v.as_str())))
            .collect();
        for v in points.values() {
            let f: Vec<String> = v.split(',').map(real).collect();
            if f.len() == 5 {
                let _ = writeln!(out, "| {} | {} | {} | {} |", f[0], f[1], f[2], f[3]);
            }
        }
    }

    let _ = writeln!(out, "\n## Review\n");
    let _ = writeln!(
        out,
        "Behavior precision {}, base rate {}, review efficiency {}.",
        real(need("review", "behavior_precision")?),
        real(need("review", "base_rate")?),
        real(need("review", "efficiency")?)
    );
    Ok(out)
}
