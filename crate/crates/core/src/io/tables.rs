use std::path::Path;
use std::str::FromStr;

use crate::classifier::{EpochLog, FeatureRecord};
use crate::domain::{
    AggregationMode, BehaviorClass, Chunk, ClipLabels, ClipScores, ClipWindow, LabeledEvent,
    VideoMeta,
};
use crate::error::{Error, Result};
use crate::io::{fmt_real, fmt_seconds, read_text, write_atomic};
use crate::windowing::{ClipKind, TrainingClip};

/// A window with its per-video index: the join key of features, scores and labels.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedWindow {
    pub index: usize,
    pub window: ClipWindow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRecord {
    pub video_id: String,
    pub window_index: usize,
    pub scores: ClipScores,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChunkRecord {
    pub video_id: String,
    pub mode: AggregationMode,
    pub chunk: Chunk,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClipRecord {
    pub clip_index: usize,
    pub clip: TrainingClip,
}

struct Table<'a> {
    path: &'a Path,
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl<'a> Table<'a> {
    fn parse(path: &'a Path, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| parse_err(path, 0, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            rows.push(rec.map_err(|e| parse_err(path, i + 1, e.to_string()))?);
        }
        Ok(Table { path, header, rows })
    }

    fn expect_header(&self, expected: &[String]) -> Result<()> {
        if self.header != expected {
            return Err(parse_err(
                self.path,
                0,
                format!("header {:?}, expected {:?}", self.header, expected),
            ));
        }
        Ok(())
    }

    fn count_prefixed(&self, prefix: &str) -> usize {
        self.header.iter().filter(|h| h.starts_with(prefix)).count()
    }

    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().enumerate().map(|(i, r)| Row {
            path: self.path,
            record: i + 1,
            fields: r,
        })
    }
}

struct Row<'a> {
    path: &'a Path,
    record: usize,
    fields: &'a csv::StringRecord,
}

impl Row<'_> {
    fn str(&self, i: usize) -> Result<&str> {
        self.fields
            .get(i)
            .ok_or_else(|| self.err(format!("missing column {i}")))
    }

    fn num<T: FromStr>(&self, i: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.str(i)?;
        s.parse::<T>()
            .map_err(|e| self.err(format!("column {i} '{s}': {e}")))
    }

    fn real(&self, i: usize) -> Result<f64> {
        let v: f64 = self.num(i)?;
        if !v.is_finite() {
            return Err(self.err(format!("column {i} is not finite")));
        }
        Ok(v)
    }

    fn flag(&self, i: usize) -> Result<bool> {
        match self.str(i)? {
            "0" => Ok(false),
            "1" => Ok(true),
            s => Err(self.err(format!("column {i} '{s}' must be 0 or 1"))),
        }
    }

    fn err(&self, message: String) -> Error {
        parse_err(self.path, self.record, message)
    }

    fn wrap<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            e @ Error::Parse { .. } => e,
            other => self.err(other.to_string()),
        })
    }
}

fn parse_err(path: &Path, record: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        record,
        message,
    }
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn render(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

// ---------------------------------------------------------------------------

pub fn render_videos(videos: &[VideoMeta]) -> String {
    render(
        &header(&["video_id", "duration"]),
        videos
            .iter()
            .map(|v| vec![v.video_id.clone(), fmt_seconds(v.duration)]),
    )
}

pub fn parse_videos(path: &Path, text: &str) -> Result<Vec<VideoMeta>> {
    let t = Table::parse(path, text)?;
    t.expect_header(&header(&["video_id", "duration"]))?;
    t.rows()
        .map(|r| r.wrap(VideoMeta::new(r.str(0)?, r.real(1)?)))
        .collect()
}

pub fn render_events(events: &[LabeledEvent]) -> String {
    render(
        &header(&["video_id", "class", "start", "end"]),
        events.iter().map(|e| {
            vec![
                e.video_id.clone(),
                e.class.to_string(),
                fmt_seconds(e.start),
                fmt_seconds(e.end),
            ]
        }),
    )
}

pub fn parse_events(path: &Path, text: &str) -> Result<Vec<LabeledEvent>> {
    let t = Table::parse(path, text)?;
    t.expect_header(&header(&["video_id", "class", "start", "end"]))?;
    t.rows()
        .map(|r| {
            r.wrap(LabeledEvent::new(
                r.str(0)?,
                BehaviorClass(r.num(1)?),
                r.real(2)?,
                r.real(3)?,
            ))
        })
        .collect()
}

pub fn render_windows(windows: &[IndexedWindow]) -> String {
    render(
        &header(&["video_id", "window_index", "start", "end"]),
        windows.iter().map(|w| {
            vec![
                w.window.video_id.clone(),
                w.index.to_string(),
                fmt_seconds(w.window.start),
                fmt_seconds(w.window.end()),
            ]
        }),
    )
}

pub fn parse_windows(path: &Path, text: &str) -> Result<Vec<IndexedWindow>> {
    let t = Table::parse(path, text)?;
    t.expect_header(&header(&["video_id", "window_index", "start", "end"]))?;
    t.rows()
        .map(|r| {
            let window = r.wrap(ClipWindow::new(r.str(0)?, r.real(2)?))?;
            let end = r.real(3)?;
            if (end - window.end()).abs() > 1e-6 {
                return Err(r.err(format!("window spans {} s, expected 8", end - window.start)));
            }
            Ok(IndexedWindow {
                index: r.num(1)?,
                window,
            })
        })
        .collect()
}

pub fn features_header(cabin: usize, face: usize) -> Vec<String> {
    let mut h = header(&["video_id", "window_index"]);
    h.extend((0..cabin).map(|i| format!("cabin_{i}")));
    h.extend((0..face).map(|i| format!("face_{i}")));
    h
}

pub fn render_features(records: &[FeatureRecord]) -> String {
    let (c, f) = records
        .first()
        .map_or((0, 0), |r| (r.cabin.len(), r.face.len()));
    render(
        &features_header(c, f),
        records.iter().map(|r| {
            let mut row = vec![r.video_id.clone(), r.window_index.to_string()];
            row.extend(r.cabin.iter().chain(&r.face).map(|&v| fmt_real(v)));
            row
        }),
    )
}

pub fn parse_features(path: &Path, text: &str) -> Result<Vec<FeatureRecord>> {
    let t = Table::parse(path, text)?;
    let (c, f) = (t.count_prefixed("cabin_"), t.count_prefixed("face_"));
    t.expect_header(&features_header(c, f))?;
    t.rows()
        .map(|r| {
            let vals = (0..c + f)
                .map(|i| r.real(2 + i))
                .collect::<Result<Vec<f64>>>()?;
            Ok(FeatureRecord {
                video_id: r.str(0)?.to_string(),
                window_index: r.num(1)?,
                cabin: vals[..c].to_vec(),
                face: vals[c..].to_vec(),
            })
        })
        .collect()
}

pub fn scores_header(n_classes: usize) -> Vec<String> {
    let mut h = header(&["video_id", "window_index"]);
    h.extend((0..n_classes).map(|i| format!("logit_{i}")));
    h.push("p_start".into());
    h.push("p_end".into());
    h
}

pub fn render_scores(records: &[ScoreRecord], n_classes: usize) -> String {
    render(
        &scores_header(n_classes),
        records.iter().map(|r| {
            let mut row = vec![r.video_id.clone(), r.window_index.to_string()];
            row.extend(r.scores.class_logits.iter().map(|&v| fmt_real(v)));
            row.push(fmt_real(r.scores.p_start));
            row.push(fmt_real(r.scores.p_end));
            row
        }),
    )
}

pub fn parse_scores(path: &Path, text: &str) -> Result<Vec<ScoreRecord>> {
    let t = Table::parse(path, text)?;
    let n = t.count_prefixed("logit_");
    t.expect_header(&scores_header(n))?;
    t.rows()
        .map(|r| {
            let class_logits = (0..n)
                .map(|i| r.real(2 + i))
                .collect::<Result<Vec<f64>>>()?;
            let p_start = r.real(2 + n)?;
            let p_end = r.real(3 + n)?;
            if !(0.0..=1.0).contains(&p_start) || !(0.0..=1.0).contains(&p_end) {
                return Err(r.err("inclusion probability outside [0, 1]".into()));
            }
            Ok(ScoreRecord {
                video_id: r.str(0)?.to_string(),
                window_index: r.num(1)?,
                scores: ClipScores {
                    class_logits,
                    p_start,
                    p_end,
                },
            })
        })
        .collect()
}

pub fn render_chunks(records: &[ChunkRecord]) -> String {
    render(
        &header(&["video_id", "class", "start", "end", "mode"]),
        records.iter().map(|r| {
            vec![
                r.video_id.clone(),
                r.chunk.class.to_string(),
                fmt_seconds(r.chunk.start),
                fmt_seconds(r.chunk.end),
                r.mode.tag().to_string(),
            ]
        }),
    )
}

pub fn parse_chunks(path: &Path, text: &str) -> Result<Vec<ChunkRecord>> {
    let t = Table::parse(path, text)?;
    t.expect_header(&header(&["video_id", "class", "start", "end", "mode"]))?;
    t.rows()
        .map(|r| {
            let chunk = r.wrap(Chunk::new(BehaviorClass(r.num(1)?), r.real(2)?, r.real(3)?))?;
            let tag = r.str(4)?;
            let mode = AggregationMode::from_tag(tag)
                .ok_or_else(|| r.err(format!("unknown mode '{tag}'")))?;
            Ok(ChunkRecord {
                video_id: r.str(0)?.to_string(),
                mode,
                chunk,
            })
        })
        .collect()
}

const CLIP_COLUMNS: [&str; 8] = [
    "video_id",
    "clip_index",
    "kind",
    "start",
    "end",
    "class",
    "start_inclusion",
    "end_inclusion",
];

pub fn render_clips(records: &[ClipRecord]) -> String {
    render(
        &header(&CLIP_COLUMNS),
        records.iter().map(|r| {
            let c = &r.clip;
            vec![
                c.window.video_id.clone(),
                r.clip_index.to_string(),
                c.kind.tag().to_string(),
                fmt_seconds(c.window.start),
                fmt_seconds(c.window.end()),
                c.labels.class.to_string(),
                flag(c.labels.start_inclusion),
                flag(c.labels.end_inclusion),
            ]
        }),
    )
}

pub fn parse_clips(path: &Path, text: &str) -> Result<Vec<ClipRecord>> {
    let t = Table::parse(path, text)?;
    t.expect_header(&header(&CLIP_COLUMNS))?;
    t.rows()
        .map(|r| {
            let tag = r.str(2)?;
            let kind = ClipKind::from_tag(tag)
                .ok_or_else(|| r.err(format!("unknown clip kind '{tag}'")))?;
            Ok(ClipRecord {
                clip_index: r.num(1)?,
                clip: TrainingClip {
                    window: r.wrap(ClipWindow::new(r.str(0)?, r.real(3)?))?,
                    labels: ClipLabels {
                        class: BehaviorClass(r.num(5)?),
                        start_inclusion: r.flag(6)?,
                        end_inclusion: r.flag(7)?,
                    },
                    kind,
                },
            })
        })
        .collect()
}

pub fn render_train_log(log: &[EpochLog]) -> String {
    render(
        &header(&["epoch", "learning_rate", "mean_loss"]),
        log.iter().map(|l| {
            vec![
                l.epoch.to_string(),
                fmt_real(l.learning_rate),
                fmt_real(l.mean_loss),
            ]
        }),
    )
}

pub fn parse_train_log(path: &Path, text: &str) -> Result<Vec<EpochLog>> {
    let t = Table::parse(path, text)?;
    t.expect_header(&header(&["epoch", "learning_rate", "mean_loss"]))?;
    t.rows()
        .map(|r| {
            Ok(EpochLog {
                epoch: r.num(0)?,
                learning_rate: r.real(1)?,
                mean_loss: r.real(2)?,
            })
        })
        .collect()
}

macro_rules! file_io {
    ($read:ident, $parse:ident, $ty:ty) => {
        pub fn $read(path: &Path) -> Result<Vec<$ty>> {
            $parse(path, &read_text(path)?)
        }
    };
}

file_io!(read_videos, parse_videos, VideoMeta);
file_io!(read_events, parse_events, LabeledEvent);
file_io!(read_windows, parse_windows, IndexedWindow);
file_io!(read_features, parse_features, FeatureRecord);
file_io!(read_scores, parse_scores, ScoreRecord);
file_io!(read_chunks, parse_chunks, ChunkRecord);
file_io!(read_clips, parse_clips, ClipRecord);
file_io!(read_train_log, parse_train_log, EpochLog);

/// Writes a rendered table atomically.
pub fn write_table(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}
