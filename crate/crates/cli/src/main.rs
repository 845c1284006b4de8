//! `phoneloc`: simulate, train, infer, aggregate, evaluate and report.
//!
//! Settings come from an optional TOML file (`--config`) with one section per
//! subcommand plus a shared `[run]` section; any flag given on the command
//! line overrides the file. Relative paths are relative to the working
//! directory.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use phoneloc::aggregation::AggregationConfig;
use phoneloc::classifier::{FeatureDims, TrainConfig, ViewMode};
use phoneloc::domain::{AggregationMode, ClassScheme};
use phoneloc::evaluation::{default_thresholds, dense_thresholds, DEFAULT_BASE_RATE};
use phoneloc::io;
use phoneloc::pipeline::{self, EvalInputs, EvalOptions, Sources, SplitFilter};
use phoneloc::split::{Split, SplitRatios};
use phoneloc::synthdata::SimConfig;
use phoneloc::windowing::NegativeCount;

const MAX_DEFAULT_THREADS: usize = 8;

#[derive(Parser, Debug)]
#[command(
    name = "phoneloc",
    version,
    about = "Localize driver cell-phone behaviors in video from per-clip scores"
)]
struct Cli {
    /// TOML settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available cores, at most 8).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Number of classes: 3 (dialing and interacting merged) or 4.
    #[arg(long, global = true)]
    classes: Option<usize>,
    /// Split ratios as train,val,test.
    #[arg(long, global = true, value_name = "T,V,T")]
    split_ratios: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset with oracle scores.
    Simulate(SimulateArgs),
    /// Train the linear head on clip features.
    Train(TrainArgs),
    /// Score every sliding window with a trained head.
    Infer(InferArgs),
    /// Turn window scores into behavior chunks.
    Aggregate(AggregateArgs),
    /// Compute clip, curve, temporal and review metrics.
    Evaluate(EvaluateArgs),
    /// Summarize a metrics file as Markdown.
    Report(ReportArgs),
}

#[derive(Args, Debug, Default)]
struct SimulateArgs {
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    videos: Option<usize>,
    /// Video duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    events_min: Option<usize>,
    #[arg(long)]
    events_max: Option<usize>,
    #[arg(long)]
    event_duration_min: Option<f64>,
    #[arg(long)]
    event_duration_max: Option<f64>,
    #[arg(long)]
    gap_min: Option<f64>,
    #[arg(long)]
    gap_max: Option<f64>,
    /// Behavior class probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    class_mix: Option<Vec<f64>>,
    #[arg(long)]
    cabin_dim: Option<usize>,
    #[arg(long)]
    face_dim: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    feature_noise: Option<f64>,
    #[arg(long)]
    label_noise: Option<f64>,
    #[arg(long)]
    boundary_blur: Option<f64>,
    /// Negative clips per video as a fraction of positive clips.
    #[arg(long)]
    negative_fraction: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct TrainArgs {
    #[arg(long)]
    clips: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
    /// two-view, cabin or face.
    #[arg(long)]
    view: Option<String>,
    /// train, val, test or all.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr_step: Option<usize>,
    #[arg(long)]
    lr_factor: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
struct InferArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    windows: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    split: Option<String>,
}

#[derive(Args, Debug, Default)]
struct AggregateArgs {
    #[arg(long)]
    windows: Option<PathBuf>,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// rough, refined, or both comma separated.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,
    /// Peak threshold for refined aggregation; bare `--theta` means 0.8.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.8")]
    theta: Option<f64>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    peak_min_separation: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct EvaluateArgs {
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    windows: Option<PathBuf>,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    chunks: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Share of behavior in unreviewed video.
    #[arg(long)]
    base_rate: Option<f64>,
    /// Use `k/steps` thresholds instead of 0.0, 0.1, ..., 0.9.
    #[arg(long)]
    dense_steps: Option<usize>,
    #[arg(long)]
    split: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ReportArgs {
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Markdown output; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    run: RunSection,
    simulate: SimulateSection,
    train: TrainSection,
    infer: InferSection,
    aggregate: AggregateSection,
    evaluate: EvaluateSection,
    report: ReportSection,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct RunSection {
    threads: Option<usize>,
    classes: Option<usize>,
    split_ratios: Option<[f64; 3]>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct SimulateSection {
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    videos: Option<usize>,
    duration: Option<f64>,
    events_min: Option<usize>,
    events_max: Option<usize>,
    event_duration_min: Option<f64>,
    event_duration_max: Option<f64>,
    gap_min: Option<f64>,
    gap_max: Option<f64>,
    class_mix: Option<Vec<f64>>,
    cabin_dim: Option<usize>,
    face_dim: Option<usize>,
    separation: Option<f64>,
    feature_noise: Option<f64>,
    label_noise: Option<f64>,
    boundary_blur: Option<f64>,
    negative_fraction: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct TrainSection {
    clips: Option<PathBuf>,
    features: Option<PathBuf>,
    model: Option<PathBuf>,
    log: Option<PathBuf>,
    view: Option<String>,
    split: Option<String>,
    learning_rate: Option<f64>,
    momentum: Option<f64>,
    weight_decay: Option<f64>,
    epochs: Option<usize>,
    lr_step: Option<usize>,
    lr_factor: Option<f64>,
    batch_size: Option<usize>,
    lambda: Option<f64>,
    seed: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct InferSection {
    model: Option<PathBuf>,
    windows: Option<PathBuf>,
    features: Option<PathBuf>,
    out: Option<PathBuf>,
    split: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct AggregateSection {
    windows: Option<PathBuf>,
    scores: Option<PathBuf>,
    out: Option<PathBuf>,
    modes: Option<Vec<String>>,
    theta: Option<f64>,
    gap: Option<f64>,
    peak_min_separation: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct EvaluateSection {
    events: Option<PathBuf>,
    windows: Option<PathBuf>,
    scores: Option<PathBuf>,
    chunks: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    base_rate: Option<f64>,
    dense_steps: Option<usize>,
    split: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct ReportSection {
    metrics: Option<PathBuf>,
    out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("{}: cannot read config", path.display()))?;
    toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Flag value, else file value; errors name the setting when neither is set.
fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    flag.or(file).ok_or_else(|| {
        anyhow!(
            "invalid configuration: missing {name} (flag --{} or config file)",
            name.replace('_', "-")
        )
    })
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

struct Shared {
    scheme: ClassScheme,
    ratios: SplitRatios,
}

impl Shared {
    fn split_filter(&self, tag: &str) -> Result<Option<SplitFilter>> {
        if tag == "all" {
            return Ok(None);
        }
        let keep = Split::from_tag(tag)
            .ok_or_else(|| anyhow!("invalid configuration: unknown split '{tag}'"))?;
        Ok(Some(SplitFilter {
            ratios: self.ratios,
            keep,
        }))
    }
}

fn parse_ratios(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| anyhow!("invalid configuration: split ratios '{text}': {e}"))?;
    <[f64; 3]>::try_from(parts)
        .map_err(|_| anyhow!("invalid configuration: split ratios need three values"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = load_config(cli.config.as_deref())?;

    let threads = cli.threads.or(file.run.threads).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(MAX_DEFAULT_THREADS)
    });
    if threads == 0 {
        bail!("invalid configuration: threads must be at least 1");
    }
    phoneloc::par::init_workers(threads);

    let scheme = ClassScheme::from_count(pick(cli.classes, file.run.classes, 3))?;
    let ratios = match (&cli.split_ratios, file.run.split_ratios) {
        (Some(text), _) => parse_ratios(text)?,
        (None, Some(r)) => r,
        (None, None) => [0.7, 0.2, 0.1],
    };
    let ratios = SplitRatios {
        train: ratios[0],
        val: ratios[1],
        test: ratios[2],
    };
    ratios.validate()?;
    let shared = Shared { scheme, ratios };

    match cli.command {
        Command::Simulate(a) => simulate(a, &file.simulate, &shared),
        Command::Train(a) => train(a, &file.train, &shared),
        Command::Infer(a) => infer(a, &file.infer, &shared),
        Command::Aggregate(a) => aggregate(a, &file.aggregate),
        Command::Evaluate(a) => evaluate(a, &file.evaluate, &shared),
        Command::Report(a) => report(a, &file.report),
    }
}

fn simulate(a: SimulateArgs, f: &SimulateSection, shared: &Shared) -> Result<()> {
    let d = SimConfig::default();
    let n = shared.scheme.n_classes();
    let even_mix = vec![1.0 / (n - 1) as f64; n - 1];
    let config = SimConfig {
        seed: pick(a.seed, f.seed, d.seed),
        videos: pick(a.videos, f.videos, d.videos),
        duration: pick(a.duration, f.duration, d.duration),
        events_min: pick(a.events_min, f.events_min, d.events_min),
        events_max: pick(a.events_max, f.events_max, d.events_max),
        event_duration_min: pick(
            a.event_duration_min,
            f.event_duration_min,
            d.event_duration_min,
        ),
        event_duration_max: pick(
            a.event_duration_max,
            f.event_duration_max,
            d.event_duration_max,
        ),
        gap_min: pick(a.gap_min, f.gap_min, d.gap_min),
        gap_max: pick(a.gap_max, f.gap_max, d.gap_max),
        scheme: shared.scheme,
        class_mix: pick(a.class_mix, f.class_mix.clone(), even_mix),
        dims: FeatureDims::new(
            pick(a.cabin_dim, f.cabin_dim, d.dims.cabin),
            pick(a.face_dim, f.face_dim, d.dims.face),
        )?,
        separation: pick(a.separation, f.separation, d.separation),
        feature_noise: pick(a.feature_noise, f.feature_noise, d.feature_noise),
        label_noise: pick(a.label_noise, f.label_noise, d.label_noise),
        boundary_blur: pick(a.boundary_blur, f.boundary_blur, d.boundary_blur),
        negatives: match a.negative_fraction.or(f.negative_fraction) {
            Some(x) => NegativeCount::Fraction(x),
            None => d.negatives,
        },
    };
    let out = required(a.out_dir, f.out_dir.clone(), "out_dir")?;
    let s = pipeline::simulate_to_dir(&config, &out)?;
    eprintln!(
        "simulated {} videos, {} events, {} windows, {} training clips into {}",
        s.videos,
        s.events,
        s.windows,
        s.clips,
        out.display()
    );
    Ok(())
}

fn train(a: TrainArgs, f: &TrainSection, shared: &Shared) -> Result<()> {
    let d = TrainConfig::default();
    let config = TrainConfig {
        learning_rate: pick(a.learning_rate, f.learning_rate, d.learning_rate),
        momentum: pick(a.momentum, f.momentum, d.momentum),
        weight_decay: pick(a.weight_decay, f.weight_decay, d.weight_decay),
        epochs: pick(a.epochs, f.epochs, d.epochs),
        lr_step: pick(a.lr_step, f.lr_step, d.lr_step),
        lr_factor: pick(a.lr_factor, f.lr_factor, d.lr_factor),
        batch_size: pick(a.batch_size, f.batch_size, d.batch_size),
        lambda: pick(a.lambda, f.lambda, d.lambda),
        seed: pick(a.seed, f.seed, d.seed),
    };
    config.validate()?;
    let view_tag = pick(a.view, f.view.clone(), ViewMode::TwoView.tag().to_string());
    let view = ViewMode::from_tag(&view_tag)
        .ok_or_else(|| anyhow!("invalid configuration: unknown view '{view_tag}'"))?;
    let split = shared.split_filter(&pick(a.split, f.split.clone(), "train".into()))?;
    let clips_path = required(a.clips, f.clips.clone(), "clips")?;
    let features_path = required(a.features, f.features.clone(), "features")?;
    let model_path = required(a.model, f.model.clone(), "model")?;
    let log_path = pick(a.log, f.log.clone(), model_path.with_extension("log.csv"));

    let clips = io::read_clips(&clips_path)?;
    let features = io::read_features(&features_path)?;
    let sources = Sources {
        primary: clips_path,
        features: features_path,
    };
    let (model, log) = pipeline::train_model(
        &clips,
        &features,
        &sources,
        shared.scheme,
        view,
        &config,
        split.as_ref(),
    )?;
    pipeline::write_training(&model_path, &log_path, &model, &log)?;
    if let Some(last) = log.last() {
        eprintln!(
            "trained {} epochs, final mean loss {}; model {}, log {}",
            last.epoch,
            io::fmt_real(last.mean_loss),
            model_path.display(),
            log_path.display()
        );
    }
    Ok(())
}

fn infer(a: InferArgs, f: &InferSection, shared: &Shared) -> Result<()> {
    let model_path = required(a.model, f.model.clone(), "model")?;
    let windows_path = required(a.windows, f.windows.clone(), "windows")?;
    let features_path = required(a.features, f.features.clone(), "features")?;
    let out = required(a.out, f.out.clone(), "out")?;
    let split = shared.split_filter(&pick(a.split, f.split.clone(), "all".into()))?;

    let model = io::read_model(&model_path)?;
    if model.scheme != shared.scheme {
        bail!(
            "invalid configuration: {} was trained for {} classes, run uses {}",
            model_path.display(),
            model.scheme.n_classes(),
            shared.scheme.n_classes()
        );
    }
    let windows = io::read_windows(&windows_path)?;
    let features = io::read_features(&features_path)?;
    let sources = Sources {
        primary: windows_path,
        features: features_path,
    };
    let scores = pipeline::infer_scores(&model, &windows, &features, &sources, split.as_ref())?;
    pipeline::write_scores(&out, &scores, model.scheme.n_classes())?;
    eprintln!("scored {} windows into {}", scores.len(), out.display());
    Ok(())
}

fn aggregate(a: AggregateArgs, f: &AggregateSection) -> Result<()> {
    let tags = pick(a.modes, f.modes.clone(), vec!["rough".to_string()]);
    let mut modes = Vec::new();
    for t in &tags {
        let m = AggregationMode::from_tag(t.trim())
            .ok_or_else(|| anyhow!("invalid configuration: unknown aggregation mode '{t}'"))?;
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    let theta = a.theta.or(f.theta);
    if modes.contains(&AggregationMode::Refined) && theta.is_none() {
        bail!("invalid configuration: refined aggregation needs a peak threshold (--theta, or theta in [aggregate])");
    }
    let d = AggregationConfig::default();
    let config = AggregationConfig {
        theta: theta.unwrap_or(d.theta),
        gap: pick(a.gap, f.gap, d.gap),
        peak_min_separation: pick(
            a.peak_min_separation,
            f.peak_min_separation,
            d.peak_min_separation,
        ),
    };
    let windows_path = required(a.windows, f.windows.clone(), "windows")?;
    let scores_path = required(a.scores, f.scores.clone(), "scores")?;
    let out = required(a.out, f.out.clone(), "out")?;

    let windows = io::read_windows(&windows_path)?;
    let scores = io::read_scores(&scores_path)?;
    let chunks = pipeline::aggregate_scores(&windows, &scores, &scores_path, &modes, &config)?;
    pipeline::write_chunks(&out, &chunks)?;
    eprintln!("wrote {} chunks into {}", chunks.len(), out.display());
    Ok(())
}

fn evaluate(a: EvaluateArgs, f: &EvaluateSection, shared: &Shared) -> Result<()> {
    let events_path = required(a.events, f.events.clone(), "events")?;
    let windows_path = required(a.windows, f.windows.clone(), "windows")?;
    let scores_path = required(a.scores, f.scores.clone(), "scores")?;
    let out_dir = required(a.out_dir, f.out_dir.clone(), "out_dir")?;
    let chunks_path = a.chunks.or(f.chunks.clone());
    let split = shared.split_filter(&pick(a.split, f.split.clone(), "all".into()))?;
    let thresholds = match a.dense_steps.or(f.dense_steps) {
        Some(0) => bail!("invalid configuration: dense_steps must be at least 1"),
        Some(steps) => dense_thresholds(steps),
        None => default_thresholds(),
    };
    let options = EvalOptions {
        scheme: shared.scheme,
        thresholds,
        base_rate: pick(a.base_rate, f.base_rate, DEFAULT_BASE_RATE),
    };

    let keep = |vid: &str| {
        split
            .as_ref()
            .is_none_or(|s| s.ratios.assign(vid) == s.keep)
    };
    let events: Vec<_> = io::read_events(&events_path)?;
    let windows: Vec<_> = io::read_windows(&windows_path)?;
    let scores: Vec<_> = io::read_scores(&scores_path)?
        .into_iter()
        .filter(|s| keep(&s.video_id))
        .collect();
    let chunks: Vec<_> = match &chunks_path {
        Some(p) => io::read_chunks(p)?
            .into_iter()
            .filter(|c| keep(&c.video_id))
            .collect(),
        None => Vec::new(),
    };
    let no_chunks = PathBuf::from("<no chunks file>");
    let report = pipeline::evaluate(
        &EvalInputs {
            events: &events,
            windows: &windows,
            scores: &scores,
            scores_path: &scores_path,
            chunks: &chunks,
            chunks_path: chunks_path.as_deref().unwrap_or(&no_chunks),
        },
        &options,
    )?;
    let written = pipeline::write_evaluation(&out_dir, &report)?;
    eprintln!(
        "clip accuracy {} over {} clips; wrote {} files into {}",
        io::fmt_real(report.clip_accuracy),
        report.clips,
        written.len(),
        out_dir.display()
    );
    Ok(())
}

fn report(a: ReportArgs, f: &ReportSection) -> Result<()> {
    let metrics = required(a.metrics, f.metrics.clone(), "metrics")?;
    let text = io::read_text(&metrics)?;
    let summary = pipeline::summarize_report(&text, &metrics)?;
    match a.out.or(f.out.clone()) {
        Some(out) => io::write_atomic(&out, summary.as_bytes())?,
        None => std::io::stdout().write_all(summary.as_bytes())?,
    }
    Ok(())
}
