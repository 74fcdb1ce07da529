//! Command-line surface: calibrate, gen, train, eval, infer, bench.
//!
//! Every command exits 0 on success and nonzero with a single-line
//! diagnostic on stderr otherwise. Output files are written to a
//! temporary sibling first and renamed into place on success, so a
//! failed run never leaves a partial artifact behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::imaging::CannyParams;
use crate::mlp::{
    self, read_manifest, records_to_dataset, write_manifest, Dataset, LabeledSample,
    ManifestRecord, TrainConfig,
};
use crate::pipeline::{
    read_frame, FeatureExtractor, FrameSource, Pipeline, PipelineConfig, StreamOutcome,
};
use crate::staticfilter::{calibrate_reference, save_reference};
use crate::synth::{canonical_geometry, generate_scenes, GenerateOptions, OracleLabelRules};

/// Incoming-traffic intensity estimation from road frames.
#[derive(Debug, Parser)]
#[command(name = "inflow", version, disable_help_subcommand = true)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the zero-traffic reference from an empty-road frame.
    Calibrate(CalibrateArgs),
    /// Generate a synthetic labeled dataset directory.
    Gen(GenArgs),
    /// Train a model from a labeled manifest and report accuracy.
    Train(TrainArgs),
    /// Evaluate a saved model against a labeled manifest.
    Eval(EvalArgs),
    /// Score frames through the full pipeline, one record per line.
    Infer(InferArgs),
    /// Measure per-stage latency over a frame directory.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Empty-road frame (.ppm or .pgm).
    #[arg(long)]
    frame: PathBuf,
    /// Reference output path; the metadata sidecar lands next to it.
    #[arg(long)]
    out: PathBuf,
    /// Pipeline config whose edge parameters to calibrate against.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gaussian sigma override.
    #[arg(long)]
    sigma: Option<f64>,
    /// Weak-edge threshold override.
    #[arg(long)]
    low: Option<f64>,
    /// Strong-edge threshold override.
    #[arg(long)]
    high: Option<f64>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Output directory; must not already exist.
    #[arg(long)]
    out: PathBuf,
    /// Number of scenes.
    #[arg(long, default_value_t = 320)]
    count: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Frame width in pixels.
    #[arg(long, default_value_t = 320)]
    width: u32,
    /// Frame height in pixels.
    #[arg(long, default_value_t = 240)]
    height: u32,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Labeled manifest (one record per line).
    #[arg(long)]
    manifest: PathBuf,
    /// Where to write the trained model.
    #[arg(long, default_value = "model.bin")]
    model_out: PathBuf,
    /// Write the accuracy report here instead of stdout.
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Pipeline config for records that carry an image path but no
    /// features.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training fraction of the split.
    #[arg(long)]
    ratio: Option<f64>,
    /// Seed for weight init, shuffling and the split.
    #[arg(long)]
    seed: Option<u64>,
    /// Gradient-descent step size.
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Upper bound on training epochs.
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Stop early when epoch training loss reaches this value.
    #[arg(long)]
    target_loss: Option<f64>,
    /// Samples per gradient step.
    #[arg(long)]
    batch_size: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Labeled manifest to score.
    #[arg(long)]
    manifest: PathBuf,
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Pipeline config for records that carry an image path but no
    /// features.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the accuracy report here instead of stdout.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InferArgs {
    /// Pipeline config naming the reference and model.
    #[arg(long)]
    config: PathBuf,
    /// Directory of frames (.ppm/.pgm), scored in name order.
    #[arg(long, conflicts_with = "frame", required_unless_present = "frame")]
    frames: Option<PathBuf>,
    /// Explicit frame paths, scored in the given order.
    #[arg(conflicts_with = "frames")]
    frame: Vec<PathBuf>,
    /// Write records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Pipeline config naming the reference and model.
    #[arg(long)]
    config: PathBuf,
    /// Directory of frames to time.
    #[arg(long)]
    frames: PathBuf,
    /// Number of passes over the frame set.
    #[arg(long, default_value_t = 1)]
    passes: usize,
}

/// Parses arguments from the process environment and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Infer(args) => cmd_infer(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Runs `write` against a temporary sibling of `path`, then renames the
/// result into place.
fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let tmp = temp_sibling(path);
    match write(&tmp) {
        Ok(()) => fs::rename(&tmp, path).map_err(|e| Error::io(path, e)),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".partial-{}", std::process::id()));
    path.with_file_name(name)
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let mut canny = match &args.config {
        Some(path) => PipelineConfig::load(path)?.canny,
        None => CannyParams::default(),
    };
    if let Some(sigma) = args.sigma {
        canny.gaussian_sigma = sigma;
    }
    if let Some(low) = args.low {
        canny.low_threshold = low;
    }
    if let Some(high) = args.high {
        canny.high_threshold = high;
    }
    canny.validate()?;

    let frame = read_frame(&args.frame)?;
    let capture_id = args.frame.display().to_string();
    let reference = calibrate_reference(&frame, &canny, capture_id)?;

    // Both files go through temp names; the sidecar is derived from the
    // temp reference name, so the pair renames consistently.
    let tmp = temp_sibling(&args.out);
    save_reference(&tmp, &reference, &canny)?;
    let tmp_sidecar = crate::staticfilter::sidecar_path(&tmp);
    let final_sidecar = crate::staticfilter::sidecar_path(&args.out);
    fs::rename(&tmp, &args.out).map_err(|e| Error::io(&args.out, e))?;
    fs::rename(&tmp_sidecar, &final_sidecar).map_err(|e| Error::io(&final_sidecar, e))?;
    println!(
        "reference written to {} ({} edge pixels)",
        args.out.display(),
        reference.edges.count()
    );
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    if args.out.exists() {
        return Err(Error::InvalidParam(format!(
            "{} already exists; choose a fresh output directory",
            args.out.display()
        )));
    }
    let opts = GenerateOptions {
        width: args.width,
        height: args.height,
        ..GenerateOptions::default()
    };
    let rules = OracleLabelRules::default();
    let scenes = generate_scenes(args.count, &rules, args.seed, &opts)?;
    let reference = crate::synth::generator_reference(&opts)?;

    let staging = temp_sibling(&args.out);
    let build = || -> Result<()> {
        let frames_dir = staging.join("frames");
        fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
        let mut records = Vec::with_capacity(scenes.len());
        for (i, scene) in scenes.iter().enumerate() {
            let name = format!("frames/frame_{i:04}.ppm");
            crate::imaging::pnm::write_ppm(&staging.join(&name), &scene.image)?;
            records.push(ManifestRecord {
                image: Some(name),
                features: Some(scene.features),
                label: scene.label,
                tag: Some(scene.tag.clone()),
            });
        }
        write_manifest(&staging.join("manifest.ndjson"), &records)?;
        save_reference(&staging.join("reference.pgm"), &reference, &opts.canny)?;
        let cfg = PipelineConfig {
            canny: opts.canny,
            geometry: canonical_geometry(args.width, args.height),
            filter: opts.filter,
            reference: PathBuf::from("reference.pgm"),
            model: PathBuf::from("model.bin"),
            parallel: true,
        };
        cfg.save(&staging.join("pipeline.toml"))
    };
    match build() {
        Ok(()) => {
            fs::rename(&staging, &args.out).map_err(|e| Error::io(&args.out, e))?;
            println!(
                "{} scenes written to {} (train a model with: inflow train --manifest {}/manifest.ndjson)",
                scenes.len(),
                args.out.display(),
                args.out.display()
            );
            Ok(())
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}

/// Turns manifest records into samples, running the extractor on
/// image-only records. `base` is the manifest's directory.
fn resolve_dataset(
    records: &[ManifestRecord],
    base: &Path,
    extractor: Option<&FeatureExtractor>,
) -> Result<Dataset> {
    if records.iter().all(|r| r.features.is_some()) {
        return records_to_dataset(records);
    }
    let extractor = extractor.ok_or_else(|| {
        Error::Dataset(
            "manifest has image-only records; pass --config so their features can be computed"
                .into(),
        )
    })?;
    let mut samples = Vec::with_capacity(records.len());
    for (idx, record) in records.iter().enumerate() {
        let features = match record.features {
            Some(f) => f,
            None => {
                let image = record.image.as_ref().ok_or_else(|| {
                    Error::Dataset(format!("record {idx} has neither image nor features"))
                })?;
                let frame = read_frame(&base.join(image))?;
                extractor.counts(&frame)?.into()
            }
        };
        let mut sample = LabeledSample::new(features, record.label);
        sample.tag = record.tag.clone();
        samples.push(sample);
    }
    Ok(Dataset::new(samples))
}

fn load_extractor(config: &Option<PathBuf>) -> Result<Option<FeatureExtractor>> {
    match config {
        Some(path) => {
            let cfg = PipelineConfig::load(path)?;
            Ok(Some(FeatureExtractor::from_config(&cfg)?))
        }
        None => Ok(None),
    }
}

fn emit_report(report: &mlp::AccuracyReport, out: &Option<PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Dataset(format!("report serialization: {e}")))?;
    match out {
        Some(path) => write_atomic(path, |tmp| {
            fs::write(tmp, format!("{json}\n")).map_err(|e| Error::io(tmp, e))
        }),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut cfg = TrainConfig::default();
    if let Some(ratio) = args.ratio {
        cfg.split_ratio = ratio;
    }
    if let Some(seed) = args.seed {
        cfg.rng_seed = seed;
    }
    if let Some(lr) = args.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(epochs) = args.max_epochs {
        cfg.max_epochs = epochs;
    }
    if let Some(loss) = args.target_loss {
        cfg.target_loss = loss;
    }
    if let Some(batch) = args.batch_size {
        cfg.batch_size = batch;
    }
    cfg.validate()?;

    let records = read_manifest(&args.manifest)?;
    let base = args.manifest.parent().unwrap_or_else(|| Path::new("."));
    let extractor = load_extractor(&args.config)?;
    let data = resolve_dataset(&records, base, extractor.as_ref())?;

    let (train_set, test_set) = mlp::split_dataset(&data, cfg.split_ratio, cfg.rng_seed)?;
    let model = mlp::train(&train_set, &cfg)?;
    let report = mlp::evaluate(&model, &test_set)?;

    write_atomic(&args.model_out, |tmp| mlp::save_model(tmp, &model))?;
    eprintln!(
        "model written to {} ({} train / {} held-out samples)",
        args.model_out.display(),
        train_set.len(),
        test_set.len()
    );
    emit_report(&report, &args.report_out)
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let model = mlp::load_model(&args.model)?;
    let records = read_manifest(&args.manifest)?;
    let base = args.manifest.parent().unwrap_or_else(|| Path::new("."));
    let extractor = load_extractor(&args.config)?;
    let data = resolve_dataset(&records, base, extractor.as_ref())?;
    let report = mlp::evaluate(&model, &data)?;
    emit_report(&report, &args.report_out)
}

fn cmd_infer(args: InferArgs) -> Result<()> {
    let pipeline = Pipeline::load(&args.config)?;
    let source = match (&args.frames, &args.frame) {
        (Some(dir), _) => FrameSource::Directory(dir.clone()),
        (None, paths) => FrameSource::Paths(paths.clone()),
    };
    let outcome = pipeline.run_stream(&source)?;
    let mut lines = String::new();
    for record in &outcome.records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Dataset(format!("record serialization: {e}")))?;
        lines.push_str(&line);
        lines.push('\n');
    }
    match &args.out {
        Some(path) => write_atomic(path, |tmp| {
            fs::write(tmp, &lines).map_err(|e| Error::io(tmp, e))
        })?,
        None => print!("{lines}"),
    }
    let errors = outcome.records.iter().filter(|r| r.error.is_some()).count();
    if errors > 0 {
        eprintln!("{errors} of {} frames failed", outcome.records.len());
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.passes == 0 {
        return Err(Error::InvalidParam("need at least one pass".into()));
    }
    let pipeline = Pipeline::load(&args.config)?;
    let source = FrameSource::Directory(args.frames.clone());

    let mut passes: Vec<StreamOutcome> = Vec::with_capacity(args.passes);
    for _ in 0..args.passes {
        passes.push(pipeline.run_stream(&source)?);
    }
    let first = &passes[0];
    if first.records.is_empty() {
        return Err(Error::InvalidParam(format!(
            "no frames found in {}",
            args.frames.display()
        )));
    }
    if let Some(bad) = first.records.iter().find(|r| r.error.is_some()) {
        return Err(Error::InvalidParam(format!(
            "cannot benchmark over failing frames: {} ({})",
            bad.frame,
            bad.error.as_deref().unwrap_or("unknown")
        )));
    }

    // The same frame set must score identically on every pass.
    for pass in &passes[1..] {
        for (a, b) in first.records.iter().zip(&pass.records) {
            let same = a.frame == b.frame
                && a.counts == b.counts
                && a.estimate.map(f64::to_bits) == b.estimate.map(f64::to_bits);
            if !same {
                return Err(Error::InvalidParam(format!(
                    "nondeterministic estimate for {} across passes",
                    a.frame
                )));
            }
        }
    }

    let n_frames = first.records.len();
    let stem = |record: &crate::pipeline::FrameRecord| -> String {
        Path::new(&record.frame)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| record.frame.clone())
    };
    let headers: Vec<String> = first.records.iter().map(stem).collect();
    let col = headers.iter().map(|h| h.len()).max().unwrap_or(10).max(10) + 2;

    type StagePick = fn(&crate::pipeline::FrameTiming) -> f64;
    // Mean across passes, per frame and stage.
    let frame_mean = |f: usize, pick: StagePick| -> f64 {
        passes
            .iter()
            .map(|p| pick(&p.report.frames[f]))
            .sum::<f64>()
            / args.passes as f64
    };

    print!("{:<16}", "stage");
    for h in &headers {
        print!("{h:>col$}");
    }
    println!("{:>col$}", "mean");
    let stages: [(&str, StagePick); 4] = [
        ("ingest", |t| t.ingest_seconds),
        ("edge_detection", |t| t.edge_detection_seconds),
        ("dnn_processing", |t| t.dnn_processing_seconds),
        ("total", |t| t.total_seconds),
    ];
    for (name, pick) in stages {
        print!("{name:<16}");
        let mut sum = 0.0;
        for f in 0..n_frames {
            let v = frame_mean(f, pick);
            sum += v;
            print!("{v:>col$.4}");
        }
        println!("{:>col$.4}", sum / n_frames as f64);
    }

    let mean_total = (0..n_frames).map(|f| frame_mean(f, |t| t.total_seconds)).sum::<f64>()
        / n_frames as f64;
    println!("deterministic_across_passes: true");
    println!("mean_total_seconds: {mean_total:.6}");
    Ok(())
}
