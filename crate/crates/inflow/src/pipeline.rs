//! End-to-end orchestration: frame in, grayscale, edge extraction,
//! static-edge removal, zone counting, network forward pass, intensity
//! out, with per-stage wall-clock instrumentation.
//!
//! Stage attribution: `edge_detection` covers grayscale conversion, the
//! edge detector, static filtering and zone counting; `dnn_processing`
//! is the forward pass; `ingest` is file read and decode when frames
//! come from disk. Display hardware is out of scope, so no display
//! stage exists.
//!
//! One frame is in flight at a time. With `parallel` set, the fused
//! filter-and-count step fans out across rows; every row contributes an
//! integer partial sum, so the reduction order cannot change the result
//! and parallel output is bit-identical to serial.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::pnm::{read_pgm, read_ppm};
use crate::imaging::{canny, to_grayscale, CannyParams, EdgeMap, RgbImage};
use crate::mlp::{load_model, IntensityEstimate, MlpModel};
use crate::staticfilter::{
    load_reference, suppression_mask, FilterParams, ZeroTrafficReference,
};
use crate::zones::{zone_mask, Zone, ZoneCounts, ZoneGeometry};

/// On-disk pipeline description. `reference` and `model` are stored
/// relative to the config file and resolved at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub canny: CannyParams,
    pub geometry: ZoneGeometry,
    pub filter: FilterParams,
    pub reference: PathBuf,
    pub model: PathBuf,
    pub parallel: bool,
}

impl PipelineConfig {
    /// Parses the config and resolves its resource paths against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if cfg.reference.is_relative() {
            cfg.reference = base.join(&cfg.reference);
        }
        if cfg.model.is_relative() {
            cfg.model = base.join(&cfg.model);
        }
        Ok(cfg)
    }

    /// Writes the config as-is; callers keep resource paths relative so
    /// the directory stays relocatable.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serialize: {e}")))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Wall-clock seconds per stage for one frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameTiming {
    pub ingest_seconds: f64,
    pub edge_detection_seconds: f64,
    pub dnn_processing_seconds: f64,
    pub total_seconds: f64,
}

/// Per-frame timings plus aggregate views.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub frames: Vec<FrameTiming>,
}

impl TimingReport {
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    fn fold(&self, pick: fn(&FrameTiming) -> f64, init: f64, f: fn(f64, f64) -> f64) -> f64 {
        self.frames.iter().map(pick).fold(init, f)
    }

    pub fn mean(&self, pick: fn(&FrameTiming) -> f64) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        self.fold(pick, 0.0, |a, b| a + b) / self.frames.len() as f64
    }

    pub fn min(&self, pick: fn(&FrameTiming) -> f64) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        self.fold(pick, f64::INFINITY, f64::min)
    }

    pub fn max(&self, pick: fn(&FrameTiming) -> f64) -> f64 {
        self.fold(pick, 0.0, f64::max)
    }

    pub fn mean_total(&self) -> f64 {
        self.mean(|t| t.total_seconds)
    }
}

/// Result of one frame pass.
#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub counts: ZoneCounts,
    pub estimate: IntensityEstimate,
    pub timing: FrameTiming,
}

/// One line of stream output: either a scored frame or an error entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<ZoneCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_distribution: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timing: FrameTiming,
}

/// Stream results: one record per input frame plus aggregate timings
/// over the frames that scored successfully.
#[derive(Debug, Clone, Default)]
pub struct StreamOutcome {
    pub records: Vec<FrameRecord>,
    pub report: TimingReport,
}

/// The front half of the pipeline: edge extraction, static filtering
/// and zone counting. Usable without a trained model, which is how
/// training resolves image-only manifest records.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    canny_params: CannyParams,
    geometry: ZoneGeometry,
    filter: FilterParams,
    parallel: bool,
    /// Precomputed dilation of the reference; pixels to drop.
    suppression: EdgeMap,
    /// Precomputed band-and-polygon masks, indexed like `Zone::ALL`.
    zone_masks: [EdgeMap; 3],
}

impl FeatureExtractor {
    /// Builds an extractor from in-memory parts, validating that
    /// geometry and reference agree.
    pub fn assemble(
        canny_params: CannyParams,
        geometry: ZoneGeometry,
        filter: FilterParams,
        reference: ZeroTrafficReference,
        parallel: bool,
    ) -> Result<Self> {
        canny_params.validate()?;
        geometry.validate()?;
        let (w, h) = (reference.edges.width(), reference.edges.height());
        geometry.check_bounds(w, h)?;
        let suppression = suppression_mask(&reference.edges, filter.effective_radius());
        let zone_masks = [
            zone_mask(&geometry, Zone::Near, w, h)?,
            zone_mask(&geometry, Zone::Mid, w, h)?,
            zone_mask(&geometry, Zone::Far, w, h)?,
        ];
        Ok(Self {
            canny_params,
            geometry,
            filter,
            parallel,
            suppression,
            zone_masks,
        })
    }

    /// Loads the reference a config names and cross-checks calibration.
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self> {
        let (reference, meta) = load_reference(&cfg.reference)?;
        if meta.canny != cfg.canny {
            return Err(Error::Config(format!(
                "reference was calibrated with {:?} but the pipeline uses {:?}; recalibrate",
                meta.canny, cfg.canny
            )));
        }
        Self::assemble(cfg.canny, cfg.geometry.clone(), cfg.filter, reference, cfg.parallel)
    }

    pub fn frame_width(&self) -> u32 {
        self.suppression.width()
    }

    pub fn frame_height(&self) -> u32 {
        self.suppression.height()
    }

    pub fn geometry(&self) -> &ZoneGeometry {
        &self.geometry
    }

    pub fn canny_params(&self) -> &CannyParams {
        &self.canny_params
    }

    pub fn filter_params(&self) -> &FilterParams {
        &self.filter
    }

    /// Fused static filter and zone count against the precomputed masks.
    fn count_edges(&self, edges: &EdgeMap) -> ZoneCounts {
        let w = edges.width() as usize;
        let real = edges.data();
        let sup = self.suppression.data();
        let row_counts = |y: usize| -> [u32; 3] {
            let row = y * w;
            let mut acc = [0u32; 3];
            for x in 0..w {
                let i = row + x;
                if real[i] && !sup[i] {
                    for (z, mask) in self.zone_masks.iter().enumerate() {
                        if mask.data()[i] {
                            acc[z] += 1;
                        }
                    }
                }
            }
            acc
        };
        let h = edges.height() as usize;
        let acc = if self.parallel {
            (0..h)
                .into_par_iter()
                .map(row_counts)
                .reduce(|| [0u32; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
        } else {
            (0..h).map(row_counts).fold([0u32; 3], |a, b| {
                [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
            })
        };
        ZoneCounts {
            near: acc[0],
            mid: acc[1],
            far: acc[2],
        }
    }

    /// Per-zone vehicular edge-pixel counts for one frame.
    pub fn counts(&self, frame: &RgbImage) -> Result<ZoneCounts> {
        if frame.width() != self.frame_width() || frame.height() != self.frame_height() {
            return Err(Error::DimensionMismatch {
                expected_width: self.frame_width(),
                expected_height: self.frame_height(),
                width: frame.width(),
                height: frame.height(),
            });
        }
        let gray = to_grayscale(frame);
        let edges = canny(&gray, &self.canny_params)?;
        Ok(self.count_edges(&edges))
    }
}

/// A loaded, validated pipeline ready to score frames.
#[derive(Debug, Clone)]
pub struct Pipeline {
    extractor: FeatureExtractor,
    model: MlpModel,
}

impl Pipeline {
    /// Loads every resource a config names and cross-checks dimensions.
    pub fn load(config_path: &Path) -> Result<Self> {
        let cfg = PipelineConfig::load(config_path)?;
        let extractor = FeatureExtractor::from_config(&cfg)?;
        let model = load_model(&cfg.model)?;
        Ok(Self { extractor, model })
    }

    /// Builds a pipeline from in-memory parts, validating that geometry
    /// and reference agree.
    pub fn assemble(
        canny_params: CannyParams,
        geometry: ZoneGeometry,
        filter: FilterParams,
        reference: ZeroTrafficReference,
        model: MlpModel,
        parallel: bool,
    ) -> Result<Self> {
        let extractor =
            FeatureExtractor::assemble(canny_params, geometry, filter, reference, parallel)?;
        Ok(Self { extractor, model })
    }

    pub fn extractor(&self) -> &FeatureExtractor {
        &self.extractor
    }

    pub fn frame_width(&self) -> u32 {
        self.extractor.frame_width()
    }

    pub fn frame_height(&self) -> u32 {
        self.extractor.frame_height()
    }

    pub fn geometry(&self) -> &ZoneGeometry {
        self.extractor.geometry()
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }

    /// Scores one in-memory frame. Ingest time is zero here; streaming
    /// wrappers measure their own read and decode.
    pub fn run_frame(&self, frame: &RgbImage) -> Result<FrameOutput> {
        let started = Instant::now();

        let edge_started = Instant::now();
        let counts = self.extractor.counts(frame)?;
        let edge_detection_seconds = edge_started.elapsed().as_secs_f64();

        let dnn_started = Instant::now();
        let estimate = self.model.forward(&counts.into());
        let dnn_processing_seconds = dnn_started.elapsed().as_secs_f64();

        Ok(FrameOutput {
            counts,
            estimate,
            timing: FrameTiming {
                ingest_seconds: 0.0,
                edge_detection_seconds,
                dnn_processing_seconds,
                total_seconds: started.elapsed().as_secs_f64(),
            },
        })
    }

    /// Scores every frame a source yields, in order. Unreadable or
    /// mismatched frames become error records and the stream continues;
    /// the aggregate report covers the frames that scored.
    pub fn run_stream(&self, source: &FrameSource) -> Result<StreamOutcome> {
        let paths = source.resolve()?;
        let mut outcome = StreamOutcome::default();
        for path in paths {
            let id = path.display().to_string();
            let ingest_started = Instant::now();
            let frame = read_frame(&path);
            let ingest_seconds = ingest_started.elapsed().as_secs_f64();
            let result = frame.and_then(|f| self.run_frame(&f));
            match result {
                Ok(mut output) => {
                    output.timing.ingest_seconds = ingest_seconds;
                    output.timing.total_seconds += ingest_seconds;
                    outcome.records.push(FrameRecord {
                        frame: id,
                        counts: Some(output.counts),
                        class_distribution: Some(output.estimate.class_distribution),
                        estimate: Some(output.estimate.value),
                        error: None,
                        timing: output.timing,
                    });
                    outcome.report.frames.push(output.timing);
                }
                Err(e) => outcome.records.push(FrameRecord {
                    frame: id,
                    counts: None,
                    class_distribution: None,
                    estimate: None,
                    error: Some(e.to_string()),
                    timing: FrameTiming {
                        ingest_seconds,
                        total_seconds: ingest_seconds,
                        ..FrameTiming::default()
                    },
                }),
            }
        }
        Ok(outcome)
    }
}

/// Where a stream's frames come from.
#[derive(Debug, Clone)]
pub enum FrameSource {
    /// Every .ppm/.pgm file in a directory, in name order. Generators
    /// and capture rigs put a sortable index or timestamp in the name.
    Directory(PathBuf),
    /// An explicit path list, scored in the given order.
    Paths(Vec<PathBuf>),
}

impl FrameSource {
    fn resolve(&self) -> Result<Vec<PathBuf>> {
        match self {
            FrameSource::Paths(paths) => Ok(paths.clone()),
            FrameSource::Directory(dir) => {
                let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
                let mut paths: Vec<PathBuf> = entries
                    .filter_map(|entry| entry.ok().map(|e| e.path()))
                    .filter(|p| {
                        matches!(
                            p.extension().and_then(|e| e.to_str()),
                            Some("ppm") | Some("pgm")
                        )
                    })
                    .collect();
                paths.sort();
                Ok(paths)
            }
        }
    }
}

/// Reads a frame image; grayscale files are widened to RGB, which the
/// grayscale stage maps back to the identical values.
pub fn read_frame(path: &Path) -> Result<RgbImage> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("ppm") => read_ppm(path),
        Some("pgm") => {
            let gray = read_pgm(path)?;
            let data = gray.data().iter().flat_map(|&v| [v, v, v]).collect();
            RgbImage::from_raw(gray.width(), gray.height(), data)
        }
        _ => Err(Error::Format {
            format: "frame",
            reason: format!("{}: unsupported extension, expected .ppm or .pgm", path.display()),
        }),
    }
}
