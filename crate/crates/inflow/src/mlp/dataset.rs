//! Labeled feature sets and their newline-delimited JSON manifest form.
//!
//! A manifest line carries either precomputed features, an image path to
//! derive them from, or both. Training and evaluation only consume
//! records whose features are resolved.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FeatureVector, IntensityLabel};

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Frame path, relative to the manifest file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    /// Precomputed per-zone counts, if the producer already ran the
    /// edge stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureVector>,
    pub label: IntensityLabel,
    /// Free-form provenance marker, e.g. the generator template name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl ManifestRecord {
    pub fn validate(&self) -> Result<()> {
        if self.image.is_none() && self.features.is_none() {
            return Err(Error::Dataset(
                "manifest record needs an image path or features".into(),
            ));
        }
        Ok(())
    }
}

/// A fully resolved training or evaluation sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: IntensityLabel,
    pub tag: Option<String>,
}

impl LabeledSample {
    pub fn new(features: FeatureVector, label: IntensityLabel) -> Self {
        Self {
            features,
            label,
            tag: None,
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }
}

/// An ordered collection of labeled samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledSample> {
        self.samples.iter()
    }
}

/// Reads a newline-delimited JSON manifest. Blank lines are ignored;
/// malformed lines are an error naming the line number.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ManifestRecord = serde_json::from_str(&line).map_err(|e| {
            Error::Dataset(format!("{}:{}: {e}", path.display(), idx + 1))
        })?;
        record
            .validate()
            .map_err(|e| Error::Dataset(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        records.push(record);
    }
    Ok(records)
}

/// Writes records as one JSON object per line.
pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    for record in records {
        record.validate()?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Dataset(format!("manifest serialization: {e}")))?;
        writeln!(writer, "{line}").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Converts manifest records into an in-memory dataset. Every record
/// must already carry features; image-only records belong to callers
/// that run the edge stage first.
pub fn records_to_dataset(records: &[ManifestRecord]) -> Result<Dataset> {
    let mut samples = Vec::with_capacity(records.len());
    for (idx, record) in records.iter().enumerate() {
        let features = record.features.ok_or_else(|| {
            Error::Dataset(format!(
                "record {idx} has no features; run the edge stage on its image first"
            ))
        })?;
        let mut sample = LabeledSample::new(features, record.label);
        sample.tag = record.tag.clone();
        samples.push(sample);
    }
    Ok(Dataset::new(samples))
}
