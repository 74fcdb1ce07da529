//! The traffic-intensity network: a fixed 3-10-20-10-10-5 feed-forward
//! net mapping the three per-zone edge-pixel counts to an intensity
//! estimate on the 1-5 scale.
//!
//! Hidden layers use the rectifier; the output layer is a softmax over
//! the five intensity classes. The reported estimate is the expected
//! class index under that distribution, which is how fractional values
//! such as 3.7 arise from a five-class head.

mod dataset;
mod io;
mod train;

pub use dataset::{
    read_manifest, records_to_dataset, write_manifest, Dataset, LabeledSample, ManifestRecord,
};
pub use io::{load_model, save_model};
pub use train::{init_model, loss_and_gradients, train, MlpGradients, TrainConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zones::ZoneCounts;

/// Input layer plus four hidden layers plus the five-class output.
pub const LAYER_SIZES: [usize; 6] = [3, 10, 20, 10, 10, 5];

/// Default per-input divisor. 6000 is the near-zone edge-pixel count that
/// a crowd of small vehicles can reach, which makes it a natural scale for
/// all three counts.
pub const DEFAULT_FEATURE_SCALE: [f64; 3] = [6000.0, 6000.0, 6000.0];

/// The three per-zone vehicular edge-pixel counts fed to the network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub near: u32,
    pub mid: u32,
    pub far: u32,
}

impl From<ZoneCounts> for FeatureVector {
    fn from(c: ZoneCounts) -> Self {
        Self {
            near: c.near,
            mid: c.mid,
            far: c.far,
        }
    }
}

impl FeatureVector {
    pub fn as_array(&self) -> [u32; 3] {
        [self.near, self.mid, self.far]
    }

    /// Inputs divided by the model's per-input scale.
    pub fn scaled(&self, scale: &[f64; 3]) -> [f64; 3] {
        [
            self.near as f64 / scale[0],
            self.mid as f64 / scale[1],
            self.far as f64 / scale[2],
        ]
    }
}

/// Expert or oracle intensity label, an integer in 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct IntensityLabel(u8);

impl IntensityLabel {
    pub fn new(level: u8) -> Result<Self> {
        if (1..=5).contains(&level) {
            Ok(Self(level))
        } else {
            Err(Error::InvalidParam(format!(
                "intensity label must be in 1..=5, got {level}"
            )))
        }
    }

    pub fn get(&self) -> u8 {
        self.0
    }

    /// Zero-based class index of this label.
    pub fn class_index(&self) -> usize {
        self.0 as usize - 1
    }
}

impl<'de> Deserialize<'de> for IntensityLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let level = u8::deserialize(d)?;
        IntensityLabel::new(level).map_err(serde::de::Error::custom)
    }
}

/// Network output: the five-class distribution and its expected class
/// index, the continuous intensity value in [1, 5].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityEstimate {
    pub value: f64,
    pub class_distribution: [f64; 5],
}

impl IntensityEstimate {
    /// Expected class index of a distribution over levels 1..=5.
    pub fn from_distribution(class_distribution: [f64; 5]) -> Self {
        let value = class_distribution
            .iter()
            .enumerate()
            .map(|(k, p)| (k + 1) as f64 * p)
            .sum();
        Self {
            value,
            class_distribution,
        }
    }

    /// Nearest discrete level, rounding half up.
    pub fn rounded_level(&self) -> u8 {
        (self.value + 0.5).floor().clamp(1.0, 5.0) as u8
    }
}

/// One dense layer: row-major `fan_out x fan_in` weights plus a bias per
/// output unit.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseLayer {
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: Vec<f64>,
}

/// Weights, biases and input scaling of the 3-10-20-10-10-5 network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) layers: Vec<DenseLayer>,
    pub(crate) feature_scale: [f64; 3],
}

impl MlpModel {
    /// All-zero weights and biases; mostly useful as a construction base.
    pub fn zeroed() -> Self {
        let layers = (0..LAYER_SIZES.len() - 1)
            .map(|l| DenseLayer {
                weights: vec![0.0; LAYER_SIZES[l + 1] * LAYER_SIZES[l]],
                biases: vec![0.0; LAYER_SIZES[l + 1]],
            })
            .collect();
        Self {
            layers,
            feature_scale: DEFAULT_FEATURE_SCALE,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// `(fan_out, fan_in)` of layer `l`.
    pub fn layer_dims(l: usize) -> (usize, usize) {
        (LAYER_SIZES[l + 1], LAYER_SIZES[l])
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        &self.layers[l].weights
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.layers[l].weights
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.layers[l].biases
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.layers[l].biases
    }

    pub fn feature_scale(&self) -> [f64; 3] {
        self.feature_scale
    }

    pub fn set_feature_scale(&mut self, scale: [f64; 3]) -> Result<()> {
        if scale.iter().any(|&s| s <= 0.0 || s.is_nan()) {
            return Err(Error::InvalidParam(format!(
                "feature scale entries must be positive, got {scale:?}"
            )));
        }
        self.feature_scale = scale;
        Ok(())
    }

    /// Forward pass: scaled inputs through four rectified hidden layers
    /// and a softmax output.
    pub fn forward(&self, fv: &FeatureVector) -> IntensityEstimate {
        let scaled = fv.scaled(&self.feature_scale);
        let mut activation: Vec<f64> = scaled.to_vec();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (rows, cols) = Self::layer_dims(l);
            let mut next = Vec::with_capacity(rows);
            for r in 0..rows {
                let mut z = layer.biases[r];
                let row = &layer.weights[r * cols..(r + 1) * cols];
                for (w, a) in row.iter().zip(&activation) {
                    z += w * a;
                }
                next.push(if l < last { z.max(0.0) } else { z });
            }
            activation = next;
        }
        let mut dist = [0.0f64; 5];
        dist.copy_from_slice(&softmax(&activation));
        IntensityEstimate::from_distribution(dist)
    }
}

/// Numerically stable softmax.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Exact-match and one-level accuracy of a model on a labeled set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    /// Test-set size.
    pub n: usize,
    /// Fraction where the rounded estimate equals the label.
    pub exact_rate: f64,
    /// Fraction where the rounded estimate is within one level (includes
    /// exact matches).
    pub within_one_rate: f64,
    /// Mean absolute error of the continuous estimate against the label.
    pub mean_abs_error: f64,
}

/// Scores a model against a labeled test set.
pub fn evaluate(model: &MlpModel, test: &Dataset) -> Result<AccuracyReport> {
    if test.is_empty() {
        return Err(Error::Dataset("cannot evaluate on an empty set".into()));
    }
    let mut exact = 0usize;
    let mut within_one = 0usize;
    let mut abs_err = 0.0f64;
    for sample in test.iter() {
        let estimate = model.forward(&sample.features);
        let rounded = estimate.rounded_level() as i32;
        let label = sample.label.get() as i32;
        if rounded == label {
            exact += 1;
        }
        if (rounded - label).abs() <= 1 {
            within_one += 1;
        }
        abs_err += (estimate.value - label as f64).abs();
    }
    let n = test.len();
    Ok(AccuracyReport {
        n,
        exact_rate: exact as f64 / n as f64,
        within_one_rate: within_one as f64 / n as f64,
        mean_abs_error: abs_err / n as f64,
    })
}

/// Deterministic shuffled split; the first half holds `round(ratio * n)`
/// samples. The halves are disjoint and together exhaust the input.
pub fn split_dataset(data: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParam(format!(
            "split ratio must be strictly between 0 and 1, got {ratio}"
        )));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::Dataset(format!(
            "need at least 2 samples to split, got {n}"
        )));
    }
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let train_len = (ratio * n as f64).round() as usize;
    let train = indices[..train_len]
        .iter()
        .map(|&i| data.samples[i].clone())
        .collect();
    let test = indices[train_len..]
        .iter()
        .map(|&i| data.samples[i].clone())
        .collect();
    Ok((Dataset::new(train), Dataset::new(test)))
}
