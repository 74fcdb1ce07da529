//! Binary model files.
//!
//! Layout, all little-endian:
//!   8 bytes  magic "INFLOWML"
//!   u32      format version (currently 1)
//!   u32      number of layer sizes (6)
//!   u32 x 6  layer sizes, input first
//!   f64 x 3  feature scale
//!   per dense layer, in order: weights row-major (fan_out x fan_in)
//!   then biases (fan_out), all f64
//! No trailing bytes are allowed.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{MlpModel, LAYER_SIZES};

const MAGIC: &[u8; 8] = b"INFLOWML";
const VERSION: u32 = 1;

/// Serializes a model into the binary layout above.
pub fn encode_model(model: &MlpModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(LAYER_SIZES.len() as u32).to_le_bytes());
    for size in LAYER_SIZES {
        out.extend_from_slice(&(size as u32).to_le_bytes());
    }
    for s in model.feature_scale {
        out.extend_from_slice(&s.to_le_bytes());
    }
    for layer in &model.layers {
        for w in &layer.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for b in &layer.biases {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Model(format!(
                "file truncated while reading {what} ({} bytes left, {n} needed)",
                self.bytes.len() - self.pos
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let b = self.take(8, what)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }
}

/// Parses the binary layout, validating magic, version, architecture and
/// exact length.
pub fn decode_model(bytes: &[u8]) -> Result<MlpModel> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(MAGIC.len(), "magic")?;
    if magic != MAGIC {
        return Err(Error::Model("not a model file (bad magic)".into()));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::Model(format!(
            "unsupported model version {version}, expected {VERSION}"
        )));
    }
    let n_sizes = cur.u32("layer count")? as usize;
    if n_sizes != LAYER_SIZES.len() {
        return Err(Error::Model(format!(
            "expected {} layer sizes, file has {n_sizes}",
            LAYER_SIZES.len()
        )));
    }
    for (i, expected) in LAYER_SIZES.iter().enumerate() {
        let size = cur.u32("layer size")? as usize;
        if size != *expected {
            return Err(Error::Model(format!(
                "layer size {i} is {size}, expected {expected}"
            )));
        }
    }
    let mut model = MlpModel::zeroed();
    let mut scale = [0.0f64; 3];
    for s in &mut scale {
        *s = cur.f64("feature scale")?;
    }
    model.set_feature_scale(scale)?;
    for l in 0..model.num_layers() {
        let (rows, cols) = MlpModel::layer_dims(l);
        for idx in 0..rows * cols {
            model.layers[l].weights[idx] = cur.f64("weights")?;
        }
        for idx in 0..rows {
            model.layers[l].biases[idx] = cur.f64("biases")?;
        }
    }
    if cur.pos != bytes.len() {
        return Err(Error::Model(format!(
            "{} unexpected trailing bytes",
            bytes.len() - cur.pos
        )));
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &MlpModel) -> Result<()> {
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
