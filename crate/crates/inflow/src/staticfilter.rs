//! Removal of non-vehicular edge pixels by comparison against a stored
//! zero-traffic reference.
//!
//! A runtime edge pixel is genuine only where the reference is black and
//! the runtime map is white; every other combination is discarded. In
//! tolerant mode a pixel is additionally suppressed when any reference
//! edge lies within the configured kernel neighborhood, which guards
//! against sub-pixel camera shift re-exposing static road marks.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{canny, pnm, to_grayscale, CannyParams, EdgeMap, RgbImage};
use crate::zones::{count_zone_pixels, ZoneCounts, ZoneGeometry};

/// Edge map of the empty road, the source of static (non-vehicular) edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroTrafficReference {
    pub edges: EdgeMap,
    /// Opaque provenance string recorded at calibration time.
    pub capture_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Pointwise reference comparison only.
    Strict,
    /// Also suppress pixels near any reference edge.
    Tolerant,
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterMode::Strict => write!(f, "strict"),
            FilterMode::Tolerant => write!(f, "tolerant"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterParams {
    pub kernel_radius: u32,
    pub mode: FilterMode,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            kernel_radius: 1,
            mode: FilterMode::Tolerant,
        }
    }
}

impl FilterParams {
    /// Neighborhood radius actually applied: strict mode ignores the
    /// configured radius.
    pub fn effective_radius(&self) -> u32 {
        match self.mode {
            FilterMode::Strict => 0,
            FilterMode::Tolerant => self.kernel_radius,
        }
    }
}

fn check_same_dims(real: &EdgeMap, reference: &EdgeMap) -> Result<()> {
    if !real.same_dims(reference) {
        return Err(Error::DimensionMismatch {
            expected_width: reference.width(),
            expected_height: reference.height(),
            width: real.width(),
            height: real.height(),
        });
    }
    Ok(())
}

/// Marks every pixel with a reference edge within Chebyshev distance
/// `radius`. Radius 0 returns the reference itself.
pub fn suppression_mask(reference: &EdgeMap, radius: u32) -> EdgeMap {
    if radius == 0 {
        return reference.clone();
    }
    let (w, h) = (reference.width() as i64, reference.height() as i64);
    let r = radius as i64;
    let mut out = EdgeMap::new(reference.width(), reference.height()).unwrap();
    for y in 0..h {
        for x in 0..w {
            if !reference.get(x as u32, y as u32) {
                continue;
            }
            for ny in (y - r).max(0)..=(y + r).min(h - 1) {
                for nx in (x - r).max(0)..=(x + r).min(w - 1) {
                    out.set(nx as u32, ny as u32, true);
                }
            }
        }
    }
    out
}

/// Keeps only the edge pixels that are white in the runtime map and black
/// in the reference (tolerant mode: black in the whole reference
/// neighborhood).
pub fn filter_static_edges(
    real: &EdgeMap,
    reference: &ZeroTrafficReference,
    params: &FilterParams,
) -> Result<EdgeMap> {
    check_same_dims(real, &reference.edges)?;
    let suppress = suppression_mask(&reference.edges, params.effective_radius());
    let data: Vec<bool> = real
        .data()
        .iter()
        .zip(suppress.data())
        .map(|(&rt, &sup)| rt && !sup)
        .collect();
    EdgeMap::from_raw(real.width(), real.height(), data)
}

/// Fused filter-and-count for the latency path. Equal to
/// `count_zone_pixels(filter_static_edges(real, reference, params), geom)`
/// without materializing the filtered map.
pub fn count_filtered_zone_pixels(
    real: &EdgeMap,
    reference: &ZeroTrafficReference,
    geom: &ZoneGeometry,
    params: &FilterParams,
) -> Result<ZoneCounts> {
    check_same_dims(real, &reference.edges)?;
    geom.validate()?;
    geom.check_bounds(real.width(), real.height())?;
    let suppress = suppression_mask(&reference.edges, params.effective_radius());
    let filtered: Vec<bool> = real
        .data()
        .iter()
        .zip(suppress.data())
        .map(|(&rt, &sup)| rt && !sup)
        .collect();
    count_zone_pixels(
        &EdgeMap::from_raw(real.width(), real.height(), filtered)?,
        geom,
    )
}

/// Runs the Canny chain on an empty-road frame to build the reference,
/// using the same parameters as the runtime pipeline.
pub fn calibrate_reference(
    empty_frame: &RgbImage,
    params: &CannyParams,
    capture_id: impl Into<String>,
) -> Result<ZeroTrafficReference> {
    let gray = to_grayscale(empty_frame);
    let edges = canny(&gray, params)?;
    Ok(ZeroTrafficReference {
        edges,
        capture_id: capture_id.into(),
    })
}

/// Sidecar metadata stored next to the reference PGM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeta {
    pub capture_id: String,
    pub width: u32,
    pub height: u32,
    pub canny: CannyParams,
}

/// Path of the sidecar file for a reference stored at `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".toml");
    PathBuf::from(os)
}

/// Writes the reference edge map as PGM plus its sidecar metadata file.
pub fn save_reference(
    path: &Path,
    reference: &ZeroTrafficReference,
    canny_params: &CannyParams,
) -> Result<()> {
    pnm::write_edge_pgm(path, &reference.edges)?;
    let meta = ReferenceMeta {
        capture_id: reference.capture_id.clone(),
        width: reference.edges.width(),
        height: reference.edges.height(),
        canny: *canny_params,
    };
    let text = toml::to_string_pretty(&meta)
        .map_err(|e| Error::Config(format!("serializing reference sidecar: {e}")))?;
    let sidecar = sidecar_path(path);
    fs::write(&sidecar, text).map_err(|e| Error::io(sidecar, e))
}

/// Loads a reference edge map and its sidecar, checking that the recorded
/// dimensions match the raster.
pub fn load_reference(path: &Path) -> Result<(ZeroTrafficReference, ReferenceMeta)> {
    let edges = pnm::read_edge_pgm(path)?;
    let sidecar = sidecar_path(path);
    let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let meta: ReferenceMeta = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", sidecar.display())))?;
    if meta.width != edges.width() || meta.height != edges.height() {
        return Err(Error::DimensionMismatch {
            expected_width: meta.width,
            expected_height: meta.height,
            width: edges.width(),
            height: edges.height(),
        });
    }
    Ok((
        ZeroTrafficReference {
            edges,
            capture_id: meta.capture_id.clone(),
        },
        meta,
    ))
}
