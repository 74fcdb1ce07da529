//! Near/mid/far partition of the road region and per-zone edge-pixel
//! counting.
//!
//! The road is a single polygon in image coordinates; each zone is the
//! intersection of that polygon with a half-open band of image rows. The
//! camera looks down-road, so the near zone has the largest row indices
//! and the far zone the smallest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::EdgeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Near,
    Mid,
    Far,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Near, Zone::Mid, Zone::Far];
}

impl std::fmt::Display for Zone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Zone::Near => write!(f, "near"),
            Zone::Mid => write!(f, "mid"),
            Zone::Far => write!(f, "far"),
        }
    }
}

/// Road polygon plus the three disjoint row bands, each `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneGeometry {
    /// Road region vertices in image coordinates, in drawing order.
    pub road_polygon: Vec<[f64; 2]>,
    pub near_band: [u32; 2],
    pub mid_band: [u32; 2],
    pub far_band: [u32; 2],
}

impl ZoneGeometry {
    pub fn band(&self, zone: Zone) -> [u32; 2] {
        match zone {
            Zone::Near => self.near_band,
            Zone::Mid => self.mid_band,
            Zone::Far => self.far_band,
        }
    }

    /// Checks polygon arity, band ordering and band disjointness.
    ///
    /// Depth order is enforced: the far band sits above the mid band which
    /// sits above the near band (rows grow downward, toward the camera).
    pub fn validate(&self) -> Result<()> {
        if self.road_polygon.len() < 3 {
            return Err(Error::Geometry(format!(
                "road polygon needs at least 3 vertices, got {}",
                self.road_polygon.len()
            )));
        }
        for band in [self.near_band, self.mid_band, self.far_band] {
            if band[0] > band[1] {
                return Err(Error::Geometry(format!(
                    "band rows out of order: [{}, {})",
                    band[0], band[1]
                )));
            }
        }
        if self.far_band[1] > self.mid_band[0] || self.mid_band[1] > self.near_band[0] {
            return Err(Error::Geometry(format!(
                "bands must be disjoint and ordered far {:?} < mid {:?} < near {:?}",
                self.far_band, self.mid_band, self.near_band
            )));
        }
        Ok(())
    }

    /// Checks that every vertex lies within a `width` x `height` frame.
    pub fn check_bounds(&self, width: u32, height: u32) -> Result<()> {
        for &[x, y] in &self.road_polygon {
            if !(0.0..=width as f64).contains(&x) || !(0.0..=height as f64).contains(&y) {
                return Err(Error::Geometry(format!(
                    "vertex ({x}, {y}) outside {width}x{height} frame"
                )));
            }
        }
        Ok(())
    }
}

/// Per-zone edge-pixel counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneCounts {
    pub near: u32,
    pub mid: u32,
    pub far: u32,
}

impl ZoneCounts {
    pub fn get(&self, zone: Zone) -> u32 {
        match zone {
            Zone::Near => self.near,
            Zone::Mid => self.mid,
            Zone::Far => self.far,
        }
    }
}

/// Even-odd point-in-polygon test on a pixel center.
pub(crate) fn center_in_polygon(polygon: &[[f64; 2]], px: f64, py: f64) -> bool {
    let mut inside = false;
    let mut j = polygon.len() - 1;
    for i in 0..polygon.len() {
        let [xi, yi] = polygon[i];
        let [xj, yj] = polygon[j];
        if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Boolean mask of one zone: true where the pixel center lies inside the
/// road polygon (even-odd rule) and within the zone's row band.
pub fn zone_mask(geom: &ZoneGeometry, zone: Zone, width: u32, height: u32) -> Result<EdgeMap> {
    geom.validate()?;
    geom.check_bounds(width, height)?;
    let mut mask = EdgeMap::new(width, height)?;
    let [row_start, row_end] = geom.band(zone);
    let row_end = row_end.min(height);
    for y in row_start..row_end {
        let py = y as f64 + 0.5;
        for x in 0..width {
            if center_in_polygon(&geom.road_polygon, x as f64 + 0.5, py) {
                mask.set(x, y, true);
            }
        }
    }
    Ok(mask)
}

/// Counts edge pixels inside each zone.
///
/// Bands are disjoint, so a pixel contributes to at most one zone.
pub fn count_zone_pixels(edges: &EdgeMap, geom: &ZoneGeometry) -> Result<ZoneCounts> {
    geom.validate()?;
    geom.check_bounds(edges.width(), edges.height())?;
    let mut counts = ZoneCounts::default();
    for zone in Zone::ALL {
        let mut n = 0u32;
        let [row_start, row_end] = geom.band(zone);
        let row_end = row_end.min(edges.height());
        for y in row_start..row_end {
            let py = y as f64 + 0.5;
            for x in 0..edges.width() {
                if edges.get(x, y) && center_in_polygon(&geom.road_polygon, x as f64 + 0.5, py) {
                    n += 1;
                }
            }
        }
        match zone {
            Zone::Near => counts.near = n,
            Zone::Mid => counts.mid = n,
            Zone::Far => counts.far = n,
        }
    }
    Ok(counts)
}
