//! Deterministic synthetic traffic scenes with a rule-based oracle
//! labeler.
//!
//! Real annotated road imagery is expensive to collect, so the generator
//! draws stylized junction frames: a flat-tone trapezoid road with
//! optional lane marks and vehicles as textured rectangles. Textures give
//! interiors real edges, so larger vehicles produce more edge pixels and
//! the counting front end has a learnable signal.
//!
//! The oracle labeler encodes the expert judgement rules the estimator is
//! trained against:
//!   1. more and bigger vehicles mean higher intensity, with big vehicles
//!      in the near and mid zones weighted hardest;
//!   2. a crowd of small vehicles only in the near zone does not by
//!      itself indicate high intensity (a near-zone count past
//!      `near_small_vehicle_pixel_cap` from small vehicles alone still
//!      caps at level 3);
//!   3. far-zone vehicles are weighted up, since they are incoming;
//!   4. many vehicles in all three zones is level 5, a few small ones in
//!      mid/far only is level 1.
//!
//! The full scoring table lives in [`OracleLabelRules`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{canny, to_grayscale, CannyParams, RgbImage};
use crate::mlp::{Dataset, FeatureVector, IntensityLabel, LabeledSample};
use crate::staticfilter::{
    calibrate_reference, count_filtered_zone_pixels, FilterParams, ZeroTrafficReference,
};
use crate::zones::{center_in_polygon, Zone, ZoneGeometry};

/// Upper bound on vehicles per zone in a valid spec.
pub const MAX_VEHICLES_PER_ZONE: usize = 8;

const BACKGROUND_TONE: u8 = 170;
const LANE_TONE: u8 = 200;
const OUTLINE_TONE: u8 = 15;

/// Vehicle footprint class. Large vehicles render bigger and more
/// textured, so they contribute more edge pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleSize {
    Small,
    Large,
}

/// One vehicle placement inside a zone band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub zone: Zone,
    pub size: VehicleSize,
    /// Lateral position across the zone's usable width, in [0, 1].
    pub lateral_offset: f64,
    /// Position down the zone band, in [0, 1].
    pub depth_offset: f64,
    /// Seed for the body tone and panel texture.
    pub texture_seed: u64,
}

/// Complete description of one synthetic frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub vehicles: Vec<Vehicle>,
    /// Dashed center-line strokes; static scenery for the filter to
    /// remove.
    pub lane_marks: bool,
    /// Flat fill tone of the road surface.
    pub road_tone: u8,
    /// Scene-level seed (currently drives the lane-dash phase).
    pub rng_seed: u64,
}

impl SceneSpec {
    /// A vehicle-free frame, the calibration input for this generator's
    /// scenes.
    pub fn empty(width: u32, height: u32, lane_marks: bool) -> Self {
        Self {
            width,
            height,
            vehicles: Vec::new(),
            lane_marks,
            road_tone: 110,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 {
            return Err(Error::Scene(format!(
                "frame must be at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        for zone in Zone::ALL {
            let n = self.vehicles.iter().filter(|v| v.zone == zone).count();
            if n > MAX_VEHICLES_PER_ZONE {
                return Err(Error::Scene(format!(
                    "{n} vehicles in the {zone} zone exceeds the cap of {MAX_VEHICLES_PER_ZONE}"
                )));
            }
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            for (name, off) in [("lateral", v.lateral_offset), ("depth", v.depth_offset)] {
                if !(0.0..=1.0).contains(&off) {
                    return Err(Error::Scene(format!(
                        "vehicle {i}: {name} offset {off} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Count of vehicles of one size in one zone.
    pub fn count_of(&self, zone: Zone, size: VehicleSize) -> usize {
        self.vehicles
            .iter()
            .filter(|v| v.zone == zone && v.size == size)
            .count()
    }

    /// Count of all vehicles in one zone.
    pub fn zone_total(&self, zone: Zone) -> usize {
        self.vehicles.iter().filter(|v| v.zone == zone).count()
    }
}

/// The documented intensity lookup.
///
/// Each vehicle contributes points by zone and size; the running total
/// maps to a level through `level_thresholds`. Three structural rules sit
/// on top of the score:
///   - level 5 floor: every zone holds at least 2 vehicles and a large
///     one stands in near or mid;
///   - level 1 override: at most 2 vehicles in total, none large, near
///     zone empty;
///   - level 3 cap: small vehicles only, all of them in the near zone
///     (even when their edge-pixel count passes
///     `near_small_vehicle_pixel_cap`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleLabelRules {
    /// Near-zone edge-pixel count that a small-vehicle-only crowd can
    /// reach without raising the label past 3.
    pub near_small_vehicle_pixel_cap: u32,
    /// Points per small vehicle in (near, mid, far). Far is weighted up:
    /// those vehicles are incoming.
    pub small_weights: [u32; 3],
    /// Points per large vehicle in (near, mid, far). Near and mid are
    /// weighted hardest.
    pub large_weights: [u32; 3],
    /// Inclusive score ceilings for levels 1 through 4; beyond the last
    /// is level 5.
    pub level_thresholds: [u32; 4],
}

impl Default for OracleLabelRules {
    fn default() -> Self {
        Self {
            near_small_vehicle_pixel_cap: 6000,
            small_weights: [1, 1, 2],
            large_weights: [4, 4, 3],
            level_thresholds: [2, 5, 9, 13],
        }
    }
}

impl OracleLabelRules {
    pub fn validate(&self) -> Result<()> {
        if self.small_weights.iter().chain(&self.large_weights).any(|&w| w == 0) {
            return Err(Error::InvalidParam(
                "oracle weights must be positive, or adding a vehicle could leave the label flat where the scale expects growth".into(),
            ));
        }
        for pair in self.level_thresholds.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidParam(format!(
                    "level thresholds must be strictly increasing, got {:?}",
                    self.level_thresholds
                )));
            }
        }
        for (s, l) in self.small_weights.iter().zip(&self.large_weights) {
            if l < s {
                return Err(Error::InvalidParam(
                    "a large vehicle must score at least as much as a small one in the same zone"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    fn score(&self, spec: &SceneSpec) -> u32 {
        let mut score = 0;
        for (zi, zone) in Zone::ALL.into_iter().enumerate() {
            score += spec.count_of(zone, VehicleSize::Small) as u32 * self.small_weights[zi];
            score += spec.count_of(zone, VehicleSize::Large) as u32 * self.large_weights[zi];
        }
        score
    }

    fn score_to_level(&self, score: u32) -> u8 {
        for (i, &ceiling) in self.level_thresholds.iter().enumerate() {
            if score <= ceiling {
                return i as u8 + 1;
            }
        }
        5
    }
}

/// Applies the rules table to a scene description.
pub fn oracle_label(spec: &SceneSpec, rules: &OracleLabelRules) -> Result<IntensityLabel> {
    spec.validate()?;
    rules.validate()?;

    let total = spec.vehicles.len();
    let any_large = spec
        .vehicles
        .iter()
        .any(|v| v.size == VehicleSize::Large);
    let large_near_mid = spec.count_of(Zone::Near, VehicleSize::Large)
        + spec.count_of(Zone::Mid, VehicleSize::Large)
        > 0;
    let all_zones_busy = Zone::ALL.into_iter().all(|z| spec.zone_total(z) >= 2);

    if all_zones_busy && large_near_mid {
        return IntensityLabel::new(5);
    }
    if total <= 2 && !any_large && spec.zone_total(Zone::Near) == 0 {
        return IntensityLabel::new(1);
    }

    let mut level = rules.score_to_level(rules.score(spec));
    let near_only_smalls = !spec.vehicles.is_empty()
        && spec
            .vehicles
            .iter()
            .all(|v| v.zone == Zone::Near && v.size == VehicleSize::Small);
    if near_only_smalls {
        level = level.min(3);
    }
    IntensityLabel::new(level)
}

/// The trapezoid road and band split used by every generated scene:
/// far band in [0.15h, 0.4h), mid in [0.4h, 0.7h), near from 0.7h down.
pub fn canonical_geometry(width: u32, height: u32) -> ZoneGeometry {
    let w = width as f64;
    let h = height as f64;
    ZoneGeometry {
        road_polygon: vec![
            [0.05 * w, h],
            [0.38 * w, 0.15 * h],
            [0.62 * w, 0.15 * h],
            [0.95 * w, h],
        ],
        far_band: [(0.15 * h) as u32, (0.4 * h) as u32],
        mid_band: [(0.4 * h) as u32, (0.7 * h) as u32],
        near_band: [(0.7 * h) as u32, height],
    }
}

/// Pixel footprint of a vehicle class in a zone, scaled for perspective.
fn vehicle_extent(zone: Zone, size: VehicleSize, width: u32, height: u32) -> (u32, u32) {
    let w = width as f64;
    let h = height as f64;
    let (fw, fh) = match (zone, size) {
        (Zone::Near, VehicleSize::Small) => (0.11, 0.14),
        (Zone::Near, VehicleSize::Large) => (0.19, 0.22),
        (Zone::Mid, VehicleSize::Small) => (0.07, 0.085),
        (Zone::Mid, VehicleSize::Large) => (0.12, 0.14),
        (Zone::Far, VehicleSize::Small) => (0.045, 0.05),
        (Zone::Far, VehicleSize::Large) => (0.075, 0.085),
    };
    (((fw * w) as u32).max(3), ((fh * h) as u32).max(3))
}

/// Lateral range (as fractions of width) available to vehicle centers in
/// a zone; narrows with distance like the road does.
fn lateral_center_range(zone: Zone) -> (f64, f64) {
    match zone {
        Zone::Near => (0.22, 0.78),
        Zone::Mid => (0.34, 0.66),
        Zone::Far => (0.42, 0.58),
    }
}

fn vehicle_rect(v: &Vehicle, width: u32, height: u32, geom: &ZoneGeometry) -> Result<(u32, u32, u32, u32)> {
    let (rect_w, rect_h) = vehicle_extent(v.zone, v.size, width, height);
    let band = geom.band(v.zone);
    let band_h = band[1].saturating_sub(band[0]);
    if rect_h > band_h {
        return Err(Error::Scene(format!(
            "{:?} {:?} vehicle ({rect_h} px tall) does not fit the {} band ({band_h} px)",
            v.size, v.zone, v.zone
        )));
    }
    let (cmin, cmax) = lateral_center_range(v.zone);
    let cx = (cmin + v.lateral_offset * (cmax - cmin)) * width as f64;
    let x0 = (cx - rect_w as f64 / 2.0).round();
    let y0 = band[0] as f64 + v.depth_offset * (band_h - rect_h) as f64;
    let (x0, y0) = (x0 as i64, y0.round() as i64);
    if x0 < 0 || y0 < 0 || x0 + rect_w as i64 > width as i64 || y0 + rect_h as i64 > height as i64 {
        return Err(Error::Scene(format!(
            "{:?} {:?} vehicle at ({x0}, {y0}) size {rect_w}x{rect_h} leaves the {}x{} frame",
            v.size, v.zone, width, height
        )));
    }
    Ok((x0 as u32, y0 as u32, rect_w, rect_h))
}

fn fill_rect(img: &mut RgbImage, x0: u32, y0: u32, w: u32, h: u32, tone: u8) {
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            img.set_pixel(x, y, [tone, tone, tone]);
        }
    }
}

fn draw_vehicle(img: &mut RgbImage, x0: u32, y0: u32, w: u32, h: u32, texture_seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(texture_seed);
    let body: u8 = rng.gen_range(40..=90);
    fill_rect(img, x0, y0, w, h, body);

    // Panel texture: a coarse grid of lighter blocks so the interior
    // carries edges proportional to area.
    let cell = (w / 5).max(3);
    let mut gy = y0 + 1;
    while gy + 1 < y0 + h {
        let mut gx = x0 + 1;
        let cell_h = cell.min(y0 + h - 1 - gy);
        while gx + 1 < x0 + w {
            let cell_w = cell.min(x0 + w - 1 - gx);
            if rng.gen_bool(0.5) {
                let tone: u8 = rng.gen_range(130..=220);
                fill_rect(img, gx, gy, cell_w, cell_h, tone);
            }
            gx += cell;
        }
        gy += cell;
    }

    // Outline, drawn last so texture cells never bleed over it.
    for x in x0..x0 + w {
        img.set_pixel(x, y0, [OUTLINE_TONE; 3]);
        img.set_pixel(x, y0 + h - 1, [OUTLINE_TONE; 3]);
    }
    for y in y0..y0 + h {
        img.set_pixel(x0, y, [OUTLINE_TONE; 3]);
        img.set_pixel(x0 + w - 1, y, [OUTLINE_TONE; 3]);
    }
}

/// Draws the scene. Identical specs produce identical bytes.
pub fn render_scene(spec: &SceneSpec) -> Result<RgbImage> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let geom = canonical_geometry(w, h);
    let mut img = RgbImage::filled(w, h, [BACKGROUND_TONE; 3])?;

    for y in 0..h {
        let py = y as f64 + 0.5;
        for x in 0..w {
            if center_in_polygon(&geom.road_polygon, x as f64 + 0.5, py) {
                img.set_pixel(x, y, [spec.road_tone; 3]);
            }
        }
    }

    if spec.lane_marks {
        let dash = (h / 16).max(2);
        let phase = (spec.rng_seed % (2 * dash as u64)) as u32;
        let top = geom.far_band[0];
        for y in top..h {
            if ((y - top) + phase) % (2 * dash) >= dash {
                continue;
            }
            let depth = (y as f64 - top as f64) / (h as f64 - top as f64);
            let half = (0.5 + 1.5 * depth).round() as i64;
            let cx = (w / 2) as i64;
            for x in (cx - half).max(0)..(cx + half + 1).min(w as i64) {
                if center_in_polygon(&geom.road_polygon, x as f64 + 0.5, y as f64 + 0.5) {
                    img.set_pixel(x as u32, y, [LANE_TONE; 3]);
                }
            }
        }
    }

    // Far to near, so closer vehicles overdraw farther ones.
    let mut order: Vec<&Vehicle> = spec.vehicles.iter().collect();
    order.sort_by_key(|v| match v.zone {
        Zone::Far => 0,
        Zone::Mid => 1,
        Zone::Near => 2,
    });
    for v in order {
        let (x0, y0, rw, rh) = vehicle_rect(v, w, h, &geom)?;
        draw_vehicle(&mut img, x0, y0, rw, rh, v.texture_seed);
    }
    Ok(img)
}

/// Frame size, edge parameters, and filter settings used when a dataset
/// is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateOptions {
    pub width: u32,
    pub height: u32,
    pub lane_marks: bool,
    pub canny: CannyParams,
    pub filter: FilterParams,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            lane_marks: true,
            canny: CannyParams::default(),
            filter: FilterParams::default(),
        }
    }
}

/// One generated scene with everything downstream consumers need.
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub spec: SceneSpec,
    pub image: RgbImage,
    pub features: FeatureVector,
    pub label: IntensityLabel,
    /// Template family the spec was sampled from.
    pub tag: String,
}

fn sample_vehicle(rng: &mut ChaCha8Rng, zone: Zone, size: VehicleSize) -> Vehicle {
    Vehicle {
        zone,
        size,
        lateral_offset: rng.gen_range(0.0..=1.0),
        depth_offset: rng.gen_range(0.0..=1.0),
        texture_seed: rng.gen(),
    }
}

/// Samples one spec from the template family for the given level. The
/// family name comes back as the tag; the authoritative label is still
/// the oracle's.
fn sample_spec(
    rng: &mut ChaCha8Rng,
    family: u8,
    opts: &GenerateOptions,
) -> (SceneSpec, String) {
    use VehicleSize::{Large, Small};
    use Zone::{Far, Mid, Near};
    let mut vehicles = Vec::new();
    match family {
        1 => {
            for _ in 0..rng.gen_range(0..=2) {
                let zone = if rng.gen_bool(0.5) { Mid } else { Far };
                vehicles.push(sample_vehicle(rng, zone, Small));
            }
        }
        2 => {
            if rng.gen_bool(0.5) {
                for zone in [Near, Mid, Far] {
                    vehicles.push(sample_vehicle(rng, zone, Small));
                }
            } else {
                vehicles.push(sample_vehicle(rng, Far, Large));
                if rng.gen_bool(0.5) {
                    vehicles.push(sample_vehicle(rng, Mid, Small));
                }
            }
        }
        3 => match rng.gen_range(0..3) {
            0 => {
                vehicles.push(sample_vehicle(rng, Near, Large));
                vehicles.push(sample_vehicle(rng, Mid, Small));
                vehicles.push(sample_vehicle(rng, Far, Small));
            }
            1 => {
                for zone in [Near, Near, Mid, Mid, Far, Far] {
                    vehicles.push(sample_vehicle(rng, zone, Small));
                }
            }
            _ => {
                vehicles.push(sample_vehicle(rng, Mid, Large));
                vehicles.push(sample_vehicle(rng, Near, Small));
                vehicles.push(sample_vehicle(rng, Far, Small));
            }
        },
        4 => {
            vehicles.push(sample_vehicle(rng, Near, Large));
            vehicles.push(sample_vehicle(rng, Mid, Large));
            if rng.gen_bool(0.5) {
                vehicles.push(sample_vehicle(rng, Near, Small));
                vehicles.push(sample_vehicle(rng, Far, Small));
            } else {
                vehicles.push(sample_vehicle(rng, Near, Small));
                vehicles.push(sample_vehicle(rng, Mid, Small));
            }
        }
        _ => {
            vehicles.push(sample_vehicle(rng, Near, Large));
            vehicles.push(sample_vehicle(rng, Near, Small));
            vehicles.push(sample_vehicle(rng, Mid, Large));
            vehicles.push(sample_vehicle(rng, Mid, Small));
            vehicles.push(sample_vehicle(rng, Far, Small));
            vehicles.push(sample_vehicle(rng, Far, Small));
            if rng.gen_bool(0.4) {
                vehicles.push(sample_vehicle(rng, Far, Small));
            }
        }
    }
    let spec = SceneSpec {
        width: opts.width,
        height: opts.height,
        vehicles,
        lane_marks: opts.lane_marks,
        road_tone: 110,
        rng_seed: rng.gen(),
    };
    (spec, format!("template-l{family}"))
}

/// Renders `n` sampled scenes and runs each through the full feature
/// path: edge extraction, static filtering against this generator's own
/// empty-scene reference, and zone counting.
pub fn generate_scenes(
    n: usize,
    rules: &OracleLabelRules,
    rng_seed: u64,
    opts: &GenerateOptions,
) -> Result<Vec<GeneratedScene>> {
    if n == 0 {
        return Err(Error::InvalidParam("cannot generate an empty dataset".into()));
    }
    rules.validate()?;
    opts.canny.validate()?;
    let reference = generator_reference(opts)?;
    let geom = canonical_geometry(opts.width, opts.height);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut scenes = Vec::with_capacity(n);
    for i in 0..n {
        let family = (i % 5) as u8 + 1;
        let (spec, tag) = sample_spec(&mut rng, family, opts);
        let label = oracle_label(&spec, rules)?;
        let image = render_scene(&spec)?;
        let gray = to_grayscale(&image);
        let edges = canny(&gray, &opts.canny)?;
        let counts = count_filtered_zone_pixels(&edges, &reference, &geom, &opts.filter)?;
        scenes.push(GeneratedScene {
            spec,
            image,
            features: counts.into(),
            label,
            tag,
        });
    }
    Ok(scenes)
}

/// The zero-traffic reference matching this generator's scenes.
pub fn generator_reference(opts: &GenerateOptions) -> Result<ZeroTrafficReference> {
    let empty = render_scene(&SceneSpec::empty(opts.width, opts.height, opts.lane_marks))?;
    calibrate_reference(&empty, &opts.canny, "synthetic-empty-road")
}

/// `generate_scenes` reduced to the labeled feature set.
pub fn generate_dataset(n: usize, rules: &OracleLabelRules, rng_seed: u64) -> Result<Dataset> {
    let scenes = generate_scenes(n, rules, rng_seed, &GenerateOptions::default())?;
    Ok(Dataset::new(
        scenes
            .into_iter()
            .map(|s| LabeledSample::new(s.features, s.label).with_tag(s.tag))
            .collect(),
    ))
}
