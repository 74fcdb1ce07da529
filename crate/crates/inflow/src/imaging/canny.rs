//! Canny edge detector: blur, Sobel gradients, non-maximum suppression and
//! double-threshold hysteresis.

use serde::{Deserialize, Serialize};

use super::{gaussian_blur, EdgeMap, GrayImage};
use crate::error::{Error, Result};

/// Detector parameters. Thresholds apply to the Euclidean gradient
/// magnitude `sqrt(gx^2 + gy^2)` of the 3x3 Sobel operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub gaussian_sigma: f64,
    pub low_threshold: f64,
    pub high_threshold: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.4,
            low_threshold: 50.0,
            high_threshold: 100.0,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if self.gaussian_sigma <= 0.0 || self.gaussian_sigma.is_nan() {
            return Err(Error::InvalidParam(format!(
                "gaussian_sigma must be positive, got {}",
                self.gaussian_sigma
            )));
        }
        if self.low_threshold < 0.0 || self.low_threshold.is_nan() {
            return Err(Error::InvalidParam(format!(
                "low_threshold must be non-negative, got {}",
                self.low_threshold
            )));
        }
        if self.high_threshold < self.low_threshold {
            return Err(Error::InvalidParam(format!(
                "high_threshold {} is below low_threshold {}",
                self.high_threshold, self.low_threshold
            )));
        }
        Ok(())
    }
}

const SOBEL_X: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
const SOBEL_Y: [[i32; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];

/// 3x3 Sobel gradients with edge-clamp replication at the borders.
fn sobel(img: &GrayImage) -> (Vec<i32>, Vec<i32>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let data = img.data();
    let mut gx = vec![0i32; (w * h) as usize];
    let mut gy = vec![0i32; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut ax = 0i32;
            let mut ay = 0i32;
            for (ky, row) in SOBEL_X.iter().enumerate() {
                let sy = (y + ky as i64 - 1).clamp(0, h - 1);
                for (kx, &cx) in row.iter().enumerate() {
                    let sx = (x + kx as i64 - 1).clamp(0, w - 1);
                    let p = data[(sy * w + sx) as usize] as i32;
                    ax += cx * p;
                    ay += SOBEL_Y[ky][kx] * p;
                }
            }
            gx[(y * w + x) as usize] = ax;
            gy[(y * w + x) as usize] = ay;
        }
    }
    (gx, gy)
}

/// Quantizes a gradient direction to one of the four bins 0, 45, 90, 135
/// (degrees).
fn direction_bin(gx: i32, gy: i32) -> u8 {
    let mut angle = (gy as f64).atan2(gx as f64).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        0
    } else if angle < 67.5 {
        45
    } else if angle < 112.5 {
        90
    } else {
        135
    }
}

/// Non-maximum suppression. A pixel survives only when it is a local
/// maximum along the quantized gradient direction; ties are broken by
/// comparing strictly against the raster-earlier neighbor and loosely
/// against the later one, so plateaus thin to single-pixel curves. The
/// one-pixel border is always suppressed.
fn non_maximum_suppression(mag: &[f64], gx: &[i32], gy: &[i32], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            // (earlier, later) in raster order along the gradient direction.
            let (before, after) = match direction_bin(gx[i], gy[i]) {
                0 => (i - 1, i + 1),
                45 => (i - w - 1, i + w + 1),
                90 => (i - w, i + w),
                _ => (i - w + 1, i + w - 1),
            };
            if mag[i] > mag[before] && mag[i] >= mag[after] {
                out[i] = mag[i];
            }
        }
    }
    out
}

/// Double-threshold hysteresis: pixels at or above `high` seed edges, pixels
/// at or above `low` are kept when 8-connected (transitively) to a seed.
fn hysteresis(mag: &[f64], w: usize, h: usize, low: f64, high: f64) -> Vec<bool> {
    let mut out = vec![false; w * h];
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if mag[i] >= high && !out[i] {
                out[i] = true;
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            if dx == 0 && dy == 0 {
                                continue;
                            }
                            let nx = cx as i64 + dx;
                            let ny = cy as i64 + dy;
                            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                                continue;
                            }
                            let ni = ny as usize * w + nx as usize;
                            if mag[ni] >= low && !out[ni] {
                                out[ni] = true;
                                stack.push((nx as usize, ny as usize));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Full Canny chain: Gaussian blur, Sobel gradients, Euclidean magnitude,
/// non-maximum suppression along the quantized gradient direction, then
/// hysteresis thresholding.
///
/// Rejects images smaller than 3x3, where the Sobel window is undefined.
pub fn canny(img: &GrayImage, params: &CannyParams) -> Result<EdgeMap> {
    params.validate()?;
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::InvalidParam(format!(
            "canny requires at least a 3x3 image, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let blurred = gaussian_blur(img, params.gaussian_sigma)?;
    let (gx, gy) = sobel(&blurred);
    let mag: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(&x, &y)| ((x * x + y * y) as f64).sqrt())
        .collect();
    let thinned = non_maximum_suppression(&mag, &gx, &gy, w, h);
    let edges = hysteresis(&thinned, w, h, params.low_threshold, params.high_threshold);
    EdgeMap::from_raw(img.width(), img.height(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayImage;

    #[test]
    fn constant_image_has_no_edges() {
        for v in [0u8, 128, 255] {
            let img = GrayImage::filled(16, 16, v).unwrap();
            let edges = canny(&img, &CannyParams::default()).unwrap();
            assert_eq!(edges.count(), 0);
        }
    }

    #[test]
    fn rejects_small_images() {
        let img = GrayImage::filled(2, 8, 0).unwrap();
        assert!(canny(&img, &CannyParams::default()).is_err());
        let img = GrayImage::filled(8, 2, 0).unwrap();
        assert!(canny(&img, &CannyParams::default()).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        let img = GrayImage::filled(8, 8, 0).unwrap();
        let bad = CannyParams {
            gaussian_sigma: 1.0,
            low_threshold: 90.0,
            high_threshold: 50.0,
        };
        assert!(canny(&img, &bad).is_err());
        let bad = CannyParams {
            gaussian_sigma: -1.0,
            ..CannyParams::default()
        };
        assert!(canny(&img, &bad).is_err());
    }

    #[test]
    fn white_square_produces_closed_ring() {
        let mut img = GrayImage::filled(32, 32, 0).unwrap();
        for y in 8..24 {
            for x in 8..24 {
                img.set(x, y, 255);
            }
        }
        let edges = canny(&img, &CannyParams::default()).unwrap();
        let count = edges.count() as i64;
        // 16x16 square has a 60-pixel perimeter.
        assert!((count - 60).abs() <= 8, "ring count {count}");
        // Every edge pixel sits within 2 pixels of the square boundary
        // (the square covers [8, 23] on both axes).
        for y in 0..32i64 {
            for x in 0..32i64 {
                if edges.get(x as u32, y as u32) {
                    let cx = x.clamp(8, 23);
                    let cy = y.clamp(8, 23);
                    let dist = if cx == x && cy == y {
                        (x - 8).min(23 - x).min(y - 8).min(23 - y)
                    } else {
                        (x - cx).abs().max((y - cy).abs())
                    };
                    assert!(dist <= 2, "stray edge at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn hysteresis_keeps_connected_weak_drops_isolated_weak() {
        // Hand-constructed gradient field: a strong segment touching a weak
        // one, plus an isolated weak segment.
        let w = 8usize;
        let h = 8usize;
        let mut mag = vec![0.0f64; w * h];
        // strong segment
        mag[2 * w + 1] = 120.0;
        mag[2 * w + 2] = 120.0;
        // weak segment, 8-connected to the strong one
        mag[3 * w + 3] = 60.0;
        mag[3 * w + 4] = 60.0;
        // isolated weak segment
        mag[6 * w + 5] = 60.0;
        mag[6 * w + 6] = 60.0;
        let out = hysteresis(&mag, w, h, 50.0, 100.0);
        assert!(out[2 * w + 1] && out[2 * w + 2]);
        assert!(out[3 * w + 3] && out[3 * w + 4]);
        assert!(!out[6 * w + 5] && !out[6 * w + 6]);
    }

    #[test]
    fn threshold_monotonicity_on_random_images() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for round in 0..20 {
            let data: Vec<u8> = (0..24 * 24).map(|_| rng.gen()).collect();
            let img = GrayImage::from_raw(24, 24, data).unwrap();
            let mut prev: Option<EdgeMap> = None;
            for high in [60.0, 90.0, 120.0, 160.0] {
                let params = CannyParams {
                    gaussian_sigma: 1.0,
                    low_threshold: 40.0,
                    high_threshold: high,
                };
                let edges = canny(&img, &params).unwrap();
                if let Some(p) = &prev {
                    assert!(edges.count() <= p.count(), "round {round} high {high}");
                    for (a, b) in edges.data().iter().zip(p.data()) {
                        assert!(!a | b, "edge appeared when raising high threshold");
                    }
                }
                prev = Some(edges);
            }
        }
    }
}
