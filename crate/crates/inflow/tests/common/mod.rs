//! Helpers shared by the integration suites. Each test target compiles
//! its own copy and uses a different subset.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use inflow::imaging::{CannyParams, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force Canny oracle, written against the documented contract
/// rather than the library code: every stage is recomputed per pixel
/// from the raw input, with no shared intermediate buffers beyond the
/// stage outputs themselves.
///
/// The contract pinned here:
/// - Gaussian taps `exp(-i^2 / (2 sigma^2))` for `i` in `-r..=r` with
///   `r = ceil(3 sigma)`, normalized by their sum; borders clamp;
///   horizontal-then-vertical accumulation in tap order; one rounding
///   to `u8` at the end.
/// - 3x3 Sobel with clamped borders, Euclidean magnitude.
/// - Gradient direction folded into `[0, 180)` degrees and quantized at
///   22.5 / 67.5 / 112.5 / 157.5.
/// - Non-maximum suppression keeps a pixel only when strictly above the
///   raster-earlier neighbor and at least the later one along the
///   quantized direction; the outer one-pixel border never survives.
/// - Hysteresis keeps every pixel at or above the low threshold that is
///   8-connected to one at or above the high threshold.
pub fn reference_canny(img: &GrayImage, params: &CannyParams) -> Vec<bool> {
    let w = img.width() as i64;
    let h = img.height() as i64;
    assert!(w >= 3 && h >= 3, "oracle needs the same 3x3 minimum");

    let sigma = params.gaussian_sigma;
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps = Vec::new();
    for i in -radius..=radius {
        taps.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let mut norm = 0.0;
    for t in &taps {
        norm += *t;
    }
    for t in &mut taps {
        *t /= norm;
    }

    let src = |x: i64, y: i64| -> f64 {
        img.get(x.clamp(0, w - 1) as u32, y.clamp(0, h - 1) as u32) as f64
    };

    // Separable blur evaluated independently per output pixel: each
    // contributing row's horizontal sum completes before its vertical
    // tap scales it.
    let mut blurred = vec![0u8; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ky, tap_y) in taps.iter().enumerate() {
                let sy = (y + ky as i64 - radius).clamp(0, h - 1);
                let mut row_acc = 0.0;
                for (kx, tap_x) in taps.iter().enumerate() {
                    row_acc += tap_x * src(x + kx as i64 - radius, sy);
                }
                acc += tap_y * row_acc;
            }
            blurred[(y * w + x) as usize] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    let smooth = |x: i64, y: i64| -> i32 {
        blurred[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize] as i32
    };

    let mut gx = vec![0i32; (w * h) as usize];
    let mut gy = vec![0i32; (w * h) as usize];
    let mut mag = vec![0.0f64; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let p = |dx: i64, dy: i64| smooth(x + dx, y + dy);
            let dx = p(1, -1) - p(-1, -1) + 2 * (p(1, 0) - p(-1, 0)) + p(1, 1) - p(-1, 1);
            let dy = p(-1, 1) - p(-1, -1) + 2 * (p(0, 1) - p(0, -1)) + p(1, 1) - p(1, -1);
            let i = (y * w + x) as usize;
            gx[i] = dx;
            gy[i] = dy;
            mag[i] = ((dx * dx + dy * dy) as f64).sqrt();
        }
    }

    let mut thinned = vec![0.0f64; (w * h) as usize];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = (y * w + x) as usize;
            let mut angle = (gy[i] as f64).atan2(gx[i] as f64).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            #[allow(clippy::manual_range_contains)]
            let (bdx, bdy) = if angle < 22.5 || angle >= 157.5 {
                (-1i64, 0i64)
            } else if angle < 67.5 {
                (-1, -1)
            } else if angle < 112.5 {
                (0, -1)
            } else {
                (1, -1)
            };
            let before = ((y + bdy) * w + (x + bdx)) as usize;
            let after = ((y - bdy) * w + (x - bdx)) as usize;
            if mag[i] > mag[before] && mag[i] >= mag[after] {
                thinned[i] = mag[i];
            }
        }
    }

    // Hysteresis by sweeping to a fixpoint; the survivor set is the
    // connectivity closure, however it is computed.
    let mut keep: Vec<bool> = thinned.iter().map(|&m| m >= params.high_threshold).collect();
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let i = (y * w + x) as usize;
                if keep[i] || thinned[i] < params.low_threshold {
                    continue;
                }
                'scan: for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        if keep[(ny * w + nx) as usize] {
                            keep[i] = true;
                            changed = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if !changed {
            return keep;
        }
    }
}

pub fn gray_from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> GrayImage {
    let mut data = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        for x in 0..width {
            data.push(f(x, y));
        }
    }
    GrayImage::from_raw(width, height, data).unwrap()
}

pub fn noise_gray(width: u32, height: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width as usize * height as usize)
        .map(|_| rng.gen())
        .collect();
    GrayImage::from_raw(width, height, data).unwrap()
}

/// Runs the installed binary with the given arguments and working
/// directory, capturing everything.
pub fn run_inflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inflow"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn inflow binary")
}

pub fn stdout_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}
