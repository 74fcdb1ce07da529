//! Runs the edge detector over a synthetic road frame and writes the
//! input and the edge map next to each other for eyeballing.
//!
//!     cargo run --example edge_detection

use inflow::imaging::pnm::{write_edge_pgm, write_ppm};
use inflow::imaging::{canny, to_grayscale, CannyParams};
use inflow::synth::{render_scene, SceneSpec, Vehicle, VehicleSize};
use inflow::zones::Zone;

fn main() -> inflow::Result<()> {
    let mut spec = SceneSpec::empty(320, 240, true);
    spec.vehicles = vec![
        Vehicle {
            zone: Zone::Near,
            size: VehicleSize::Large,
            lateral_offset: 0.3,
            depth_offset: 0.5,
            texture_seed: 11,
        },
        Vehicle {
            zone: Zone::Mid,
            size: VehicleSize::Small,
            lateral_offset: 0.7,
            depth_offset: 0.4,
            texture_seed: 12,
        },
    ];
    let image = render_scene(&spec)?;
    let gray = to_grayscale(&image);

    let params = CannyParams::default();
    let edges = canny(&gray, &params)?;
    println!(
        "{}x{} frame, sigma {}, thresholds {}/{} -> {} edge pixels",
        image.width(),
        image.height(),
        params.gaussian_sigma,
        params.low_threshold,
        params.high_threshold,
        edges.count()
    );

    let dir = std::env::temp_dir().join("inflow-edge-detection");
    std::fs::create_dir_all(&dir).map_err(|e| inflow::Error::io(&dir, e))?;
    write_ppm(&dir.join("scene.ppm"), &image)?;
    write_edge_pgm(&dir.join("edges.pgm"), &edges)?;
    println!("wrote {}/scene.ppm and {}/edges.pgm", dir.display(), dir.display());
    Ok(())
}
