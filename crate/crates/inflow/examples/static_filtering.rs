//! Shows zero-traffic calibration: edges that exist on the empty road
//! (boundaries, lane marks) are subtracted from a live frame, leaving
//! vehicular edges only.
//!
//!     cargo run --example static_filtering

use inflow::imaging::{canny, to_grayscale, CannyParams};
use inflow::staticfilter::{calibrate_reference, count_filtered_zone_pixels, FilterParams};
use inflow::synth::{canonical_geometry, render_scene, SceneSpec, Vehicle, VehicleSize};
use inflow::zones::{count_zone_pixels, Zone};

fn main() -> inflow::Result<()> {
    let (w, h) = (320, 240);
    let geometry = canonical_geometry(w, h);
    let params = CannyParams::default();

    let empty = render_scene(&SceneSpec::empty(w, h, true))?;
    let reference = calibrate_reference(&empty, &params, "example-empty-road")?;
    println!("reference holds {} static edge pixels", reference.edges.count());

    let mut spec = SceneSpec::empty(w, h, true);
    spec.vehicles = vec![
        Vehicle {
            zone: Zone::Near,
            size: VehicleSize::Small,
            lateral_offset: 0.4,
            depth_offset: 0.6,
            texture_seed: 21,
        },
        Vehicle {
            zone: Zone::Far,
            size: VehicleSize::Large,
            lateral_offset: 0.5,
            depth_offset: 0.3,
            texture_seed: 22,
        },
    ];
    let live = render_scene(&spec)?;
    let edges = canny(&to_grayscale(&live), &params)?;

    let raw = count_zone_pixels(&edges, &geometry)?;
    let filter = FilterParams::default();
    let filtered = count_filtered_zone_pixels(&edges, &reference, &geometry, &filter)?;
    println!("raw counts:      near {:>5}  mid {:>5}  far {:>5}", raw.near, raw.mid, raw.far);
    println!(
        "after filtering: near {:>5}  mid {:>5}  far {:>5}  ({:?} mode, radius {})",
        filtered.near,
        filtered.mid,
        filtered.far,
        filter.mode,
        filter.kernel_radius
    );
    Ok(())
}
