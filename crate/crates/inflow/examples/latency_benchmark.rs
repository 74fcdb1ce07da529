//! Times the capture-to-estimate path per stage on full-size frames,
//! the same measurement `inflow bench` prints.
//!
//!     cargo run --release --example latency_benchmark

use inflow::mlp::init_model;
use inflow::pipeline::Pipeline;
use inflow::synth::{
    canonical_geometry, generate_scenes, generator_reference, GenerateOptions, OracleLabelRules,
};

fn main() -> inflow::Result<()> {
    let opts = GenerateOptions {
        width: 640,
        height: 480,
        ..GenerateOptions::default()
    };
    let pipeline = Pipeline::assemble(
        opts.canny,
        canonical_geometry(opts.width, opts.height),
        opts.filter,
        generator_reference(&opts)?,
        init_model(1),
        true,
    )?;

    let scenes = generate_scenes(6, &OracleLabelRules::default(), 99, &opts)?;
    println!("{:<8}{:>16}{:>16}{:>12}", "frame", "edge_detection", "dnn_processing", "total");
    let mut totals = Vec::new();
    for (i, scene) in scenes.iter().enumerate() {
        let output = pipeline.run_frame(&scene.image)?;
        let t = output.timing;
        println!(
            "{i:<8}{:>14.1} ms{:>14.3} ms{:>10.1} ms",
            t.edge_detection_seconds * 1000.0,
            t.dnn_processing_seconds * 1000.0,
            t.total_seconds * 1000.0
        );
        totals.push(t.total_seconds);
    }
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    println!("mean {:.1} ms per {}x{} frame", mean * 1000.0, opts.width, opts.height);
    Ok(())
}
