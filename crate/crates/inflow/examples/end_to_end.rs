//! The whole chain in memory: generate scenes, calibrate, train, then
//! score fresh frames through the assembled pipeline.
//!
//!     cargo run --release --example end_to_end

use inflow::mlp::{split_dataset, train, TrainConfig};
use inflow::pipeline::Pipeline;
use inflow::synth::{
    canonical_geometry, generate_scenes, generator_reference, GenerateOptions, OracleLabelRules,
};

fn main() -> inflow::Result<()> {
    let opts = GenerateOptions::default();
    let rules = OracleLabelRules::default();

    let scenes = generate_scenes(150, &rules, 19, &opts)?;
    let data = inflow::mlp::Dataset::new(
        scenes
            .iter()
            .map(|s| inflow::mlp::LabeledSample::new(s.features, s.label))
            .collect(),
    );
    let cfg = TrainConfig::default();
    let (train_set, _) = split_dataset(&data, cfg.split_ratio, cfg.rng_seed)?;
    let model = train(&train_set, &cfg)?;

    let pipeline = Pipeline::assemble(
        opts.canny,
        canonical_geometry(opts.width, opts.height),
        opts.filter,
        generator_reference(&opts)?,
        model,
        true,
    )?;

    // Score held-back frames the model never saw.
    let fresh = generate_scenes(5, &rules, 777, &opts)?;
    for (i, scene) in fresh.iter().enumerate() {
        let output = pipeline.run_frame(&scene.image)?;
        println!(
            "frame {i}: oracle label {}  estimate {:.2}  counts (near {}, mid {}, far {})  {:.1} ms",
            scene.label.get(),
            output.estimate.value,
            output.counts.near,
            output.counts.mid,
            output.counts.far,
            output.timing.total_seconds * 1000.0
        );
    }
    Ok(())
}
