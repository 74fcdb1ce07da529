//! Generates a labeled synthetic dataset and prints its label histogram
//! and a few samples, the same path `inflow gen` drives.
//!
//!     cargo run --example scene_generation

use inflow::synth::{generate_dataset, OracleLabelRules};

fn main() -> inflow::Result<()> {
    let rules = OracleLabelRules::default();
    println!(
        "oracle scoring: small {:?}, large {:?} points by (near, mid, far); level ceilings {:?}",
        rules.small_weights, rules.large_weights, rules.level_thresholds
    );

    let data = generate_dataset(100, &rules, 42)?;
    let mut histogram = [0usize; 5];
    for sample in data.iter() {
        histogram[sample.label.class_index()] += 1;
    }
    println!("label histogram over {} scenes:", data.len());
    for (i, n) in histogram.iter().enumerate() {
        println!("  level {}: {:>3}  {}", i + 1, n, "#".repeat(*n));
    }

    println!("first three samples:");
    for sample in data.iter().take(3) {
        println!(
            "  label {}  near {:>5}  mid {:>5}  far {:>5}  ({})",
            sample.label.get(),
            sample.features.near,
            sample.features.mid,
            sample.features.far,
            sample.tag.as_deref().unwrap_or("-")
        );
    }
    Ok(())
}
