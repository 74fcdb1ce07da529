//! Trains the intensity network on generated scenes and scores it on a
//! held-out split, mirroring `inflow train`.
//!
//!     cargo run --release --example train_and_evaluate

use inflow::mlp::{evaluate, split_dataset, train, TrainConfig};
use inflow::synth::{generate_dataset, OracleLabelRules};

fn main() -> inflow::Result<()> {
    let data = generate_dataset(150, &OracleLabelRules::default(), 7)?;
    let cfg = TrainConfig::default();
    let (train_set, test_set) = split_dataset(&data, cfg.split_ratio, cfg.rng_seed)?;
    println!(
        "{} scenes: {} train / {} held out; lr {}, batch {}, up to {} epochs",
        data.len(),
        train_set.len(),
        test_set.len(),
        cfg.learning_rate,
        cfg.batch_size,
        cfg.max_epochs
    );

    let model = train(&train_set, &cfg)?;
    let report = evaluate(&model, &test_set)?;
    println!(
        "held-out: exact {:.1}%  within one level {:.1}%  mean abs error {:.3}",
        report.exact_rate * 100.0,
        report.within_one_rate * 100.0,
        report.mean_abs_error
    );

    for sample in test_set.iter().take(5) {
        let est = model.forward(&sample.features);
        println!(
            "  label {}  estimate {:.2}  (near {}, mid {}, far {})",
            sample.label.get(),
            est.value,
            sample.features.near,
            sample.features.mid,
            sample.features.far
        );
    }
    Ok(())
}
