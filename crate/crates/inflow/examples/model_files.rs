//! Saves and reloads a model file and shows that the round trip is
//! bit-exact, plus what the loader rejects.
//!
//!     cargo run --example model_files

use inflow::mlp::{init_model, load_model, save_model, FeatureVector};

fn main() -> inflow::Result<()> {
    let dir = std::env::temp_dir().join("inflow-model-files");
    std::fs::create_dir_all(&dir).map_err(|e| inflow::Error::io(&dir, e))?;
    let path = dir.join("model.bin");

    let model = init_model(42);
    save_model(&path, &model)?;
    let size = std::fs::metadata(&path).map_err(|e| inflow::Error::io(&path, e))?.len();
    println!("wrote {} ({size} bytes)", path.display());

    let back = load_model(&path)?;
    let fv = FeatureVector {
        near: 4200,
        mid: 1500,
        far: 300,
    };
    let (a, b) = (model.forward(&fv), back.forward(&fv));
    println!(
        "estimate before {:.12} / after {:.12} / bit-identical: {}",
        a.value,
        b.value,
        a.value.to_bits() == b.value.to_bits()
    );

    let bytes = std::fs::read(&path).map_err(|e| inflow::Error::io(&path, e))?;
    match inflow::mlp::load_model(&path.with_extension("missing")) {
        Err(e) => println!("missing file -> {e}"),
        Ok(_) => unreachable!(),
    }
    let truncated_path = dir.join("truncated.bin");
    std::fs::write(&truncated_path, &bytes[..bytes.len() / 2])
        .map_err(|e| inflow::Error::io(&truncated_path, e))?;
    match load_model(&truncated_path) {
        Err(e) => println!("truncated file -> {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
