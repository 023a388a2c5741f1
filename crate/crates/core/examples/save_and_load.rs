//! Persist a model and its text artifacts, reload, and check predictions match.
mod common;

use aggrnet::io::{load_model, save_model};
use aggrnet::model::build_model;
use aggrnet::train::predict;
use aggrnet::Rng;

fn main() -> aggrnet::Result<()> {
    let data = common::toy_dataset(30, 4);
    let (pipeline, tables) = common::toy_glove(&data, 8, 10);
    let mut model = build_model(&common::small_cn1(10), &tables, &mut Rng::new(9))?;
    model.artifact_hashes = Some(pipeline.hashes());

    let dir = tempfile::tempdir().unwrap();
    save_model(&model, &pipeline, dir.path())?;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let entry = entry.unwrap();
        println!("{:<20} {:>8} bytes", entry.file_name().to_string_lossy(), entry.metadata().unwrap().len());
    }
    let manifest = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    println!("\n{}", manifest.lines().take(14).collect::<Vec<_>>().join("\n"));

    let (loaded, loaded_pipeline) = load_model(dir.path())?;
    let texts = ["hope everyone is safe", "what an idiot"];
    let before = predict(&model, &pipeline, &texts)?;
    let after = predict(&loaded, &loaded_pipeline, &texts)?;
    assert_eq!(before, after);
    println!("\nreloaded model gives identical probabilities: {:?}", after[0].probabilities);

    // tamper with the blob: the hash check catches it
    let blob = dir.path().join("weights.bin");
    let mut bytes = std::fs::read(&blob).unwrap();
    bytes[0] ^= 1;
    std::fs::write(&blob, bytes).unwrap();
    println!("after flipping one bit: {}", load_model(dir.path()).unwrap_err());
    Ok(())
}
