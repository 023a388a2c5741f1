//! Train a small capsule ensemble on toy tweets and evaluate it.
mod common;

use aggrnet::model::build_model;
use aggrnet::train::{encode_dataset, evaluate, predict, train, TrainConfig};
use aggrnet::Rng;

fn main() -> aggrnet::Result<()> {
    let train_set = common::toy_dataset(120, 1);
    let test_set = common::toy_dataset(45, 2);
    let (pipeline, tables) = common::toy_glove(&train_set, 16, 12);

    let config = common::small_cn1(12);
    let mut model = build_model(&config, &tables, &mut Rng::new(3))?;
    println!("{} trainable parameters", model.trainable_parameter_count());

    let examples = encode_dataset(&train_set, &pipeline);
    let cfg = TrainConfig { epochs: 100, batch_size: 16, lr: 3e-3, seed: 3, ..TrainConfig::default() };
    let log = train(&mut model, &examples, &cfg, None)?;
    for e in log.epochs.iter().filter(|e| e.epoch % 10 == 0) {
        println!("epoch {:>3}: loss {:.4}", e.epoch, e.loss);
    }

    let report = evaluate(&model, &pipeline, &test_set)?;
    println!("\naccuracy {:.3}, weighted F1 {:.3}", report.accuracy, report.weighted_f1);
    print!("{}", report.to_toml()?);

    let texts = ["you total idiot", "stay safe everyone", "oh sure, very clever"];
    for (text, p) in texts.iter().zip(predict(&model, &pipeline, &texts)?) {
        println!("{:<24} {} {:?}", text, p.class, p.probabilities.map(|x| (x * 1000.0).round() / 1000.0));
    }
    Ok(())
}
