//! Compare hand-written gradients of a whole ensemble against central differences.
mod common;

use aggrnet::model::build_model;
use aggrnet::nn::gradcheck::{central_difference, relative_error, STEP};
use aggrnet::nn::{Grads, Mode};
use aggrnet::Rng;

fn main() -> aggrnet::Result<()> {
    let data = common::toy_dataset(12, 8);
    let (pipeline, tables) = common::toy_glove(&data, 4, 7);
    let mut cfg = common::small_cn1(7);
    cfg.subnetworks.iter_mut().for_each(|s| s.conv_filters = 3);
    cfg.dense_hidden_sizes = vec![4];
    let model = build_model(&cfg, &tables, &mut Rng::new(2))?;
    let input = pipeline.encode(&data.examples[0].text);
    let target = data.examples[0].label.index();

    let loss = |m: &aggrnet::model::Model| {
        let mut g = Grads::zeros_like(&m.params);
        m.loss_and_grads(&input, target, Mode::Train, &mut Rng::new(0), &mut g).unwrap()
    };
    let mut grads = Grads::zeros_like(&model.params);
    model.loss_and_grads(&input, target, Mode::Train, &mut Rng::new(0), &mut grads)?;

    for (id, p) in model.params.iter().filter(|(_, p)| p.trainable) {
        let numeric = central_difference(p.value.data(), STEP, |x| {
            let mut probe = model.clone();
            probe.params.get_mut(id).data_mut().copy_from_slice(x);
            loss(&probe)
        });
        let err = relative_error(grads.dense(id).data(), &numeric);
        println!("{:<28} {:>5} values  rel. error {err:.2e}", p.name, p.value.len());
    }
    Ok(())
}
