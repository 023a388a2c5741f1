//! Intermediate activations as fixed-width features for an external classifier.
mod common;

use aggrnet::model::{build_model, FeatureSource};
use aggrnet::train::export_features;
use aggrnet::Rng;

fn main() -> aggrnet::Result<()> {
    let data = common::toy_dataset(9, 6);
    let (pipeline, tables) = common::toy_glove(&data, 8, 10);
    let model = build_model(&common::small_cn1(10), &tables, &mut Rng::new(1))?;

    for which in [FeatureSource::Subnetwork(0), FeatureSource::Merged, FeatureSource::Head] {
        let table = export_features(&model, &pipeline, &data, which)?;
        println!("{which:?}: {} rows x {} features", table.rows.len(), table.width());
    }

    let table = export_features(&model, &pipeline, &data, FeatureSource::Subnetwork(2))?;
    for line in table.to_tsv().lines().take(4) {
        let cols: Vec<&str> = line.split('\t').take(6).collect();
        println!("{} ...", cols.join("\t"));
    }
    Ok(())
}
