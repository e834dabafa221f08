// Comparison labels against discrete style labels when experts disagree.
//
// The baseline trains the same head with cross-entropy on every style an
// image received, so an image labeled 6 x Modern and 4 x Coastal counts
// equally toward both. Comparison labels keep the counts.

use std::error::Error;

use stylerank::comparisons::{sample_comparisons, ComparisonConfig};
use stylerank::dataset::synthetic::{generate, SyntheticConfig};
use stylerank::dataset::{
    assign_splits, build_style_set, clean_ground_truth, MembershipRule, Split, SplitFractions, ValidationSetSpec,
};
use stylerank::eval::baseline_train_discrete;
use stylerank::stylenet::{accuracy, resolve_labeled, train, TrainConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = generate(&SyntheticConfig {
        images: 1000,
        feature_dim: 32,
        concentration: 1.0,
        expert_noise: 0.3,
        seed: 8,
        ..Default::default()
    })?;
    let store = data.store()?;
    let splits = assign_splits(store.image_ids(), SplitFractions::default(), 8)?;
    let sp = &splits;
    let in_split = |s: Split| move |id: &str| sp.get(id) == Some(s);

    let clean = clean_ground_truth(&store, &ValidationSetSpec::clean_default())?;
    let validation = clean.retain_images(in_split(Split::Validation));
    let all_labels = build_style_set(&store, &ValidationSetSpec::all_labels(4), MembershipRule::Threshold)?
        .retain_images(in_split(Split::Train));

    let config = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 40,
        seed: 8,
        ..Default::default()
    };
    let comparisons = sample_comparisons(&store, Some(&splits), &ComparisonConfig::new(3, 10_000, 8))?;
    let ours = train(&data.features, &comparisons, Some(&validation), 4, &config)?;
    let baseline = baseline_train_discrete(&data.features, &all_labels, Some(&validation), 4, &config)?;

    let truth = clean.retain_images(|id| splits.get(id) != Some(Split::Train));
    let examples = resolve_labeled(&data.features, &truth)?;
    println!(
        "{} discrete training samples from {} train images",
        all_labels.len(),
        splits.sizes()[0]
    );
    println!("held-out clean accuracy over {} images:", truth.len());
    println!("  comparison labels {:.3}", accuracy(&ours.head, &examples)?);
    println!("  discrete labels   {:.3}", accuracy(&baseline.head, &examples)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
