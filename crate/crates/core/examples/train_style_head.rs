// Train the style head on comparison labels and read out style spectra.
//
// Uses a synthetic corpus with latent style mixtures, early-stops on the
// clean validation set, saves a checkpoint and reloads it.

use std::error::Error;

use stylerank::comparisons::{sample_comparisons, ComparisonConfig};
use stylerank::dataset::synthetic::{generate, SyntheticConfig};
use stylerank::dataset::{assign_splits, clean_ground_truth, Split, SplitFractions, ValidationSetSpec};
use stylerank::stylenet::{accuracy, resolve_labeled, train, Checkpoint, TrainConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = generate(&SyntheticConfig {
        images: 800,
        feature_dim: 32,
        seed: 2,
        ..Default::default()
    })?;
    let store = data.store()?;
    let splits = assign_splits(store.image_ids(), SplitFractions::default(), 2)?;
    let comparisons = sample_comparisons(&store, Some(&splits), &ComparisonConfig::new(3, 5000, 2))?;

    let clean = clean_ground_truth(&store, &ValidationSetSpec::clean_default())?;
    let validation = clean.retain_images(|id| splits.get(id) == Some(Split::Validation));
    let test = clean.retain_images(|id| splits.get(id) == Some(Split::Test));

    let config = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 30,
        seed: 2,
        ..Default::default()
    };
    let outcome = train(&data.features, &comparisons, Some(&validation), 4, &config)?;
    println!(
        "loss {:.4} -> {:.4}, best epoch {} of {}",
        outcome.initial_loss,
        outcome.final_loss().unwrap_or(f64::NAN),
        outcome.best_epoch,
        outcome.history.len()
    );
    let acc = accuracy(&outcome.head, &resolve_labeled(&data.features, &test)?)?;
    println!("clean test accuracy {acc:.3} on {} images", test.len());

    let (id, x) = data.features.iter().next().ok_or("empty corpus")?;
    let spectrum = outcome.head.forward(x)?.probs;
    println!("style spectrum of {id}: {spectrum:.3?}");

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("head.ckpt");
    Checkpoint::new(&outcome.head, store.styles().clone(), config)?.save(&path)?;
    let reloaded = Checkpoint::load(&path)?;
    println!(
        "checkpoint reloaded: {} inputs, {} hidden",
        reloaded.head.input_dim(),
        reloaded.head.hidden_dim()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
