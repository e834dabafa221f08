// Grid search over the L2 weight, the label margin and the number of
// comparisons, scored by clean validation accuracy.

use std::error::Error;

use stylerank::dataset::synthetic::{generate, SyntheticConfig};
use stylerank::dataset::{assign_splits, clean_ground_truth, Split, SplitFractions, ValidationSetSpec};
use stylerank::stylenet::{grid_search, GridSpec, TrainConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = generate(&SyntheticConfig {
        images: 500,
        feature_dim: 16,
        expert_noise: 0.2,
        seed: 4,
        ..Default::default()
    })?;
    let store = data.store()?;
    let splits = assign_splits(store.image_ids(), SplitFractions::default(), 4)?;
    let validation = clean_ground_truth(&store, &ValidationSetSpec::clean_default())?
        .retain_images(|id| splits.get(id) == Some(Split::Validation));

    let grid = GridSpec {
        lambdas: vec![2e-3, 2e-5],
        thresholds: vec![1, 3],
        comparison_counts: vec![500, 2000],
    };
    let base = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 10,
        seed: 4,
        ..Default::default()
    };
    let outcome = grid_search(&store, &splits, &data.features, &validation, &grid, &base)?;
    for cell in &outcome.cells {
        match (&cell.val_acc, &cell.error) {
            (Some(acc), _) => println!("lambda {:<7} t {} n {:<5} -> {acc:.3}", cell.lambda, cell.t, cell.n_c),
            (None, Some(e)) => println!(
                "lambda {:<7} t {} n {:<5} -> failed: {e}",
                cell.lambda, cell.t, cell.n_c
            ),
            _ => {}
        }
    }
    let best = &outcome.cells[outcome.best.ok_or("no cell trained")?];
    println!("best: lambda {} t {} n {}", best.lambda, best.t, best.n_c);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
