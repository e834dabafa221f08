// Classification and retrieval report for a trained head, with the expert
// agreement matrix, written as JSON and CSV.

use std::error::Error;

use stylerank::comparisons::{sample_comparisons, ComparisonConfig};
use stylerank::dataset::synthetic::{generate, SyntheticConfig};
use stylerank::dataset::{assign_splits, clean_ground_truth, Split, SplitFractions, ValidationSetSpec};
use stylerank::eval::{average_precision, evaluate, ndcg};
use stylerank::stylenet::{train, TrainConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // A ranking with relevant items at ranks 1 and 3.
    let ranked = [true, false, true];
    println!(
        "AP@3 {:.4}, NDCG@3 {:.4}",
        average_precision(&ranked, Some(3)),
        ndcg(&ranked, 2, Some(3))
    );

    let data = generate(&SyntheticConfig {
        images: 600,
        feature_dim: 16,
        seed: 6,
        ..Default::default()
    })?;
    let store = data.store()?;
    let splits = assign_splits(store.image_ids(), SplitFractions::default(), 6)?;
    let comparisons = sample_comparisons(&store, Some(&splits), &ComparisonConfig::new(3, 4000, 6))?;
    let config = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 15,
        seed: 6,
        ..Default::default()
    };
    let head = train(&data.features, &comparisons, None, 4, &config)?.head;

    let test = clean_ground_truth(&store, &ValidationSetSpec::clean_default())?
        .retain_images(|id| splits.get(id) == Some(Split::Test));
    let report = evaluate(&head, &data.features, &test, store.styles(), Some(&store), 5)?;
    for s in &report.classification.per_style {
        println!("{:<12} support {:>3}  accuracy {:?}", s.style, s.support, s.accuracy);
    }
    let r = &report.retrieval;
    println!(
        "recall@1 {:.3} recall@5 {:.3} mAP {:.3} NDCG {:.3}",
        r.recall_at_1, r.recall_at_cutoff, r.map, r.ndcg
    );
    if let Some(m) = &report.agreement {
        println!("Modern/Traditional distinctness {:.2}", m.get(0, 1));
    }

    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    println!(
        "{} CSV rows, {} bytes of JSON",
        String::from_utf8(csv)?.lines().count(),
        report.to_json()?.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
