// From raw expert annotations to comparison labels.
//
// Parses JSON Lines annotations, assigns seeded train/validation/test
// splits, and samples comparison labels at a few margins.

use std::error::Error;
use std::io::Cursor;

use stylerank::comparisons::{population_size, sample_comparisons, ComparisonConfig};
use stylerank::dataset::synthetic::{generate, SyntheticConfig};
use stylerank::dataset::{assign_splits, ingest_annotations, Split, SplitFractions};
use stylerank::Styles;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let synthetic = generate(&SyntheticConfig {
        images: 300,
        feature_dim: 8,
        expert_noise: 0.3,
        seed: 11,
        ..Default::default()
    })?;
    let jsonl = synthetic.annotations_jsonl();
    println!("first annotation row: {}", jsonl.lines().next().unwrap_or_default());

    let store = ingest_annotations(Cursor::new(jsonl), &Styles::default())?;
    let splits = assign_splits(store.image_ids(), SplitFractions::default(), 5)?;
    println!(
        "{} images by {} experts, splits {:?}",
        store.len(),
        store.experts(),
        splits.sizes()
    );

    for t in 1..=3 {
        let population = population_size(&store, Some(&splits), Some(Split::Train), t)?;
        let labels = sample_comparisons(&store, Some(&splits), &ComparisonConfig::new(t, 500, 7))?;
        println!("t = {t}: {population} eligible train pairs, sampled {}", labels.len());
        for c in labels.iter().take(2) {
            let more = if c.y > 0 { &c.i } else { &c.j };
            println!("  {} vs {}: {more} is more {}", c.i, c.j, store.styles().name(c.style));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
