// Furniture distances, the precomputed index, and the three suggestion
// strategies: single seed, multi-seed scene, and scene energy.

use std::error::Error;

use stylerank::compat::synthetic::{generate_catalog, CatalogConfig};
use stylerank::compat::{furniture_distance, CompatibilityIndex, ValidationStatus};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (mut registry, embeddings) = generate_catalog(&CatalogConfig {
        items: 120,
        seed: 3,
        ..Default::default()
    })?;
    let (ok, total) = registry.validation_yield();
    println!("{ok} of {total} items have a validated image");

    let index = CompatibilityIndex::build(&registry, &embeddings)?;
    let seed = index.items()[0].id.clone();
    println!("index generation {} over {} items", index.generation_hex(), index.len());

    let direct = furniture_distance(&registry, &embeddings, &seed, &index.items()[1].id)?;
    assert_eq!(direct, index.distance(&seed, &index.items()[1].id)?);

    println!("coffee tables for {seed}:");
    for s in index.rank_single_seed(&seed, "coffee_table", 3)? {
        println!("  {:<16} {:.3}", s.furniture_id, s.distance);
    }

    let scene: Vec<String> = index.items().iter().take(3).map(|i| i.id.clone()).collect();
    let lamps = index.rank_multi_seed(&scene, "lamp", 3)?;
    println!(
        "lamps for scene {scene:?}: {:?}",
        lamps.iter().map(|s| &s.furniture_id).collect::<Vec<_>>()
    );
    println!("scene energy {:.3}", index.scene_energy(&scene)?);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("index.bin");
    index.save(&path)?;
    let loaded = CompatibilityIndex::load(&path)?;
    loaded.check_fresh(&registry)?;

    // A new validation verdict invalidates the saved index.
    let item = registry.items()[0].clone();
    registry.record_validation(&item.images[0], &item.id, ValidationStatus::NotSimilar)?;
    match loaded.check_fresh(&registry) {
        Err(e) => println!("after re-validation: {e}"),
        Ok(()) => println!("index still fresh"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
