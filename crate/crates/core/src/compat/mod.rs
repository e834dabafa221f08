//! Furniture registry, visual validation, style distances between furniture
//! items, and the precomputed index that serves suggestions.

mod distance;
mod index;
mod rank;
mod registry;
mod scene;
pub mod synthetic;

pub use distance::{embedding_distance, furniture_distance};
pub use index::{CompatibilityIndex, IndexManifest, IndexedItem, INDEX_MAGIC, INDEX_VERSION};
pub use rank::{Suggestion, DEFAULT_K};
pub use registry::{FurnitureItem, Registry, ValidationRecord, ValidationStatus};
pub use scene::{Placement, Scene};

use crate::dataset::FeatureTable;
use crate::error::Result;
use crate::stylenet::StyleHead;

/// Style embeddings for every image in a feature table.
pub fn embed_table(head: &StyleHead, features: &FeatureTable) -> Result<FeatureTable> {
    let mut out = FeatureTable::new(head.hidden_dim());
    let mut row = vec![0f32; head.hidden_dim()];
    for (id, x) in features.iter() {
        let e = head.embed(x)?;
        for (r, v) in row.iter_mut().zip(&e) {
            *r = *v as f32;
        }
        out.push(id, &row)?;
    }
    Ok(out)
}
