//! Synthetic furniture catalogs with style-clustered image embeddings.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::compat::{FurnitureItem, Registry, ValidationStatus};
use crate::dataset::FeatureTable;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogConfig {
    pub items: usize,
    pub classes: Vec<String>,
    pub max_images_per_item: usize,
    pub embedding_dim: usize,
    /// Number of latent style clusters embeddings are drawn around.
    pub style_clusters: usize,
    /// Probability that an image association is validated as similar.
    pub similar_rate: f64,
    pub seed: u64,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        CatalogConfig {
            items: 200,
            classes: [
                "sofa",
                "coffee_table",
                "accent_chair",
                "dining_table",
                "dining_chair",
                "bed",
                "dresser",
                "lamp",
                "tv_stand",
                "ottoman",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            max_images_per_item: 4,
            embedding_dim: 16,
            style_clusters: 4,
            similar_rate: 0.85,
            seed: 0,
        }
    }
}

/// Builds a registry and an embedding table. Item `k` is named
/// `<class>_<k>`; its images are `<id>_img<j>`.
pub fn generate_catalog(config: &CatalogConfig) -> Result<(Registry, FeatureTable)> {
    if config.items == 0 || config.classes.is_empty() || config.max_images_per_item == 0 {
        return Err(Error::InvalidConfig("catalog sizes must be positive".into()));
    }
    let mut rng = rng::seeded(config.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let centers: Vec<Vec<f64>> = (0..config.style_clusters.max(1))
        .map(|_| (0..config.embedding_dim).map(|_| rng.gen_range(0.0..3.0)).collect())
        .collect();

    let mut items = Vec::with_capacity(config.items);
    let mut statuses = Vec::new();
    let mut embeddings = FeatureTable::new(config.embedding_dim);
    let mut row = vec![0f32; config.embedding_dim];
    for k in 0..config.items {
        let class = &config.classes[k % config.classes.len()];
        let id = format!("{class}_{k}");
        let center = &centers[rng.gen_range(0..centers.len())];
        let n_images = rng.gen_range(1..=config.max_images_per_item);
        let mut images = Vec::with_capacity(n_images);
        for j in 0..n_images {
            let img = format!("{id}_img{j}");
            for (v, c) in row.iter_mut().zip(center) {
                *v = (c + 0.4 * normal.sample(&mut rng)).max(0.0) as f32;
            }
            embeddings.push(img.clone(), &row)?;
            let status = if rng.gen_bool(config.similar_rate) {
                ValidationStatus::Similar
            } else if rng.gen_bool(0.5) {
                ValidationStatus::NotSimilar
            } else {
                ValidationStatus::Unknown
            };
            statuses.push((img.clone(), id.clone(), status));
            images.push(img);
        }
        items.push(FurnitureItem {
            thumbnail: Some(format!("thumbnails/{id}.png")),
            id,
            class_name: class.clone(),
            images,
        });
    }
    let mut registry = Registry::new(items)?;
    for (img, id, status) in statuses {
        registry.record_validation(&img, &id, status)?;
    }
    Ok((registry, embeddings))
}

/// Builds a registry whose items point at images of an existing feature
/// table, so embeddings come from a trained head rather than being drawn
/// directly. Items may share images, as furniture shares scene photos.
pub fn catalog_over_images(image_ids: &[String], config: &CatalogConfig) -> Result<Registry> {
    if config.items == 0 || config.classes.is_empty() || config.max_images_per_item == 0 || image_ids.is_empty() {
        return Err(Error::InvalidConfig("catalog sizes must be positive".into()));
    }
    let mut rng = rng::seeded(config.seed);
    let mut items = Vec::with_capacity(config.items);
    let mut statuses = Vec::new();
    for k in 0..config.items {
        let class = &config.classes[k % config.classes.len()];
        let id = format!("{class}_{k}");
        let n_images = rng.gen_range(1..=config.max_images_per_item.min(image_ids.len()));
        let images: Vec<String> = rand::seq::index::sample(&mut rng, image_ids.len(), n_images)
            .into_iter()
            .map(|i| image_ids[i].clone())
            .collect();
        for img in &images {
            let status = if rng.gen_bool(config.similar_rate) {
                ValidationStatus::Similar
            } else if rng.gen_bool(0.5) {
                ValidationStatus::NotSimilar
            } else {
                ValidationStatus::Unknown
            };
            statuses.push((img.clone(), id.clone(), status));
        }
        items.push(FurnitureItem {
            thumbnail: Some(format!("thumbnails/{id}.png")),
            id,
            class_name: class.clone(),
            images,
        });
    }
    let mut registry = Registry::new(items)?;
    for (img, id, status) in statuses {
        registry.record_validation(&img, &id, status)?;
    }
    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_catalog() {
        let cfg = CatalogConfig {
            items: 30,
            seed: 4,
            ..Default::default()
        };
        let (ra, ea) = generate_catalog(&cfg).unwrap();
        let (rb, eb) = generate_catalog(&cfg).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(ea, eb);
        assert_eq!(ra.len(), 30);
        assert!(ea.iter().all(|(_, v)| v.iter().all(|x| *x >= 0.0)));
    }

    #[test]
    fn catalog_uses_given_images() {
        let pool: Vec<String> = (0..20).map(|i| format!("img{i:02}")).collect();
        let cfg = CatalogConfig {
            items: 15,
            seed: 9,
            ..Default::default()
        };
        let reg = catalog_over_images(&pool, &cfg).unwrap();
        assert_eq!(reg, catalog_over_images(&pool, &cfg).unwrap());
        assert!(reg.items().iter().flat_map(|i| &i.images).all(|img| pool.contains(img)));
    }
}
