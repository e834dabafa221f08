//! Synthetic images with latent style mixtures and a simulated expert panel.
//!
//! Each image draws a latent style mixture from a symmetric Dirichlet. Every
//! expert labels the image with the argmax of the mixture perturbed by
//! Gaussian noise, so the noise level controls expert disagreement. Features
//! are a fixed random linear map of the mixture plus Gaussian noise; this
//! stands in for a frozen image backbone.

use rand_distr::{Dirichlet, Distribution, Normal};

use crate::dataset::{Annotation, AnnotationStore, FeatureTable};
use crate::error::{Error, Result};
use crate::rng;
use crate::style::{StyleId, Styles};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub images: usize,
    pub experts: usize,
    pub styles: Styles,
    pub feature_dim: usize,
    /// Symmetric Dirichlet concentration of the latent mixture.
    pub concentration: f64,
    /// Std of the per-expert perturbation of the mixture before the argmax.
    pub expert_noise: f64,
    /// Std of the additive feature noise.
    pub feature_noise: f64,
    /// Gain of the mixture-to-feature projection.
    pub feature_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            images: 2000,
            experts: 10,
            styles: Styles::default(),
            feature_dim: 512,
            concentration: 0.5,
            expert_noise: 0.1,
            feature_noise: 0.05,
            feature_scale: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticImage {
    pub image_id: String,
    pub mixture: Vec<f64>,
}

impl SyntheticImage {
    /// Argmax of the latent mixture, lowest index on ties.
    pub fn true_style(&self) -> StyleId {
        let mut best = 0;
        for (l, &m) in self.mixture.iter().enumerate() {
            if m > self.mixture[best] {
                best = l;
            }
        }
        StyleId(best)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub styles: Styles,
    pub experts: usize,
    pub images: Vec<SyntheticImage>,
    pub annotations: Vec<Annotation>,
    pub features: FeatureTable,
}

impl SyntheticDataset {
    pub fn store(&self) -> Result<AnnotationStore> {
        let mut store = AnnotationStore::from_annotations(self.styles.clone(), self.annotations.iter().cloned())?;
        if store.experts() != self.experts {
            // Some experts may never have labeled anything in tiny datasets.
            store = AnnotationStore::from_counts(self.styles.clone(), self.experts, store.images().to_vec())?;
        }
        Ok(store)
    }

    /// Annotation rows as JSON Lines.
    pub fn annotations_jsonl(&self) -> String {
        let mut out = String::new();
        for a in &self.annotations {
            let row = serde_json::json!({
                "image_id": a.image_id,
                "expert_id": a.expert_id,
                "style": self.styles.name(a.style),
            });
            out.push_str(&row.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticDataset> {
    let styles = config.styles.len();
    if config.images == 0 || config.experts == 0 || config.feature_dim == 0 {
        return Err(Error::InvalidConfig("synthetic sizes must be positive".into()));
    }
    if config.concentration.is_nan()
        || config.concentration <= 0.0
        || config.expert_noise < 0.0
        || config.feature_noise < 0.0
    {
        return Err(Error::InvalidConfig("synthetic noise parameters out of range".into()));
    }
    let mut rng = rng::seeded(config.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let dirichlet =
        Dirichlet::new_with_size(config.concentration, styles).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    // Fixed projection from mixture space to feature space.
    let scale = 1.0 / (styles as f64).sqrt();
    let projection: Vec<f64> = (0..config.feature_dim * styles)
        .map(|_| std_normal.sample(&mut rng) * scale * config.feature_scale)
        .collect();

    let mut images = Vec::with_capacity(config.images);
    let mut annotations = Vec::with_capacity(config.images * config.experts);
    let mut features = FeatureTable::new(config.feature_dim);
    let width = (config.images - 1).to_string().len().max(5);
    let mut row = vec![0f32; config.feature_dim];
    for i in 0..config.images {
        let image_id = format!("img{i:0width$}");
        let mixture: Vec<f64> = dirichlet.sample(&mut rng);
        for e in 0..config.experts {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (l, &m) in mixture.iter().enumerate() {
                let score = m + config.expert_noise * std_normal.sample(&mut rng);
                if score > best_score {
                    best_score = score;
                    best = l;
                }
            }
            annotations.push(Annotation {
                image_id: image_id.clone(),
                expert_id: format!("expert{e:02}"),
                style: StyleId(best),
            });
        }
        for (k, v) in row.iter_mut().enumerate() {
            let signal: f64 = (0..styles).map(|l| projection[k * styles + l] * mixture[l]).sum();
            let noise = if config.feature_noise > 0.0 {
                config.feature_noise * std_normal.sample(&mut rng)
            } else {
                0.0
            };
            *v = (signal + noise) as f32;
        }
        features.push(image_id.clone(), &row)?;
        images.push(SyntheticImage { image_id, mixture });
    }
    Ok(SyntheticDataset {
        styles: config.styles.clone(),
        experts: config.experts,
        images,
        annotations,
        features,
    })
}
