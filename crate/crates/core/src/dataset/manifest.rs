use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{AnnotationStore, LabelCounts, Split, SplitAssignment, SplitFractions};
use crate::error::{Error, Result};
use crate::style::Styles;

pub const DATASET_VERSION: u32 = 1;
const DATASET_FORMAT: &str = "stylerank-dataset";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetImage {
    pub image_id: String,
    pub counts: Vec<u32>,
    pub split: Split,
}

/// Ingested dataset: label counts and split assignment per image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub version: u32,
    pub styles: Styles,
    pub experts: usize,
    pub split_seed: u64,
    pub fractions: SplitFractions,
    pub images: Vec<DatasetImage>,
}

impl DatasetManifest {
    pub fn new(
        store: &AnnotationStore,
        splits: &SplitAssignment,
        split_seed: u64,
        fractions: SplitFractions,
    ) -> Result<Self> {
        let images = store
            .images()
            .iter()
            .map(|c| {
                let split = splits
                    .get(&c.image_id)
                    .ok_or_else(|| Error::InvalidConfig(format!("image {:?} has no split", c.image_id)))?;
                Ok(DatasetImage {
                    image_id: c.image_id.clone(),
                    counts: c.counts.clone(),
                    split,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DatasetManifest {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            styles: store.styles().clone(),
            experts: store.experts(),
            split_seed,
            fractions,
            images,
        })
    }

    pub fn store(&self) -> Result<AnnotationStore> {
        AnnotationStore::from_counts(
            self.styles.clone(),
            self.experts,
            self.images.iter().map(|i| LabelCounts {
                image_id: i.image_id.clone(),
                counts: i.counts.clone(),
            }),
        )
    }

    pub fn splits(&self) -> SplitAssignment {
        SplitAssignment::from_map(
            self.images
                .iter()
                .map(|i| (i.image_id.clone(), i.split))
                .collect::<BTreeMap<_, _>>(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        if m.format != DATASET_FORMAT {
            return Err(Error::format(
                "dataset manifest",
                format!("unexpected format tag {:?}", m.format),
            ));
        }
        if m.version != DATASET_VERSION {
            return Err(Error::VersionMismatch {
                what: "dataset manifest",
                found: m.version,
                expected: DATASET_VERSION,
            });
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json("dataset manifest", e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}
