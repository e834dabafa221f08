use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FurnitureItem {
    pub id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    pub images: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thumbnail: Option<String>,
}

/// Outcome of comparing a furniture model with one scene image it appears in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Similar,
    NotSimilar,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub image: String,
    pub furniture: String,
    pub status: ValidationStatus,
}

#[derive(Serialize, Deserialize)]
struct RegistryFile {
    furniture: Vec<FurnitureItem>,
    #[serde(default)]
    validations: Vec<ValidationRecord>,
}

/// Furniture catalog plus the visual-validation status of every
/// (image, furniture) association. Unrecorded pairs are `Unknown`.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    items: Vec<FurnitureItem>,
    positions: HashMap<String, usize>,
    // (furniture, image) -> status
    statuses: BTreeMap<(String, String), ValidationStatus>,
}

impl Registry {
    pub fn new(items: Vec<FurnitureItem>) -> Result<Self> {
        let mut positions = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if positions.insert(item.id.clone(), i).is_some() {
                return Err(Error::format(
                    "registry",
                    format!("duplicate furniture id {:?}", item.id),
                ));
            }
            let unique: BTreeSet<&String> = item.images.iter().collect();
            if unique.len() != item.images.len() {
                return Err(Error::format(
                    "registry",
                    format!("duplicate image in furniture {:?}", item.id),
                ));
            }
        }
        Ok(Registry {
            items,
            positions,
            statuses: BTreeMap::new(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RegistryFile = serde_json::from_str(text).map_err(|e| Error::json("registry", e))?;
        let mut reg = Registry::new(file.furniture)?;
        for v in file.validations {
            reg.record_validation(&v.image, &v.furniture, v.status)?;
        }
        Ok(reg)
    }

    /// Canonical JSON: items in catalog order, validations sorted by
    /// furniture then image.
    pub fn to_json(&self) -> Result<String> {
        let file = RegistryFile {
            furniture: self.items.clone(),
            validations: self.validation_records(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::json("registry", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the canonical JSON. Any validation edit changes it, which
    /// marks indexes built from the previous state as stale.
    pub fn fingerprint(&self) -> String {
        let json = self.to_json().expect("registry serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    pub fn items(&self) -> &[FurnitureItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item(&self, id: &str) -> Option<&FurnitureItem> {
        self.positions.get(id).map(|&i| &self.items[i])
    }

    pub fn classes(&self) -> BTreeSet<&str> {
        self.items.iter().map(|i| i.class_name.as_str()).collect()
    }

    pub fn status(&self, image: &str, furniture: &str) -> ValidationStatus {
        self.statuses
            .get(&(furniture.to_string(), image.to_string()))
            .copied()
            .unwrap_or_default()
    }

    /// Last write wins.
    pub fn record_validation(&mut self, image: &str, furniture: &str, status: ValidationStatus) -> Result<()> {
        let known = self
            .item(furniture)
            .is_some_and(|item| item.images.iter().any(|i| i == image));
        if !known {
            return Err(Error::UnknownPair {
                image: image.to_string(),
                furniture: furniture.to_string(),
            });
        }
        self.statuses.insert((furniture.to_string(), image.to_string()), status);
        Ok(())
    }

    pub fn validation_records(&self) -> Vec<ValidationRecord> {
        self.statuses
            .iter()
            .map(|((furniture, image), status)| ValidationRecord {
                image: image.clone(),
                furniture: furniture.clone(),
                status: *status,
            })
            .collect()
    }

    /// Images marked `Similar` for an item, in catalog order. Only these
    /// take part in furniture distances.
    pub fn validated_images(&self, furniture: &str) -> Result<Vec<&str>> {
        let item = self
            .item(furniture)
            .ok_or_else(|| Error::UnknownItem(furniture.to_string()))?;
        Ok(item
            .images
            .iter()
            .filter(|img| self.status(img, furniture) == ValidationStatus::Similar)
            .map(String::as_str)
            .collect())
    }

    pub fn is_rankable(&self, furniture: &str) -> bool {
        self.validated_images(furniture).is_ok_and(|v| !v.is_empty())
    }

    /// (items with at least one validated image, all items).
    pub fn validation_yield(&self) -> (usize, usize) {
        let ok = self.items.iter().filter(|i| self.is_rankable(&i.id)).count();
        (ok, self.items.len())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> Registry {
        Registry::new(vec![
            FurnitureItem {
                id: "sofa_1".into(),
                class_name: "sofa".into(),
                images: vec!["a".into(), "b".into()],
                thumbnail: None,
            },
            FurnitureItem {
                id: "table_1".into(),
                class_name: "coffee table".into(),
                images: vec!["c".into()],
                thumbnail: Some("thumbs/table_1.png".into()),
            },
        ])
        .unwrap()
    }

    #[test]
    fn last_write_wins() {
        let mut r = registry();
        assert_eq!(r.status("a", "sofa_1"), ValidationStatus::Unknown);
        r.record_validation("a", "sofa_1", ValidationStatus::Similar).unwrap();
        r.record_validation("a", "sofa_1", ValidationStatus::NotSimilar)
            .unwrap();
        assert_eq!(r.status("a", "sofa_1"), ValidationStatus::NotSimilar);
    }

    #[test]
    fn only_image_rejected_makes_item_unrankable() {
        let mut r = registry();
        r.record_validation("c", "table_1", ValidationStatus::Similar).unwrap();
        assert!(r.is_rankable("table_1"));
        let before = r.fingerprint();
        r.record_validation("c", "table_1", ValidationStatus::NotSimilar)
            .unwrap();
        assert!(!r.is_rankable("table_1"));
        assert_ne!(before, r.fingerprint());
    }

    #[test]
    fn unknown_pair() {
        let mut r = registry();
        assert!(matches!(
            r.record_validation("c", "sofa_1", ValidationStatus::Similar),
            Err(Error::UnknownPair { .. })
        ));
        assert!(matches!(
            r.record_validation("a", "nope", ValidationStatus::Similar),
            Err(Error::UnknownPair { .. })
        ));
    }

    #[test]
    fn json_format() {
        let mut r = registry();
        r.record_validation("b", "sofa_1", ValidationStatus::Similar).unwrap();
        let back = Registry::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["furniture"][1]["class"], "coffee table");
        assert_eq!(v["validations"][0]["status"], "similar");
        assert_eq!(v["validations"][0]["image"], "b");
    }

    #[test]
    fn yield_statistic() {
        let mut items = Vec::new();
        for i in 0..1911 {
            items.push(FurnitureItem {
                id: format!("m{i}"),
                class_name: "chair".into(),
                images: vec![format!("img{i}")],
                thumbnail: None,
            });
        }
        let mut r = Registry::new(items).unwrap();
        for i in 0..1148 {
            r.record_validation(&format!("img{i}"), &format!("m{i}"), ValidationStatus::Similar)
                .unwrap();
        }
        for i in 1148..1911 {
            let status = if i % 2 == 0 {
                ValidationStatus::NotSimilar
            } else {
                ValidationStatus::Unknown
            };
            r.record_validation(&format!("img{i}"), &format!("m{i}"), status)
                .unwrap();
        }
        let (ok, total) = r.validation_yield();
        assert_eq!((ok, total), (1148, 1911));
        assert_eq!((100.0 * ok as f64 / total as f64).round(), 60.0);
    }
}
