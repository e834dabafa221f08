use crate::compat::Registry;
use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

/// Euclidean distance between two embeddings, accumulated in f64 and
/// rounded to f32.
pub fn embedding_distance(a: &[f32], b: &[f32]) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(euclidean(a, b))
}

pub(crate) fn euclidean(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = *x as f64 - *y as f64;
        acc += d * d;
    }
    acc.sqrt() as f32
}

/// Minimum distance over all cross pairs of two embedding sets.
pub(crate) fn min_cross_distance(left: &[&[f32]], right: &[&[f32]]) -> f32 {
    let mut best = f32::INFINITY;
    for a in left {
        for b in right {
            let d = euclidean(a, b);
            if d < best {
                best = d;
            }
        }
    }
    best
}

pub(crate) fn validated_embeddings<'a>(
    registry: &Registry,
    embeddings: &'a FeatureTable,
    furniture: &str,
) -> Result<Vec<&'a [f32]>> {
    let images = registry.validated_images(furniture)?;
    if images.is_empty() {
        return Err(Error::Unrankable(furniture.to_string()));
    }
    images
        .into_iter()
        .map(|img| {
            embeddings
                .get(img)
                .ok_or_else(|| Error::MissingEmbedding(img.to_string()))
        })
        .collect()
}

/// Style distance between two furniture items: the smallest embedding
/// distance between any validated image of one and any validated image of
/// the other.
///
/// Symmetric and zero for an item against itself, but not a metric: the
/// minimum over pairs can violate the triangle inequality.
pub fn furniture_distance(registry: &Registry, embeddings: &FeatureTable, a: &str, b: &str) -> Result<f32> {
    let left = validated_embeddings(registry, embeddings, a)?;
    let right = validated_embeddings(registry, embeddings, b)?;
    Ok(min_cross_distance(&left, &right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::{FurnitureItem, ValidationStatus};
    use proptest::prelude::*;

    #[test]
    fn pythagorean() {
        let mut b = [0f32; 16];
        b[0] = 3.0;
        b[1] = 4.0;
        assert_eq!(embedding_distance(&[0.0; 16], &b).unwrap(), 5.0);
        assert_eq!(embedding_distance(&b, &b).unwrap(), 0.0);
        assert!(embedding_distance(&b, &[0.0; 3]).is_err());
    }

    fn fixture() -> (Registry, FeatureTable) {
        let mut reg = Registry::new(vec![
            FurnitureItem {
                id: "x".into(),
                class_name: "sofa".into(),
                images: vec!["i1".into(), "shared".into()],
                thumbnail: None,
            },
            FurnitureItem {
                id: "y".into(),
                class_name: "chair".into(),
                images: vec!["shared".into(), "i2".into()],
                thumbnail: None,
            },
            FurnitureItem {
                id: "z".into(),
                class_name: "chair".into(),
                images: vec!["i3".into()],
                thumbnail: None,
            },
        ])
        .unwrap();
        for (img, f) in [("i1", "x"), ("shared", "x"), ("shared", "y"), ("i2", "y"), ("i3", "z")] {
            reg.record_validation(img, f, ValidationStatus::Similar).unwrap();
        }
        let mut emb = FeatureTable::new(2);
        emb.push("i1", &[0.0, 0.0]).unwrap();
        emb.push("shared", &[5.0, 5.0]).unwrap();
        emb.push("i2", &[1.0, 0.0]).unwrap();
        emb.push("i3", &[0.0, 2.0]).unwrap();
        (reg, emb)
    }

    #[test]
    fn shared_image_gives_zero() {
        let (reg, emb) = fixture();
        assert_eq!(furniture_distance(&reg, &emb, "x", "y").unwrap(), 0.0);
        assert_eq!(furniture_distance(&reg, &emb, "x", "x").unwrap(), 0.0);
    }

    #[test]
    fn single_images() {
        let (reg, emb) = fixture();
        assert_eq!(
            furniture_distance(&reg, &emb, "z", "y").unwrap(),
            embedding_distance(&[0.0, 2.0], &[1.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn unvalidated_images_do_not_count() {
        let (mut reg, emb) = fixture();
        reg.record_validation("shared", "y", ValidationStatus::Unknown).unwrap();
        assert_eq!(furniture_distance(&reg, &emb, "x", "y").unwrap(), 1.0);
        reg.record_validation("i3", "z", ValidationStatus::NotSimilar).unwrap();
        assert!(matches!(
            furniture_distance(&reg, &emb, "x", "z"),
            Err(Error::Unrankable(_))
        ));
    }

    #[test]
    fn missing_embedding() {
        let (reg, _) = fixture();
        let emb = FeatureTable::new(2);
        assert!(matches!(
            furniture_distance(&reg, &emb, "x", "z"),
            Err(Error::MissingEmbedding(_))
        ));
    }

    proptest! {
        #[test]
        fn symmetric_nonnegative(a in prop::collection::vec(prop::collection::vec(-10f32..10.0, 4), 1..5),
                                 b in prop::collection::vec(prop::collection::vec(-10f32..10.0, 4), 1..5)) {
            let left: Vec<&[f32]> = a.iter().map(Vec::as_slice).collect();
            let right: Vec<&[f32]> = b.iter().map(Vec::as_slice).collect();
            let d = min_cross_distance(&left, &right);
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, min_cross_distance(&right, &left));
            prop_assert_eq!(min_cross_distance(&left, &left), 0.0);
        }
    }
}
