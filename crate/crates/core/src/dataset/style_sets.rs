use serde::{Deserialize, Serialize};

use crate::dataset::AnnotationStore;
use crate::error::{Error, Result};
use crate::style::StyleId;

/// Minimum label count per style for membership in a style set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSetSpec {
    pub l_min: Vec<u32>,
}

impl ValidationSetSpec {
    /// Every style with at least one label: the full set `D_s`.
    pub fn all_labels(styles: usize) -> Self {
        ValidationSetSpec { l_min: vec![1; styles] }
    }

    /// High-agreement thresholds for the canonical four styles:
    /// Modern 10, Traditional 8, Cottage 7, Coastal 7.
    pub fn clean_default() -> Self {
        ValidationSetSpec {
            l_min: vec![10, 8, 7, 7],
        }
    }

    pub fn validate(&self, styles: usize, experts: usize) -> Result<()> {
        if self.l_min.len() != styles {
            return Err(Error::ShapeMismatch {
                expected: styles,
                found: self.l_min.len(),
            });
        }
        if let Some(bad) = self.l_min.iter().find(|&&l| l < 1 || l as usize > experts) {
            return Err(Error::InvalidConfig(format!("l_min {bad} outside [1, {experts}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipRule {
    /// `(i, l)` for every style meeting its threshold; an image may appear
    /// under several styles.
    Threshold,
    /// Only the image's unique argmax-count style, if it meets its threshold.
    /// Images whose maximum count is shared by two styles are left out.
    SingleArgmax,
}

/// Set of `(image, style)` memberships, sorted by image id then style.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StyleMembership {
    pub entries: Vec<(String, StyleId)>,
}

impl StyleMembership {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, image_id: &str, style: StyleId) -> bool {
        self.entries
            .binary_search_by(|(i, s)| i.as_str().cmp(image_id).then(s.cmp(&style)))
            .is_ok()
    }

    pub fn retain_images<F: Fn(&str) -> bool>(&self, keep: F) -> StyleMembership {
        StyleMembership {
            entries: self.entries.iter().filter(|(i, _)| keep(i)).cloned().collect(),
        }
    }
}

pub fn build_style_set(
    store: &AnnotationStore,
    spec: &ValidationSetSpec,
    rule: MembershipRule,
) -> Result<StyleMembership> {
    spec.validate(store.styles().len(), store.experts().max(1))?;
    let mut entries = Vec::new();
    for c in store.images() {
        match rule {
            MembershipRule::Threshold => {
                for (l, (&n, &min)) in c.counts.iter().zip(&spec.l_min).enumerate() {
                    if n >= min {
                        entries.push((c.image_id.clone(), StyleId(l)));
                    }
                }
            }
            MembershipRule::SingleArgmax => {
                if let Some(l) = unique_argmax(&c.counts) {
                    if c.counts[l] >= spec.l_min[l] {
                        entries.push((c.image_id.clone(), StyleId(l)));
                    }
                }
            }
        }
    }
    Ok(StyleMembership { entries })
}

/// Single ground-truth style per image: unique argmax that clears its threshold.
pub fn clean_ground_truth(store: &AnnotationStore, spec: &ValidationSetSpec) -> Result<StyleMembership> {
    build_style_set(store, spec, MembershipRule::SingleArgmax)
}

fn unique_argmax(counts: &[u32]) -> Option<usize> {
    let max = *counts.iter().max()?;
    let mut it = counts.iter().enumerate().filter(|(_, &c)| c == max);
    let (first, _) = it.next()?;
    if it.next().is_some() {
        None
    } else {
        Some(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabelCounts;
    use crate::style::Styles;
    use proptest::prelude::*;

    fn store(rows: &[(&str, [u32; 4])]) -> AnnotationStore {
        AnnotationStore::from_counts(
            Styles::default(),
            10,
            rows.iter().map(|(id, c)| LabelCounts {
                image_id: id.to_string(),
                counts: c.to_vec(),
            }),
        )
        .unwrap()
    }

    #[test]
    fn clean_thresholds() {
        let s = store(&[("a", [0, 10, 0, 0])]);
        let clean = clean_ground_truth(&s, &ValidationSetSpec::clean_default()).unwrap();
        assert!(!clean.contains("a", StyleId::MODERN));
        assert!(clean.contains("a", StyleId::TRADITIONAL));
    }

    #[test]
    fn all_ones_multi_membership() {
        let s = store(&[("a", [1, 1, 1, 1])]);
        let ds = build_style_set(&s, &ValidationSetSpec::all_labels(4), MembershipRule::Threshold).unwrap();
        assert_eq!(ds.len(), 4);
    }

    #[test]
    fn argmax_tie_excluded() {
        let s = store(&[("a", [5, 5, 0, 0])]);
        assert!(clean_ground_truth(&s, &ValidationSetSpec::clean_default())
            .unwrap()
            .is_empty());
        let lax = ValidationSetSpec { l_min: vec![1; 4] };
        assert!(clean_ground_truth(&s, &lax).unwrap().is_empty());
    }

    #[test]
    fn spec_validation() {
        let s = store(&[("a", [1, 0, 0, 0])]);
        let bad = ValidationSetSpec {
            l_min: vec![0, 1, 1, 1],
        };
        assert!(build_style_set(&s, &bad, MembershipRule::Threshold).is_err());
        let bad = ValidationSetSpec {
            l_min: vec![11, 1, 1, 1],
        };
        assert!(build_style_set(&s, &bad, MembershipRule::Threshold).is_err());
    }

    proptest! {
        #[test]
        fn clean_implies_full(rows in prop::collection::vec(prop::collection::vec(0u32..4, 4), 1..40)) {
            let rows: Vec<LabelCounts> = rows.into_iter().enumerate()
                .map(|(i, c)| LabelCounts { image_id: format!("i{i:03}"), counts: c })
                .collect();
            let s = AnnotationStore::from_counts(Styles::default(), 12, rows).unwrap();
            let spec = ValidationSetSpec { l_min: vec![2, 2, 1, 3] };
            let full = build_style_set(&s, &ValidationSetSpec::all_labels(4), MembershipRule::Threshold).unwrap();
            let clean = clean_ground_truth(&s, &spec).unwrap();
            let mut seen = std::collections::HashSet::new();
            for (i, l) in &clean.entries {
                prop_assert!(full.contains(i, *l));
                prop_assert!(seen.insert(i.clone()));
            }
        }
    }
}
