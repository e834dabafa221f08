//! Suggestion strategies over a [`CompatibilityIndex`].
//!
//! All rankings sort ascending by score and break ties by furniture id.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::compat::CompatibilityIndex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub furniture_id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    pub distance: f64,
}

/// Default suggestion list length.
pub const DEFAULT_K: usize = 150;

fn top_k(index: &CompatibilityIndex, mut scored: Vec<(f64, usize)>, k: usize) -> Vec<Suggestion> {
    let items = index.items();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
        a.0.total_cmp(&b.0).then_with(|| items[a.1].id.cmp(&items[b.1].id))
    };
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    scored
        .into_iter()
        .map(|(d, p)| Suggestion {
            furniture_id: items[p].id.clone(),
            class_name: items[p].class_name.clone(),
            distance: d,
        })
        .collect()
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    Ok(())
}

/// Distinct scene members in first-appearance order.
fn scene_positions<S: AsRef<str>>(index: &CompatibilityIndex, scene: &[S]) -> Result<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for id in scene {
        let p = index.position(id.as_ref())?;
        if seen.insert(p) {
            out.push(p);
        }
    }
    Ok(out)
}

impl CompatibilityIndex {
    /// Items of `class_name` closest in style to the seed, seed excluded.
    pub fn rank_single_seed(&self, seed: &str, class_name: &str, k: usize) -> Result<Vec<Suggestion>> {
        check_k(k)?;
        let s = self.position(seed)?;
        let scored = self
            .class_members(class_name)?
            .iter()
            .filter(|&&c| c != s)
            .map(|&c| (self.distance_at(c, s) as f64, c))
            .collect();
        Ok(top_k(self, scored, k))
    }

    /// Items of `class_name` ranked by the summed distance to every scene
    /// member. The scene is treated as a set; its members are not suggested.
    pub fn rank_multi_seed<S: AsRef<str>>(&self, scene: &[S], class_name: &str, k: usize) -> Result<Vec<Suggestion>> {
        check_k(k)?;
        if scene.is_empty() {
            return Err(Error::EmptyScene);
        }
        let members = scene_positions(self, scene)?;
        let excluded: HashSet<usize> = members.iter().copied().collect();
        let scored = self
            .class_members(class_name)?
            .iter()
            .filter(|c| !excluded.contains(c))
            .map(|&c| {
                let total: f64 = members.iter().map(|&m| self.distance_at(c, m) as f64).sum();
                (total, c)
            })
            .collect();
        Ok(top_k(self, scored, k))
    }

    /// Sum of distances over unordered pairs of distinct scene members.
    /// Lower is more coherent; empty and single-item scenes score 0.
    pub fn scene_energy<S: AsRef<str>>(&self, scene: &[S]) -> Result<f64> {
        let members = scene_positions(self, scene)?;
        let mut total = 0.0;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                total += self.distance_at(i, j) as f64;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::{FurnitureItem, Registry, ValidationStatus};
    use crate::dataset::FeatureTable;

    /// Items on a line: id `p{x}` at coordinate x.
    fn line(points: &[(&str, &str, f32)]) -> CompatibilityIndex {
        let items = points
            .iter()
            .map(|(id, class, _)| FurnitureItem {
                id: id.to_string(),
                class_name: class.to_string(),
                images: vec![format!("img_{id}")],
                thumbnail: None,
            })
            .collect();
        let mut reg = Registry::new(items).unwrap();
        let mut emb = FeatureTable::new(1);
        for (id, _, x) in points {
            reg.record_validation(&format!("img_{id}"), id, ValidationStatus::Similar)
                .unwrap();
            emb.push(format!("img_{id}"), &[*x]).unwrap();
        }
        CompatibilityIndex::build(&reg, &emb).unwrap()
    }

    #[test]
    fn single_candidate() {
        let idx = line(&[("seed", "sofa", 0.0), ("t1", "table", 100.0)]);
        let r = idx.rank_single_seed("seed", "table", 5).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].furniture_id, "t1");
        assert_eq!(r[0].distance, 100.0);
    }

    #[test]
    fn ordering_ties_and_truncation() {
        let idx = line(&[
            ("seed", "chair", 0.0),
            ("c", "chair", 2.0),
            ("a", "chair", -2.0),
            ("b", "chair", 1.0),
            ("d", "chair", 5.0),
        ]);
        let r = idx.rank_single_seed("seed", "chair", 3).unwrap();
        let ids: Vec<&str> = r.iter().map(|s| s.furniture_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "a", "c"]);
        assert_eq!(idx.rank_single_seed("seed", "chair", 50).unwrap().len(), 4);
    }

    #[test]
    fn errors() {
        let idx = line(&[("seed", "chair", 0.0), ("b", "chair", 1.0)]);
        assert!(matches!(
            idx.rank_single_seed("nope", "chair", 1),
            Err(Error::UnknownItem(_))
        ));
        assert!(matches!(
            idx.rank_single_seed("seed", "bed", 1),
            Err(Error::UnknownClass(_))
        ));
        assert!(idx.rank_single_seed("seed", "chair", 0).is_err());
        let empty: [&str; 0] = [];
        assert!(matches!(
            idx.rank_multi_seed(&empty, "chair", 1),
            Err(Error::EmptyScene)
        ));
    }

    #[test]
    fn singleton_scene_matches_single_seed() {
        let idx = line(&[
            ("seed", "sofa", 0.3),
            ("x", "table", 2.0),
            ("y", "table", -1.0),
            ("z", "table", 0.5),
        ]);
        assert_eq!(
            idx.rank_multi_seed(&["seed"], "table", 10).unwrap(),
            idx.rank_single_seed("seed", "table", 10).unwrap()
        );
    }

    #[test]
    fn scene_members_excluded_and_energy() {
        let idx = line(&[("a", "t", 0.0), ("b", "t", 1.0), ("c", "t", 3.0), ("d", "t", 7.0)]);
        let r = idx.rank_multi_seed(&["a", "b"], "t", 10).unwrap();
        let ids: Vec<&str> = r.iter().map(|s| s.furniture_id.as_str()).collect();
        assert_eq!(ids, vec!["c", "d"]);
        assert_eq!(r[0].distance, 3.0 + 2.0);
        assert_eq!(idx.scene_energy(&["a"]).unwrap(), 0.0);
        let empty: [&str; 0] = [];
        assert_eq!(idx.scene_energy(&empty).unwrap(), 0.0);
        assert_eq!(idx.scene_energy(&["a", "c"]).unwrap(), 3.0);
        assert_eq!(idx.scene_energy(&["a", "b", "c"]).unwrap(), 1.0 + 3.0 + 2.0);
        // Repeats collapse: the scene is a set.
        assert_eq!(idx.scene_energy(&["a", "b", "a"]).unwrap(), 1.0);
    }
}
