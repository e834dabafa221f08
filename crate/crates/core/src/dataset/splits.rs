use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidConfig(format!("unknown split {other:?}"))),
        }
    }
}

/// Target fractions for (train, validation, test).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions(pub [f64; 3]);

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions([0.8, 0.1, 0.1])
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidConfig("split fractions must be nonnegative".into()));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Split sizes by largest remainder: they sum to `n` and each is within
    /// one image of its target.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let targets: Vec<f64> = self.0.iter().map(|f| f * n as f64).collect();
        let mut sizes = [0usize; 3];
        for (s, t) in sizes.iter_mut().zip(&targets) {
            *s = t.floor() as usize;
        }
        let assigned: usize = sizes.iter().sum();
        let mut order = [0usize, 1, 2];
        // Larger remainder first, earlier split on ties.
        order.sort_by(|&a, &b| {
            let ra = targets[a] - targets[a].floor();
            let rb = targets[b] - targets[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            sizes[i] += 1;
        }
        sizes
    }
}

/// Image id to split, ordered by id.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitAssignment {
    assignment: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub fn from_map(assignment: BTreeMap<String, Split>) -> Self {
        SplitAssignment { assignment }
    }

    pub fn get(&self, image_id: &str) -> Option<Split> {
        self.assignment.get(image_id).copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Split)> {
        self.assignment.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn members(&self, split: Split) -> impl Iterator<Item = &str> {
        self.iter().filter(move |(_, s)| *s == split).map(|(k, _)| k)
    }

    pub fn sizes(&self) -> [usize; 3] {
        let mut sizes = [0; 3];
        for (_, s) in self.iter() {
            sizes[s as usize] += 1;
        }
        sizes
    }
}

/// Seeded shuffle of the sorted id set, cut into consecutive train,
/// validation and test blocks.
pub fn assign_splits<'a, I>(image_ids: I, fractions: SplitFractions, seed: u64) -> Result<SplitAssignment>
where
    I: IntoIterator<Item = &'a str>,
{
    fractions.validate()?;
    let mut ids: Vec<&str> = image_ids.into_iter().collect();
    ids.sort_unstable();
    ids.dedup();
    let wanted = fractions.0.iter().filter(|f| **f > 0.0).count();
    if ids.len() < wanted {
        return Err(Error::TooFewImages {
            images: ids.len(),
            splits: wanted,
        });
    }
    let sizes = fractions.sizes(ids.len());
    let mut rng = rng::seeded(seed);
    ids.shuffle(&mut rng);

    let mut assignment = BTreeMap::new();
    let mut it = ids.into_iter();
    for (split, size) in Split::ALL.into_iter().zip(sizes) {
        for id in it.by_ref().take(size) {
            assignment.insert(id.to_string(), split);
        }
    }
    Ok(SplitAssignment { assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img{i:05}")).collect()
    }

    #[test]
    fn ten_images() {
        let ids = ids(10);
        let a = assign_splits(ids.iter().map(String::as_str), SplitFractions::default(), 42).unwrap();
        assert_eq!(a.sizes(), [8, 1, 1]);
    }

    #[test]
    fn thousand_images() {
        let ids = ids(1000);
        let a = assign_splits(ids.iter().map(String::as_str), SplitFractions::default(), 42).unwrap();
        assert_eq!(a.sizes(), [800, 100, 100]);
    }

    #[test]
    fn deterministic_and_order_free() {
        let ids = ids(57);
        let a = assign_splits(ids.iter().map(String::as_str), SplitFractions::default(), 9).unwrap();
        let b = assign_splits(ids.iter().rev().map(String::as_str), SplitFractions::default(), 9).unwrap();
        assert_eq!(a, b);
        let c = assign_splits(ids.iter().map(String::as_str), SplitFractions::default(), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_images() {
        assert!(matches!(
            assign_splits(["a", "b"], SplitFractions::default(), 1),
            Err(Error::TooFewImages { images: 2, splits: 3 })
        ));
    }

    #[test]
    fn bad_fractions() {
        assert!(assign_splits(["a", "b", "c"], SplitFractions([0.5, 0.5, 0.5]), 1).is_err());
    }

    proptest! {
        #[test]
        fn sizes_within_one_of_target(n in 3usize..2000, a in 0.05f64..0.9, b in 0.0f64..1.0) {
            let b = b * (1.0 - a);
            let fr = SplitFractions([a, b, 1.0 - a - b]);
            let sizes = fr.sizes(n);
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            for (s, f) in sizes.iter().zip(fr.0) {
                prop_assert!((*s as f64 - f * n as f64).abs() < 1.0 + 1e-9);
            }
        }
    }
}
