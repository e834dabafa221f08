//! Comparison labels derived from expert label counts.
//!
//! For a style `l`, two images that both received at least one `l` label are
//! compared by how many `l` labels each received. If the difference exceeds
//! the threshold `t`, the pair becomes a signed comparison label; otherwise it
//! is discarded.
//!
//! Every unordered pair is stored once, with the lexicographically smaller
//! image id as `i`. The pairwise loss is symmetric under swapping `i` and `j`
//! and negating `y`, so the orientation carries no information.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::{AnnotationStore, LabelCounts, Split, SplitAssignment};
use crate::error::{Error, Result};
use crate::rng;
use crate::style::{StyleId, Styles};

/// Default label threshold.
pub const DEFAULT_THRESHOLD: u32 = 3;
/// Default image cap for [`enumerate_comparisons`].
pub const DEFAULT_ORACLE_CAP: usize = 1000;
/// Rejection-sampling attempts allowed per requested label.
pub const MAX_ATTEMPTS_PER_LABEL: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComparisonLabel {
    pub i: String,
    pub j: String,
    pub style: StyleId,
    /// `+1` when `i` carries more labels of `style` than `j`, `-1` otherwise.
    pub y: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonConfig {
    pub t: u32,
    pub n_c: usize,
    pub seed: u64,
    /// Restrict both endpoints to one split; `None` uses every image.
    pub split: Option<Split>,
}

impl ComparisonConfig {
    pub fn new(t: u32, n_c: usize, seed: u64) -> Self {
        ComparisonConfig {
            t,
            n_c,
            seed,
            split: Some(Split::Train),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_c == 0 {
            return Err(Error::InvalidConfig("n_c must be at least 1".into()));
        }
        Ok(())
    }
}

/// Signed label for a pair of counts, or `None` when the pair is discarded.
///
/// Both images must have at least one label for the style and the count
/// difference must strictly exceed `t`.
pub fn eligible_pair(count_i: u32, count_j: u32, t: u32) -> Option<i8> {
    if count_i == 0 || count_j == 0 {
        return None;
    }
    if count_i > count_j && count_i - count_j > t {
        Some(1)
    } else if count_j > count_i && count_j - count_i > t {
        Some(-1)
    } else {
        None
    }
}

fn candidates<'a>(
    store: &'a AnnotationStore,
    splits: Option<&SplitAssignment>,
    split: Option<Split>,
) -> Result<Vec<&'a LabelCounts>> {
    match split {
        None => Ok(store.images().iter().collect()),
        Some(s) => {
            let splits = splits
                .ok_or_else(|| Error::InvalidConfig(format!("split {s} requested but no split assignment given")))?;
            Ok(store
                .images()
                .iter()
                .filter(|c| splits.get(&c.image_id) == Some(s))
                .collect())
        }
    }
}

/// Number of unordered eligible pairs for one style among `images`.
fn style_population(images: &[&LabelCounts], style: StyleId, t: u32, experts: usize) -> u64 {
    let mut histogram = vec![0u64; experts + 1];
    for c in images {
        let n = c.get(style) as usize;
        if n >= histogram.len() {
            histogram.resize(n + 1, 0);
        }
        histogram[n] += 1;
    }
    let mut total = 0;
    for a in 1..histogram.len() {
        for b in (a + t as usize + 1)..histogram.len() {
            total += histogram[a] * histogram[b];
        }
    }
    total
}

/// Size of the eligible population `|D_c|` restricted to a split, computed
/// from count histograms without enumerating pairs.
pub fn population_size(
    store: &AnnotationStore,
    splits: Option<&SplitAssignment>,
    split: Option<Split>,
    t: u32,
) -> Result<u64> {
    let images = candidates(store, splits, split)?;
    Ok(store
        .styles()
        .ids()
        .map(|l| style_population(&images, l, t, store.experts()))
        .sum())
}

fn label(a: &LabelCounts, b: &LabelCounts, style: StyleId, t: u32) -> Option<ComparisonLabel> {
    let (first, second) = if a.image_id <= b.image_id { (a, b) } else { (b, a) };
    eligible_pair(first.get(style), second.get(style), t).map(|y| ComparisonLabel {
        i: first.image_id.clone(),
        j: second.image_id.clone(),
        style,
        y,
    })
}

fn enumerate_all(images: &[&LabelCounts], styles: usize, t: u32) -> Vec<ComparisonLabel> {
    let mut out = Vec::new();
    for l in (0..styles).map(StyleId) {
        let labeled: Vec<&LabelCounts> = images.iter().copied().filter(|c| c.get(l) > 0).collect();
        for (a, ca) in labeled.iter().enumerate() {
            for cb in &labeled[a + 1..] {
                if let Some(lab) = label(ca, cb, l, t) {
                    out.push(lab);
                }
            }
        }
    }
    out
}

/// Draws `min(n_c, |D_c|)` comparison labels uniformly without replacement.
///
/// Small requests use rejection sampling: a style is chosen with probability
/// proportional to the number of pairs among images labeled with it, then a
/// uniform pair of those images is tested for eligibility and novelty. Every
/// eligible `(pair, style)` is equally likely on each attempt. When the
/// request covers at least half the population, the population is enumerated
/// and a uniform subset is taken instead, which costs at most twice the output.
pub fn sample_comparisons(
    store: &AnnotationStore,
    splits: Option<&SplitAssignment>,
    config: &ComparisonConfig,
) -> Result<Vec<ComparisonLabel>> {
    config.validate()?;
    let images = candidates(store, splits, config.split)?;
    let population = population_size(store, splits, config.split, config.t)?;
    if population == 0 {
        return Err(Error::EmptyPopulation);
    }
    let mut rng = rng::seeded(config.seed);

    if (config.n_c as u64).saturating_mul(2) >= population {
        let mut all = enumerate_all(&images, store.styles().len(), config.t);
        debug_assert_eq!(all.len() as u64, population);
        let take = config.n_c.min(all.len());
        let (chosen, _) = all.partial_shuffle(&mut rng, take);
        return Ok(chosen.to_vec());
    }

    let labeled: Vec<Vec<&LabelCounts>> = store
        .styles()
        .ids()
        .map(|l| images.iter().copied().filter(|c| c.get(l) > 0).collect())
        .collect();
    let weights: Vec<u64> = labeled
        .iter()
        .map(|v| {
            let m = v.len() as u64;
            m * m.saturating_sub(1) / 2
        })
        .collect();
    let total_weight: u64 = weights.iter().sum();

    let want = config.n_c;
    let max_attempts = MAX_ATTEMPTS_PER_LABEL * want as u64;
    let mut seen: HashSet<(usize, usize, usize)> = HashSet::with_capacity(want);
    let mut out = Vec::with_capacity(want);
    let mut attempts = 0u64;
    while out.len() < want {
        if attempts >= max_attempts {
            return Err(Error::PopulationTooSparse {
                drawn: out.len(),
                requested: want,
                attempts,
            });
        }
        attempts += 1;
        let mut r = rng.gen_range(0..total_weight);
        let mut style = 0;
        while r >= weights[style] {
            r -= weights[style];
            style += 1;
        }
        let pool = &labeled[style];
        let a = rng.gen_range(0..pool.len());
        let mut b = rng.gen_range(0..pool.len() - 1);
        if b >= a {
            b += 1;
        }
        let key = (a.min(b), a.max(b), style);
        if seen.contains(&key) {
            continue;
        }
        if let Some(lab) = label(pool[a], pool[b], StyleId(style), config.t) {
            seen.insert(key);
            out.push(lab);
        }
    }
    Ok(out)
}

/// Full `D_c` for one style within a split, by brute force over all pairs.
/// Intended as an oracle on small image sets.
pub fn enumerate_comparisons(
    store: &AnnotationStore,
    splits: Option<&SplitAssignment>,
    split: Option<Split>,
    style: StyleId,
    t: u32,
    cap: usize,
) -> Result<Vec<ComparisonLabel>> {
    let images = candidates(store, splits, split)?;
    if images.len() > cap {
        return Err(Error::OracleCapExceeded {
            images: images.len(),
            cap,
        });
    }
    let mut out = Vec::new();
    for (a, ca) in images.iter().enumerate() {
        for cb in &images[a + 1..] {
            if let Some(lab) = label(ca, cb, style, t) {
                out.push(lab);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ComparisonRow {
    i: String,
    j: String,
    style: String,
    y: i8,
}

pub fn write_jsonl<W: Write>(labels: &[ComparisonLabel], styles: &Styles, mut w: W) -> Result<()> {
    for c in labels {
        let row = ComparisonRow {
            i: c.i.clone(),
            j: c.j.clone(),
            style: styles.name(c.style).to_string(),
            y: c.y,
        };
        let line = serde_json::to_string(&row).map_err(|e| Error::json("comparison row", e))?;
        writeln!(w, "{line}").map_err(|e| Error::io("<writer>", e))?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))
}

pub fn read_jsonl<R: BufRead>(r: R, styles: &Styles) -> Result<Vec<ComparisonLabel>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let malformed = |message: String| Error::MalformedRow { line: n + 1, message };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ComparisonRow = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if row.y != 1 && row.y != -1 {
            return Err(malformed(format!("y must be +1 or -1, got {}", row.y)));
        }
        if row.i == row.j {
            return Err(malformed("self-comparison".into()));
        }
        out.push(ComparisonLabel {
            i: row.i,
            j: row.j,
            style: styles.parse(&row.style)?,
            y: row.y,
        });
    }
    Ok(out)
}
