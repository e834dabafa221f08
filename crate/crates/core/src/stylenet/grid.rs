use serde::{Deserialize, Serialize};

use crate::comparisons::{sample_comparisons, ComparisonConfig};
use crate::dataset::{AnnotationStore, FeatureTable, Split, SplitAssignment, StyleMembership};
use crate::error::{Error, Result};
use crate::rng;
use crate::stylenet::head::StyleHead;
use crate::stylenet::train::{accuracy, resolve_labeled, train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambdas: Vec<f64>,
    pub thresholds: Vec<u32>,
    pub comparison_counts: Vec<usize>,
}

impl GridSpec {
    /// Regularization and threshold ranges used for the original search; the
    /// comparison counts are scaled to the dataset by the caller.
    pub fn default_ranges(comparison_counts: Vec<usize>) -> Self {
        GridSpec {
            lambdas: vec![0.002, 0.0002, 0.00002],
            thresholds: vec![1, 2, 3],
            comparison_counts,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.thresholds.is_empty() || self.comparison_counts.is_empty() {
            return Err(Error::InvalidConfig("every grid axis needs at least one value".into()));
        }
        Ok(())
    }

    /// Cells in (lambda, t, n_c) nesting order.
    pub fn cells(&self) -> Vec<(f64, u32, usize)> {
        let mut out = Vec::new();
        for &lambda in &self.lambdas {
            for &t in &self.thresholds {
                for &n_c in &self.comparison_counts {
                    out.push((lambda, t, n_c));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub lambda: f64,
    pub t: u32,
    pub n_c: usize,
    /// Comparisons actually drawn (may be below `n_c` for small populations).
    pub comparisons: usize,
    pub val_acc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub cells: Vec<GridCell>,
    pub best: Option<usize>,
    pub best_head: Option<StyleHead>,
}

/// Index of the cell with the highest validation accuracy. Ties go to the
/// smaller lambda, then the smaller `n_c`, then the smaller `t`.
pub fn select_best(cells: &[GridCell]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in cells.iter().enumerate() {
        let Some(acc) = c.val_acc else { continue };
        let better = match best {
            None => true,
            Some(b) => {
                let cb = &cells[b];
                let bacc = cb.val_acc.unwrap_or(f64::NEG_INFINITY);
                acc > bacc || (acc == bacc && (c.lambda, c.n_c, c.t) < (cb.lambda, cb.n_c, cb.t))
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Trains one head per grid cell on freshly sampled training-split
/// comparisons and scores it on the validation set.
///
/// A failing cell is recorded with its error and the search continues.
pub fn grid_search(
    store: &AnnotationStore,
    splits: &SplitAssignment,
    features: &FeatureTable,
    validation: &StyleMembership,
    grid: &GridSpec,
    base: &TrainConfig,
) -> Result<GridOutcome> {
    grid.validate()?;
    base.validate()?;
    let labeled = resolve_labeled(features, validation)?;
    if labeled.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    let mut cells = Vec::new();
    let mut heads = Vec::new();
    for (n, (lambda, t, n_c)) in grid.cells().into_iter().enumerate() {
        let sample_seed = rng::derive_seed(base.seed, 0x6772_6964_0000 + n as u64);
        let comparison_config = ComparisonConfig {
            t,
            n_c,
            seed: sample_seed,
            split: Some(Split::Train),
        };
        let config = TrainConfig { lambda, ..base.clone() };
        let result = sample_comparisons(store, Some(splits), &comparison_config).and_then(|comps| {
            let out = train(features, &comps, Some(validation), store.styles().len(), &config)?;
            let acc = accuracy(&out.head, &labeled)?;
            Ok((comps.len(), acc, out.head))
        });
        match result {
            Ok((drawn, acc, head)) => {
                cells.push(GridCell {
                    lambda,
                    t,
                    n_c,
                    comparisons: drawn,
                    val_acc: Some(acc),
                    error: None,
                });
                heads.push(Some(head));
            }
            Err(e) => {
                tracing::warn!(lambda, t, n_c, error = %e, "grid cell failed");
                cells.push(GridCell {
                    lambda,
                    t,
                    n_c,
                    comparisons: 0,
                    val_acc: None,
                    error: Some(e.to_string()),
                });
                heads.push(None);
            }
        }
    }
    let best = select_best(&cells);
    let best_head = best.and_then(|b| heads[b].take());
    Ok(GridOutcome { cells, best, best_head })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(lambda: f64, t: u32, n_c: usize, acc: Option<f64>) -> GridCell {
        GridCell {
            lambda,
            t,
            n_c,
            comparisons: n_c,
            val_acc: acc,
            error: None,
        }
    }

    #[test]
    fn tie_breaking() {
        let cells = vec![
            cell(0.002, 1, 100, Some(0.8)),
            cell(0.0002, 3, 200, Some(0.8)),
            cell(0.0002, 2, 200, Some(0.8)),
            cell(0.0002, 1, 500, Some(0.8)),
            cell(0.00002, 1, 100, None),
        ];
        assert_eq!(select_best(&cells), Some(2));
        assert_eq!(select_best(&[cell(1.0, 1, 1, None)]), None);
        assert_eq!(select_best(&[cell(1.0, 1, 1, Some(0.1))]), Some(0));
    }

    #[test]
    fn default_ranges() {
        let g = GridSpec::default_ranges(vec![10]);
        assert_eq!(g.lambdas, vec![0.002, 0.0002, 0.00002]);
        assert_eq!(g.thresholds, vec![1, 2, 3]);
        assert_eq!(g.cells().len(), 9);
        assert!(GridSpec {
            lambdas: vec![],
            thresholds: vec![1],
            comparison_counts: vec![1]
        }
        .validate()
        .is_err());
    }
}
