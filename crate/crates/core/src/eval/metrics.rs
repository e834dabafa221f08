//! Retrieval metrics with binary relevance.
//!
//! For a ranked list with relevance flags `rel[1..]` and `R` relevant items in
//! the corpus (the query itself excluded):
//!
//! - hit@k is 1 when some `rel[r]` with `r <= k` is set. recall@k is its mean
//!   over queries (a hit rate, not the fraction of relevant items found).
//! - AP@k is the mean of `precision@r` over the relevant ranks `r <= k`, and 0
//!   when the top k holds nothing relevant. Over the full ranking the number
//!   of relevant ranks is `R`.
//! - DCG@k = sum over `r <= k` of `rel[r] / log2(r + 1)`; IDCG@k is the same
//!   sum for `min(R, k)` leading relevant items; NDCG@k = DCG@k / IDCG@k.
//!
//! A cutoff of `None` means the full ranking.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedQuery {
    pub query_id: String,
    /// Relevance of each retrieved item, best-ranked first.
    pub relevance: Vec<bool>,
    /// Relevant items in the corpus, excluding the query.
    pub total_relevant: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RetrievalRun {
    pub queries: Vec<RankedQuery>,
    /// Queries dropped because nothing in the corpus was relevant to them.
    pub excluded: usize,
}

fn cut(rel: &[bool], cutoff: Option<usize>) -> &[bool] {
    match cutoff {
        Some(k) => &rel[..k.min(rel.len())],
        None => rel,
    }
}

pub fn hit_at_k(rel: &[bool], k: usize) -> bool {
    rel.iter().take(k).any(|r| *r)
}

pub fn average_precision(rel: &[bool], cutoff: Option<usize>) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (r, &is_rel) in cut(rel, cutoff).iter().enumerate() {
        if is_rel {
            hits += 1;
            sum += hits as f64 / (r + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

fn discount(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

pub fn ndcg(rel: &[bool], total_relevant: usize, cutoff: Option<usize>) -> f64 {
    let rel = cut(rel, cutoff);
    let dcg: f64 = rel
        .iter()
        .enumerate()
        .filter(|(_, r)| **r)
        .map(|(i, _)| discount(i + 1))
        .sum();
    let ideal_len = cutoff.map_or(total_relevant, |k| total_relevant.min(k));
    let idcg: f64 = (1..=ideal_len).map(discount).sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

impl RetrievalRun {
    fn mean(&self, f: impl Fn(&RankedQuery) -> f64) -> f64 {
        if self.queries.is_empty() {
            return 0.0;
        }
        self.queries.iter().map(f).sum::<f64>() / self.queries.len() as f64
    }

    pub fn recall_at_k(&self, k: usize) -> f64 {
        self.mean(|q| if hit_at_k(&q.relevance, k) { 1.0 } else { 0.0 })
    }

    pub fn mean_average_precision(&self, cutoff: Option<usize>) -> f64 {
        self.mean(|q| average_precision(&q.relevance, cutoff))
    }

    pub fn ndcg(&self, cutoff: Option<usize>) -> f64 {
        self.mean(|q| ndcg(&q.relevance, q.total_relevant, cutoff))
    }
}
