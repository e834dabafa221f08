use std::cmp::Ordering;

use crate::compat::embedding_distance;
use crate::dataset::{FeatureTable, StyleMembership};
use crate::error::{Error, Result};
use crate::eval::metrics::{RankedQuery, RetrievalRun};
use crate::style::StyleId;

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub image_id: String,
    pub distance: f32,
}

fn rank_all(embeddings: &FeatureTable, query: &str) -> Result<Vec<Neighbor>> {
    let q = embeddings
        .get(query)
        .ok_or_else(|| Error::MissingEmbedding(query.to_string()))?;
    let mut out = Vec::with_capacity(embeddings.len().saturating_sub(1));
    for (id, row) in embeddings.iter() {
        if id != query {
            out.push(Neighbor {
                image_id: id.to_string(),
                distance: embedding_distance(q, row)?,
            });
        }
    }
    out.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.image_id.cmp(&b.image_id))
            .then(Ordering::Equal)
    });
    Ok(out)
}

/// The `k` images nearest to `query` in embedding space, query excluded,
/// ties broken by image id.
pub fn retrieve_nearest(embeddings: &FeatureTable, query: &str, k: usize) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let mut all = rank_all(embeddings, query)?;
    all.truncate(k);
    Ok(all)
}

/// Ranks every labeled image against every other one.
///
/// The corpus is the set of images in `truth` that have an embedding; an
/// item is relevant to a query when they share a style. Queries with no
/// relevant item are dropped and counted in `excluded`.
pub fn retrieval_run(embeddings: &FeatureTable, truth: &StyleMembership) -> Result<RetrievalRun> {
    let mut labels: Vec<(&str, Vec<StyleId>)> = Vec::new();
    for (id, style) in &truth.entries {
        match labels.last_mut() {
            Some((last, styles)) if *last == id.as_str() => styles.push(*style),
            _ => labels.push((id.as_str(), vec![*style])),
        }
    }
    let mut corpus = FeatureTable::new(embeddings.dim());
    for (id, _) in &labels {
        corpus.push(*id, embeddings.require(id)?)?;
    }
    let styles_of = |id: &str| -> &[StyleId] {
        let p = labels
            .binary_search_by(|(l, _)| (*l).cmp(id))
            .expect("corpus id is labeled");
        &labels[p].1
    };

    let mut run = RetrievalRun::default();
    for (id, styles) in &labels {
        let relevant = |other: &str| styles_of(other).iter().any(|s| styles.contains(s));
        let ranked = rank_all(&corpus, id)?;
        let relevance: Vec<bool> = ranked.iter().map(|n| relevant(&n.image_id)).collect();
        let total_relevant = relevance.iter().filter(|r| **r).count();
        if total_relevant == 0 {
            run.excluded += 1;
            continue;
        }
        run.queries.push(RankedQuery {
            query_id: id.to_string(),
            relevance,
            total_relevant,
        });
    }
    if run.excluded > 0 {
        tracing::warn!(
            excluded = run.excluded,
            "queries without relevant items left out of retrieval metrics"
        );
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(points: &[(&str, f32)]) -> FeatureTable {
        let mut t = FeatureTable::new(1);
        for (id, x) in points {
            t.push(*id, &[*x]).unwrap();
        }
        t
    }

    #[test]
    fn nearest_excludes_query_and_breaks_ties_by_id() {
        let t = table(&[("q", 0.0), ("b", 1.0), ("a", -1.0), ("c", 3.0)]);
        let n = retrieve_nearest(&t, "q", 2).unwrap();
        assert_eq!(n[0].image_id, "a");
        assert_eq!(n[1].image_id, "b");
        assert_eq!(retrieve_nearest(&t, "q", 10).unwrap().len(), 3);
        assert!(retrieve_nearest(&t, "q", 0).is_err());
        assert!(retrieve_nearest(&t, "zz", 1).is_err());
    }

    #[test]
    fn lone_style_query_is_excluded() {
        let t = table(&[("a", 0.0), ("b", 0.1), ("c", 5.0)]);
        let truth = StyleMembership {
            entries: vec![
                ("a".into(), StyleId(0)),
                ("b".into(), StyleId(0)),
                ("c".into(), StyleId(1)),
            ],
        };
        let run = retrieval_run(&t, &truth).unwrap();
        assert_eq!(run.excluded, 1);
        assert_eq!(run.queries.len(), 2);
        assert_eq!(run.recall_at_k(1), 1.0);
    }
}
