use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::comparisons::ComparisonLabel;
use crate::dataset::{FeatureTable, StyleMembership};
use crate::error::{Error, Result};
use crate::rng;
use crate::style::StyleId;
use crate::stylenet::gradient::{batch_gradient, PairExample};
use crate::stylenet::head::{Params, ScoreSource, StyleHead, DEFAULT_HIDDEN};
use crate::stylenet::rmsprop::RmsProp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// L2 coefficient applied to every parameter block.
    pub lambda: f64,
    pub rmsprop_decay: f64,
    pub rmsprop_epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub seed: u64,
    pub hidden_dim: usize,
    pub score_source: ScoreSource,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            lambda: 0.0,
            rmsprop_decay: 0.9,
            rmsprop_epsilon: 1e-8,
            batch_size: 256,
            max_epochs: 100,
            early_stop_patience: 10,
            seed: 0,
            hidden_dim: DEFAULT_HIDDEN,
            score_source: ScoreSource::Probability,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return fail("learning_rate must be positive");
        }
        if !(self.rmsprop_decay > 0.0 && self.rmsprop_decay < 1.0) {
            return fail("rmsprop_decay must lie in (0, 1)");
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return fail("lambda must be nonnegative");
        }
        if self.rmsprop_epsilon.is_nan() || self.rmsprop_epsilon < 0.0 {
            return fail("rmsprop_epsilon must be nonnegative");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if self.hidden_dim == 0 {
            return fail("hidden_dim must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Head from the epoch with the best validation accuracy, or the last
    /// epoch when no validation set was given.
    pub head: StyleHead,
    pub history: Vec<EpochMetrics>,
    /// Objective on the full training set at initialization.
    pub initial_loss: f64,
    /// Epoch the returned head comes from; 0 is the initialization.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> Option<f64> {
        self.history.last().map(|m| m.train_loss)
    }

    /// Metrics log as JSON Lines.
    pub fn write_metrics<W: Write>(&self, mut w: W) -> Result<()> {
        for m in &self.history {
            let line = serde_json::to_string(m).map_err(|e| Error::json("metrics", e))?;
            writeln!(w, "{line}").map_err(|e| Error::io("<metrics>", e))?;
        }
        Ok(())
    }
}

/// A differentiable training objective over indexed examples.
pub trait Objective {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean loss and its gradient over `indices`, regularizer included.
    fn batch(&self, head: &StyleHead, indices: &[usize]) -> Result<(Params, f64)>;
}

/// Pairwise Bradley-Terry objective over resolved comparisons.
pub struct ComparisonObjective<'a> {
    pub pairs: Vec<PairExample<'a>>,
    pub lambda: f64,
    pub source: ScoreSource,
}

impl<'a> ComparisonObjective<'a> {
    pub fn new(
        features: &'a FeatureTable,
        comparisons: &[ComparisonLabel],
        lambda: f64,
        source: ScoreSource,
    ) -> Result<Self> {
        let pairs = comparisons
            .iter()
            .map(|c| {
                Ok(PairExample {
                    x_i: features.require(&c.i)?,
                    x_j: features.require(&c.j)?,
                    style: c.style,
                    y: c.y,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ComparisonObjective { pairs, lambda, source })
    }
}

impl Objective for ComparisonObjective<'_> {
    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn batch(&self, head: &StyleHead, indices: &[usize]) -> Result<(Params, f64)> {
        let batch: Vec<PairExample> = indices.iter().map(|&i| self.pairs[i]).collect();
        let g = batch_gradient(head, &batch, self.lambda, self.source)?;
        Ok((g.grads, g.loss))
    }
}

/// Labeled feature vectors used for early stopping.
pub type LabeledExamples<'a> = Vec<(&'a [f32], StyleId)>;

pub fn resolve_labeled<'a>(features: &'a FeatureTable, set: &StyleMembership) -> Result<LabeledExamples<'a>> {
    set.entries
        .iter()
        .map(|(id, s)| Ok((features.require(id)?, *s)))
        .collect()
}

/// Fraction of examples whose argmax prediction matches the label.
pub fn accuracy(head: &StyleHead, examples: &[(&[f32], StyleId)]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::Empty("labeled example set"));
    }
    let mut correct = 0usize;
    for (x, s) in examples {
        if head.classify(x)? == *s {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

fn full_loss(head: &StyleHead, objective: &dyn Objective, batch_size: usize) -> Result<f64> {
    let all: Vec<usize> = (0..objective.len()).collect();
    let mut total = 0.0;
    for chunk in all.chunks(batch_size) {
        total += objective.batch(head, chunk)?.1 * chunk.len() as f64;
    }
    Ok(total / objective.len() as f64)
}

/// Mini-batch RMSProp over a generic objective, with early stopping on
/// validation accuracy.
///
/// The example order is reshuffled every epoch from a stream derived from
/// `config.seed`; given the same inputs the parameter trajectory is identical.
pub fn fit(
    init: StyleHead,
    objective: &dyn Objective,
    validation: Option<&[(&[f32], StyleId)]>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if objective.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let validation = validation.filter(|v| !v.is_empty());
    let initial_loss = full_loss(&init, objective, config.batch_size)?;
    let mut head = init;
    let mut opt = RmsProp::new(
        &head,
        config.learning_rate,
        config.rmsprop_decay,
        config.rmsprop_epsilon,
    );
    let mut order: Vec<usize> = (0..objective.len()).collect();
    let mut shuffle_rng = rng::seeded(rng::derive_seed(config.seed, 1));

    let mut history = Vec::with_capacity(config.max_epochs);
    let mut best: Option<(f64, usize, StyleHead)> = None;
    let mut since_best = 0;
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let (grads, loss) = objective.batch(&head, chunk).map_err(|e| match e {
                Error::NonFinite(_) => Error::Divergence { epoch },
                other => other,
            })?;
            total += loss * chunk.len() as f64;
            opt.step(&mut head, &grads);
        }
        let train_loss = total / objective.len() as f64;
        if !train_loss.is_finite() || !head.params.all_finite() {
            return Err(Error::Divergence { epoch });
        }
        let val_acc = validation.map(|v| accuracy(&head, v)).transpose()?;
        history.push(EpochMetrics {
            epoch,
            train_loss,
            val_acc,
        });
        if let Some(acc) = val_acc {
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, epoch, head.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= config.early_stop_patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    let (head, best_epoch) = match best {
        Some((_, epoch, h)) => (h, epoch),
        None => {
            let last = history.last().map_or(0, |m| m.epoch);
            (head, last)
        }
    };
    Ok(TrainOutcome {
        head,
        history,
        initial_loss,
        best_epoch,
        stopped_early,
    })
}

/// Trains a fresh head on comparison labels.
pub fn train(
    features: &FeatureTable,
    comparisons: &[ComparisonLabel],
    validation: Option<&StyleMembership>,
    styles: usize,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if comparisons.is_empty() {
        return Err(Error::Empty("comparison set"));
    }
    if let Some(c) = comparisons.iter().find(|c| c.style.0 >= styles) {
        return Err(Error::UnknownStyle(c.style.to_string()));
    }
    let objective = ComparisonObjective::new(features, comparisons, config.lambda, config.score_source)?;
    let validation = validation.map(|v| resolve_labeled(features, v)).transpose()?;
    let init = StyleHead::init(features.dim(), config.hidden_dim, styles, config.seed);
    fit(init, &objective, validation.as_deref(), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparisons::{sample_comparisons, ComparisonConfig};
    use crate::dataset::{AnnotationStore, LabelCounts};
    use crate::style::Styles;
    use rand::Rng as _;
    use rand_distr::{Distribution, Normal};

    /// Labels from a confident panel of 10; features are the label
    /// proportions plus small noise.
    fn separable(n: usize, seed: u64) -> (AnnotationStore, FeatureTable, Vec<(String, StyleId)>) {
        let mut rng = rng::seeded(seed);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut features = FeatureTable::new(8);
        let mut counts = Vec::new();
        let mut truth = Vec::new();
        for i in 0..n {
            let id = format!("s{i:04}");
            let style = i % 4;
            let strong = rng.gen_range(6..=10);
            let mut c = vec![0u32; 4];
            c[style] = strong;
            c[(style + 1) % 4] = 10 - strong;
            // Features carry the label proportions, so every comparison is
            // decidable from them.
            let mut x = [0f32; 8];
            for (v, n) in x.iter_mut().zip(&c) {
                *v = *n as f32 / 10.0;
            }
            for v in x.iter_mut() {
                *v += noise.sample(&mut rng) as f32;
            }
            features.push(id.clone(), &x).unwrap();
            counts.push(LabelCounts {
                image_id: id.clone(),
                counts: c,
            });
            truth.push((id, StyleId(style)));
        }
        (
            AnnotationStore::from_counts(Styles::default(), 10, counts).unwrap(),
            features,
            truth,
        )
    }

    fn comps(store: &AnnotationStore) -> Vec<ComparisonLabel> {
        let cfg = ComparisonConfig {
            t: 1,
            n_c: 4000,
            seed: 3,
            split: None,
        };
        sample_comparisons(store, None, &cfg).unwrap()
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (store, features, _) = separable(40, 1);
        let config = TrainConfig {
            max_epochs: 0,
            seed: 5,
            ..Default::default()
        };
        let out = train(&features, &comps(&store), None, 4, &config).unwrap();
        assert_eq!(out.head, StyleHead::init(8, 16, 4, 5));
        assert!(out.history.is_empty());
    }

    #[test]
    fn separable_loss_drops_tenfold_with_logit_scores() {
        // Softmax-difference predictions are confined to (-1, 1), so the
        // pairwise loss is bounded below by ln(1 + e^-1) and cannot drop by
        // 10x; the logit reading can.
        let (store, features, _) = separable(200, 2);
        let config = TrainConfig {
            learning_rate: 1e-2,
            batch_size: 64,
            max_epochs: 40,
            seed: 1,
            score_source: ScoreSource::Logit,
            ..Default::default()
        };
        let out = train(&features, &comps(&store), None, 4, &config).unwrap();
        let last = out.final_loss().unwrap();
        assert!(last < 0.1 * out.initial_loss, "{} -> {}", out.initial_loss, last);
    }

    #[test]
    fn probability_scores_learn_the_classes() {
        let (store, features, truth) = separable(200, 2);
        let config = TrainConfig {
            learning_rate: 1e-2,
            batch_size: 64,
            max_epochs: 30,
            seed: 1,
            ..Default::default()
        };
        let out = train(&features, &comps(&store), None, 4, &config).unwrap();
        assert!(out.final_loss().unwrap() < out.initial_loss);
        let labeled: Vec<(&[f32], StyleId)> = truth.iter().map(|(id, s)| (features.get(id).unwrap(), *s)).collect();
        assert!(accuracy(&out.head, &labeled).unwrap() >= 0.95);
    }

    #[test]
    fn bit_identical_reruns() {
        let (store, features, truth) = separable(60, 4);
        let val = StyleMembership {
            entries: truth[..20].to_vec(),
        };
        let config = TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 5,
            seed: 8,
            ..Default::default()
        };
        let c = comps(&store);
        let a = train(&features, &c, Some(&val), 4, &config).unwrap();
        let b = train(&features, &c, Some(&val), 4, &config).unwrap();
        assert_eq!(a.head, b.head);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn early_stopping_respects_patience() {
        let (store, features, truth) = separable(60, 4);
        // Validation labels that no model can fit keep accuracy flat.
        let val = StyleMembership {
            entries: truth.iter().map(|(id, _)| (id.clone(), StyleId(0))).collect(),
        };
        let config = TrainConfig {
            learning_rate: 1e-5,
            batch_size: 512,
            max_epochs: 50,
            early_stop_patience: 3,
            seed: 2,
            ..Default::default()
        };
        let out = train(&features, &comps(&store), Some(&val), 4, &config).unwrap();
        assert!(out.history.len() < 50);
        assert!(out.stopped_early);
        assert_eq!(out.history.len(), out.best_epoch + 3);
    }

    #[test]
    fn l2_only_shrinks_norm_monotonically() {
        struct L2Only(f64);
        impl Objective for L2Only {
            fn len(&self) -> usize {
                1
            }
            fn batch(&self, head: &StyleHead, _: &[usize]) -> Result<(Params, f64)> {
                Ok(crate::stylenet::gradient::regularizer_gradient(head, self.0))
            }
        }
        let mut head = StyleHead::zeros(6, 16, 4);
        for (i, v) in head.params.iter_mut().enumerate() {
            *v = if i % 3 == 0 { -0.5 } else { 0.5 };
        }
        let mut opt = RmsProp::new(&head, 1e-3, 0.9, 1e-8);
        let obj = L2Only(1e3);
        let mut prev = head.params.sum_squares();
        for _ in 0..100 {
            let (g, _) = obj.batch(&head, &[0]).unwrap();
            opt.step(&mut head, &g);
            let now = head.params.sum_squares();
            assert!(now < prev);
            prev = now;
        }
    }

    #[test]
    fn missing_features() {
        let features = FeatureTable::new(2);
        let c = vec![ComparisonLabel {
            i: "a".into(),
            j: "b".into(),
            style: StyleId(0),
            y: 1,
        }];
        assert!(matches!(
            train(&features, &c, None, 4, &TrainConfig::default()),
            Err(Error::MissingFeatures(_))
        ));
    }

    #[test]
    fn divergence_reports_epoch() {
        let (store, features, _) = separable(40, 1);
        let config = TrainConfig {
            learning_rate: 1e300,
            max_epochs: 5,
            score_source: ScoreSource::Logit,
            ..Default::default()
        };
        match train(&features, &comps(&store), None, 4, &config) {
            Err(Error::Divergence { epoch }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
