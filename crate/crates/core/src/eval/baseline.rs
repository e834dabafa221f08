//! Discrete-label baseline: the same head trained with softmax
//! cross-entropy on per-image style labels instead of comparisons.

use crate::dataset::{FeatureTable, StyleMembership};
use crate::error::{Error, Result};
use crate::style::StyleId;
use crate::stylenet::{
    fit, regularizer_gradient, resolve_labeled, Objective, Params, StyleHead, TrainConfig, TrainOutcome,
};

/// Mean cross-entropy over labeled examples plus the L2 term.
pub struct CrossEntropyObjective<'a> {
    examples: Vec<(&'a [f32], StyleId)>,
    lambda: f64,
}

impl<'a> CrossEntropyObjective<'a> {
    pub fn new(examples: Vec<(&'a [f32], StyleId)>, lambda: f64) -> Self {
        CrossEntropyObjective { examples, lambda }
    }
}

impl Objective for CrossEntropyObjective<'_> {
    fn len(&self) -> usize {
        self.examples.len()
    }

    fn batch(&self, head: &StyleHead, indices: &[usize]) -> Result<(Params, f64)> {
        if indices.is_empty() {
            return Err(Error::Empty("cross-entropy batch"));
        }
        let scale = 1.0 / indices.len() as f64;
        let mut grads = Params::zeros_like(&head.params);
        let mut loss = 0.0;
        for &i in indices {
            let (x, style) = self.examples[i];
            let fwd = head.forward(x)?;
            let max = fwd.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let log_z = max + fwd.logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            loss += log_z - fwd.logits[style.0];
            let mut dlogits = fwd.probs.clone();
            dlogits[style.0] -= 1.0;
            head.backprop_logits(x, &fwd, &dlogits, scale, &mut grads);
        }
        let (reg_grads, reg) = regularizer_gradient(head, self.lambda);
        grads.add_scaled(&reg_grads, 1.0);
        let loss = loss * scale + reg;
        if !loss.is_finite() {
            return Err(Error::NonFinite("cross-entropy loss".into()));
        }
        Ok((grads, loss))
    }
}

/// Trains a fresh head on a membership set. An image in several styles'
/// sets contributes one example per style.
pub fn baseline_train_discrete(
    features: &FeatureTable,
    train_set: &StyleMembership,
    validation: Option<&StyleMembership>,
    styles: usize,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if let Some((_, s)) = train_set.entries.iter().find(|(_, s)| s.0 >= styles) {
        return Err(Error::UnknownStyle(s.to_string()));
    }
    let objective = CrossEntropyObjective::new(resolve_labeled(features, train_set)?, config.lambda);
    let validation = validation.map(|v| resolve_labeled(features, v)).transpose()?;
    let init = StyleHead::init(features.dim(), config.hidden_dim, styles, config.seed);
    fit(init, &objective, validation.as_deref(), config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let x1 = [0.3f32, -0.7, 1.1];
        let x2 = [-0.2f32, 0.5, 0.4];
        let obj = CrossEntropyObjective::new(vec![(&x1, StyleId(2)), (&x2, StyleId(0))], 1e-3);
        let head = StyleHead::init(3, 5, 4, 11);
        let (g, _) = obj.batch(&head, &[0, 1]).unwrap();
        let h = 1e-6;
        for (k, analytic) in g.iter().enumerate() {
            let mut plus = head.clone();
            *plus.params.iter_mut().nth(k).unwrap() += h;
            let mut minus = head.clone();
            *minus.params.iter_mut().nth(k).unwrap() -= h;
            let fd = (obj.batch(&plus, &[0, 1]).unwrap().1 - obj.batch(&minus, &[0, 1]).unwrap().1) / (2.0 * h);
            assert!(
                (fd - analytic).abs() < 1e-6 * (1.0 + fd.abs()),
                "param {k}: {fd} vs {analytic}"
            );
        }
    }

    #[test]
    fn learns_separable_labels() {
        let mut features = FeatureTable::new(4);
        let mut entries = Vec::new();
        for i in 0..40 {
            let s = i % 4;
            let mut row = [0.0f32; 4];
            row[s] = 1.0;
            row[(s + 1) % 4] = 0.1 * (i as f32 / 40.0);
            let id = format!("im{i:02}");
            features.push(id.clone(), &row).unwrap();
            entries.push((id, StyleId(s)));
        }
        entries.sort();
        let set = StyleMembership { entries };
        let config = TrainConfig {
            learning_rate: 1e-2,
            batch_size: 8,
            max_epochs: 60,
            seed: 3,
            ..TrainConfig::default()
        };
        let out = baseline_train_discrete(&features, &set, None, 4, &config).unwrap();
        let examples = resolve_labeled(&features, &set).unwrap();
        assert_eq!(crate::stylenet::accuracy(&out.head, &examples).unwrap(), 1.0);
    }
}
