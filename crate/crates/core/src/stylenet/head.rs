use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::style::StyleId;

/// Width of the embedding layer.
pub const DEFAULT_HIDDEN: usize = 16;

/// Parameter blocks of the head, or anything shaped like them (gradients,
/// optimizer caches).
///
/// `w1` is `input_dim x hidden` and `w2` is `hidden x styles`, both row-major
/// with the input index first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Params {
    pub fn zeros(input_dim: usize, hidden: usize, styles: usize) -> Self {
        Params {
            w1: vec![0.0; input_dim * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden * styles],
            b2: vec![0.0; styles],
        }
    }

    pub fn zeros_like(other: &Params) -> Self {
        Params {
            w1: vec![0.0; other.w1.len()],
            b1: vec![0.0; other.b1.len()],
            w2: vec![0.0; other.w2.len()],
            b2: vec![0.0; other.b2.len()],
        }
    }

    /// Blocks in checkpoint order.
    pub fn blocks(&self) -> [(&'static str, &[f64]); 4] {
        [("w1", &self.w1), ("b1", &self.b1), ("w2", &self.w2), ("b2", &self.b2)]
    }

    pub fn blocks_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
    }

    pub fn sum_squares(&self) -> f64 {
        self.iter().map(|v| v * v).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        self.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Params, factor: f64) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += factor * b;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// Which output the pairwise prediction is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    /// Difference of softmax probabilities.
    #[default]
    Probability,
    /// Difference of pre-softmax logits.
    Logit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardResult {
    /// Post-ReLU hidden activation; the style embedding.
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ForwardResult {
    pub fn score(&self, style: StyleId, source: ScoreSource) -> f64 {
        match source {
            ScoreSource::Probability => self.probs[style.0],
            ScoreSource::Logit => self.logits[style.0],
        }
    }
}

/// Two-layer head: `relu(W1' x + b1)` followed by `softmax(W2' h + b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleHead {
    input_dim: usize,
    hidden: usize,
    styles: usize,
    pub params: Params,
}

impl StyleHead {
    pub fn zeros(input_dim: usize, hidden: usize, styles: usize) -> Self {
        StyleHead {
            input_dim,
            hidden,
            styles,
            params: Params::zeros(input_dim, hidden, styles),
        }
    }

    pub fn from_params(input_dim: usize, hidden: usize, styles: usize, params: Params) -> Result<Self> {
        let expected = Params::zeros(input_dim, hidden, styles);
        for ((_, want), (_, got)) in expected.blocks().iter().zip(params.blocks().iter()) {
            if want.len() != got.len() {
                return Err(Error::ShapeMismatch {
                    expected: want.len(),
                    found: got.len(),
                });
            }
        }
        if !params.all_finite() {
            return Err(Error::NonFinite("head parameters".into()));
        }
        Ok(StyleHead {
            input_dim,
            hidden,
            styles,
            params,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(input_dim: usize, hidden: usize, styles: usize, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let mut head = StyleHead::zeros(input_dim, hidden, styles);
        let a1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        for w in head.params.w1.iter_mut() {
            *w = rng.gen_range(-a1..a1);
        }
        let a2 = (6.0 / (hidden + styles) as f64).sqrt();
        for w in head.params.w2.iter_mut() {
            *w = rng.gen_range(-a2..a2);
        }
        head
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn styles(&self) -> usize {
        self.styles
    }

    pub fn forward(&self, x: &[f32]) -> Result<ForwardResult> {
        if x.len() != self.input_dim {
            return Err(Error::ShapeMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f32]) -> ForwardResult {
        let p = &self.params;
        let mut hidden = p.b1.clone();
        for (k, &xk) in x.iter().enumerate() {
            let xk = xk as f64;
            if xk == 0.0 {
                continue;
            }
            let row = &p.w1[k * self.hidden..(k + 1) * self.hidden];
            for (h, w) in hidden.iter_mut().zip(row) {
                *h += w * xk;
            }
        }
        for h in hidden.iter_mut() {
            if *h <= 0.0 {
                *h = 0.0;
            }
        }
        let mut logits = p.b2.clone();
        for (h, &hv) in hidden.iter().enumerate() {
            let row = &p.w2[h * self.styles..(h + 1) * self.styles];
            for (z, w) in logits.iter_mut().zip(row) {
                *z += w * hv;
            }
        }
        let probs = softmax(&logits);
        ForwardResult { hidden, logits, probs }
    }

    /// Style embedding: the post-ReLU hidden activation.
    pub fn embed(&self, x: &[f32]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.hidden)
    }

    /// Argmax of the softmax output; the lowest style index wins ties.
    pub fn classify(&self, x: &[f32]) -> Result<StyleId> {
        Ok(argmax(&self.forward(x)?.probs))
    }

    /// `f(x_i)[style] - f(x_j)[style]` on softmax outputs.
    pub fn comparison_predict(&self, x_i: &[f32], x_j: &[f32], style: StyleId) -> Result<f64> {
        self.comparison_predict_with(x_i, x_j, style, ScoreSource::Probability)
    }

    pub fn comparison_predict_with(
        &self,
        x_i: &[f32],
        x_j: &[f32],
        style: StyleId,
        source: ScoreSource,
    ) -> Result<f64> {
        if style.0 >= self.styles {
            return Err(Error::ShapeMismatch {
                expected: self.styles,
                found: style.0 + 1,
            });
        }
        Ok(self.forward(x_i)?.score(style, source) - self.forward(x_j)?.score(style, source))
    }

    /// Accumulates `scale * d(loss)/d(params)` into `grads`, given the
    /// gradient of the loss with respect to this branch's logits.
    pub(crate) fn backprop_logits(
        &self,
        x: &[f32],
        fwd: &ForwardResult,
        dlogits: &[f64],
        scale: f64,
        grads: &mut Params,
    ) {
        let (hidden_n, styles) = (self.hidden, self.styles);
        let mut dhidden = vec![0.0; hidden_n];
        for (h, &hv) in fwd.hidden.iter().enumerate() {
            let wrow = &self.params.w2[h * styles..(h + 1) * styles];
            let grow = &mut grads.w2[h * styles..(h + 1) * styles];
            let mut acc = 0.0;
            for l in 0..styles {
                grow[l] += scale * hv * dlogits[l];
                acc += wrow[l] * dlogits[l];
            }
            // ReLU subgradient at zero is zero.
            dhidden[h] = if hv > 0.0 { acc } else { 0.0 };
        }
        for (g, d) in grads.b2.iter_mut().zip(dlogits) {
            *g += scale * d;
        }
        for (g, d) in grads.b1.iter_mut().zip(&dhidden) {
            *g += scale * d;
        }
        for (k, &xk) in x.iter().enumerate() {
            let xk = xk as f64;
            if xk == 0.0 {
                continue;
            }
            let grow = &mut grads.w1[k * hidden_n..(k + 1) * hidden_n];
            for (g, d) in grow.iter_mut().zip(&dhidden) {
                *g += scale * xk * d;
            }
        }
    }
}

/// Softmax with max subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    out
}

pub fn argmax(values: &[f64]) -> StyleId {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    StyleId(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_head_is_uniform() {
        let head = StyleHead::zeros(5, 16, 4);
        let f = head.forward(&[1.0, -2.0, 3.0, 0.5, 9.0]).unwrap();
        assert_eq!(f.probs, vec![0.25; 4]);
        assert_eq!(f.hidden, vec![0.0; 16]);
    }

    #[test]
    fn zero_input_gives_relu_bias() {
        let mut head = StyleHead::init(3, 4, 4, 1);
        head.params.b1 = vec![-1.0, 0.5, 0.0, 2.0];
        let f = head.forward(&[0.0; 3]).unwrap();
        assert_eq!(f.hidden, vec![0.0, 0.5, 0.0, 2.0]);
    }

    #[test]
    fn shape_mismatch() {
        let head = StyleHead::zeros(3, 4, 4);
        assert!(matches!(
            head.forward(&[0.0; 2]),
            Err(Error::ShapeMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn classify_tie_and_argmax() {
        assert_eq!(argmax(&[0.1, 0.7, 0.1, 0.1]), StyleId::TRADITIONAL);
        assert_eq!(argmax(&[0.25; 4]), StyleId::MODERN);
        assert_eq!(
            StyleHead::zeros(2, 16, 4).classify(&[1.0, 1.0]).unwrap(),
            StyleId::MODERN
        );
    }

    #[test]
    fn softmax_is_stable() {
        let p = softmax(&[1000.0, 1000.0, -1000.0]);
        assert!((p[0] - 0.5).abs() < 1e-15 && p[2] == 0.0);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = StyleHead::init(10, 16, 4, 3);
        assert_eq!(a, StyleHead::init(10, 16, 4, 3));
        assert_ne!(a, StyleHead::init(10, 16, 4, 4));
        let bound = (6.0f64 / 26.0).sqrt();
        assert!(a.params.w1.iter().all(|w| w.abs() <= bound));
        assert!(a.params.b1.iter().all(|b| *b == 0.0));
    }

    proptest! {
        #[test]
        fn forward_invariants(seed in 0u64..1000, x in prop::collection::vec(-5f32..5.0, 6), y in prop::collection::vec(-5f32..5.0, 6), l in 0usize..4) {
            let head = StyleHead::init(6, 16, 4, seed);
            let f = head.forward(&x).unwrap();
            prop_assert!((f.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(f.hidden.iter().all(|h| *h >= 0.0));
            prop_assert_eq!(head.embed(&x).unwrap(), f.hidden.clone());
            let style = StyleId(l);
            let yhat = head.comparison_predict(&x, &y, style).unwrap();
            prop_assert!(yhat > -1.0 && yhat < 1.0);
            prop_assert_eq!(yhat, -head.comparison_predict(&y, &x, style).unwrap());
            prop_assert_eq!(head.comparison_predict(&x, &x, style).unwrap(), 0.0);
            prop_assert_eq!(yhat, f.probs[l] - head.forward(&y).unwrap().probs[l]);
        }
    }
}
