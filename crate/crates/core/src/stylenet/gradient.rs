use crate::error::{Error, Result};
use crate::style::StyleId;
use crate::stylenet::head::{Params, ScoreSource, StyleHead};
use crate::stylenet::loss::{bt_loss, bt_loss_grad};

/// One comparison with its feature vectors resolved.
#[derive(Debug, Clone, Copy)]
pub struct PairExample<'a> {
    pub x_i: &'a [f32],
    pub x_j: &'a [f32],
    pub style: StyleId,
    pub y: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    pub grads: Params,
    /// Mean pairwise loss plus `lambda * sum(theta^2)`.
    pub loss: f64,
}

/// Gradient of the mean pairwise loss over the batch, without regularizer.
///
/// Both branches run through the same head; their contributions are summed
/// into the single shared parameter set.
pub fn comparison_gradient(head: &StyleHead, batch: &[PairExample<'_>], source: ScoreSource) -> Result<(Params, f64)> {
    if batch.is_empty() {
        return Err(Error::Empty("comparison batch"));
    }
    let styles = head.styles();
    let mut grads = Params::zeros_like(&head.params);
    let mut loss = 0.0;
    let scale = 1.0 / batch.len() as f64;
    let mut dlogits = vec![0.0; styles];
    for ex in batch {
        for x in [ex.x_i, ex.x_j] {
            if x.len() != head.input_dim() {
                return Err(Error::ShapeMismatch {
                    expected: head.input_dim(),
                    found: x.len(),
                });
            }
        }
        let fi = head.forward_unchecked(ex.x_i);
        let fj = head.forward_unchecked(ex.x_j);
        let y_hat = fi.score(ex.style, source) - fj.score(ex.style, source);
        loss += bt_loss(ex.y, y_hat);
        let g = bt_loss_grad(ex.y, y_hat);
        for (fwd, x, sign) in [(&fi, ex.x_i, 1.0), (&fj, ex.x_j, -1.0)] {
            score_to_logits(fwd.probs.as_slice(), ex.style, source, sign * g, &mut dlogits);
            head.backprop_logits(x, fwd, &dlogits, scale, &mut grads);
        }
    }
    let loss = loss * scale;
    if !loss.is_finite() {
        return Err(Error::NonFinite("comparison loss".into()));
    }
    Ok((grads, loss))
}

/// Gradient of `lambda * sum(theta^2)`: `2 * lambda * theta`.
pub fn regularizer_gradient(head: &StyleHead, lambda: f64) -> (Params, f64) {
    let mut grads = head.params.clone();
    grads.scale(2.0 * lambda);
    (grads, lambda * head.params.sum_squares())
}

/// Gradient of the full objective: mean pairwise loss plus L2 penalty on every
/// parameter block.
pub fn batch_gradient(
    head: &StyleHead,
    batch: &[PairExample<'_>],
    lambda: f64,
    source: ScoreSource,
) -> Result<BatchGradient> {
    let (mut grads, data_loss) = comparison_gradient(head, batch, source)?;
    let (reg, reg_loss) = regularizer_gradient(head, lambda);
    grads.add_scaled(&reg, 1.0);
    let loss = data_loss + reg_loss;
    if !loss.is_finite() || !grads.all_finite() {
        return Err(Error::NonFinite("objective".into()));
    }
    Ok(BatchGradient { grads, loss })
}

/// Value of the objective without gradients.
pub fn objective(head: &StyleHead, batch: &[PairExample<'_>], lambda: f64, source: ScoreSource) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Empty("comparison batch"));
    }
    let mut loss = 0.0;
    for ex in batch {
        let y_hat = head.forward(ex.x_i)?.score(ex.style, source) - head.forward(ex.x_j)?.score(ex.style, source);
        loss += bt_loss(ex.y, y_hat);
    }
    Ok(loss / batch.len() as f64 + lambda * head.params.sum_squares())
}

/// Chain rule from the selected score to the logits.
fn score_to_logits(probs: &[f64], style: StyleId, source: ScoreSource, upstream: f64, out: &mut [f64]) {
    match source {
        ScoreSource::Probability => {
            let pl = probs[style.0];
            for (k, (o, &pk)) in out.iter_mut().zip(probs).enumerate() {
                let delta = if k == style.0 { 1.0 } else { 0.0 };
                *o = upstream * pl * (delta - pk);
            }
        }
        ScoreSource::Logit => {
            for (k, o) in out.iter_mut().enumerate() {
                *o = if k == style.0 { upstream } else { 0.0 };
            }
        }
    }
}
