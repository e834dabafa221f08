use crate::stylenet::head::{Params, StyleHead};

/// RMSProp with the stabilizer outside the square root:
///
/// ```text
/// cache <- decay * cache + (1 - decay) * grad^2
/// param <- param - lr * grad / (sqrt(cache) + eps)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    cache: Params,
}

impl RmsProp {
    pub fn new(head: &StyleHead, learning_rate: f64, decay: f64, epsilon: f64) -> Self {
        RmsProp {
            learning_rate,
            decay,
            epsilon,
            cache: Params::zeros_like(&head.params),
        }
    }

    pub fn cache(&self) -> &Params {
        &self.cache
    }

    pub fn step(&mut self, head: &mut StyleHead, grads: &Params) {
        let (lr, rho, eps) = (self.learning_rate, self.decay, self.epsilon);
        for ((p, c), g) in head.params.iter_mut().zip(self.cache.iter_mut()).zip(grads.iter()) {
            *c = rho * *c + (1.0 - rho) * g * g;
            *p -= lr * g / (c.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_decays_cache_only() {
        let mut head = StyleHead::init(3, 4, 4, 0);
        let before = head.clone();
        let mut opt = RmsProp::new(&head, 1e-2, 0.9, 1e-8);
        let mut g = Params::zeros_like(&head.params);
        g.iter_mut().for_each(|v| *v = 1.0);
        opt.step(&mut head, &g);
        let cache_after_first = opt.cache().clone();
        let snapshot = head.clone();
        let zero = Params::zeros_like(&head.params);
        opt.step(&mut head, &zero);
        assert_eq!(head, snapshot);
        for (a, b) in opt.cache().iter().zip(cache_after_first.iter()) {
            assert_eq!(*a, 0.9 * b);
        }
        assert_ne!(before, snapshot);
    }

    #[test]
    fn first_step_closed_form() {
        let mut head = StyleHead::zeros(2, 2, 2);
        let mut opt = RmsProp::new(&head, 1e-4, 0.9, 1e-8);
        let mut g = Params::zeros_like(&head.params);
        for (i, v) in g.iter_mut().enumerate() {
            *v = (i as f64 - 4.0) * 0.37;
        }
        opt.step(&mut head, &g);
        for (p, g) in head.params.iter().zip(g.iter()) {
            let expected = -1e-4 * g / ((0.1f64).sqrt() * g.abs() + 1e-8);
            assert!((p - expected).abs() < 1e-15, "{p} vs {expected}");
        }
    }

    #[test]
    fn deterministic() {
        let g = {
            let h = StyleHead::init(3, 3, 3, 9);
            let mut g = Params::zeros_like(&h.params);
            g.iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64).sin());
            g
        };
        let run = || {
            let mut h = StyleHead::init(3, 3, 3, 9);
            let mut opt = RmsProp::new(&h, 1e-3, 0.9, 1e-8);
            opt.step(&mut h, &g);
            opt.step(&mut h, &g);
            h
        };
        assert_eq!(run(), run());
    }
}
