/// Bradley-Terry negative log-likelihood `log(1 + exp(-y * y_hat))`.
///
/// Evaluated as a softplus that never exponentiates a positive argument.
pub fn bt_loss(y: i8, y_hat: f64) -> f64 {
    softplus(-(y as f64) * y_hat)
}

/// `log(1 + exp(z))`.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic function, evaluated without overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Derivative of [`bt_loss`] with respect to `y_hat`: `-y * sigmoid(-y * y_hat)`.
pub fn bt_loss_grad(y: i8, y_hat: f64) -> f64 {
    let y = y as f64;
    -y * sigmoid(-y * y_hat)
}
