//! Closed-form ridge regression on lagged windows.

use nalgebra::{DMatrix, DVector};

/// Weights (with a trailing bias) mapping the `window` preceding values to
/// the next `horizon` values, fitted on every window of `series`.
pub fn fit(series: &[f64], window: usize, horizon: usize, lambda: f64) -> DMatrix<f64> {
    let rows = series.len() - window - horizon + 1;
    let x = DMatrix::from_fn(rows, window + 1, |r, c| {
        if c < window {
            series[r + c]
        } else {
            1.0
        }
    });
    let y = DMatrix::from_fn(rows, horizon, |r, c| series[r + window + c]);
    let xtx = x.transpose() * &x + DMatrix::identity(window + 1, window + 1) * lambda;
    let chol = xtx
        .cholesky()
        .expect("ridge normal equations are positive definite");
    chol.solve(&(x.transpose() * y))
}

pub fn predict(weights: &DMatrix<f64>, history: &[f64]) -> Vec<f64> {
    let mut x = DVector::from_column_slice(history).push(1.0);
    x = weights.transpose() * x;
    x.iter().copied().collect()
}
