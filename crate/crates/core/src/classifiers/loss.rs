//! Softmax cross-entropy with L2 weight decay.
//!
//! Objective over the target rows `T` (size `m`):
//!
//! ```text
//! L = (1/m) sum_{i in T} -log softmax(z_i)[y_i] + (lambda/2) sum_l ||W_l||^2
//! ```
//!
//! Biases are not decayed.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::ModelParams;

/// Row-wise softmax using the max-shift for stability.
pub fn softmax_rows(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

/// `log sum_c exp(z_c)`.
pub fn log_sum_exp(row: ArrayView1<'_, f64>) -> f64 {
    let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Loss and gradients from one evaluation of the objective.
#[derive(Debug, Clone)]
pub struct XentOutput {
    /// Data term plus weight penalty.
    pub loss: f64,
    pub data_loss: f64,
    /// `dL/dlogits`, same shape as the logits; zero outside target rows.
    pub dlogits: Array2<f64>,
    /// `lambda W_l` per layer.
    pub decay_grads: Vec<Array2<f64>>,
}

/// `targets` pairs a row of `logits` with its dense class id.
pub fn softmax_xent(
    logits: ArrayView2<'_, f64>,
    targets: &[(usize, usize)],
    weight_decay: f64,
    params: &ModelParams,
) -> XentOutput {
    let (data_loss, dlogits) = cross_entropy(logits, targets);
    let penalty: f64 = params
        .layers
        .iter()
        .map(|l| l.weight.iter().map(|w| w * w).sum::<f64>())
        .sum::<f64>()
        * weight_decay
        / 2.0;
    let decay_grads = params
        .layers
        .iter()
        .map(|l| &l.weight * weight_decay)
        .collect();
    XentOutput {
        loss: data_loss + penalty,
        data_loss,
        dlogits,
        decay_grads,
    }
}

/// Mean cross-entropy over `targets` and its gradient `(softmax - onehot)/m`.
pub fn cross_entropy(
    logits: ArrayView2<'_, f64>,
    targets: &[(usize, usize)],
) -> (f64, Array2<f64>) {
    let mut grad = Array2::zeros(logits.raw_dim());
    if targets.is_empty() {
        return (0.0, grad);
    }
    let m = targets.len() as f64;
    let mut loss = 0.0;
    for &(row, class) in targets {
        let z = logits.row(row);
        let lse = log_sum_exp(z);
        loss += lse - z[class];
        let mut g = grad.row_mut(row);
        for (c, (gc, &zc)) in g.iter_mut().zip(z.iter()).enumerate() {
            let p = (zc - lse).exp();
            *gc = (p - if c == class { 1.0 } else { 0.0 }) / m;
        }
    }
    (loss / m, grad)
}

/// Column sums, i.e. the bias gradient for a broadcast bias.
pub(crate) fn column_sums(g: ArrayView2<'_, f64>) -> Array1<f64> {
    g.sum_axis(Axis(0))
}

/// Row-wise argmax, ties to the lowest column.
pub fn argmax_rows(scores: ArrayView2<'_, f64>) -> Vec<usize> {
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}
