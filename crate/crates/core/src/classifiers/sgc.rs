use ndarray::{Array2, Axis};

use super::loss::{column_sums, cross_entropy, softmax_xent};
use super::{
    descend, init_params, prepare_targets, timed, Evaluation, Layer, LayerGrad, ModelKind,
    ModelParams, Objective, TrainConfig, Trained,
};
use crate::graph::LabelAssignment;
use crate::propagation::{normalize, smooth_view};
use crate::{FeatureMatrix, Result, SparseAdjacency};

pub(crate) fn linear(layer: &Layer, x: &Array2<f64>) -> Array2<f64> {
    let mut z = x.dot(&layer.weight);
    if let Some(b) = &layer.bias {
        z += b;
    }
    z
}

/// Logistic regression on pre-smoothed rows; only the labelled rows are kept.
struct SgcProblem {
    train_x: Array2<f64>,
    train_y: Vec<(usize, usize)>,
    valid_x: Array2<f64>,
    valid_y: Vec<(usize, usize)>,
    weight_decay: f64,
}

impl SgcProblem {
    fn new(
        smoothed: &Array2<f64>,
        train: &[(usize, usize)],
        valid: &[(usize, usize)],
        weight_decay: f64,
    ) -> Self {
        let gather = |targets: &[(usize, usize)]| {
            let rows: Vec<usize> = targets.iter().map(|t| t.0).collect();
            let local = targets.iter().enumerate().map(|(r, t)| (r, t.1)).collect();
            (smoothed.select(Axis(0), &rows), local)
        };
        let (train_x, train_y) = gather(train);
        let (valid_x, valid_y) = gather(valid);
        Self {
            train_x,
            train_y,
            valid_x,
            valid_y,
            weight_decay,
        }
    }
}

impl Objective for SgcProblem {
    fn evaluate(&self, params: &ModelParams) -> Evaluation {
        let layer = &params.layers[0];
        let z = linear(layer, &self.train_x);
        let out = softmax_xent(z.view(), &self.train_y, self.weight_decay, params);
        let weight = self.train_x.t().dot(&out.dlogits) + &out.decay_grads[0];
        let bias = layer.bias.as_ref().map(|_| column_sums(out.dlogits.view()));
        let valid_loss = (!self.valid_y.is_empty()).then(|| {
            let zv = linear(layer, &self.valid_x);
            cross_entropy(zv.view(), &self.valid_y).0
        });
        Evaluation {
            train_loss: out.loss,
            valid_loss,
            grads: vec![LayerGrad { weight, bias }],
        }
    }
}

/// Loss and gradient of the SGC objective at `params` for pre-smoothed
/// features; `targets` index rows of `smoothed` with dense class ids.
pub fn sgc_objective(
    params: &ModelParams,
    smoothed: &Array2<f64>,
    targets: &[(usize, usize)],
    weight_decay: f64,
) -> (f64, Vec<LayerGrad>) {
    let eval = SgcProblem::new(smoothed, targets, &[], weight_decay).evaluate(params);
    (eval.train_loss, eval.grads)
}

/// Smooths `x` once with `A_bar^K`, then fits softmax regression on the train rows.
pub fn sgc_fit(
    x: &FeatureMatrix,
    adj: &SparseAdjacency,
    labels: &LabelAssignment,
    cfg: &TrainConfig,
) -> Result<Trained> {
    cfg.validate(ModelKind::Sgc)?;
    let (classes, train, valid) = prepare_targets(x, adj, labels)?;
    let (problem, precompute_secs) = timed(|| {
        let smoothed = smooth_view(&normalize(adj), x.view(), cfg.k_layers)?;
        Ok(SgcProblem::new(&smoothed, &train, &valid, cfg.weight_decay))
    })?;
    let params = init_params(ModelKind::Sgc, x.d(), classes, cfg);
    let ((params, history), train_secs) = timed(|| descend(&problem, params, cfg))?;
    Ok(Trained {
        params,
        history,
        precompute_secs,
        train_secs,
    })
}
