use ndarray::Array2;

use super::loss::{column_sums, cross_entropy, softmax_xent};
use super::{
    descend, init_params, prepare_targets, timed, Evaluation, LayerGrad, ModelKind, ModelParams,
    Objective, TrainConfig, Trained,
};
use crate::graph::LabelAssignment;
use crate::propagation::{normalize, NormalizedAdjacency};
use crate::{FeatureMatrix, Result, SparseAdjacency};

/// Activations kept for backpropagation.
#[derive(Debug, Clone)]
pub struct GcnForward {
    /// Input to each layer: `X`, then `ReLU(Z_0)`, ...
    pub inputs: Vec<Array2<f64>>,
    /// Pre-activation `A_bar H_l W_l + b_l` of each layer.
    pub pre_activations: Vec<Array2<f64>>,
    pub logits: Array2<f64>,
}

pub fn gcn_forward(
    params: &ModelParams,
    adj: &NormalizedAdjacency,
    x: &Array2<f64>,
) -> Result<GcnForward> {
    let mut inputs = vec![x.clone()];
    let mut pre_activations = Vec::with_capacity(params.layers.len());
    let last = params.layers.len() - 1;
    for (l, layer) in params.layers.iter().enumerate() {
        let projected = inputs[l].dot(&layer.weight);
        let mut z = adj.apply(projected.view())?;
        if let Some(b) = &layer.bias {
            z += b;
        }
        if l < last {
            inputs.push(z.mapv(|v| v.max(0.0)));
        }
        pre_activations.push(z);
    }
    let logits = pre_activations[last].clone();
    Ok(GcnForward {
        inputs,
        pre_activations,
        logits,
    })
}

struct GcnProblem<'a> {
    adj: NormalizedAdjacency,
    x: &'a Array2<f64>,
    train: Vec<(usize, usize)>,
    valid: Vec<(usize, usize)>,
    weight_decay: f64,
}

impl GcnProblem<'_> {
    fn backward(
        &self,
        params: &ModelParams,
        fwd: &GcnForward,
        dlogits: Array2<f64>,
        decay: &[Array2<f64>],
    ) -> Vec<LayerGrad> {
        let mut grads = Vec::with_capacity(params.layers.len());
        let mut upstream = dlogits;
        for l in (0..params.layers.len()).rev() {
            let layer = &params.layers[l];
            // dL/dW = (A_bar H)^T G = H^T (A_bar G), using symmetry of A_bar.
            let propagated = self
                .adj
                .apply(upstream.view())
                .expect("gradient rows match node count");
            let weight = fwd.inputs[l].t().dot(&propagated) + &decay[l];
            let bias = layer.bias.as_ref().map(|_| column_sums(upstream.view()));
            grads.push(LayerGrad { weight, bias });
            if l > 0 {
                let mut dh = propagated.dot(&layer.weight.t());
                dh.zip_mut_with(&fwd.pre_activations[l - 1], |g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                upstream = dh;
            }
        }
        grads.reverse();
        grads
    }
}

impl Objective for GcnProblem<'_> {
    fn evaluate(&self, params: &ModelParams) -> Evaluation {
        let fwd = gcn_forward(params, &self.adj, self.x).expect("feature rows match node count");
        let out = softmax_xent(fwd.logits.view(), &self.train, self.weight_decay, params);
        let valid_loss =
            (!self.valid.is_empty()).then(|| cross_entropy(fwd.logits.view(), &self.valid).0);
        let grads = self.backward(params, &fwd, out.dlogits, &out.decay_grads);
        Evaluation {
            train_loss: out.loss,
            valid_loss,
            grads,
        }
    }
}

/// Loss and gradients of the GCN objective; `targets` are `(node, dense class)`.
pub fn gcn_objective(
    params: &ModelParams,
    adj: &NormalizedAdjacency,
    x: &Array2<f64>,
    targets: &[(usize, usize)],
    weight_decay: f64,
) -> (f64, Vec<LayerGrad>) {
    let problem = GcnProblem {
        adj: adj.clone(),
        x,
        train: targets.to_vec(),
        valid: Vec::new(),
        weight_decay,
    };
    let eval = problem.evaluate(params);
    (eval.train_loss, eval.grads)
}

pub fn gcn_fit(
    x: &FeatureMatrix,
    adj: &SparseAdjacency,
    labels: &LabelAssignment,
    cfg: &TrainConfig,
) -> Result<Trained> {
    cfg.validate(ModelKind::Gcn)?;
    let (classes, train, valid) = prepare_targets(x, adj, labels)?;
    let (norm, precompute_secs) = timed(|| Ok(normalize(adj)))?;
    let problem = GcnProblem {
        adj: norm,
        x: x.as_array(),
        train,
        valid,
        weight_decay: cfg.weight_decay,
    };
    let params = init_params(ModelKind::Gcn, x.d(), classes, cfg);
    let ((params, history), train_secs) = timed(|| descend(&problem, params, cfg))?;
    Ok(Trained {
        params,
        history,
        precompute_secs,
        train_secs,
    })
}
