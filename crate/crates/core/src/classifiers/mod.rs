//! Trainable node classifiers sharing one loss and one optimizer.
//!
//! * SGC: `softmax(A_bar^K X W + b)`, with `A_bar^K X` computed once before
//!   training so each epoch is plain multinomial logistic regression.
//! * GCN: `H_{l+1} = ReLU(A_bar H_l W_l + b_l)` for `K - 1` hidden layers and a
//!   softmax output layer `A_bar H_{K-1} W_{K-1} + b_{K-1}`; `K` propagation
//!   steps in total, so `K` means the same smoothing depth for both models.
//!
//! Training is full-batch gradient descent on the mean cross-entropy of the
//! train rows plus `(weight_decay / 2) * sum ||W||^2`.

pub mod checkpoint;
mod gcn;
pub mod loss;
mod sgc;

pub use gcn::{gcn_fit, gcn_forward, gcn_objective};
pub use loss::{argmax_rows, softmax_rows, softmax_xent, XentOutput};
pub use sgc::{sgc_fit, sgc_objective};

use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::LabelAssignment;
use crate::propagation::{normalize, smooth_view};
use crate::rng::streams;
use crate::{Error, FeatureMatrix, Result, RngState, SparseAdjacency};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Sgc,
    Gcn,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sgc => "sgc",
            ModelKind::Gcn => "gcn",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgc" => Ok(ModelKind::Sgc),
            "gcn" => Ok(ModelKind::Gcn),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `d_in x d_out`.
    pub weight: Array2<f64>,
    pub bias: Option<Array1<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    /// Propagation steps `K`.
    pub k_layers: usize,
    pub layers: Vec<Layer>,
    /// Original label id of each output column.
    pub classes: Vec<usize>,
}

impl ModelParams {
    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.weight.nrows())
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Checks layer count, shape chaining, bias lengths and finiteness.
    pub fn validate(&self) -> Result<()> {
        let expected_layers = match self.kind {
            ModelKind::Sgc => 1,
            ModelKind::Gcn => self.k_layers,
        };
        if self.layers.len() != expected_layers || expected_layers == 0 {
            return Err(Error::InvalidInput(format!(
                "{} with K={} needs {} layer(s), found {}",
                self.kind.name(),
                self.k_layers,
                expected_layers,
                self.layers.len()
            )));
        }
        let mut width = self.layers[0].weight.nrows();
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.weight.nrows() != width {
                return Err(Error::DimensionMismatch {
                    context: "layer input width",
                    expected: width,
                    found: layer.weight.nrows(),
                });
            }
            width = layer.weight.ncols();
            if let Some(b) = &layer.bias {
                if b.len() != width {
                    return Err(Error::DimensionMismatch {
                        context: "bias length",
                        expected: width,
                        found: b.len(),
                    });
                }
            }
            let finite = layer
                .weight
                .iter()
                .chain(layer.bias.iter().flatten())
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::Numeric(format!(
                    "layer {l} has non-finite parameters"
                )));
            }
        }
        if width != self.classes.len() {
            return Err(Error::DimensionMismatch {
                context: "output width vs class count",
                expected: self.classes.len(),
                found: width,
            });
        }
        Ok(())
    }
}

/// Starting weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
    #[default]
    Glorot,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// GCN hidden width.
    pub hidden_width: usize,
    /// Smoothing depth `K`.
    pub k_layers: usize,
    pub seed: RngState,
    /// Stop after this many epochs without a validation-loss improvement and
    /// keep the best parameters. `None` trains for all epochs.
    pub early_stop: Option<usize>,
    /// Heavy-ball momentum; 0 is plain gradient descent.
    pub momentum: f64,
    pub bias: bool,
    pub init: Init,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            hidden_width: 16,
            k_layers: 2,
            seed: RngState::default(),
            early_stop: None,
            momentum: 0.0,
            bias: true,
            init: Init::Glorot,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config("weight_decay must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("momentum must be in [0, 1)".into()));
        }
        if kind == ModelKind::Gcn {
            if self.k_layers == 0 {
                return Err(Error::Config("GCN needs k_layers >= 1".into()));
            }
            if self.hidden_width == 0 {
                return Err(Error::Config("hidden_width must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Per-epoch losses, evaluated at the parameters entering each epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub valid_loss: Vec<Option<f64>>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub params: ModelParams,
    pub history: TrainHistory,
    /// Normalization plus (SGC only) feature smoothing.
    pub precompute_secs: f64,
    /// Optimization loop only.
    pub train_secs: f64,
}

/// Gradient of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weight: Array2<f64>,
    pub bias: Option<Array1<f64>>,
}

/// One evaluation of the training objective.
pub(crate) struct Evaluation {
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
    pub grads: Vec<LayerGrad>,
}

pub(crate) trait Objective {
    fn evaluate(&self, params: &ModelParams) -> Evaluation;
}

pub fn fit(
    kind: ModelKind,
    x: &FeatureMatrix,
    adj: &SparseAdjacency,
    labels: &LabelAssignment,
    cfg: &TrainConfig,
) -> Result<Trained> {
    match kind {
        ModelKind::Sgc => sgc_fit(x, adj, labels, cfg),
        ModelKind::Gcn => gcn_fit(x, adj, labels, cfg),
    }
}

/// Checks shared preconditions and maps labels to dense class ids.
/// Returns `(classes, train_targets, valid_targets)`.
pub(crate) fn prepare_targets(
    x: &FeatureMatrix,
    adj: &SparseAdjacency,
    labels: &LabelAssignment,
) -> Result<(Vec<usize>, Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    if adj.n() != x.n() || labels.n() != x.n() {
        return Err(Error::DimensionMismatch {
            context: "nodes in features vs adjacency/labels",
            expected: x.n(),
            found: if adj.n() != x.n() {
                adj.n()
            } else {
                labels.n()
            },
        });
    }
    if labels.train().is_empty() {
        return Err(Error::EmptyTrainSet(
            "classifier needs at least one train node".into(),
        ));
    }
    let classes = labels.classes();
    let dense = |y: usize| classes.binary_search(&y).expect("label listed in classes");
    let train = labels
        .train_labels()
        .into_iter()
        .map(|(i, y)| (i, dense(y)))
        .collect();
    let valid = labels
        .valid_labels()
        .into_iter()
        .map(|(i, y)| (i, dense(y)))
        .collect();
    Ok((classes, train, valid))
}

/// Fresh parameters for `kind` with input width `d`.
pub fn init_params(
    kind: ModelKind,
    d: usize,
    classes: Vec<usize>,
    cfg: &TrainConfig,
) -> ModelParams {
    let c = classes.len();
    let widths: Vec<usize> = match kind {
        ModelKind::Sgc => vec![d, c],
        ModelKind::Gcn => {
            let mut w = vec![d];
            w.extend(std::iter::repeat_n(
                cfg.hidden_width,
                cfg.k_layers.saturating_sub(1),
            ));
            w.push(c);
            w
        }
    };
    let mut rng = cfg.seed.fork(streams::INIT).rng();
    let layers = widths
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let weight = match cfg.init {
                Init::Zeros => Array2::zeros((fan_in, fan_out)),
                Init::Glorot => {
                    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    Array2::from_shape_simple_fn((fan_in, fan_out), || {
                        rng.random_range(-limit..=limit)
                    })
                }
            };
            Layer {
                weight,
                bias: cfg.bias.then(|| Array1::zeros(fan_out)),
            }
        })
        .collect();
    ModelParams {
        kind,
        k_layers: cfg.k_layers,
        layers,
        classes,
    }
}

/// Full-batch gradient descent with optional momentum and early stopping.
pub(crate) fn descend(
    objective: &impl Objective,
    mut params: ModelParams,
    cfg: &TrainConfig,
) -> Result<(ModelParams, TrainHistory)> {
    let mut history = TrainHistory::default();
    let mut velocity: Option<Vec<LayerGrad>> = None;
    let mut best: Option<(f64, usize, ModelParams)> = None;

    for epoch in 0..cfg.epochs {
        let eval = objective.evaluate(&params);
        if !eval.train_loss.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite training loss at epoch {epoch} (learning_rate {})",
                cfg.learning_rate
            )));
        }
        history.train_loss.push(eval.train_loss);
        history.valid_loss.push(eval.valid_loss);

        if let (Some(patience), Some(valid)) = (cfg.early_stop, eval.valid_loss) {
            match &best {
                Some((best_loss, best_epoch, _)) if valid >= *best_loss => {
                    if epoch - best_epoch >= patience {
                        break;
                    }
                }
                _ => best = Some((valid, epoch, params.clone())),
            }
        }

        let step = match (&mut velocity, cfg.momentum > 0.0) {
            (Some(v), true) => {
                for (vel, g) in v.iter_mut().zip(&eval.grads) {
                    vel.weight = &vel.weight * cfg.momentum + &g.weight;
                    if let (Some(vb), Some(gb)) = (&mut vel.bias, &g.bias) {
                        *vb = &*vb * cfg.momentum + gb;
                    }
                }
                v.clone()
            }
            (None, true) => {
                velocity = Some(eval.grads.clone());
                eval.grads
            }
            _ => eval.grads,
        };
        for (layer, g) in params.layers.iter_mut().zip(&step) {
            layer.weight.scaled_add(-cfg.learning_rate, &g.weight);
            if let (Some(b), Some(gb)) = (&mut layer.bias, &g.bias) {
                b.scaled_add(-cfg.learning_rate, gb);
            }
        }
    }

    history.best_epoch = history.train_loss.len().saturating_sub(1);
    if let Some((_, epoch, best_params)) = best {
        if cfg.early_stop.is_some() {
            history.best_epoch = epoch;
            params = best_params;
        }
    }
    Ok((params, history))
}

/// Output scores (pre-softmax) for every node.
pub fn logits(
    params: &ModelParams,
    x: &FeatureMatrix,
    adj: &SparseAdjacency,
) -> Result<Array2<f64>> {
    params.validate()?;
    if x.d() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "feature width vs model input",
            expected: params.input_dim(),
            found: x.d(),
        });
    }
    if adj.n() != x.n() {
        return Err(Error::DimensionMismatch {
            context: "adjacency vs feature rows",
            expected: x.n(),
            found: adj.n(),
        });
    }
    let norm = normalize(adj);
    match params.kind {
        ModelKind::Sgc => {
            let smoothed = smooth_view(&norm, x.view(), params.k_layers)?;
            Ok(sgc::linear(&params.layers[0], &smoothed))
        }
        ModelKind::Gcn => Ok(gcn_forward(params, &norm, x.as_array())?.logits),
    }
}

/// Predicted original label id per node; ties go to the lowest class.
pub fn predict(
    params: &ModelParams,
    x: &FeatureMatrix,
    adj: &SparseAdjacency,
) -> Result<Vec<usize>> {
    let scores = logits(params, x, adj)?;
    Ok(argmax_rows(scores.view())
        .into_iter()
        .map(|c| params.classes[c])
        .collect())
}

pub(crate) fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}
