//! TOML experiment manifests.
//!
//! ```toml
//! [dataset]
//! source = "synthetic"
//! kind = { name = "blobs", classes = 3 }
//! n = 300
//! noise = 1.0
//! split = [50, 50, 200]
//!
//! [graph]
//! variant = "full"
//! tree = { kind = "pa", leaf_size = 20 }
//!
//! [model]
//! kind = "sgc"
//! k_layers = 2
//! epochs = 200
//! learning_rate = 0.2
//!
//! [experiment]
//! kind = "accuracy"
//! runs = 10
//! seed = 7
//! ```
//!
//! Run `r` draws its split from `RngState::new(dataset.split_seed).fork(r)`
//! and its trees and initial weights from `RngState::new(experiment.seed).fork(r)`.
//! `model.seed` and `graph.tree.seed` are ignored by the runner.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{ModelKind, TrainConfig};
use crate::data::DatasetSpec;
use crate::graph::{GraphRecipe, GraphVariant};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Test accuracy of one recipe and model.
    Accuracy,
    /// SGC/GCN depth `K` over `values` (default 1..=50).
    Smoothing,
    /// RP-forest size over `values` (default 20, 40, .., 100).
    Trees,
    /// One cell per graph variant (default the four fusion cases).
    Ablation,
    /// Constructed graphs against `ground_truth`, one cell per variant
    /// (default the recipe's variant, k-nn and epsilon).
    CompareAdjacency,
    /// k-nn classifier on the train rows.
    BaselineKnn,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Accuracy => "accuracy",
            ExperimentKind::Smoothing => "smoothing",
            ExperimentKind::Trees => "trees",
            ExperimentKind::Ablation => "ablation",
            ExperimentKind::CompareAdjacency => "compare_adjacency",
            ExperimentKind::BaselineKnn => "baseline_knn",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub runs: usize,
    pub seed: u64,
    /// Parallel runs; 0 uses all cores.
    pub workers: usize,
    /// Sweep axis for `smoothing` and `trees`.
    pub values: Option<Vec<usize>>,
    /// Cells for `ablation` and `compare_adjacency`.
    pub variants: Option<Vec<GraphVariant>>,
    /// Edge list for `compare_adjacency`.
    pub ground_truth: Option<PathBuf>,
    /// Neighbours for `baseline_knn`.
    pub knn_k: usize,
    /// Adds wall-clock columns to the CSVs and forces a single worker.
    pub record_timings: bool,
    /// Write one loss-curve CSV per run.
    pub loss_curves: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Accuracy,
            runs: 10,
            seed: 0,
            workers: 0,
            values: None,
            variants: None,
            ground_truth: None,
            knn_k: 5,
            record_timings: false,
            loss_curves: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    #[serde(default = "default_model")]
    pub kind: ModelKind,
    #[serde(flatten)]
    pub train: TrainConfig,
}

fn default_model() -> ModelKind {
    ModelKind::Sgc
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Sgc,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub graph: GraphRecipe,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

impl Manifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a manifest; a relative `path` or `ground_truth` inside it is
    /// resolved against the manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        if let crate::data::Source::Csv { path: csv, .. } = &mut manifest.dataset.source {
            if csv.is_relative() {
                *csv = base.join(&*csv);
            }
        }
        if let Some(gt) = &mut manifest.experiment.ground_truth {
            if gt.is_relative() {
                *gt = base.join(&*gt);
            }
        }
        Ok(manifest)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Sweep axis values, with the kind's defaults filled in.
    pub fn sweep_values(&self) -> Vec<usize> {
        if let Some(v) = &self.experiment.values {
            return v.clone();
        }
        match self.experiment.kind {
            ExperimentKind::Smoothing => (1..=50).collect(),
            ExperimentKind::Trees => vec![20, 40, 60, 80, 100],
            _ => Vec::new(),
        }
    }

    pub fn sweep_variants(&self) -> Vec<GraphVariant> {
        if let Some(v) = &self.experiment.variants {
            return v.clone();
        }
        match self.experiment.kind {
            ExperimentKind::Ablation => GraphVariant::ABLATION.to_vec(),
            ExperimentKind::CompareAdjacency => {
                let mut v = vec![self.graph.variant];
                for extra in [GraphVariant::Knn, GraphVariant::Epsilon] {
                    if !v.contains(&extra) {
                        v.push(extra);
                    }
                }
                v
            }
            _ => vec![self.graph.variant],
        }
    }

    /// Everything that can be checked without loading data.
    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.graph.validate()?;
        let exp = &self.experiment;
        if exp.runs == 0 {
            return Err(Error::Config("experiment.runs must be at least 1".into()));
        }
        match exp.kind {
            ExperimentKind::Smoothing => {
                let values = self.sweep_values();
                if values.is_empty() {
                    return Err(Error::Config("smoothing sweep needs at least one K".into()));
                }
                for &k in &values {
                    let cfg = TrainConfig {
                        k_layers: k,
                        ..self.model.train.clone()
                    };
                    cfg.validate(self.model.kind)?;
                }
            }
            ExperimentKind::Trees => {
                let values = self.sweep_values();
                if values.is_empty() || values.contains(&0) {
                    return Err(Error::Config("tree sweep needs forest sizes >= 1".into()));
                }
                if !self.graph.variant.uses_trees() {
                    return Err(Error::Config(format!(
                        "tree sweep needs a tree-based variant, got '{}'",
                        self.graph.variant.name()
                    )));
                }
            }
            ExperimentKind::Ablation | ExperimentKind::CompareAdjacency => {
                if self.sweep_variants().is_empty() {
                    return Err(Error::Config("variant list is empty".into()));
                }
            }
            ExperimentKind::BaselineKnn => {
                if exp.knn_k == 0 {
                    return Err(Error::Config("knn_k must be at least 1".into()));
                }
                if exp.knn_k > self.dataset.split.train {
                    return Err(Error::Config(format!(
                        "knn_k = {} exceeds the {} train nodes",
                        exp.knn_k, self.dataset.split.train
                    )));
                }
            }
            ExperimentKind::Accuracy => {}
        }
        if exp.kind == ExperimentKind::CompareAdjacency {
            if exp.ground_truth.is_none() {
                return Err(Error::Config(
                    "compare_adjacency needs experiment.ground_truth".into(),
                ));
            }
        } else if exp.kind != ExperimentKind::BaselineKnn {
            self.model.train.validate(self.model.kind)?;
            if self.dataset.split.test == 0 {
                return Err(Error::Config(
                    "accuracy needs at least one test node".into(),
                ));
            }
        }
        Ok(())
    }
}
