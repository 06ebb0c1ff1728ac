//! Datasets: CSV loading, synthetic generators, stratified splits and
//! ground-truth edge lists.

mod csv_io;
mod edgelist;
mod split;
mod synthetic;

pub use csv_io::{load_csv, save_csv, CsvOptions, LabelColumn};
pub use edgelist::{load_ground_truth_graph, parse_edge_list, save_edge_list, EdgeListStats};
pub use split::{make_split, SplitCounts};
pub use synthetic::{make_synthetic, SyntheticKind};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::graph::LabelAssignment;
use crate::{Error, FeatureMatrix, Result, RngState};

/// Features with complete ground-truth labels, densified to `0..C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub truth: Vec<usize>,
    /// Original label text of each dense class id.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.features.n()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Source {
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "LabelColumn::is_last")]
        label_column: LabelColumn,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default = "default_true")]
        has_header: bool,
    },
    Synthetic {
        kind: SyntheticKind,
        n: usize,
        #[serde(default)]
        noise: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_delimiter() -> char {
    ','
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub source: Source,
    /// Train/valid/test sizes.
    pub split: SplitCounts,
    #[serde(default)]
    pub split_seed: u64,
    /// Z-score every feature column after loading.
    #[serde(default)]
    pub standardize: bool,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.split.train == 0 {
            return Err(Error::Config("split needs at least one train node".into()));
        }
        if let Source::Synthetic { n, noise, .. } = &self.source {
            if self.split.total() > *n {
                return Err(Error::Config(format!(
                    "split sizes sum to {} but the dataset has {n} samples",
                    self.split.total()
                )));
            }
            if !(*noise >= 0.0) {
                return Err(Error::Config("synthetic noise must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// Loads or generates the samples (standardized if requested).
    pub fn load(&self) -> Result<Dataset> {
        self.validate()?;
        let mut data = match &self.source {
            Source::Csv {
                path,
                label_column,
                delimiter,
                has_header,
            } => {
                let delimiter = u8::try_from(*delimiter).map_err(|_| {
                    Error::Config(format!("delimiter '{delimiter}' is not a single byte"))
                })?;
                load_csv(
                    path,
                    &CsvOptions {
                        delimiter,
                        has_header: *has_header,
                        label_column: label_column.clone(),
                    },
                )?
            }
            Source::Synthetic {
                kind,
                n,
                noise,
                seed,
            } => make_synthetic(*kind, *n, *noise, RngState::new(*seed))?,
        };
        if self.standardize {
            data.features.standardize();
        }
        Ok(data)
    }

    /// Loads the samples and draws the split with `split_seed`.
    pub fn load_with_split(&self) -> Result<(Dataset, LabelAssignment)> {
        let data = self.load()?;
        let labels = make_split(&data.truth, self.split, RngState::new(self.split_seed))?;
        Ok((data, labels))
    }
}
