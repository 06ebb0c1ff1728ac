//! Executes a [`Manifest`] and writes its CSV, SVG and JSON outputs.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! cells/<kind>_<cell>.csv     one row per run
//! losses/<kind>_<cell>_run<r>.csv
//! aggregate.csv               mean and std of every metric per cell
//! <kind>.svg                  sweeps only
//! report.json
//! ```
//!
//! Everything except the optional timing columns is a pure function of the
//! manifest.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::manifest::{ExperimentKind, Manifest};
use super::plot::{write_line_plot, PlotSeries};
use super::{accuracy, adjacency_confusion, knn_classify, AdjacencyConfusion};
use crate::bsp::TreeKind;
use crate::classifiers::{fit, predict, TrainConfig};
use crate::data::{load_ground_truth_graph, make_split, Dataset};
use crate::graph::{build_graph_parts, GraphRecipe, GraphVariant, LabelAssignment};
use crate::{EdgeSet, Error, Result, RngState, SparseAdjacency};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub graph_secs: f64,
    pub precompute_secs: f64,
    pub train_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub split_seed: u64,
    pub seed: u64,
    /// Test accuracy; absent for adjacency comparisons.
    pub accuracy: Option<f64>,
    pub edges: Option<usize>,
    pub confusion: Option<AdjacencyConfusion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    #[serde(skip)]
    pub train_loss: Vec<f64>,
    #[serde(skip)]
    pub valid_loss: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    /// File-name-safe cell id, e.g. `k2`, `forest40`, `pa_only`.
    pub id: String,
    /// Sweep value for `smoothing`/`trees`.
    pub value: Option<usize>,
    pub variant: Option<GraphVariant>,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<MetricSummary>,
}

impl CellReport {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.summary.iter().find(|m| m.metric == name)
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.accuracy).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub manifest: Manifest,
    pub samples: usize,
    pub features: usize,
    pub cells: Vec<CellReport>,
}

impl RunReport {
    pub fn cell(&self, id: &str) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone)]
struct Cell {
    id: String,
    value: Option<usize>,
    variant: Option<GraphVariant>,
    recipe: GraphRecipe,
    train: TrainConfig,
}

struct Context<'a> {
    manifest: &'a Manifest,
    data: Dataset,
    truth_graph: Option<EdgeSet>,
    cells: Vec<Cell>,
}

/// Validates, runs and writes all outputs.
pub fn run_experiment(manifest: &Manifest, out_dir: impl AsRef<Path>) -> Result<RunReport> {
    let report = execute(manifest)?;
    write_outputs(&report, out_dir)?;
    Ok(report)
}

/// Runs every cell of the manifest in memory.
pub fn execute(manifest: &Manifest) -> Result<RunReport> {
    manifest.validate()?;
    let ctx = prepare(manifest)?;
    let exp = &manifest.experiment;
    let workers = if exp.record_timings { 1 } else { exp.workers };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    log::info!(
        "{}: {} cells x {} runs on {} samples",
        exp.kind.name(),
        ctx.cells.len(),
        exp.runs,
        ctx.data.n()
    );
    let per_run: Vec<Vec<RunRecord>> = pool.install(|| {
        (0..exp.runs)
            .into_par_iter()
            .map(|run| run_one(&ctx, run))
            .collect::<Result<_>>()
    })?;

    let mut cells: Vec<CellReport> = ctx
        .cells
        .iter()
        .map(|c| CellReport {
            id: c.id.clone(),
            value: c.value,
            variant: c.variant,
            runs: Vec::with_capacity(exp.runs),
            summary: Vec::new(),
        })
        .collect();
    for records in per_run {
        for (cell, record) in cells.iter_mut().zip(records) {
            cell.runs.push(record);
        }
    }
    for cell in &mut cells {
        cell.summary = summarize(&cell.runs);
    }
    Ok(RunReport {
        manifest: manifest.clone(),
        samples: ctx.data.n(),
        features: ctx.data.features.d(),
        cells,
    })
}

fn prepare(manifest: &Manifest) -> Result<Context<'_>> {
    let data = manifest.dataset.load()?;
    let split = manifest.dataset.split;
    if split.total() > data.n() {
        return Err(Error::Config(format!(
            "split sizes sum to {} but the dataset has {} samples",
            split.total(),
            data.n()
        )));
    }
    let exp = &manifest.experiment;
    let truth_graph = match &exp.ground_truth {
        Some(path) if exp.kind == ExperimentKind::CompareAdjacency => {
            let (adj, stats) = load_ground_truth_graph(path, Some(data.n()))?;
            log::info!(
                "ground truth: {} entries, {} duplicates, {} self-loops, {} edges",
                stats.entries,
                stats.duplicates,
                stats.self_loops,
                adj.edge_count()
            );
            Some(adj.to_edge_set())
        }
        _ => None,
    };
    let base = |recipe: GraphRecipe, train: TrainConfig, id: String| Cell {
        id,
        value: None,
        variant: None,
        recipe,
        train,
    };
    let cells = match exp.kind {
        ExperimentKind::Accuracy | ExperimentKind::BaselineKnn => vec![base(
            manifest.graph.clone(),
            manifest.model.train.clone(),
            exp.kind.name().to_string(),
        )],
        ExperimentKind::Smoothing => manifest
            .sweep_values()
            .into_iter()
            .map(|k| Cell {
                value: Some(k),
                ..base(
                    manifest.graph.clone(),
                    TrainConfig {
                        k_layers: k,
                        ..manifest.model.train.clone()
                    },
                    format!("k{k}"),
                )
            })
            .collect(),
        ExperimentKind::Trees => manifest
            .sweep_values()
            .into_iter()
            .map(|t| {
                let mut recipe = manifest.graph.clone();
                recipe.tree.kind = TreeKind::RandomProjection;
                recipe.forest_size = t;
                Cell {
                    value: Some(t),
                    ..base(recipe, manifest.model.train.clone(), format!("forest{t}"))
                }
            })
            .collect(),
        ExperimentKind::Ablation | ExperimentKind::CompareAdjacency => manifest
            .sweep_variants()
            .into_iter()
            .map(|v| Cell {
                variant: Some(v),
                ..base(
                    GraphRecipe {
                        variant: v,
                        ..manifest.graph.clone()
                    },
                    manifest.model.train.clone(),
                    v.name().to_string(),
                )
            })
            .collect(),
    };
    for cell in &cells {
        cell.recipe.validate()?;
        if cell.recipe.variant.uses_labels() && split.train == 0 {
            return Err(Error::Config(format!(
                "variant '{}' needs train labels",
                cell.recipe.variant.name()
            )));
        }
    }
    Ok(Context {
        manifest,
        data,
        truth_graph,
        cells,
    })
}

/// One run across all cells. Cells with the same recipe share a graph.
fn run_one(ctx: &Context<'_>, run: usize) -> Result<Vec<RunRecord>> {
    let manifest = ctx.manifest;
    let split_state = RngState::new(manifest.dataset.split_seed).fork(run as u64);
    let run_state = RngState::new(manifest.experiment.seed).fork(run as u64);
    let labels = make_split(&ctx.data.truth, manifest.dataset.split, split_state)?;
    let x = &ctx.data.features;
    let kind = manifest.experiment.kind;
    let timings_on = manifest.experiment.record_timings;

    let mut cached: Option<(GraphRecipe, EdgeSet, SparseAdjacency, f64)> = None;
    let mut out = Vec::with_capacity(ctx.cells.len());
    for cell in &ctx.cells {
        let mut record = RunRecord {
            run,
            split_seed: split_state.seed(),
            seed: run_state.seed(),
            accuracy: None,
            edges: None,
            confusion: None,
            timings: None,
            train_loss: Vec::new(),
            valid_loss: Vec::new(),
        };
        if kind == ExperimentKind::BaselineKnn {
            record.accuracy = Some(knn_accuracy(&ctx.data, &labels, manifest.experiment.knn_k)?);
            out.push(record);
            continue;
        }
        if cached.as_ref().is_none_or(|(r, ..)| *r != cell.recipe) {
            let start = Instant::now();
            let parts = build_graph_parts(x, &labels, &cell.recipe, run_state)?;
            let adj = SparseAdjacency::from_edge_set(x.n(), &parts.edges)?;
            let secs = start.elapsed().as_secs_f64();
            cached = Some((cell.recipe.clone(), parts.edges, adj, secs));
        }
        let (_, edges, adj, graph_secs) = cached.as_ref().expect("graph built above");
        record.edges = Some(edges.len());

        if kind == ExperimentKind::CompareAdjacency {
            let truth = ctx.truth_graph.as_ref().expect("validated ground truth");
            record.confusion = Some(adjacency_confusion(edges, truth, x.n())?);
            if timings_on {
                record.timings = Some(Timings {
                    graph_secs: *graph_secs,
                    precompute_secs: 0.0,
                    train_secs: 0.0,
                });
            }
            out.push(record);
            continue;
        }

        let cfg = TrainConfig {
            seed: run_state,
            ..cell.train.clone()
        };
        let trained = fit(manifest.model.kind, x, adj, &labels, &cfg)?;
        let pred = predict(&trained.params, x, adj)?;
        record.accuracy = Some(accuracy(&pred, &ctx.data.truth, labels.test())?);
        if timings_on {
            record.timings = Some(Timings {
                graph_secs: *graph_secs,
                precompute_secs: trained.precompute_secs,
                train_secs: trained.train_secs,
            });
        }
        record.train_loss = trained.history.train_loss;
        record.valid_loss = trained.history.valid_loss;
        log::debug!("run {run} cell {}: accuracy {:?}", cell.id, record.accuracy);
        out.push(record);
    }
    Ok(out)
}

fn knn_accuracy(data: &Dataset, labels: &LabelAssignment, k: usize) -> Result<f64> {
    let train = labels.train();
    let x_train = data.features.select_rows(train)?;
    let y_train: Vec<usize> = train.iter().map(|&i| data.truth[i]).collect();
    let x_test = data.features.select_rows(labels.test())?;
    let pred = knn_classify(&x_train, &y_train, &x_test, k)?;
    let correct = labels
        .test()
        .iter()
        .zip(&pred)
        .filter(|(&i, &p)| data.truth[i] == p)
        .count();
    Ok(correct as f64 / pred.len() as f64)
}

fn summarize(runs: &[RunRecord]) -> Vec<MetricSummary> {
    let mut series: Vec<(&str, Vec<f64>)> = Vec::new();
    let mut push = |name: &'static str, v: Option<f64>| {
        if let Some(v) = v {
            match series.iter_mut().find(|(n, _)| *n == name) {
                Some((_, values)) => values.push(v),
                None => series.push((name, vec![v])),
            }
        }
    };
    for r in runs {
        push("accuracy", r.accuracy);
        push("edges", r.edges.map(|e| e as f64));
        if let Some(c) = &r.confusion {
            push("tn", Some(c.tn as f64));
            push("fn", Some(c.fn_ as f64));
            push("fp", Some(c.fp as f64));
            push("tp", Some(c.tp as f64));
            push("hit_rate", c.hit_rate());
            push("removal_rate", c.removal_rate());
        }
    }
    series
        .into_iter()
        .map(|(name, v)| {
            let (mean, std) = mean_std(&v);
            MetricSummary {
                metric: name.to_string(),
                mean,
                std,
            }
        })
        .collect()
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Writes cell CSVs, loss curves, the aggregate table, sweep plots and
/// `report.json`.
pub fn write_outputs(report: &RunReport, out_dir: impl AsRef<Path>) -> Result<()> {
    let out_dir = out_dir.as_ref();
    let exp = &report.manifest.experiment;
    let kind = exp.kind.name();
    let cells_dir = out_dir.join("cells");
    let loss_dir = out_dir.join("losses");
    for dir in [out_dir, &cells_dir, &loss_dir] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let csv_err = |path: &Path| {
        let shown = path.to_path_buf();
        move |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(&shown, io),
            other => Error::InvalidInput(format!("{}: {other:?}", shown.display())),
        }
    };

    for cell in &report.cells {
        let path = cells_dir.join(format!("{kind}_{}.csv", cell.id));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        let compare = exp.kind == ExperimentKind::CompareAdjacency;
        let mut header: Vec<&str> = vec!["run", "split_seed", "seed"];
        if compare {
            header.extend(["edges", "tn", "fn", "fp", "tp", "hit_rate", "removal_rate"]);
        } else {
            header.extend(["accuracy", "edges", "loss_curve"]);
        }
        if exp.record_timings {
            header.extend(["graph_secs", "precompute_secs", "train_secs"]);
        }
        w.write_record(&header).map_err(csv_err(&path))?;
        for r in &cell.runs {
            let mut row = vec![
                r.run.to_string(),
                r.split_seed.to_string(),
                r.seed.to_string(),
            ];
            if let Some(c) = &r.confusion {
                row.extend([
                    opt(r.edges),
                    c.tn.to_string(),
                    c.fn_.to_string(),
                    c.fp.to_string(),
                    c.tp.to_string(),
                    opt(c.hit_rate()),
                    opt(c.removal_rate()),
                ]);
            } else {
                let curve = if exp.loss_curves && !r.train_loss.is_empty() {
                    let name = format!("{kind}_{}_run{}.csv", cell.id, r.run);
                    write_loss_curve(&loss_dir.join(&name), r)?;
                    format!("losses/{name}")
                } else {
                    String::new()
                };
                row.extend([opt(r.accuracy), opt(r.edges), curve]);
            }
            if let Some(t) = &r.timings {
                row.extend([
                    t.graph_secs.to_string(),
                    t.precompute_secs.to_string(),
                    t.train_secs.to_string(),
                ]);
            }
            w.write_record(&row).map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }

    let path = out_dir.join("aggregate.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["cell", "value", "variant", "metric", "runs", "mean", "std"])
        .map_err(csv_err(&path))?;
    for cell in &report.cells {
        for m in &cell.summary {
            w.write_record([
                cell.id.clone(),
                opt(cell.value),
                opt(cell.variant.map(|v| v.name())),
                m.metric.clone(),
                cell.runs.len().to_string(),
                m.mean.to_string(),
                m.std.to_string(),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    if matches!(exp.kind, ExperimentKind::Smoothing | ExperimentKind::Trees) {
        let mut series = PlotSeries {
            label: report.manifest.model.kind.name().to_string(),
            x: Vec::new(),
            y: Vec::new(),
            spread: Some(Vec::new()),
        };
        for cell in &report.cells {
            if let (Some(v), Some(m)) = (cell.value, cell.metric("accuracy")) {
                series.x.push(v as f64);
                series.y.push(m.mean);
                series.spread.as_mut().expect("set above").push(m.std);
            }
        }
        let x_label = if exp.kind == ExperimentKind::Smoothing {
            "K"
        } else {
            "RP trees"
        };
        write_line_plot(
            out_dir.join(format!("{kind}.svg")),
            &format!("test accuracy vs {x_label}"),
            x_label,
            "test accuracy",
            &[series],
        )?;
    }

    let path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

fn write_loss_curve(path: &Path, r: &RunRecord) -> Result<()> {
    let mut text = String::from("epoch,train_loss,valid_loss\n");
    for (epoch, loss) in r.train_loss.iter().enumerate() {
        let valid = r.valid_loss.get(epoch).copied().flatten();
        text.push_str(&format!("{epoch},{loss},{}\n", opt(valid)));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
