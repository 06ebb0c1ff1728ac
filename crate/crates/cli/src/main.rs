//! `pagraph`: build graphs, train node classifiers and run experiment
//! manifests.
//!
//! Exit codes: 0 success, 2 configuration, 3 parse, 4 numeric, 5 i/o,
//! 1 anything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pagraph::classifiers::{checkpoint, fit, predict, ModelKind, TrainConfig};
use pagraph::data::save_edge_list;
use pagraph::experiments::{accuracy, run_experiment, ExperimentKind, Manifest, RunReport};
use pagraph::graph::build_graph_parts;
use pagraph::{ErrorCategory, RngState, SparseAdjacency};

#[derive(Parser, Debug)]
#[command(
    name = "pagraph",
    version,
    about = "Tree-based graph construction and SGC/GCN node classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment manifest (TOML).
    #[arg(long, short)]
    manifest: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides `experiment.runs`.
    #[arg(long)]
    runs: Option<usize>,
    /// Overrides `experiment.workers` (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the manifest's graph for one split and write it as an edge list.
    BuildGraph {
        #[command(flatten)]
        common: Common,
    },
    /// Train one model on one split; writes predictions, a checkpoint and the loss curve.
    Train {
        #[command(flatten)]
        common: Common,
        /// Overrides `model.kind`.
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Run the manifest's experiment, or a smoothing/tree sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Option<Axis>,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
    },
    /// Pair confusion of constructed graphs against a ground-truth edge list.
    CompareAdjacency {
        #[command(flatten)]
        common: Common,
        /// Overrides `experiment.ground_truth`.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
    },
    /// Accuracy of the four fusion cases.
    Ablation {
        #[command(flatten)]
        common: Common,
    },
    /// k-nearest-neighbour classifier on the raw features.
    BaselineKnn {
        #[command(flatten)]
        common: Common,
        /// Overrides `experiment.knn_k`.
        #[arg(long, short)]
        k: Option<usize>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModelArg {
    Sgc,
    Gcn,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Axis {
    Smoothing,
    Trees,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err
        .downcast_ref::<pagraph::Error>()
        .map(pagraph::Error::category)
    {
        Some(ErrorCategory::Config) => 2,
        Some(ErrorCategory::Parse) => 3,
        Some(ErrorCategory::Numeric) => 4,
        Some(ErrorCategory::Io) => 5,
        None => 1,
    }
}

fn load_manifest(common: &Common) -> anyhow::Result<Manifest> {
    let mut m = Manifest::load(&common.manifest)
        .with_context(|| format!("loading manifest {}", common.manifest.display()))?;
    if let Some(seed) = common.seed {
        m.experiment.seed = seed;
    }
    if let Some(runs) = common.runs {
        m.experiment.runs = runs;
    }
    if let Some(workers) = common.workers {
        m.experiment.workers = workers;
    }
    Ok(m)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::BuildGraph { common } => build_graph(&common),
        Command::Train { common, model } => train(&common, model),
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let mut m = load_manifest(&common)?;
            match axis {
                Some(Axis::Smoothing) => m.experiment.kind = ExperimentKind::Smoothing,
                Some(Axis::Trees) => m.experiment.kind = ExperimentKind::Trees,
                None => {}
            }
            if values.is_some() {
                m.experiment.values = values;
            }
            experiment(m, &common.out_dir)
        }
        Command::CompareAdjacency {
            common,
            ground_truth,
        } => {
            let mut m = load_manifest(&common)?;
            m.experiment.kind = ExperimentKind::CompareAdjacency;
            if ground_truth.is_some() {
                m.experiment.ground_truth = ground_truth;
            }
            experiment(m, &common.out_dir)
        }
        Command::Ablation { common } => {
            let mut m = load_manifest(&common)?;
            m.experiment.kind = ExperimentKind::Ablation;
            experiment(m, &common.out_dir)
        }
        Command::BaselineKnn { common, k } => {
            let mut m = load_manifest(&common)?;
            m.experiment.kind = ExperimentKind::BaselineKnn;
            if let Some(k) = k {
                m.experiment.knn_k = k;
            }
            experiment(m, &common.out_dir)
        }
    }
}

fn experiment(m: Manifest, out_dir: &Path) -> anyhow::Result<()> {
    let report = run_experiment(&m, out_dir)?;
    print_summary(&report);
    println!("outputs written to {}", out_dir.display());
    Ok(())
}

fn print_summary(report: &RunReport) {
    println!(
        "{} on {} samples x {} features",
        report.manifest.experiment.kind.name(),
        report.samples,
        report.features
    );
    for cell in &report.cells {
        let line: Vec<String> = cell
            .summary
            .iter()
            .map(|m| format!("{} {:.4} ± {:.4}", m.metric, m.mean, m.std))
            .collect();
        println!("  {:<18} {}", cell.id, line.join("  "));
    }
}

/// The data, split and seed of run 0, as `run_experiment` would use them.
fn single_run(
    m: &Manifest,
) -> anyhow::Result<(
    pagraph::data::Dataset,
    pagraph::graph::LabelAssignment,
    RngState,
)> {
    m.dataset.validate()?;
    m.graph.validate()?;
    let data = m.dataset.load()?;
    let split_state = RngState::new(m.dataset.split_seed).fork(0);
    let labels = pagraph::data::make_split(&data.truth, m.dataset.split, split_state)?;
    Ok((data, labels, RngState::new(m.experiment.seed).fork(0)))
}

fn build_graph(common: &Common) -> anyhow::Result<()> {
    let m = load_manifest(common)?;
    let (data, labels, state) = single_run(&m)?;
    let parts = build_graph_parts(&data.features, &labels, &m.graph, state)?;
    fs::create_dir_all(&common.out_dir).map_err(|e| pagraph::Error::Io {
        path: common.out_dir.clone(),
        source: e,
    })?;
    let path = common.out_dir.join("edges.txt");
    save_edge_list(&parts.edges, data.n(), &path)?;
    println!(
        "{}: {} nodes, {} edges (tree {}, intrinsic {}, penalty {})",
        m.graph.variant.name(),
        data.n(),
        parts.edges.len(),
        parts.tree_edges.len(),
        parts.intrinsic.len(),
        parts.penalty.len()
    );
    println!("edge list written to {}", path.display());
    Ok(())
}

fn train(common: &Common, model: Option<ModelArg>) -> anyhow::Result<()> {
    let m = load_manifest(common)?;
    let kind = match model {
        Some(ModelArg::Sgc) => ModelKind::Sgc,
        Some(ModelArg::Gcn) => ModelKind::Gcn,
        None => m.model.kind,
    };
    m.model.train.validate(kind)?;
    let (data, labels, state) = single_run(&m)?;
    let parts = build_graph_parts(&data.features, &labels, &m.graph, state)?;
    let adj = SparseAdjacency::from_edge_set(data.n(), &parts.edges)?;
    let cfg = TrainConfig {
        seed: state,
        ..m.model.train.clone()
    };
    let trained = fit(kind, &data.features, &adj, &labels, &cfg)?;
    let pred = predict(&trained.params, &data.features, &adj)?;

    let out = &common.out_dir;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |e: std::io::Error| pagraph::Error::Io { path, source: e }
    };
    fs::create_dir_all(out).map_err(io(out))?;
    let mut text = String::from("node,set,truth,prediction\n");
    for i in 0..data.n() {
        let set = if labels.train().binary_search(&i).is_ok() {
            "train"
        } else if labels.valid().binary_search(&i).is_ok() {
            "valid"
        } else if labels.test().binary_search(&i).is_ok() {
            "test"
        } else {
            "unused"
        };
        text.push_str(&format!(
            "{i},{set},{},{}\n",
            data.class_names[data.truth[i]], data.class_names[pred[i]]
        ));
    }
    let path = out.join("predictions.csv");
    fs::write(&path, text).map_err(io(&path))?;
    let mut curve = String::from("epoch,train_loss,valid_loss\n");
    for (e, loss) in trained.history.train_loss.iter().enumerate() {
        let valid = trained.history.valid_loss[e].map_or_else(String::new, |v| v.to_string());
        curve.push_str(&format!("{e},{loss},{valid}\n"));
    }
    let path = out.join("loss_curve.csv");
    fs::write(&path, curve).map_err(io(&path))?;
    checkpoint::save(&trained.params, &out.join("model.ckpt"))?;

    println!(
        "{} K={} on {} ({} edges): precompute {:.4}s, train {:.4}s, best epoch {}",
        kind.name(),
        cfg.k_layers,
        m.graph.variant.name(),
        parts.edges.len(),
        trained.precompute_secs,
        trained.train_secs,
        trained.history.best_epoch
    );
    for (name, set) in [
        ("train", labels.train()),
        ("valid", labels.valid()),
        ("test", labels.test()),
    ] {
        if !set.is_empty() {
            println!(
                "  {name} accuracy {:.4}",
                accuracy(&pred, &data.truth, set)?
            );
        }
    }
    println!("outputs written to {}", out.display());
    Ok(())
}
