#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graftab::assemble::AugmentedTable;
use graftab::equivariance::{check_feature_permutation, check_label_permutation, check_node_permutation, Report};
use graftab::io::{load_dataset, load_dataset_dir, read_json, write_dataset, write_json};
use graftab::pipeline::{featurize, predict_evaluate, run_ablation, FeaturizeConfig, MetricSummary};
use graftab::predict::{BridgeClient, Knn, LabelShuffle, Linear, Predictor};
use graftab::synth::{sbm_dataset, SbmConfig};
use graftab::{dataset_stats, make_split, Dataset, DatasetStats, Error, Result, Split, SplitRatios};
use serde::Serialize;

use config::{FeaturizeFile, FileConfig, PredictFile};

pub const TABLE_FILE: &str = "table.csv";
pub const SIDECAR_FILE: &str = "sidecar.json";
pub const WEIGHTS_FILE: &str = "pearl_weights.bin";

#[derive(Parser, Debug)]
#[command(name = "graftab", version, about = "Graph-to-tabular node featurization and evaluation")]
struct Cli {
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for data-parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate raw files and store them in the canonical dataset layout.
    Ingest {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print summary statistics of a dataset directory.
    Stats {
        #[arg(long)]
        data: PathBuf,
    },
    /// Draw a train/val/test split.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        train: Option<f64>,
        #[arg(long)]
        val: Option<f64>,
        #[arg(long)]
        test: Option<f64>,
        #[arg(long)]
        no_stratify: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build the augmented table.
    Featurize {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        feat: FeatArgs,
    },
    /// Fit a predictor on an augmented table over several seeds and report the test metric.
    Predict {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        /// Directory written by `featurize`.
        #[arg(long)]
        table: PathBuf,
        #[command(flatten)]
        pred: PredictArgs,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the five component variants.
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[command(flatten)]
        feat: FeatArgs,
        #[command(flatten)]
        pred: PredictArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a stochastic block model dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n_nodes: usize,
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value_t = 0.02)]
        p_in: f64,
        #[arg(long, default_value_t = 0.002)]
        p_out: f64,
        #[arg(long, default_value_t = 4)]
        n_features: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the feature, node and label permutation checks.
    Check {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[command(flatten)]
        feat: FeatArgs,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct FeatArgs {
    #[arg(long)]
    no_nfa: bool,
    #[arg(long)]
    no_sf: bool,
    #[arg(long)]
    no_pearl: bool,
    /// Blocks wider than this are reduced by PCA.
    #[arg(long)]
    pca_threshold: Option<usize>,
    #[arg(long)]
    pca_dims: Option<usize>,
    /// Random draws averaged by the positional encoder.
    #[arg(long)]
    pearl_m: Option<usize>,
    /// Training epochs for the encoder; 0 keeps the shared random weights.
    #[arg(long)]
    pearl_epochs: Option<usize>,
    #[arg(long)]
    pearl_lr: Option<f64>,
    /// Number of Laplacian eigenvectors.
    #[arg(long)]
    eig_k: Option<usize>,
    #[arg(long)]
    dense_limit: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PredictorKind {
    Knn,
    Linear,
    Bridge,
}

#[derive(Args, Debug, Clone, Default)]
struct PredictArgs {
    #[arg(long, value_enum)]
    predictor: Option<PredictorKind>,
    #[arg(long)]
    n_seeds: Option<usize>,
    /// First run seed; run r uses seed + r.
    #[arg(long = "predict-seed")]
    predict_seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    /// Average over this many class relabelings (classification only).
    #[arg(long)]
    shuffles: Option<usize>,
    /// Put validation rows into the training context.
    #[arg(long)]
    val_in_context: bool,
    #[arg(long)]
    bridge_dir: Option<PathBuf>,
    /// Seconds to wait for the bridge.
    #[arg(long)]
    bridge_timeout: Option<f64>,
}

fn featurize_config(a: &FeatArgs, f: &FeaturizeFile) -> FeaturizeConfig {
    let base = FeaturizeConfig::default();
    let mut cfg = base.clone().with_seed(a.seed.or(f.seed).unwrap_or(0));
    cfg.use_nfa = !(a.no_nfa || f.no_nfa.unwrap_or(false));
    cfg.use_sf = !(a.no_sf || f.no_sf.unwrap_or(false));
    cfg.use_pearl = !(a.no_pearl || f.no_pearl.unwrap_or(false));
    cfg.assemble.pca_threshold = a.pca_threshold.or(f.pca_threshold).unwrap_or(base.assemble.pca_threshold);
    cfg.assemble.pca_dims = a.pca_dims.or(f.pca_dims).unwrap_or(base.assemble.pca_dims);
    cfg.pearl.m_draws = a.pearl_m.or(f.pearl_m).unwrap_or(base.pearl.m_draws);
    cfg.pearl_train.epochs = a.pearl_epochs.or(f.pearl_epochs).unwrap_or(base.pearl_train.epochs);
    cfg.pearl_train.lr = a.pearl_lr.or(f.pearl_lr).unwrap_or(base.pearl_train.lr);
    cfg.structural.n_eigenvectors = a.eig_k.or(f.eig_k).unwrap_or(base.structural.n_eigenvectors);
    cfg.structural.dense_limit = a.dense_limit.or(f.dense_limit).unwrap_or(base.structural.dense_limit);
    cfg
}

#[derive(Debug, Clone)]
struct PredictSettings {
    kind: PredictorKind,
    n_seeds: usize,
    seed: u64,
    k: usize,
    l2: f64,
    shuffles: usize,
    val_in_context: bool,
    bridge_dir: Option<PathBuf>,
    bridge_timeout: Duration,
}

fn predict_settings(a: &PredictArgs, f: &PredictFile) -> Result<PredictSettings> {
    let kind = match (a.predictor, f.predictor.as_deref()) {
        (Some(k), _) => k,
        (None, Some(name)) => PredictorKind::from_str(name, true)
            .map_err(|_| Error::InvalidInput(format!("unknown predictor `{name}` in config (knn, linear, bridge)")))?,
        (None, None) => PredictorKind::Knn,
    };
    let timeout = a.bridge_timeout.or(f.bridge_timeout).unwrap_or(600.0);
    if !(timeout > 0.0) {
        return Err(Error::InvalidInput("bridge timeout must be positive".into()));
    }
    let s = PredictSettings {
        kind,
        n_seeds: a.n_seeds.or(f.n_seeds).unwrap_or(10),
        seed: a.predict_seed.or(f.seed).unwrap_or(0),
        k: a.k.or(f.k).unwrap_or(Knn::default().k),
        l2: a.l2.or(f.l2).unwrap_or(Linear::default().l2),
        shuffles: a.shuffles.or(f.shuffles).unwrap_or(0),
        val_in_context: a.val_in_context || f.val_in_context.unwrap_or(false),
        bridge_dir: a.bridge_dir.clone().or_else(|| f.bridge_dir.clone()),
        bridge_timeout: Duration::from_secs_f64(timeout),
    };
    if s.n_seeds == 0 {
        return Err(Error::InvalidInput("--n-seeds must be at least 1".into()));
    }
    if s.kind == PredictorKind::Bridge && s.bridge_dir.is_none() {
        return Err(Error::InvalidInput("the bridge predictor needs --bridge-dir".into()));
    }
    Ok(s)
}

fn make_predictor(s: &PredictSettings, classification: bool, seed: u64) -> Box<dyn Predictor> {
    let inner: Box<dyn Predictor> = match s.kind {
        PredictorKind::Knn => Box::new(Knn { k: s.k }),
        PredictorKind::Linear => Box::new(Linear {
            l2: s.l2,
            ..Linear::default()
        }),
        PredictorKind::Bridge => Box::new(BridgeClient::new(
            s.bridge_dir.clone().expect("checked in predict_settings"),
            s.bridge_timeout,
        )),
    };
    if classification && s.shuffles > 0 {
        Box::new(LabelShuffle::new(inner, s.shuffles, seed))
    } else {
        inner
    }
}

fn load(dir: &Path) -> Result<Dataset> {
    load_dataset_dir(dir).map(|(ds, _)| ds)
}

fn load_split(path: &Path, ds: &Dataset) -> Result<Split> {
    let split: Split = read_json(path)?;
    split.validate(ds.n_nodes())?;
    Ok(split)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable value"));
}

#[derive(Serialize)]
struct IngestReport {
    stats: DatasetStats,
    edges_read: usize,
    self_loops_dropped: usize,
    duplicates_merged: usize,
}

#[derive(Serialize)]
struct PredictReport {
    predictor: PredictorKind,
    shuffles: usize,
    split_seed: u64,
    val_in_context: bool,
    #[serde(flatten)]
    summary: MetricSummary,
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    set_threads(cli.threads.or(file.threads))?;
    match cli.command {
        Command::Ingest {
            edges,
            features,
            meta,
            out,
        } => {
            let (ds, report) = load_dataset(&edges, &features, &meta)?;
            write_dataset(&out, &ds)?;
            print_json(&IngestReport {
                stats: dataset_stats(&ds),
                edges_read: report.edges_read,
                self_loops_dropped: report.graph.self_loops_dropped,
                duplicates_merged: report.graph.duplicates_merged,
            });
        }
        Command::Stats { data } => print_json(&dataset_stats(&load(&data)?)),
        Command::Split {
            data,
            out,
            train,
            val,
            test,
            no_stratify,
            seed,
        } => {
            let ds = load(&data)?;
            let f = &file.split;
            let d = SplitRatios::default();
            let ratios = SplitRatios {
                train: train.or(f.train).unwrap_or(d.train),
                val: val.or(f.val).unwrap_or(d.val),
                test: test.or(f.test).unwrap_or(d.test),
            };
            let stratified = !(no_stratify || f.no_stratify.unwrap_or(false));
            let split = make_split(&ds, ratios, stratified, seed.or(f.seed).unwrap_or(0))?;
            write_json(&out, &split)?;
            println!(
                "split seed {}: {} train, {} val, {} test",
                split.seed,
                split.train.len(),
                split.val.len(),
                split.test.len()
            );
        }
        Command::Featurize { data, split, out, feat } => {
            let ds = load(&data)?;
            let split = load_split(&split, &ds)?;
            let cfg = featurize_config(&feat, &file.featurize);
            let f = featurize(&ds, &split, &cfg)?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            f.table.write_csv(&out.join(TABLE_FILE))?;
            write_json(&out.join(SIDECAR_FILE), &f.sidecar)?;
            if let Some(w) = &f.pearl_weights {
                let path = out.join(WEIGHTS_FILE);
                let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                w.write_to(std::io::BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
            }
            let blocks: Vec<String> = f.sidecar.blocks.iter().map(|b| format!("{}={}", b.block.as_str(), b.width)).collect();
            println!(
                "{} rows x {} columns [{}]; seeds: split {}, draws {}, weights {}",
                f.table.n_rows(),
                f.table.width(),
                blocks.join(" "),
                f.sidecar.seeds.split,
                f.sidecar.seeds.pearl_draws,
                f.sidecar.seeds.pearl_weights
            );
        }
        Command::Predict {
            data,
            split,
            table,
            pred,
            out,
        } => {
            let ds = load(&data)?;
            let split = load_split(&split, &ds)?;
            let table = AugmentedTable::read_csv(&table.join(TABLE_FILE))?;
            if table.n_rows() != ds.n_nodes() {
                return Err(Error::InvalidInput(format!(
                    "table has {} rows but the dataset has {} nodes",
                    table.n_rows(),
                    ds.n_nodes()
                )));
            }
            let s = predict_settings(&pred, &file.predict)?;
            let classification = ds.task.kind().is_classification();
            let seeds: Vec<u64> = (0..s.n_seeds as u64).map(|r| s.seed + r).collect();
            let mut values = Vec::with_capacity(seeds.len());
            let mut metric = None;
            for &seed in &seeds {
                let p = make_predictor(&s, classification, seed);
                let m = predict_evaluate(&table, &ds.task, &split, p.as_ref(), s.val_in_context)?;
                metric = Some(m.name);
                values.push(m.value);
            }
            let report = PredictReport {
                predictor: s.kind,
                shuffles: s.shuffles,
                split_seed: split.seed,
                val_in_context: s.val_in_context,
                summary: MetricSummary::from_runs(metric.expect("at least one seed"), seeds, values),
            };
            if let Some(out) = out {
                write_json(&out, &report)?;
            }
            print_json(&report);
        }
        Command::Ablate {
            data,
            split,
            feat,
            pred,
            out,
        } => {
            let ds = load(&data)?;
            let split = load_split(&split, &ds)?;
            let cfg = featurize_config(&feat, &file.featurize);
            let s = predict_settings(&pred, &file.predict)?;
            let classification = ds.task.kind().is_classification();
            let seeds: Vec<u64> = (0..s.n_seeds as u64).map(|r| s.seed + r).collect();
            let table = run_ablation(&ds, &split, &cfg, &seeds, |seed| make_predictor(&s, classification, seed), s.val_in_context)?;
            if let Some(out) = out {
                write_json(&out, &table)?;
            }
            print!("{}", table.render());
            println!("seeds {:?}; split seed {}; weight seed {}", seeds, split.seed, cfg.pearl.weight_seed);
        }
        Command::Synth {
            out,
            n_nodes,
            blocks,
            p_in,
            p_out,
            n_features,
            seed,
        } => {
            let ds = sbm_dataset(&SbmConfig {
                n_nodes,
                n_blocks: blocks,
                p_in,
                p_out,
                n_features,
                seed,
            })?;
            write_dataset(&out, &ds)?;
            print_json(&dataset_stats(&ds));
        }
        Command::Check { data, split, feat } => {
            let ds = load(&data)?;
            let split = load_split(&split, &ds)?;
            let cfg = featurize_config(&feat, &file.featurize);
            let seed = cfg.pearl.draw_seed;
            let mut reports: Vec<Report> = Vec::new();
            if ds.features.n_columns() > 0 {
                reports.push(check_feature_permutation(&ds, &split, &cfg, seed)?);
            }
            reports.push(check_node_permutation(&ds, &cfg, seed)?);
            if ds.task.kind().is_classification() && ds.task.n_classes() <= 4 {
                let table = featurize(&ds, &split, &cfg)?.table;
                reports.push(check_label_permutation(&table, &ds, &split)?);
            }
            for r in &reports {
                println!("{}", r.render());
            }
            if !reports.iter().all(Report::passed) {
                return Err(Error::Numeric("equivariance checks failed".into()));
            }
        }
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("cannot configure the thread pool: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(threads: Option<usize>) -> Result<()> {
    if threads.is_some_and(|n| n > 1) {
        eprintln!("warning: built without the `parallel` feature; running on one thread");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
