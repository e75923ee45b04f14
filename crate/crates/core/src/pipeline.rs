//! End-to-end featurization, evaluation and component ablation.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::assemble::{assemble_features, AssembleOptions, AugmentedTable, Block, Blocks, PcaModel};
use crate::data::{Dataset, TaskKind, TaskSpec, Targets};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, average_precision, r2, MetricName, MetricResult};
use crate::nfa::{compute_nfa, NfaTable};
use crate::pearl::{init_weights, pearl_encode, train_pearl, PearlConfig, PearlTrainConfig, PearlWeights, TrainTargets};
use crate::predict::{PredictRequest, Prediction, Predictor, TrainLabels};
use crate::split::Split;
use crate::structural::{structural_features, StructuralConfig, StructuralFeatures};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeaturizeConfig {
    pub use_nfa: bool,
    pub use_sf: bool,
    pub use_pearl: bool,
    pub structural: StructuralConfig,
    pub pearl: PearlConfig,
    /// Zero epochs keeps the shared untrained encoder.
    pub pearl_train: PearlTrainConfig,
    pub assemble: AssembleOptions,
}

impl Default for FeaturizeConfig {
    fn default() -> Self {
        FeaturizeConfig {
            use_nfa: true,
            use_sf: true,
            use_pearl: true,
            structural: StructuralConfig::default(),
            pearl: PearlConfig::default(),
            pearl_train: PearlTrainConfig::default(),
            assemble: AssembleOptions::default(),
        }
    }
}

impl FeaturizeConfig {
    /// Sets every per-run seed (random draws, Lanczos start, encoder
    /// training) from one value. The shared encoder weight seed is untouched.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.pearl.draw_seed = seed;
        self.structural.lanczos_seed = seed;
        self.pearl_train.seed = seed;
        self
    }

    pub fn blocks(&self) -> Vec<Block> {
        let mut out = vec![Block::Orig];
        for (on, b) in [(self.use_nfa, Block::Nfa), (self.use_sf, Block::Sf), (self.use_pearl, Block::Pearl)] {
            if on {
                out.push(b);
            }
        }
        out
    }
}

/// Every derived block of a dataset, before selection and assembly.
#[derive(Debug, Clone)]
pub struct ComputedBlocks {
    pub nfa: Option<NfaTable>,
    pub sf: Option<StructuralFeatures>,
    pub pearl: Option<Array2<f64>>,
    pub pearl_weights: Option<PearlWeights>,
}

impl ComputedBlocks {
    pub fn select(&self, nfa: bool, sf: bool, pearl: bool) -> Blocks<'_> {
        Blocks {
            nfa: self.nfa.as_ref().filter(|_| nfa),
            sf: self.sf.as_ref().filter(|_| sf),
            pearl: self.pearl.as_ref().filter(|_| pearl).map(|p| p.view()),
        }
    }
}

fn pearl_targets<'a>(task: &TaskSpec, train: &[usize], classes: &'a mut Vec<u32>, values: &'a mut Vec<f64>) -> TrainTargets<'a> {
    match task.targets() {
        Targets::Classes(labels) => {
            *classes = train.iter().map(|&i| labels[i].expect("training nodes are labeled")).collect();
            TrainTargets::Classes {
                labels: classes,
                n_classes: task.n_classes(),
            }
        }
        Targets::Values(v) => {
            *values = train.iter().map(|&i| v[i]).collect();
            TrainTargets::Values(values)
        }
    }
}

/// Computes the enabled derived blocks.
pub fn compute_blocks(dataset: &Dataset, split: &Split, cfg: &FeaturizeConfig) -> Result<ComputedBlocks> {
    let nfa = if cfg.use_nfa {
        Some(compute_nfa(&dataset.graph, &dataset.features).map_err(|e| e.in_stage("nfa"))?)
    } else {
        None
    };
    let sf = if cfg.use_sf {
        Some(structural_features(&dataset.graph, &cfg.structural).map_err(|e| e.in_stage("structural features"))?)
    } else {
        None
    };
    let (pearl, pearl_weights) = if cfg.use_pearl {
        let stage = |e: Error| e.in_stage("pearl");
        let mut w = init_weights(&cfg.pearl).map_err(stage)?;
        if cfg.pearl_train.epochs > 0 {
            let (mut classes, mut values) = (Vec::new(), Vec::new());
            let targets = pearl_targets(&dataset.task, &split.train, &mut classes, &mut values);
            w = train_pearl(&dataset.graph, &cfg.pearl, &w, &split.train, targets, &cfg.pearl_train)
                .map_err(stage)?
                .weights;
        }
        (Some(pearl_encode(&dataset.graph, &cfg.pearl, &w).map_err(stage)?), Some(w))
    } else {
        (None, None)
    };
    Ok(ComputedBlocks {
        nfa,
        sf,
        pearl,
        pearl_weights,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub block: Block,
    pub width: usize,
    pub reduced_by_pca: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub split: u64,
    pub pearl_weights: u64,
    pub pearl_draws: u64,
    pub lanczos: u64,
    pub pearl_training: u64,
}

/// Metadata stored next to an augmented table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub n_rows: usize,
    pub blocks: Vec<BlockInfo>,
    pub pca: Vec<PcaModel>,
    pub seeds: Seeds,
    pub config: FeaturizeConfig,
}

#[derive(Debug, Clone)]
pub struct Featurized {
    pub table: AugmentedTable,
    pub sidecar: Sidecar,
    pub pearl_weights: Option<PearlWeights>,
}

pub fn sidecar_for(table: &AugmentedTable, split: &Split, cfg: &FeaturizeConfig) -> Sidecar {
    Sidecar {
        n_rows: table.n_rows(),
        blocks: table
            .blocks()
            .into_iter()
            .map(|b| BlockInfo {
                block: b,
                width: table.block_width(b),
                reduced_by_pca: table.pca.iter().any(|m| m.block == b.as_str()),
            })
            .collect(),
        pca: table.pca.clone(),
        seeds: Seeds {
            split: split.seed,
            pearl_weights: cfg.pearl.weight_seed,
            pearl_draws: cfg.pearl.draw_seed,
            lanczos: cfg.structural.lanczos_seed,
            pearl_training: cfg.pearl_train.seed,
        },
        config: cfg.clone(),
    }
}

/// Builds the augmented table `[orig | nfa | sf | pearl]` for the enabled blocks.
pub fn featurize(dataset: &Dataset, split: &Split, cfg: &FeaturizeConfig) -> Result<Featurized> {
    split.validate(dataset.n_nodes())?;
    let blocks = compute_blocks(dataset, split, cfg)?;
    let table = assemble_features(dataset, blocks.select(true, true, true), split, &cfg.assemble)
        .map_err(|e| e.in_stage("assemble"))?;
    let sidecar = sidecar_for(&table, split, cfg);
    Ok(Featurized {
        table,
        sidecar,
        pearl_weights: blocks.pearl_weights,
    })
}

/// Training rows (optionally with validation rows appended) and test rows of a table.
pub fn build_request(table: &AugmentedTable, task: &TaskSpec, split: &Split, val_in_context: bool) -> Result<PredictRequest> {
    if table.n_rows() != task.len() {
        return Err(Error::InvalidInput(format!(
            "table has {} rows, task has {} nodes",
            table.n_rows(),
            task.len()
        )));
    }
    split.validate(task.len())?;
    let mut train = split.train.clone();
    if val_in_context {
        train.extend_from_slice(&split.val);
    }
    let train_y = match task.targets() {
        Targets::Classes(labels) => TrainLabels::Classes(
            train
                .iter()
                .map(|&i| labels[i].ok_or_else(|| Error::InvalidInput(format!("training node {i} has no label"))))
                .collect::<Result<_>>()?,
        ),
        Targets::Values(v) => {
            if let Some(&i) = train.iter().find(|&&i| v[i].is_nan()) {
                return Err(Error::InvalidInput(format!("training node {i} has no target")));
            }
            TrainLabels::Values(train.iter().map(|&i| v[i]).collect())
        }
    };
    PredictRequest::new(table.rows(&train), train_y, table.rows(&split.test), task.kind(), task.n_classes())
}

/// The task metric of `pred` on `nodes`: average precision (binary),
/// accuracy (multiclass) or R² (regression).
pub fn score(pred: &Prediction, task: &TaskSpec, nodes: &[usize]) -> Result<MetricResult> {
    let n = nodes.len();
    pred.validate(n, task.n_classes())?;
    let (name, value) = match (task.kind(), pred, task.targets()) {
        (TaskKind::Binary, Prediction::Probabilities(p), Targets::Classes(l)) => {
            let labels: Vec<bool> = nodes.iter().map(|&i| l[i] == Some(1)).collect();
            (MetricName::AveragePrecision, average_precision(&p.column(1).to_vec(), &labels)?)
        }
        (TaskKind::Multiclass, Prediction::Probabilities(_), Targets::Classes(l)) => {
            let truth: Vec<u32> = nodes.iter().map(|&i| l[i].expect("evaluation nodes are labeled")).collect();
            (MetricName::Accuracy, accuracy(&pred.classes().expect("classification"), &truth)?)
        }
        (TaskKind::Regression, Prediction::Values(p), Targets::Values(v)) => {
            let truth: Vec<f64> = nodes.iter().map(|&i| v[i]).collect();
            (MetricName::R2, r2(p, &truth)?)
        }
        _ => return Err(Error::InvalidInput("prediction kind does not match the task".into())),
    };
    Ok(MetricResult { name, value, n_eval: n })
}

/// Fits on the training part of `split` and scores on its test part.
pub fn predict_evaluate(
    table: &AugmentedTable,
    task: &TaskSpec,
    split: &Split,
    predictor: &dyn Predictor,
    val_in_context: bool,
) -> Result<MetricResult> {
    let req = build_request(table, task, split, val_in_context)?;
    let pred = predictor.predict(&req).map_err(|e| e.in_stage("predict"))?;
    score(&pred, task, &split.test)
}

/// Mean and standard deviation of a metric over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: MetricName,
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl MetricSummary {
    pub fn from_runs(metric: MetricName, seeds: Vec<u64>, values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        // Offsets from the first run, so identical runs give that value exactly.
        let first = values.first().copied().unwrap_or(f64::NAN);
        let mean = first + values.iter().map(|v| v - first).sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MetricSummary {
            metric,
            mean,
            std,
            values,
            seeds,
        }
    }
}

/// Component ablations, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Full,
    NoNfa,
    NoSfPearl,
    NoSf,
    NoPearl,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Full, Variant::NoNfa, Variant::NoSfPearl, Variant::NoSf, Variant::NoPearl];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoNfa => "w/o NFA",
            Variant::NoSfPearl => "w/o SF & PEARL",
            Variant::NoSf => "w/o SF",
            Variant::NoPearl => "w/o PEARL",
        }
    }

    /// `(nfa, sf, pearl)` switches of the variant.
    pub fn switches(self) -> (bool, bool, bool) {
        match self {
            Variant::Full => (true, true, true),
            Variant::NoNfa => (false, true, true),
            Variant::NoSfPearl => (true, false, false),
            Variant::NoSf => (true, false, true),
            Variant::NoPearl => (true, true, false),
        }
    }

    pub fn apply(self, cfg: &FeaturizeConfig) -> FeaturizeConfig {
        let (use_nfa, use_sf, use_pearl) = self.switches();
        FeaturizeConfig {
            use_nfa,
            use_sf,
            use_pearl,
            ..cfg.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: Variant,
    pub label: String,
    pub width: usize,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    /// Plain-text table: variant, metric mean ± std, table width.
    pub fn render(&self) -> String {
        let metric = self.rows.first().map_or("metric".to_owned(), |r| r.summary.metric.to_string());
        let mut out = format!("{:<16} {:>22} {:>6}\n", "variant", metric, "width");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<16} {:>22} {:>6}\n",
                r.label,
                format!("{:.4} ± {:.4}", r.summary.mean, r.summary.std),
                r.width
            ));
        }
        out
    }
}

/// Runs the five component variants over `seeds`, computing each seed's
/// blocks once. `make_predictor` receives the run seed.
pub fn run_ablation<F>(
    dataset: &Dataset,
    split: &Split,
    cfg: &FeaturizeConfig,
    seeds: &[u64],
    make_predictor: F,
    val_in_context: bool,
) -> Result<AblationTable>
where
    F: Fn(u64) -> Box<dyn Predictor>,
{
    if seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed is required".into()));
    }
    let full = FeaturizeConfig {
        use_nfa: true,
        use_sf: true,
        use_pearl: true,
        ..cfg.clone()
    };
    let mut values = vec![Vec::with_capacity(seeds.len()); Variant::ALL.len()];
    let mut widths = vec![0; Variant::ALL.len()];
    let mut metric = None;
    for &seed in seeds {
        let run_cfg = full.clone().with_seed(seed);
        let blocks = compute_blocks(dataset, split, &run_cfg)?;
        let predictor = make_predictor(seed);
        for (v, variant) in Variant::ALL.iter().enumerate() {
            let (nfa, sf, pearl) = variant.switches();
            let table = assemble_features(dataset, blocks.select(nfa, sf, pearl), split, &cfg.assemble)
                .map_err(|e| e.in_stage("assemble"))?;
            let m = predict_evaluate(&table, &dataset.task, split, predictor.as_ref(), val_in_context)?;
            metric = Some(m.name);
            widths[v] = table.width();
            values[v].push(m.value);
        }
    }
    let metric = metric.expect("at least one run");
    Ok(AblationTable {
        rows: Variant::ALL
            .iter()
            .zip(values)
            .zip(widths)
            .map(|((&variant, vals), width)| AblationRow {
                variant,
                label: variant.label().to_owned(),
                width,
                summary: MetricSummary::from_runs(metric, seeds.to_vec(), vals),
            })
            .collect(),
    })
}
