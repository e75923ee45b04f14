//! Executable checks of the three symmetries of the featurization:
//! feature-column permutation, node permutation and class relabeling.
//!
//! Each check returns a [`Report`] of named sub-checks with their tolerance
//! and the largest deviation observed; the report passes only if every
//! sub-check does.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assemble::AugmentedTable;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation};
use crate::nfa::compute_nfa;
use crate::pearl::{gnn_forward, init_weights, pearl_moments, random_features, PearlConfig};
use crate::pipeline::{build_request, featurize, predict_evaluate, FeaturizeConfig};
use crate::predict::{shuffle_permutations, Knn, LabelShuffle, Linear, Prediction, Predictor};
use crate::split::Split;
use crate::structural::{degrees, laplacian_eigenvectors, pagerank};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub max_deviation: f64,
    /// Distribution-level check with a standard-error bound.
    pub statistical: bool,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        if self.tolerance == 0.0 {
            self.max_deviation == 0.0
        } else {
            self.max_deviation <= self.tolerance
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub title: String,
    pub checks: Vec<CheckResult>,
}

impl Report {
    fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, tolerance: f64, max_deviation: f64) {
        self.checks.push(CheckResult {
            name: name.into(),
            tolerance,
            max_deviation,
            statistical: false,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// One line per sub-check: name, tolerance, max deviation, verdict.
    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        out.push_str(&format!("{:<44} {:>10} {:>12}  result\n", "check", "tolerance", "max_dev"));
        for c in &self.checks {
            let tol = if c.tolerance == 0.0 { "exact".to_owned() } else { format!("{:.0e}", c.tolerance) };
            let name = if c.statistical { format!("{} [statistical]", c.name) } else { c.name.clone() };
            out.push_str(&format!(
                "{:<44} {:>10} {:>12.3e}  {}\n",
                name,
                tol,
                c.max_deviation,
                if c.passed() { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!("overall: {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        out
    }
}

/// Largest absolute difference, with NaN matching only NaN.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x.is_nan(), y.is_nan()) {
            (true, true) => 0.0,
            (false, false) => (x - y).abs(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

fn matrix_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    let (a, b): (Vec<f64>, Vec<f64>) = (a.iter().copied().collect(), b.iter().copied().collect());
    max_abs_diff(&a, &b)
}

/// Frobenius distance between the projectors `V Vᵀ` and `W Wᵀ`.
pub fn projector_distance(v: &Array2<f64>, w: &Array2<f64>) -> f64 {
    let d = v.dot(&v.t()) - w.dot(&w.t());
    d.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Built-in predictors, with `k` capped at the training size.
fn builtin_predictors(n_train: usize) -> Vec<(&'static str, Box<dyn Predictor>)> {
    let k = Knn::default().k.min(n_train).max(1);
    vec![("knn", Box::new(Knn { k })), ("linear", Box::new(Linear::default()))]
}

/// Reorders the feature columns by `order` (new column `j` is old column
/// `order[j]`) and checks that aggregated groups move with their source
/// column and that built-in predictors score identically end to end.
pub fn check_feature_permutation_with(dataset: &Dataset, split: &Split, cfg: &FeaturizeConfig, order: &[usize]) -> Result<Report> {
    let n_cols = dataset.features.n_columns();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n_cols).collect::<Vec<_>>() {
        return Err(Error::InvalidInput("column order must be a permutation of the feature columns".into()));
    }
    let mut report = Report::new(format!("feature permutation {order:?}"));
    let moved = Dataset {
        features: dataset.features.select_columns(order),
        ..dataset.clone()
    };

    let base = compute_nfa(&dataset.graph, &dataset.features)?;
    let perm = compute_nfa(&moved.graph, &moved.features)?;
    let group = |t: &crate::nfa::NfaTable, source: &str| -> Vec<Vec<f64>> {
        t.provenance
            .iter()
            .zip(&t.columns)
            .filter(|(p, _)| p.source == source)
            .map(|(_, c)| c.clone())
            .collect()
    };
    let mut dev: f64 = 0.0;
    for col in dataset.features.columns() {
        let (a, b) = (group(&base, &col.name), group(&perm, &col.name));
        if a.len() != b.len() {
            dev = f64::INFINITY;
            continue;
        }
        for (x, y) in a.iter().zip(&b) {
            dev = dev.max(max_abs_diff(x, y));
        }
    }
    let expected_sources: Vec<&str> = order.iter().map(|&j| dataset.features.columns()[j].name.as_str()).collect();
    let mut got_sources: Vec<&str> = perm.provenance.iter().map(|p| p.source.as_str()).collect();
    got_sources.dedup();
    if got_sources != expected_sources {
        dev = f64::INFINITY;
    }
    report.push("nfa groups follow their columns", 0.0, dev);

    let a = featurize(dataset, split, cfg)?;
    let b = featurize(&moved, split, cfg)?;
    for (name, p) in builtin_predictors(split.train.len()) {
        let ma = predict_evaluate(&a.table, &dataset.task, split, p.as_ref(), false)?;
        let mb = predict_evaluate(&b.table, &moved.task, split, p.as_ref(), false)?;
        report.push(format!("end-to-end {} ({name})", ma.name), 1e-6, (ma.value - mb.value).abs());
    }
    Ok(report)
}

/// [`check_feature_permutation_with`] for a random column order drawn from `seed`.
pub fn check_feature_permutation(dataset: &Dataset, split: &Split, cfg: &FeaturizeConfig, seed: u64) -> Result<Report> {
    let mut order: Vec<usize> = (0..dataset.features.n_columns()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    check_feature_permutation_with(dataset, split, cfg, &order)
}

/// Renumbers the nodes by `perm` and checks that every node-level block moves with its node.
pub fn check_node_permutation_with(dataset: &Dataset, cfg: &FeaturizeConfig, perm: &Permutation) -> Result<Report> {
    let g = &dataset.graph;
    if perm.len() != g.n_nodes() {
        return Err(Error::InvalidInput("permutation length differs from node count".into()));
    }
    let mut report = Report::new("node permutation");
    let moved = dataset.permute_nodes(perm);
    let pg = &moved.graph;

    report.push("degree", 0.0, max_abs_diff(&perm.apply(&degrees(g)), &degrees(pg)));
    let pr = pagerank(g, &cfg.structural)?;
    report.push("pagerank", 0.0, max_abs_diff(&perm.apply(&pr), &pagerank(pg, &cfg.structural)?));

    let base = compute_nfa(g, &dataset.features)?;
    let after = compute_nfa(pg, &moved.features)?;
    let dev = if base.provenance != after.provenance {
        f64::INFINITY
    } else {
        base.columns
            .iter()
            .zip(&after.columns)
            .map(|(a, b)| max_abs_diff(&perm.apply(a), b))
            .fold(0.0, f64::max)
    };
    report.push("nfa (missing markers included)", 0.0, dev);

    if cfg.structural.n_eigenvectors > 0 {
        let v = laplacian_eigenvectors(g, &cfg.structural)?;
        let w = laplacian_eigenvectors(pg, &cfg.structural)?;
        report.push("laplacian eigenspace projector", 1e-6, projector_distance(&perm.apply_rows(&v), &w));
    }

    let weights = init_weights(&cfg.pearl)?;
    let x = Array2::from_shape_vec(
        (g.n_nodes(), cfg.pearl.d_in),
        random_features(g.n_nodes(), cfg.pearl.d_in, cfg.pearl.draw_seed, 0),
    )
    .expect("shape");
    let out = gnn_forward(g, x.view(), &weights)?;
    let out_moved = gnn_forward(pg, perm.apply_rows(&x).view(), &weights)?;
    report.push("message passing given permuted inputs", 1e-5, matrix_diff(&perm.apply_rows(&out), &out_moved));
    Ok(report)
}

/// [`check_node_permutation_with`] for a random permutation drawn from `seed`.
pub fn check_node_permutation(dataset: &Dataset, cfg: &FeaturizeConfig, seed: u64) -> Result<Report> {
    let perm = Permutation::random(dataset.n_nodes(), &mut ChaCha8Rng::seed_from_u64(seed));
    check_node_permutation_with(dataset, cfg, &perm)
}

/// Relabels the classes by every bijection and checks that the exhaustive
/// label-shuffling wrapper around each built-in predictor relabels its
/// output accordingly.
pub fn check_label_permutation(table: &AugmentedTable, dataset: &Dataset, split: &Split) -> Result<Report> {
    let task = &dataset.task;
    if !task.kind().is_classification() {
        return Err(Error::InvalidInput("label permutation applies to classification tasks".into()));
    }
    let c = task.n_classes();
    if c > 4 {
        return Err(Error::InvalidInput(format!("exhaustive relabeling supports at most 4 classes, got {c}")));
    }
    let n_perms = (1..=c).product::<usize>();
    let req = build_request(table, task, split, false)?;
    let sigmas = shuffle_permutations(c, n_perms, 0);
    let mut report = Report::new(format!("label permutation ({c} classes, {n_perms} bijections)"));
    for (name, inner) in builtin_predictors(req.n_train()) {
        let wrap = LabelShuffle::new(inner, n_perms, 0);
        let Prediction::Probabilities(base) = wrap.predict(&req)? else {
            unreachable!("classification")
        };
        let mut dev: f64 = 0.0;
        for sigma in &sigmas {
            let Prediction::Probabilities(moved) = wrap.predict(&req.relabeled(sigma))? else {
                unreachable!("classification")
            };
            let back = moved.select(Axis(1), sigma);
            dev = dev.max(matrix_diff(&back, &base));
        }
        report.push(format!("shuffle-wrapped {name}"), 1e-6, dev);
    }
    Ok(report)
}

/// Distribution-level equivariance of the averaged encoding: means over
/// `cfg.m_draws` draws on the original and renumbered graph agree within
/// four standard errors per entry. Retried once with fresh draws.
pub fn check_pearl_distribution(graph: &Graph, cfg: &PearlConfig, perm: &Permutation) -> Result<CheckResult> {
    let weights = init_weights(cfg)?;
    let pg = graph.permute(perm);
    let mut worst = f64::INFINITY;
    for attempt in 0..2u64 {
        let a_cfg = PearlConfig {
            draw_seed: cfg.draw_seed.wrapping_add(2 * attempt),
            ..*cfg
        };
        let b_cfg = PearlConfig {
            draw_seed: cfg.draw_seed.wrapping_add(2 * attempt + 1),
            ..*cfg
        };
        let a = pearl_moments(graph, &a_cfg, &weights)?;
        let b = pearl_moments(&pg, &b_cfg, &weights)?;
        let (am, ase) = (perm.apply_rows(&a.mean), perm.apply_rows(&a.std_err));
        // Largest deviation in units of the combined standard error.
        let z = ndarray::Zip::from(&am)
            .and(&ase)
            .and(&b.mean)
            .and(&b.std_err)
            .fold(0.0f64, |acc, m1, s1, m2, s2| {
                let se = (s1 * s1 + s2 * s2).sqrt();
                let d = (m1 - m2).abs();
                acc.max(if se > 0.0 { d / se } else if d == 0.0 { 0.0 } else { f64::INFINITY })
            });
        worst = z;
        if z <= 4.0 {
            break;
        }
    }
    Ok(CheckResult {
        name: format!("pearl mean over {} draws (in standard errors)", cfg.m_draws),
        tolerance: 4.0,
        max_deviation: worst,
        statistical: true,
    })
}

/// Largest Euclidean distance between any two rows.
pub fn max_row_spread(m: &Array2<f64>) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.nrows() {
            let d = (&m.row(i) - &m.row(j)).mapv(|x| x * x).sum().sqrt();
            best = best.max(d);
        }
    }
    best
}

/// Row spreads of the averaged encoding on the 6-cycle for each draw count.
/// On a vertex-transitive graph every node has the same expected encoding,
/// so the spread should shrink as more draws are averaged.
pub fn cycle_spread(cfg: &PearlConfig, draw_counts: &[usize]) -> Result<Vec<f64>> {
    let edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
    let g = Graph::from_edges(6, edges)?.0;
    let w = init_weights(cfg)?;
    draw_counts
        .iter()
        .map(|&m| {
            let c = PearlConfig { m_draws: m, ..*cfg };
            Ok(max_row_spread(&crate::pearl::pearl_encode(&g, &c, &w)?))
        })
        .collect()
}
