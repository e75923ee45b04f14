//! Randomized positional encodings.
//!
//! Each node gets i.i.d. standard normal features, a small mean-aggregation
//! message-passing network maps them to embeddings, and the embeddings are
//! averaged over `M` independent draws. A single draw breaks structural
//! symmetries; the average is node-permutation equivariant in distribution.
//!
//! The network can be used untrained, with weights drawn once from
//! [`SHARED_WEIGHT_SEED`], or trained by gradient descent through a linear
//! head ([`train_pearl`]).

use std::io::{Read, Write};

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

/// Weight seed for the untrained encoder, identical for every dataset.
pub const SHARED_WEIGHT_SEED: u64 = 20_250_527;

const MAGIC: &[u8; 4] = b"PRLW";
const FORMAT_VERSION: u32 = 1;
/// Draws summed per parallel work item when averaging.
const DRAW_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PearlConfig {
    /// Number of random feature draws averaged.
    pub m_draws: usize,
    pub d_in: usize,
    pub d_hidden: usize,
    pub d_out: usize,
    pub n_layers: usize,
    pub weight_seed: u64,
    pub draw_seed: u64,
}

impl Default for PearlConfig {
    fn default() -> Self {
        PearlConfig {
            m_draws: 8,
            d_in: 16,
            d_hidden: 64,
            d_out: 16,
            n_layers: 2,
            weight_seed: SHARED_WEIGHT_SEED,
            draw_seed: 0,
        }
    }
}

impl PearlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_draws == 0 || self.d_in == 0 || self.d_hidden == 0 || self.d_out == 0 || self.n_layers == 0 {
            return Err(Error::InvalidInput("PEARL dimensions and draw count must be at least 1".into()));
        }
        Ok(())
    }

    /// Layer widths from input to output.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.d_in];
        dims.extend(std::iter::repeat_n(self.d_hidden, self.n_layers - 1));
        dims.push(self.d_out);
        dims
    }
}

/// One dense layer; `weight` is `fan_in × fan_out`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PearlWeights {
    pub layers: Vec<DenseLayer>,
    pub seed: u64,
}

/// Glorot-uniform weights and zero biases, drawn from `cfg.weight_seed`.
///
/// Values are rounded to single precision so that the serialized form is exact.
pub fn init_weights(cfg: &PearlConfig) -> Result<PearlWeights> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.weight_seed);
    let dims = cfg.dims();
    let layers = dims
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weight = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound) as f32 as f64)
                .collect();
            DenseLayer {
                fan_in,
                fan_out,
                weight,
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(PearlWeights {
        layers,
        seed: cfg.weight_seed,
    })
}

impl PearlWeights {
    pub fn d_in(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn d_out(&self) -> usize {
        self.layers.last().map_or(0, |l| l.fan_out)
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Binary form: magic `PRLW`, format version, layer count, layer widths
    /// and seed as little-endian integers, then each layer's weights
    /// (row-major) followed by its biases as little-endian `f32`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.layers.len() as u32).to_le_bytes())?;
        w.write_all(&(self.d_in() as u32).to_le_bytes())?;
        for l in &self.layers {
            w.write_all(&(l.fan_out as u32).to_le_bytes())?;
        }
        w.write_all(&self.seed.to_le_bytes())?;
        for l in &self.layers {
            for v in l.weight.iter().chain(&l.bias) {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(format!("malformed PEARL weights: {m}"));
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut u32buf).map_err(|_| bad("truncated header"))?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        if read_u32(&mut r)? != FORMAT_VERSION {
            return Err(bad("unsupported version"));
        }
        let n_layers = read_u32(&mut r)? as usize;
        if n_layers == 0 || n_layers > 1024 {
            return Err(bad("implausible layer count"));
        }
        let dims: Vec<usize> = (0..=n_layers).map(|_| read_u32(&mut r).map(|d| d as usize)).collect::<Result<_>>()?;
        let mut seed = [0u8; 8];
        r.read_exact(&mut seed).map_err(|_| bad("truncated header"))?;
        let mut layers = Vec::with_capacity(n_layers);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let mut buf = vec![0u8; 4 * (fan_in * fan_out + fan_out)];
            r.read_exact(&mut buf).map_err(|_| bad("truncated payload"))?;
            let vals: Vec<f64> = buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            let (weight, bias) = vals.split_at(fan_in * fan_out);
            layers.push(DenseLayer {
                fan_in,
                fan_out,
                weight: weight.to_vec(),
                bias: bias.to_vec(),
            });
        }
        let weights = PearlWeights {
            layers,
            seed: u64::from_le_bytes(seed),
        };
        if !weights.is_finite() {
            return Err(bad("non-finite values"));
        }
        Ok(weights)
    }
}

/// Mean over `N(i) ∪ {i}` of the rows of `h`.
fn aggregate(graph: &Graph, h: &[f64], width: usize) -> Vec<f64> {
    let mut out = vec![0.0; h.len()];
    par::for_each_row(&mut out, width, |i, row| {
        row.copy_from_slice(&h[i * width..(i + 1) * width]);
        for &j in graph.neighbors(i) {
            for (o, v) in row.iter_mut().zip(&h[j * width..(j + 1) * width]) {
                *o += v;
            }
        }
        let scale = 1.0 / (graph.degree(i) + 1) as f64;
        row.iter_mut().for_each(|o| *o *= scale);
    });
    out
}

/// Transpose of [`aggregate`], for back-propagation.
fn aggregate_transpose(graph: &Graph, g: &[f64], width: usize) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    par::for_each_row(&mut out, width, |j, row| {
        let own = 1.0 / (graph.degree(j) + 1) as f64;
        for (o, v) in row.iter_mut().zip(&g[j * width..(j + 1) * width]) {
            *o = v * own;
        }
        for &i in graph.neighbors(j) {
            let s = 1.0 / (graph.degree(i) + 1) as f64;
            for (o, v) in row.iter_mut().zip(&g[i * width..(i + 1) * width]) {
                *o += v * s;
            }
        }
    });
    out
}

/// `a · W + b` for row-major `a` (`n × fan_in`).
fn dense(a: &[f64], layer: &DenseLayer) -> Vec<f64> {
    let n = a.len() / layer.fan_in;
    let mut z = vec![0.0; n * layer.fan_out];
    par::for_each_row(&mut z, layer.fan_out, |i, row| {
        row.copy_from_slice(&layer.bias);
        for (k, &x) in a[i * layer.fan_in..(i + 1) * layer.fan_in].iter().enumerate() {
            if x != 0.0 {
                let w = &layer.weight[k * layer.fan_out..(k + 1) * layer.fan_out];
                for (o, wv) in row.iter_mut().zip(w) {
                    *o += x * wv;
                }
            }
        }
    });
    z
}

/// Per-layer aggregated inputs and pre-activations of one forward pass.
struct ForwardTrace {
    aggregated: Vec<Vec<f64>>,
    pre_activation: Vec<Vec<f64>>,
}

fn forward_flat(graph: &Graph, x: Vec<f64>, w: &PearlWeights, trace: Option<&mut ForwardTrace>) -> Vec<f64> {
    let mut h = x;
    let last = w.layers.len() - 1;
    let mut trace = trace;
    for (l, layer) in w.layers.iter().enumerate() {
        let a = aggregate(graph, &h, layer.fan_in);
        let z = dense(&a, layer);
        h = if l == last { z.clone() } else { z.iter().map(|v| v.max(0.0)).collect() };
        if let Some(t) = trace.as_deref_mut() {
            t.aggregated.push(a);
            t.pre_activation.push(z);
        }
    }
    h
}

/// One pass of the message-passing network.
///
/// Each layer computes `ReLU(W · mean_{j ∈ N(i) ∪ {i}} h_j + b)`; the last
/// layer is linear. There is no normalization and no residual path.
pub fn gnn_forward(graph: &Graph, node_feats: ArrayView2<'_, f64>, w: &PearlWeights) -> Result<Array2<f64>> {
    let n = graph.n_nodes();
    if node_feats.nrows() != n || node_feats.ncols() != w.d_in() {
        return Err(Error::InvalidInput(format!(
            "node features are {}×{}, expected {n}×{}",
            node_feats.nrows(),
            node_feats.ncols(),
            w.d_in()
        )));
    }
    let x: Vec<f64> = node_feats.iter().copied().collect();
    let out = forward_flat(graph, x, w, None);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("message-passing output is not finite".into()));
    }
    Ok(Array2::from_shape_vec((n, w.d_out()), out).expect("shape"))
}

/// Random node features of draw `index`: `n × d_in` standard normals from
/// stream `index` of the draw seed.
pub fn random_features(n: usize, d_in: usize, draw_seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(draw_seed);
    rng.set_stream(index);
    (0..n * d_in).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn check_shapes(cfg: &PearlConfig, w: &PearlWeights) -> Result<()> {
    cfg.validate()?;
    let dims: Vec<usize> = std::iter::once(w.d_in()).chain(w.layers.iter().map(|l| l.fan_out)).collect();
    if dims != cfg.dims() {
        return Err(Error::InvalidInput(format!(
            "weights have layer widths {dims:?}, config expects {:?}",
            cfg.dims()
        )));
    }
    Ok(())
}

/// Sums (and sums of squares) of draw outputs over `draws`, chunked in a
/// fixed order.
fn draw_sums(graph: &Graph, cfg: &PearlConfig, w: &PearlWeights, draws: usize, squares: bool) -> (Vec<f64>, Vec<f64>) {
    let n = graph.n_nodes();
    let len = n * cfg.d_out;
    let n_chunks = draws.div_ceil(DRAW_CHUNK);
    let partials = par::map_range(n_chunks, |c| {
        let mut sum = vec![0.0; len];
        let mut sq = if squares { vec![0.0; len] } else { Vec::new() };
        for m in c * DRAW_CHUNK..((c + 1) * DRAW_CHUNK).min(draws) {
            let x = random_features(n, cfg.d_in, cfg.draw_seed, m as u64);
            let out = forward_flat(graph, x, w, None);
            for (s, v) in sum.iter_mut().zip(&out) {
                *s += v;
            }
            if squares {
                for (s, v) in sq.iter_mut().zip(&out) {
                    *s += v * v;
                }
            }
        }
        (sum, sq)
    });
    let mut sum = vec![0.0; len];
    let mut sq = if squares { vec![0.0; len] } else { Vec::new() };
    for (s, q) in partials {
        sum.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        sq.iter_mut().zip(&q).for_each(|(a, b)| *a += b);
    }
    (sum, sq)
}

/// Average of [`gnn_forward`] over `cfg.m_draws` seeded random feature draws.
pub fn pearl_encode(graph: &Graph, cfg: &PearlConfig, w: &PearlWeights) -> Result<Array2<f64>> {
    check_shapes(cfg, w)?;
    let (sum, _) = draw_sums(graph, cfg, w, cfg.m_draws, false);
    let m = cfg.m_draws as f64;
    let mean: Vec<f64> = sum.into_iter().map(|s| s / m).collect();
    if mean.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("PEARL encoding is not finite".into()));
    }
    Ok(Array2::from_shape_vec((graph.n_nodes(), cfg.d_out), mean).expect("shape"))
}

/// Monte Carlo mean of the encoding together with the per-entry standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct PearlMoments {
    pub mean: Array2<f64>,
    pub std_err: Array2<f64>,
}

pub fn pearl_moments(graph: &Graph, cfg: &PearlConfig, w: &PearlWeights) -> Result<PearlMoments> {
    check_shapes(cfg, w)?;
    if cfg.m_draws < 2 {
        return Err(Error::InvalidInput("standard errors need at least 2 draws".into()));
    }
    let (sum, sq) = draw_sums(graph, cfg, w, cfg.m_draws, true);
    let m = cfg.m_draws as f64;
    let shape = (graph.n_nodes(), cfg.d_out);
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se: Vec<f64> = sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| ((q / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt())
        .collect();
    Ok(PearlMoments {
        mean: Array2::from_shape_vec(shape, mean).expect("shape"),
        std_err: Array2::from_shape_vec(shape, se).expect("shape"),
    })
}

/// Supervision for [`train_pearl`], aligned with the training node list.
#[derive(Debug, Clone, Copy)]
pub enum TrainTargets<'a> {
    Classes { labels: &'a [u32], n_classes: usize },
    Values(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PearlTrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for PearlTrainConfig {
    fn default() -> Self {
        PearlTrainConfig {
            lr: 0.05,
            epochs: 0,
            seed: 0,
        }
    }
}

/// Linear readout used only while training the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    pub layer: DenseLayer,
}

#[derive(Debug, Clone)]
pub struct TrainedPearl {
    pub weights: PearlWeights,
    pub head: LinearHead,
    /// Training loss before each epoch's update.
    pub losses: Vec<f64>,
}

/// Gradients with the same layout as the parameters they belong to.
#[derive(Debug, Clone)]
pub(crate) struct Gradients {
    pub layers: Vec<DenseLayer>,
    pub head: DenseLayer,
}

fn zeros_like(l: &DenseLayer) -> DenseLayer {
    DenseLayer {
        fan_in: l.fan_in,
        fan_out: l.fan_out,
        weight: vec![0.0; l.weight.len()],
        bias: vec![0.0; l.bias.len()],
    }
}

/// Loss of the head on the draw-averaged embeddings of `nodes`, and its
/// gradient with respect to every encoder and head parameter.
///
/// Classification uses softmax cross-entropy, regression squared error;
/// both are averaged over `nodes`.
pub(crate) fn loss_and_gradients(
    graph: &Graph,
    w: &PearlWeights,
    head: &LinearHead,
    draws: &[Vec<f64>],
    nodes: &[usize],
    targets: TrainTargets<'_>,
) -> (f64, Gradients) {
    let n = graph.n_nodes();
    let d_out = w.d_out();
    let m = draws.len() as f64;
    let mut traces = Vec::with_capacity(draws.len());
    let mut emb = vec![0.0; n * d_out];
    for x in draws {
        let mut t = ForwardTrace {
            aggregated: Vec::new(),
            pre_activation: Vec::new(),
        };
        let out = forward_flat(graph, x.clone(), w, Some(&mut t));
        emb.iter_mut().zip(&out).for_each(|(e, o)| *e += o / m);
        traces.push(t);
    }

    let n_out = head.layer.fan_out;
    let rows: Vec<f64> = nodes.iter().flat_map(|&i| emb[i * d_out..(i + 1) * d_out].to_vec()).collect();
    let scores = dense(&rows, &head.layer);
    let count = nodes.len() as f64;
    let mut loss = 0.0;
    let mut d_scores = vec![0.0; scores.len()];
    for (r, s) in scores.chunks(n_out).enumerate() {
        let ds = &mut d_scores[r * n_out..(r + 1) * n_out];
        match targets {
            TrainTargets::Classes { labels, .. } => {
                let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = s.iter().map(|v| (v - max).exp()).sum();
                let y = labels[r] as usize;
                loss += -(s[y] - max - z.ln());
                for c in 0..n_out {
                    ds[c] = ((s[c] - max).exp() / z - f64::from(c == y)) / count;
                }
            }
            TrainTargets::Values(values) => {
                let e = s[0] - values[r];
                loss += 0.5 * e * e;
                ds[0] = e / count;
            }
        }
    }
    loss /= count;

    let mut head_grad = zeros_like(&head.layer);
    let mut d_emb = vec![0.0; n * d_out];
    for (r, &i) in nodes.iter().enumerate() {
        let ds = &d_scores[r * n_out..(r + 1) * n_out];
        for k in 0..d_out {
            let e = emb[i * d_out + k];
            let mut back = 0.0;
            for c in 0..n_out {
                head_grad.weight[k * n_out + c] += e * ds[c];
                back += head.layer.weight[k * n_out + c] * ds[c];
            }
            d_emb[i * d_out + k] += back;
        }
        for c in 0..n_out {
            head_grad.bias[c] += ds[c];
        }
    }

    let mut grads: Vec<DenseLayer> = w.layers.iter().map(zeros_like).collect();
    for t in &traces {
        let mut g: Vec<f64> = d_emb.iter().map(|v| v / m).collect();
        for l in (0..w.layers.len()).rev() {
            let layer = &w.layers[l];
            let a = &t.aggregated[l];
            let gl = &mut grads[l];
            for i in 0..n {
                let gi = &g[i * layer.fan_out..(i + 1) * layer.fan_out];
                if gi.iter().all(|v| *v == 0.0) {
                    continue;
                }
                for (k, &ak) in a[i * layer.fan_in..(i + 1) * layer.fan_in].iter().enumerate() {
                    for (o, gv) in gl.weight[k * layer.fan_out..(k + 1) * layer.fan_out].iter_mut().zip(gi) {
                        *o += ak * gv;
                    }
                }
                for (o, gv) in gl.bias.iter_mut().zip(gi) {
                    *o += gv;
                }
            }
            if l == 0 {
                break;
            }
            let mut d_a = vec![0.0; n * layer.fan_in];
            for i in 0..n {
                let gi = &g[i * layer.fan_out..(i + 1) * layer.fan_out];
                for k in 0..layer.fan_in {
                    let wk = &layer.weight[k * layer.fan_out..(k + 1) * layer.fan_out];
                    d_a[i * layer.fan_in + k] = wk.iter().zip(gi).map(|(a, b)| a * b).sum();
                }
            }
            let d_h = aggregate_transpose(graph, &d_a, layer.fan_in);
            let z_prev = &t.pre_activation[l - 1];
            g = d_h.iter().zip(z_prev).map(|(d, z)| if *z > 0.0 { *d } else { 0.0 }).collect();
        }
    }
    (
        loss,
        Gradients {
            layers: grads,
            head: head_grad,
        },
    )
}

fn sgd_step(param: &mut DenseLayer, grad: &DenseLayer, lr: f64) {
    param.weight.iter_mut().zip(&grad.weight).for_each(|(p, g)| *p -= lr * g);
    param.bias.iter_mut().zip(&grad.bias).for_each(|(p, g)| *p -= lr * g);
}

/// Trains the encoder and a linear head with full-batch gradient descent.
///
/// Each epoch draws `cfg.m_draws` fresh random feature matrices. Regression
/// targets are standardized on the training nodes before fitting.
pub fn train_pearl(
    graph: &Graph,
    cfg: &PearlConfig,
    init: &PearlWeights,
    train_nodes: &[usize],
    targets: TrainTargets<'_>,
    tc: &PearlTrainConfig,
) -> Result<TrainedPearl> {
    check_shapes(cfg, init)?;
    if train_nodes.is_empty() {
        return Err(Error::InvalidInput("PEARL training needs at least one labeled node".into()));
    }
    let n_targets = match targets {
        TrainTargets::Classes { labels, .. } => labels.len(),
        TrainTargets::Values(v) => v.len(),
    };
    if n_targets != train_nodes.len() {
        return Err(Error::InvalidInput("targets must align with training nodes".into()));
    }
    let standardized: Vec<f64>;
    let (targets, n_out) = match targets {
        TrainTargets::Classes { labels, n_classes } => {
            if labels.iter().any(|&c| c as usize >= n_classes) {
                return Err(Error::InvalidInput("class index out of range".into()));
            }
            (targets, n_classes)
        }
        TrainTargets::Values(v) => {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            let sd = if sd > 0.0 { sd } else { 1.0 };
            standardized = v.iter().map(|x| (x - mean) / sd).collect();
            (TrainTargets::Values(&standardized), 1)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let bound = (6.0 / (cfg.d_out + n_out) as f64).sqrt();
    let mut head = LinearHead {
        layer: DenseLayer {
            fan_in: cfg.d_out,
            fan_out: n_out,
            weight: (0..cfg.d_out * n_out).map(|_| rng.random_range(-bound..bound)).collect(),
            bias: vec![0.0; n_out],
        },
    };
    let mut weights = init.clone();
    let n = graph.n_nodes();
    let mut losses = Vec::with_capacity(tc.epochs);
    for epoch in 0..tc.epochs {
        let base = (epoch * cfg.m_draws) as u64;
        let draws: Vec<Vec<f64>> = (0..cfg.m_draws)
            .map(|m| random_features(n, cfg.d_in, tc.seed ^ 0x9E37_79B9_7F4A_7C15, base + m as u64))
            .collect();
        let (loss, grads) = loss_and_gradients(graph, &weights, &head, &draws, train_nodes, targets);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("PEARL training diverged at epoch {epoch}")));
        }
        losses.push(loss);
        for (p, g) in weights.layers.iter_mut().zip(&grads.layers) {
            sgd_step(p, g, tc.lr);
        }
        sgd_step(&mut head.layer, &grads.head, tc.lr);
    }
    if !weights.is_finite() {
        return Err(Error::Numeric("PEARL weights became non-finite".into()));
    }
    Ok(TrainedPearl { weights, head, losses })
}

/// Total number of trainable encoder parameters.
pub fn n_parameters(w: &PearlWeights) -> usize {
    w.layers.iter().map(DenseLayer::n_params).sum()
}
