//! Assembly of the augmented table `[orig | nfa | sf | pearl]`, with PCA
//! applied separately to an over-wide original or aggregated block.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{ColumnData, Dataset};
use crate::error::{Error, Result};
use crate::io::format_number;
use crate::nfa::NfaTable;
use crate::split::Split;
use crate::structural::{fix_sign, StructuralFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Orig,
    Nfa,
    Sf,
    Pearl,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::Orig, Block::Nfa, Block::Sf, Block::Pearl];

    pub fn as_str(self) -> &'static str {
        match self {
            Block::Orig => "orig",
            Block::Nfa => "nfa",
            Block::Sf => "sf",
            Block::Pearl => "pearl",
        }
    }
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Principal components of one block, fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub block: String,
    pub mean: Vec<f64>,
    /// `d_in × d_keep`, orthonormal columns.
    pub components: Array2<f64>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn d_in(&self) -> usize {
        self.mean.len()
    }

    pub fn d_keep(&self) -> usize {
        self.components.ncols()
    }
}

/// Fits the top `d_keep` principal components of `rows`.
///
/// Missing values are replaced by their column mean first. Each component
/// has its largest-magnitude entry made positive.
pub fn pca_fit(block: &str, rows: ArrayView2<'_, f64>, d_keep: usize) -> Result<PcaModel> {
    let (n, d) = rows.dim();
    if d_keep == 0 || d_keep > n.min(d) {
        return Err(Error::InvalidInput(format!(
            "PCA of block `{block}` cannot keep {d_keep} components from {n} rows of width {d}"
        )));
    }
    let mean: Vec<f64> = rows
        .axis_iter(Axis(1))
        .map(|col| {
            let (sum, count) = col
                .iter()
                .filter(|v| !v.is_nan())
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        })
        .collect();
    let centered = DMatrix::from_fn(n, d, |i, j| {
        let v = rows[[i, j]];
        if v.is_nan() {
            0.0
        } else {
            v - mean[j]
        }
    });
    let denom = (n.max(2) - 1) as f64;
    let cov = (centered.transpose() * &centered) / denom;
    if !(cov.trace() > 0.0) {
        return Err(Error::Numeric(format!("every column of block `{block}` has zero variance on the training rows")));
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut components = Array2::zeros((d, d_keep));
    let mut explained_variance = Vec::with_capacity(d_keep);
    for (c, &idx) in order.iter().take(d_keep).enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        fix_sign(&mut v);
        components.column_mut(c).assign(&ndarray::Array1::from(v));
        explained_variance.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(PcaModel {
        block: block.to_owned(),
        mean,
        components,
        explained_variance,
    })
}

/// `(rows − mean) · components`; missing entries contribute nothing.
pub fn pca_transform(model: &PcaModel, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if rows.ncols() != model.d_in() {
        return Err(Error::InvalidInput(format!(
            "PCA of block `{}` expects {} columns, got {}",
            model.block,
            model.d_in(),
            rows.ncols()
        )));
    }
    let mut centered = rows.to_owned();
    for mut row in centered.rows_mut() {
        for (v, m) in row.iter_mut().zip(&model.mean) {
            *v = if v.is_nan() { 0.0 } else { *v - m };
        }
    }
    Ok(centered.dot(&model.components))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssembleOptions {
    /// Blocks wider than this are reduced by PCA.
    pub pca_threshold: usize,
    pub pca_dims: usize,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            pca_threshold: 128,
            pca_dims: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub block: Block,
    pub name: String,
}

impl ColumnMeta {
    /// Header label, `block.name`.
    pub fn label(&self) -> String {
        format!("{}.{}", self.block, self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTable {
    pub matrix: Array2<f64>,
    pub columns: Vec<ColumnMeta>,
    pub pca: Vec<PcaModel>,
}

impl AugmentedTable {
    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn width(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn block_width(&self, block: Block) -> usize {
        self.columns.iter().filter(|c| c.block == block).count()
    }

    /// Blocks present, in table order.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out: Vec<Block> = Vec::new();
        for c in &self.columns {
            if out.last() != Some(&c.block) {
                out.push(c.block);
            }
        }
        out
    }

    /// Rows of the matrix at `index`, in that order.
    pub fn rows(&self, index: &[usize]) -> Array2<f64> {
        self.matrix.select(Axis(0), index)
    }

    /// Header of `block.name` labels, then one line per node. Missing values are `NaN`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(self.columns.iter().map(ColumnMeta::label))
            .map_err(|e| csv_error(path, e))?;
        for row in self.matrix.rows() {
            w.write_record(row.iter().map(|v| format_number(*v)))
                .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a table written by [`AugmentedTable::write_csv`]. PCA models are not stored in the CSV.
    pub fn read_csv(path: &Path) -> Result<AugmentedTable> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let headers = r.headers().map_err(|e| csv_error(path, e))?.clone();
        let columns = headers
            .iter()
            .enumerate()
            .map(|(j, h)| {
                let (block, name) = h
                    .split_once('.')
                    .ok_or_else(|| Error::parse(path, 1, format!("column {} header `{h}` is not `block.name`", j + 1)))?;
                let block = Block::ALL
                    .into_iter()
                    .find(|b| b.as_str() == block)
                    .ok_or_else(|| Error::parse(path, 1, format!("unknown block `{block}`")))?;
                Ok(ColumnMeta {
                    block,
                    name: name.to_owned(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::new();
        let mut n = 0;
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            if rec.len() != columns.len() {
                return Err(Error::parse(path, line + 2, format!("expected {} fields, got {}", columns.len(), rec.len())));
            }
            for field in rec.iter() {
                let v = field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(path, line + 2, format!("`{field}` is not a number")))?;
                values.push(v);
            }
            n += 1;
        }
        let matrix = Array2::from_shape_vec((n, columns.len()), values).expect("shape");
        Ok(AugmentedTable {
            matrix,
            columns,
            pca: Vec::new(),
        })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::InvalidInput(format!("{}: {e}", path.display()))
}

/// The original attributes as a numeric block: numerical columns as is,
/// categorical columns one-hot over their full vocabulary. A missing
/// category becomes NaN in each of its indicator columns.
pub fn original_block(dataset: &Dataset) -> (Array2<f64>, Vec<String>) {
    let n = dataset.n_nodes();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    for col in dataset.features.columns() {
        match &col.data {
            ColumnData::Numerical(v) => {
                cols.push(v.clone());
                names.push(col.name.clone());
            }
            ColumnData::Categorical { codes, vocab } => {
                for (c, cat) in vocab.iter().enumerate() {
                    cols.push(
                        codes
                            .iter()
                            .map(|code| match code {
                                Some(k) => f64::from(*k as usize == c),
                                None => f64::NAN,
                            })
                            .collect(),
                    );
                    names.push(format!("{}={cat}", col.name));
                }
            }
        }
    }
    (Array2::from_shape_fn((n, cols.len()), |(i, j)| cols[j][i]), names)
}

/// Feature blocks to concatenate after the original attributes; `None` leaves a block out.
#[derive(Debug, Clone, Copy, Default)]
pub struct Blocks<'a> {
    pub nfa: Option<&'a NfaTable>,
    pub sf: Option<&'a StructuralFeatures>,
    pub pearl: Option<ArrayView2<'a, f64>>,
}

fn reduce_if_wide(
    block: Block,
    matrix: Array2<f64>,
    names: Vec<String>,
    train: &[usize],
    opts: &AssembleOptions,
    models: &mut Vec<PcaModel>,
) -> Result<(Array2<f64>, Vec<String>)> {
    if matrix.ncols() <= opts.pca_threshold {
        return Ok((matrix, names));
    }
    let d_keep = opts.pca_dims.min(train.len()).min(matrix.ncols());
    let model = pca_fit(block.as_str(), matrix.select(Axis(0), train).view(), d_keep)?;
    let reduced = pca_transform(&model, matrix.view())?;
    models.push(model);
    Ok((reduced, (1..=d_keep).map(|k| format!("pc_{k}")).collect()))
}

/// Concatenates `[orig | nfa | sf | pearl]`.
///
/// The original and aggregated blocks are each reduced to `opts.pca_dims`
/// principal components, fitted on the training rows only, when wider than
/// `opts.pca_threshold`. Structural and positional blocks are never reduced.
pub fn assemble_features(dataset: &Dataset, blocks: Blocks<'_>, split: &Split, opts: &AssembleOptions) -> Result<AugmentedTable> {
    let n = dataset.n_nodes();
    split.validate(n)?;
    if opts.pca_dims == 0 {
        return Err(Error::InvalidInput("PCA dimension must be at least 1".into()));
    }
    let mut parts: Vec<(Block, Array2<f64>, Vec<String>)> = Vec::new();
    let mut pca = Vec::new();

    let (orig, names) = original_block(dataset);
    let (orig, names) = reduce_if_wide(Block::Orig, orig, names, &split.train, opts, &mut pca)?;
    parts.push((Block::Orig, orig, names));

    if let Some(nfa) = blocks.nfa {
        if nfa.columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput("aggregated block row count differs from node count".into()));
        }
        let (m, names) = reduce_if_wide(Block::Nfa, nfa.to_matrix(n), nfa.column_names(), &split.train, opts, &mut pca)?;
        parts.push((Block::Nfa, m, names));
    }
    if let Some(sf) = blocks.sf {
        let m = sf.to_matrix();
        if m.nrows() != n {
            return Err(Error::InvalidInput("structural block row count differs from node count".into()));
        }
        parts.push((Block::Sf, m, sf.column_names()));
    }
    if let Some(p) = blocks.pearl {
        if p.nrows() != n {
            return Err(Error::InvalidInput("positional block row count differs from node count".into()));
        }
        let names = (1..=p.ncols()).map(|k| format!("pe_{k}")).collect();
        parts.push((Block::Pearl, p.to_owned(), names));
    }

    let width: usize = parts.iter().map(|(_, m, _)| m.ncols()).sum();
    let mut matrix = Array2::zeros((n, width));
    let mut columns = Vec::with_capacity(width);
    let mut at = 0;
    for (block, m, names) in parts {
        matrix.slice_mut(s![.., at..at + m.ncols()]).assign(&m);
        at += m.ncols();
        columns.extend(names.into_iter().map(|name| ColumnMeta { block, name }));
    }
    Ok(AugmentedTable { matrix, columns, pca })
}
