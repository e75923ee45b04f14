//! Optional TOML configuration. Every table mirrors the flags of one
//! subcommand; a flag given on the command line wins over the file.

use std::path::{Path, PathBuf};

use graftab::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub split: SplitFile,
    pub featurize: FeaturizeFile,
    pub predict: PredictFile,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFile {
    pub train: Option<f64>,
    pub val: Option<f64>,
    pub test: Option<f64>,
    pub no_stratify: Option<bool>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizeFile {
    pub no_nfa: Option<bool>,
    pub no_sf: Option<bool>,
    pub no_pearl: Option<bool>,
    pub pca_threshold: Option<usize>,
    pub pca_dims: Option<usize>,
    pub pearl_m: Option<usize>,
    pub pearl_epochs: Option<usize>,
    pub pearl_lr: Option<f64>,
    pub eig_k: Option<usize>,
    pub dense_limit: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictFile {
    pub predictor: Option<String>,
    pub n_seeds: Option<usize>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub l2: Option<f64>,
    pub shuffles: Option<usize>,
    pub val_in_context: Option<bool>,
    pub bridge_dir: Option<PathBuf>,
    pub bridge_timeout: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].lines().count().max(1));
            Error::parse(path, line, e.message().to_owned())
        })
    }
}
