//! Graph-to-tabular featurization for node property prediction.
//!
//! Node features of an attributed graph are augmented with neighborhood
//! feature aggregations ([`nfa`]), classic structural features
//! ([`structural`]) and randomized positional encodings ([`pearl`]), then
//! assembled into one table ([`assemble`]) that any tabular predictor can
//! consume ([`predict`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assemble;
pub mod data;
pub mod equivariance;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod nfa;
pub mod par;
pub mod pipeline;
pub mod pearl;
pub mod predict;
pub mod split;
pub mod stats;
pub mod structural;
pub mod synth;

pub use data::{Column, ColumnData, ColumnKind, Dataset, FeatureTable, TaskKind, TaskSpec, Targets};
pub use error::{Error, Result};
pub use graph::{Graph, Permutation};
pub use split::{make_split, Split, SplitRatios};
pub use stats::{dataset_stats, DatasetStats};
