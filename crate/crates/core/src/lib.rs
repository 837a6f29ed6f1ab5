//! Cross-lingual named-entity tag projection.
//!
//! Words of both sides of a sentence-aligned parallel corpus are represented
//! by their phrase-occurrence vectors (optionally weighted by inverse term
//! frequency). A small feed-forward network trained on the annotated source
//! side then tags the target side directly, since a word and its translation
//! occur in the same aligned phrases. The [`evaluation`] module measures this
//! with repeated k-fold cross validation and grid search.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod network;
pub mod report;
pub mod representation;
pub mod seed;
pub mod synthetic;

pub use corpus::{align, load_dir, parse_annotated_side, parse_plain_side, CorpusSide, ParallelCorpus, TagSet};
pub use error::{Error, Result};
pub use evaluation::{
    aggregate, count_outcomes, grid_search, kfold_split, prf, run_protocol, AggregateMetrics, Counts, EvalMode,
    Grid, HyperParams, RunMetrics, SweepResult,
};
pub use network::{forward, gradient, init_params, loss, predict, train, NetworkParams, NetworkSpec, TrainConfig};
pub use representation::{build_matrix, itf, occurrence_row, term_frequencies, RepresentationMatrix, RepresentationMode};
