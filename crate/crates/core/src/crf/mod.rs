//! Linear-chain conditional random field.
//!
//! Unigram template expansions become per-label weights, bigram expansions
//! become per-label-pair weights. Inference runs exact forward–backward in
//! the log domain; training minimises the L2-regularised negative
//! log-likelihood with L-BFGS.

mod index;
mod lattice;
mod lbfgs;
mod model;
mod objective;
mod train;

pub use index::{build_feature_index, expand_position, FeatureIndex};
pub use lattice::{
    forward_backward, log_sum_exp, posterior_marginals, viterbi_decode, ForwardBackward, Lattice,
    Marginals,
};
pub use lbfgs::{minimize, LbfgsParams, Minimum};
pub use model::{CrfModel, MODEL_HEADER};
pub use objective::{nll_and_gradient, Instance};
pub use train::{train, TrainConfig, TrainReport};

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::features::FeatureError;
use crate::templates::TemplateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrfError {
    #[error("no features")]
    NoFeatures,
    #[error("training needs at least two distinct gold labels, found {0}")]
    TooFewLabels(usize),
    #[error("min_count must be at least 1")]
    MinCount,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("numeric overflow")]
    NumericOverflow,
    #[error("model line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}
