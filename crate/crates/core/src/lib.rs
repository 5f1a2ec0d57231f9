//! Word-level language identification for Roman-script, code-mixed text.
//!
//! The pipeline: [`corpus`] reads token columns, [`lexicons`] supplies the
//! dictionary resources, [`features`] turns each utterance into an
//! [`features::ObservationMatrix`], [`templates`] expands matrix cells into
//! feature strings, [`crf`] trains and decodes a linear-chain CRF over those
//! strings, and [`eval`] scores predictions.

pub mod corpus;
pub mod crf;
pub mod eval;
pub mod features;
pub mod lexicons;
pub mod templates;

use thiserror::Error;

pub use corpus::{Label, LabelSet, LabeledCorpus, Token, Utterance};
pub use crf::{CrfModel, TrainConfig};
pub use features::{FeatureConfig, ObservationMatrix};
pub use lexicons::{Lexicon, ResourceBundle};
pub use templates::TemplateSet;

/// Any error raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Lexicon(#[from] lexicons::LexiconError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Template(#[from] templates::TemplateError),
    #[error(transparent)]
    Crf(#[from] crf::CrfError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}

impl Error {
    /// True for floating-point failures during training or inference.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Crf(crf::CrfError::NumericOverflow))
    }
}
