use rayon::prelude::*;

use crate::corpus::{LabelSet, LabeledCorpus};
use crate::features::{build_observation_matrix, FeatureConfig, ObservationMatrix};
use crate::lexicons::ResourceBundle;
use crate::templates::{TemplateKind, TemplateSet};

use super::index::{build_feature_index, expand_position, FeatureIndex};
use super::lbfgs::{minimize, LbfgsParams};
use super::model::CrfModel;
use super::objective::{nll_and_gradient, Instance};
use super::CrfError;

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// L2 regularisation coefficient.
    pub l2: f64,
    pub max_iters: usize,
    /// Relative objective change below which training stops.
    pub tol: f64,
    /// Feature strings seen fewer times than this are dropped.
    pub min_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iters: 200,
            tol: 1e-5,
            min_count: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CrfError> {
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(CrfError::Config(format!(
                "l2 must be >= 0, got {}",
                self.l2
            )));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(CrfError::Config(format!(
                "tol must be >= 0, got {}",
                self.tol
            )));
        }
        if self.min_count == 0 {
            return Err(CrfError::MinCount);
        }
        Ok(())
    }
}

/// Outcome of the optimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub objective: f64,
    /// False when `max_iters` ran out before the tolerance was met.
    pub converged: bool,
}

pub(crate) fn instance_for(
    index: &FeatureIndex,
    templates: &TemplateSet,
    matrix: &ObservationMatrix,
    gold: Vec<usize>,
) -> Instance {
    let mut unigrams = Vec::with_capacity(matrix.len());
    let mut bigrams = Vec::with_capacity(matrix.len());
    for t in 0..matrix.len() {
        let (uni, bi) = expand_position(templates, matrix, t);
        unigrams.push(
            uni.iter()
                .filter_map(|s| match index.lookup(s) {
                    Some((TemplateKind::Unigram, base)) => Some(base),
                    _ => None,
                })
                .collect(),
        );
        bigrams.push(
            bi.iter()
                .filter_map(|s| match index.lookup(s) {
                    Some((TemplateKind::Bigram, base)) => Some(base),
                    _ => None,
                })
                .collect(),
        );
    }
    Instance {
        unigrams,
        bigrams,
        gold,
    }
}

/// Trains a model on a labeled corpus, starting from zero weights.
///
/// The model's labels are the members of `label_set` that occur in the
/// gold data, in `label_set` order.
pub fn train(
    corpus: &LabeledCorpus,
    templates: &TemplateSet,
    bundle: &ResourceBundle,
    label_set: &LabelSet,
    features: FeatureConfig,
    config: TrainConfig,
) -> Result<CrfModel, CrfError> {
    config.validate()?;
    features.validate()?;
    templates.require_unigram()?;
    let gold = corpus.gold()?;
    if corpus.is_empty() {
        return Err(CrfError::NoFeatures);
    }

    let labels: Vec<_> = label_set
        .labels()
        .iter()
        .filter(|l| gold.iter().flatten().any(|g| g == *l))
        .cloned()
        .collect();
    if labels.len() < 2 {
        return Err(CrfError::TooFewLabels(labels.len()));
    }
    let gold_ids: Vec<Vec<usize>> = gold
        .iter()
        .map(|seq| {
            seq.iter()
                .map(|g| labels.iter().position(|l| l == g).expect("label present"))
                .collect()
        })
        .collect();

    let matrices = corpus
        .utterances()
        .par_iter()
        .map(|u| build_observation_matrix(u, bundle, &features))
        .collect::<Result<Vec<_>, _>>()?;
    let index = build_feature_index(&matrices, templates, labels.len(), config.min_count)?;
    let instances: Vec<Instance> = matrices
        .par_iter()
        .zip(gold_ids)
        .map(|(m, g)| instance_for(&index, templates, m, g))
        .collect();

    let l = labels.len();
    let params = LbfgsParams {
        max_iters: config.max_iters,
        tol: config.tol,
        ..LbfgsParams::default()
    };
    let min = minimize(
        |w: &[f64]| nll_and_gradient(w, &instances, l, config.l2),
        vec![0.0; index.num_weights()],
        &params,
    )?;
    let report = TrainReport {
        iterations: min.iterations,
        objective: min.value,
        converged: min.converged,
    };
    CrfModel::new(
        labels,
        templates.clone(),
        features,
        index,
        min.x,
        config,
        Some(report),
    )
}
