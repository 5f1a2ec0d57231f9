use std::collections::{BTreeMap, HashMap};

use crate::features::ObservationMatrix;
use crate::templates::{TemplateKind, TemplateSet};

use super::CrfError;

/// Maps expanded feature strings to blocks of weights.
///
/// A unigram string owns `L` consecutive weights (one per label); a bigram
/// string owns `L * L` (previous label major). Blocks are laid out in sorted
/// feature-string order, so numbering is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureIndex {
    num_labels: usize,
    entries: HashMap<String, (TemplateKind, usize)>,
    order: Vec<String>,
    num_weights: usize,
}

impl FeatureIndex {
    /// Builds an index from `(string, kind)` pairs already in sorted order.
    pub(crate) fn from_sorted(
        num_labels: usize,
        features: impl IntoIterator<Item = (String, TemplateKind)>,
    ) -> Self {
        let mut entries = HashMap::new();
        let mut order = Vec::new();
        let mut next = 0;
        for (s, kind) in features {
            entries.insert(s.clone(), (kind, next));
            next += Self::width_of(kind, num_labels);
            order.push(s);
        }
        Self {
            num_labels,
            entries,
            order,
            num_weights: next,
        }
    }

    fn width_of(kind: TemplateKind, num_labels: usize) -> usize {
        match kind {
            TemplateKind::Unigram => num_labels,
            TemplateKind::Bigram => num_labels * num_labels,
        }
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn num_weights(&self) -> usize {
        self.num_weights
    }

    pub fn num_features(&self) -> usize {
        self.order.len()
    }

    /// Kind and first weight index of a feature string.
    pub fn lookup(&self, feature: &str) -> Option<(TemplateKind, usize)> {
        self.entries.get(feature).copied()
    }

    /// Weight index of a unigram feature for `label`.
    pub fn unigram_weight(&self, feature: &str, label: usize) -> Option<usize> {
        match self.lookup(feature)? {
            (TemplateKind::Unigram, base) => Some(base + label),
            _ => None,
        }
    }

    /// Weight index of a bigram feature for the transition `prev -> label`.
    pub fn bigram_weight(&self, feature: &str, prev: usize, label: usize) -> Option<usize> {
        match self.lookup(feature)? {
            (TemplateKind::Bigram, base) => Some(base + prev * self.num_labels + label),
            _ => None,
        }
    }

    /// Feature strings with their kind and base index, in weight order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, TemplateKind, usize)> {
        self.order.iter().map(|s| {
            let (kind, base) = self.entries[s];
            (s.as_str(), kind, base)
        })
    }
}

/// Expanded feature strings at position `t`: unigram expansions (plus the
/// matrix's template-free extras) and, for `t > 0`, bigram expansions.
pub fn expand_position(
    templates: &TemplateSet,
    matrix: &ObservationMatrix,
    t: usize,
) -> (Vec<String>, Vec<String>) {
    let mut unigrams: Vec<String> = templates.unigrams().map(|u| u.expand(matrix, t)).collect();
    unigrams.extend(matrix.extras(t).iter().cloned());
    let bigrams = if t > 0 {
        templates.bigrams().map(|b| b.expand(matrix, t)).collect()
    } else {
        Vec::new()
    };
    (unigrams, bigrams)
}

/// Indexes every expanded string that occurs at least `min_count` times
/// across `matrices`.
pub fn build_feature_index(
    matrices: &[ObservationMatrix],
    templates: &TemplateSet,
    num_labels: usize,
    min_count: usize,
) -> Result<FeatureIndex, CrfError> {
    if min_count == 0 {
        return Err(CrfError::MinCount);
    }
    let mut counts: BTreeMap<String, (TemplateKind, usize)> = BTreeMap::new();
    for m in matrices {
        templates.check_layout(m.num_columns())?;
        for t in 0..m.len() {
            let (uni, bi) = expand_position(templates, m, t);
            let tagged = uni
                .into_iter()
                .map(|s| (s, TemplateKind::Unigram))
                .chain(bi.into_iter().map(|s| (s, TemplateKind::Bigram)));
            for (s, kind) in tagged {
                counts.entry(s).or_insert((kind, 0)).1 += 1;
            }
        }
    }
    let index = FeatureIndex::from_sorted(
        num_labels,
        counts
            .into_iter()
            .filter(|(_, (_, c))| *c >= min_count)
            .map(|(s, (kind, _))| (s, kind)),
    );
    if index.num_weights == 0 {
        return Err(CrfError::NoFeatures);
    }
    Ok(index)
}
