//! Column-oriented token corpora, raw queries and the label vocabulary.
//!
//! A corpus file holds one token per line. Columns are separated by a tab or
//! by a run of spaces: the token comes first, the gold label (when present)
//! comes last, and an optional `NE=0`/`NE=1` column may sit in between.
//! Blank lines separate utterances.

use std::fmt;

use thiserror::Error;

/// Errors raised while reading or writing corpora.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("empty query")]
    EmptyQuery,
    #[error("shape mismatch at utterance {utterance}: {message}")]
    ShapeMismatch { utterance: usize, message: String },
    #[error("invalid token {0:?}: tokens must be non-empty and free of whitespace")]
    InvalidToken(String),
    #[error("an utterance must contain at least one token")]
    EmptyUtterance,
    #[error("corpus is not labeled")]
    Unlabeled,
}

/// A language or class tag such as `en`, `bn`, `NE` or `MIX`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(code: impl Into<String>) -> Self {
        Self(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(code: &str) -> Self {
        Self::new(code)
    }
}

/// The nine language codes, in the fixed order used by the dictionary
/// feature columns.
pub const LANGUAGE_CODES: [&str; 9] = ["en", "bn", "hi", "gu", "kn", "ml", "mr", "ta", "te"];

/// Ordered set of admissible labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<Label>,
}

impl LabelSet {
    /// Builds a label set, dropping duplicates but keeping first-seen order.
    pub fn new<I, L>(labels: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        let mut out: Vec<Label> = Vec::new();
        for label in labels {
            let label = label.into();
            if !out.contains(&label) {
                out.push(label);
            }
        }
        Self { labels: out }
    }

    pub fn contains(&self, code: &str) -> bool {
        self.labels.iter().any(|l| l.as_str() == code)
    }

    pub fn get(&self, code: &str) -> Option<&Label> {
        self.labels.iter().find(|l| l.as_str() == code)
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The nine language labels, in dictionary-column order.
    pub fn languages() -> Vec<Label> {
        LANGUAGE_CODES.iter().map(|c| Label::new(*c)).collect()
    }
}

impl Default for LabelSet {
    /// The nine languages followed by `NE`, `MIX` and the catch-all `X`.
    fn default() -> Self {
        Self::new(LANGUAGE_CODES.iter().copied().chain(["NE", "MIX", "X"]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub gold: Option<Label>,
    /// Named-entity flag supplied by an external annotator, if any.
    pub external_ne: Option<bool>,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self, CorpusError> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidToken(surface));
        }
        Ok(Self {
            surface,
            gold: None,
            external_ne: None,
        })
    }

    pub fn with_gold(mut self, label: Label) -> Self {
        self.gold = Some(label);
        self
    }

    pub fn with_external_ne(mut self, flag: bool) -> Self {
        self.external_ne = Some(flag);
        self
    }
}

/// One query: a non-empty sequence of tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    tokens: Vec<Token>,
}

impl Utterance {
    pub fn new(tokens: Vec<Token>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptyUtterance);
        }
        Ok(Self { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    /// Gold labels, or `None` if any token is unlabeled.
    pub fn gold(&self) -> Option<Vec<Label>> {
        self.tokens.iter().map(|t| t.gold.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    utterances: Vec<Utterance>,
    labeled: bool,
}

impl LabeledCorpus {
    /// Builds a corpus, checking the all-or-nothing labeling rule.
    pub fn new(utterances: Vec<Utterance>) -> Result<Self, CorpusError> {
        let total: usize = utterances.iter().map(Utterance::len).sum();
        let with_gold = utterances
            .iter()
            .flat_map(|u| u.tokens())
            .filter(|t| t.gold.is_some())
            .count();
        if with_gold != 0 && with_gold != total {
            return Err(CorpusError::Parse {
                line: 0,
                message: "corpus mixes labeled and unlabeled tokens".into(),
            });
        }
        Ok(Self {
            labeled: total > 0 && with_gold == total,
            utterances,
        })
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn is_labeled(&self) -> bool {
        self.labeled
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.utterances.iter().map(Utterance::len).sum()
    }

    /// Gold label sequences, one per utterance.
    pub fn gold(&self) -> Result<Vec<Vec<Label>>, CorpusError> {
        if !self.labeled {
            return Err(CorpusError::Unlabeled);
        }
        Ok(self
            .utterances
            .iter()
            .map(|u| u.gold().expect("labeled corpus"))
            .collect())
    }

    /// Same tokens with gold labels removed.
    pub fn without_labels(&self) -> Self {
        let utterances = self
            .utterances
            .iter()
            .map(|u| Utterance {
                tokens: u
                    .tokens
                    .iter()
                    .map(|t| Token {
                        gold: None,
                        ..t.clone()
                    })
                    .collect(),
            })
            .collect();
        Self {
            utterances,
            labeled: false,
        }
    }
}

fn parse_ne_column(column: &str) -> Option<bool> {
    match column {
        "NE=1" => Some(true),
        "NE=0" => Some(false),
        _ => None,
    }
}

/// Parses a column corpus.
///
/// With `expect_labels`, the last column of each line is the gold label and
/// must belong to `label_set`. Consecutive blank lines never produce empty
/// utterances.
pub fn parse_corpus(
    text: &str,
    expect_labels: bool,
    label_set: &LabelSet,
) -> Result<LabeledCorpus, CorpusError> {
    let mut utterances = Vec::new();
    let mut current: Vec<Token> = Vec::new();

    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let columns: Vec<&str> = line.split(['\t', ' ']).filter(|c| !c.is_empty()).collect();
        if columns.is_empty() {
            if !current.is_empty() {
                utterances.push(Utterance {
                    tokens: std::mem::take(&mut current),
                });
            }
            continue;
        }
        let err = |message: String| CorpusError::Parse {
            line: line_no,
            message,
        };

        let (middle, gold) = if expect_labels {
            if columns.len() < 2 {
                return Err(err("missing label column".into()));
            }
            let code = columns[columns.len() - 1];
            let label = label_set
                .get(code)
                .cloned()
                .ok_or_else(|| err(format!("unknown label {code}")))?;
            (&columns[1..columns.len() - 1], Some(label))
        } else {
            (&columns[1..], None)
        };
        let external_ne = match middle {
            [] => None,
            [ne] => {
                Some(parse_ne_column(ne).ok_or_else(|| err(format!("unexpected column {ne:?}")))?)
            }
            _ => return Err(err(format!("too many columns ({})", columns.len()))),
        };

        current.push(Token {
            surface: columns[0].to_string(),
            gold,
            external_ne,
        });
    }
    if !current.is_empty() {
        utterances.push(Utterance { tokens: current });
    }
    if utterances.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(LabeledCorpus {
        utterances,
        labeled: expect_labels,
    })
}

/// Splits a raw query on runs of whitespace. Punctuation stays attached.
pub fn tokenize_query(raw: &str) -> Result<Utterance, CorpusError> {
    let tokens: Vec<Token> = raw
        .split_whitespace()
        .map(|w| Token {
            surface: w.to_string(),
            gold: None,
            external_ne: None,
        })
        .collect();
    if tokens.is_empty() {
        return Err(CorpusError::EmptyQuery);
    }
    Ok(Utterance { tokens })
}

/// Renders `surface<TAB>label` lines with one blank line between utterances.
///
/// Tokens carrying an external NE flag keep it as a middle column so the
/// output parses back to the same corpus.
pub fn write_tagged(
    corpus: &LabeledCorpus,
    predictions: &[Vec<Label>],
) -> Result<String, CorpusError> {
    if predictions.len() != corpus.len() {
        let utterance = corpus.len().min(predictions.len());
        return Err(CorpusError::ShapeMismatch {
            utterance,
            message: format!(
                "{} utterances in corpus, {} predicted",
                corpus.len(),
                predictions.len()
            ),
        });
    }
    let mut out = String::new();
    for (i, (utt, labels)) in corpus.utterances().iter().zip(predictions).enumerate() {
        if labels.len() != utt.len() {
            return Err(CorpusError::ShapeMismatch {
                utterance: i,
                message: format!("{} tokens, {} labels", utt.len(), labels.len()),
            });
        }
        if i > 0 {
            out.push('\n');
        }
        for (token, label) in utt.tokens().iter().zip(labels) {
            out.push_str(&token.surface);
            if let Some(ne) = token.external_ne {
                out.push_str(if ne { "\tNE=1" } else { "\tNE=0" });
            }
            out.push('\t');
            out.push_str(label.as_str());
            out.push('\n');
        }
    }
    Ok(out)
}
