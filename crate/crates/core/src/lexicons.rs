//! Dictionary resources: per-language wordlists, frequency lists,
//! transliteration pairs, the emoticon list and the named-entity gazetteer.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::corpus::{Label, LabelSet, LabeledCorpus};

const DEFAULT_EMOTICONS: &str = include_str!("../resources/emoticons.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty lexicon")]
    Empty,
    #[error("corpus is not labeled")]
    Unlabeled,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("missing lexicon for language {0}")]
    MissingLanguage(Label),
    #[error("lexicon for {0} supplied more than once")]
    DuplicateLanguage(Label),
}

/// What a lexicon is used for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconRole {
    Language(Label),
    Emoticon,
    Gazetteer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    role: LexiconRole,
    entries: BTreeSet<String>,
    case_folded: bool,
}

impl Lexicon {
    /// An empty lexicon. Only wordlists built from sparse corpora and
    /// absent optional resources are allowed to be empty.
    pub fn empty(role: LexiconRole, case_folded: bool) -> Self {
        Self {
            role,
            entries: BTreeSet::new(),
            case_folded,
        }
    }

    /// Builds a lexicon from raw keys, folding them if requested.
    pub fn from_entries<I, S>(role: LexiconRole, case_folded: bool, entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Self::empty(role, case_folded);
        for e in entries {
            lex.insert(e.as_ref());
        }
        lex
    }

    fn insert(&mut self, key: &str) {
        let key = if self.case_folded {
            key.to_lowercase()
        } else {
            key.to_string()
        };
        self.entries.insert(key);
    }

    pub fn role(&self) -> &LexiconRole {
        &self.role
    }

    pub fn is_case_folded(&self) -> bool {
        self.case_folded
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in sorted order.
    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    /// Membership under this lexicon's case-folding policy.
    pub fn contains(&self, word: &str) -> bool {
        if self.case_folded {
            self.entries.contains(&word.to_lowercase())
        } else {
            self.entries.contains(word)
        }
    }

    /// Adds every entry of `other` to this lexicon.
    pub fn merge(&mut self, other: &Lexicon) {
        for e in other.entries() {
            self.insert(e);
        }
    }

    /// One entry per line, sorted; the inverse of [`load_line_list`].
    pub fn to_line_list(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(e);
            out.push('\n');
        }
        out
    }

    fn non_empty(self) -> Result<Self, LexiconError> {
        if self.entries.is_empty() {
            Err(LexiconError::Empty)
        } else {
            Ok(self)
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Loads a `word<TAB>count` frequency list for one language.
///
/// Words whose (maximum) count is below `min_frequency` are dropped; the
/// counts themselves are not kept.
pub fn load_frequency_list(
    text: &str,
    language: Label,
    min_frequency: u64,
) -> Result<Lexicon, LexiconError> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let (word, count) = content
            .split_once('\t')
            .ok_or_else(|| LexiconError::Parse {
                line,
                message: "expected word<TAB>count".into(),
            })?;
        let word = word.trim();
        let count: u64 = count.trim().parse().map_err(|_| LexiconError::Parse {
            line,
            message: format!("malformed count {:?}", count.trim()),
        })?;
        if word.is_empty() {
            return Err(LexiconError::Parse {
                line,
                message: "empty word".into(),
            });
        }
        let slot = counts.entry(word.to_lowercase()).or_insert(0);
        *slot = (*slot).max(count);
    }
    Lexicon::from_entries(
        LexiconRole::Language(language),
        true,
        counts
            .into_iter()
            .filter(|(_, c)| *c >= min_frequency)
            .map(|(w, _)| w),
    )
    .non_empty()
}

/// Loads a `roman<TAB>native` transliteration pair list. Only the Roman
/// column is kept.
pub fn load_pair_list(text: &str, language: Label) -> Result<Lexicon, LexiconError> {
    let mut lex = Lexicon::empty(LexiconRole::Language(language), true);
    for (line, content) in content_lines(text) {
        let (roman, _native) = content
            .split_once('\t')
            .ok_or_else(|| LexiconError::Parse {
                line,
                message: "expected roman<TAB>native".into(),
            })?;
        let roman = roman.trim();
        if roman.is_empty() {
            return Err(LexiconError::Parse {
                line,
                message: "empty roman column".into(),
            });
        }
        lex.insert(roman);
    }
    lex.non_empty()
}

/// Loads a one-entry-per-line list. Emoticon lists are never case-folded,
/// whatever `case_folded` says.
pub fn load_line_list(
    text: &str,
    role: LexiconRole,
    case_folded: bool,
) -> Result<Lexicon, LexiconError> {
    let case_folded = case_folded && role != LexiconRole::Emoticon;
    Lexicon::from_entries(
        role,
        case_folded,
        content_lines(text).map(|(_, l)| l.trim()),
    )
    .non_empty()
}

/// The emoticon list shipped with the crate.
pub fn default_emoticons() -> Lexicon {
    load_line_list(DEFAULT_EMOTICONS, LexiconRole::Emoticon, false)
        .expect("shipped emoticons.txt is non-empty")
}

/// One case-folded wordlist per language in `languages`, collected from the
/// gold labels of a training corpus. Lists may be empty.
pub fn build_wordlists_from_corpus(
    corpus: &LabeledCorpus,
    languages: &[Label],
) -> Result<BTreeMap<Label, Lexicon>, LexiconError> {
    if corpus.is_empty() {
        return Err(LexiconError::EmptyCorpus);
    }
    if !corpus.is_labeled() {
        return Err(LexiconError::Unlabeled);
    }
    let mut lists: BTreeMap<Label, Lexicon> = languages
        .iter()
        .map(|l| {
            (
                l.clone(),
                Lexicon::empty(LexiconRole::Language(l.clone()), true),
            )
        })
        .collect();
    for token in corpus.utterances().iter().flat_map(|u| u.tokens()) {
        if let Some(lex) = token.gold.as_ref().and_then(|g| lists.get_mut(g)) {
            lex.insert(&token.surface);
        }
    }
    Ok(lists)
}

/// Case-folded gazetteer of every surface whose gold label is `ne_label`.
pub fn build_gazetteer_from_corpus(
    corpus: &LabeledCorpus,
    ne_label: &Label,
) -> Result<Lexicon, LexiconError> {
    if corpus.is_empty() {
        return Err(LexiconError::EmptyCorpus);
    }
    if !corpus.is_labeled() {
        return Err(LexiconError::Unlabeled);
    }
    Ok(Lexicon::from_entries(
        LexiconRole::Gazetteer,
        true,
        corpus
            .utterances()
            .iter()
            .flat_map(|u| u.tokens())
            .filter(|t| t.gold.as_ref() == Some(ne_label))
            .map(|t| t.surface.as_str()),
    ))
}

/// Every dictionary resource the feature extractor consults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceBundle {
    languages: Vec<Label>,
    per_language: Vec<Lexicon>,
    emoticons: Lexicon,
    gazetteer: Lexicon,
}

impl ResourceBundle {
    /// Assembles a bundle with exactly one lexicon per language, ordered as
    /// `languages`.
    pub fn new(
        languages: &[Label],
        mut per_language: BTreeMap<Label, Lexicon>,
        emoticons: Lexicon,
        gazetteer: Lexicon,
    ) -> Result<Self, LexiconError> {
        let mut ordered = Vec::with_capacity(languages.len());
        for lang in languages {
            ordered.push(
                per_language
                    .remove(lang)
                    .ok_or_else(|| LexiconError::MissingLanguage(lang.clone()))?,
            );
        }
        if let Some(extra) = per_language.into_keys().next() {
            return Err(LexiconError::DuplicateLanguage(extra));
        }
        Ok(Self {
            languages: languages.to_vec(),
            per_language: ordered,
            emoticons,
            gazetteer,
        })
    }

    /// Bundle for the nine default languages with every lexicon empty.
    pub fn empty() -> Self {
        let languages = LabelSet::languages();
        let per_language = languages
            .iter()
            .map(|l| Lexicon::empty(LexiconRole::Language(l.clone()), true))
            .collect();
        Self {
            languages,
            per_language,
            emoticons: Lexicon::empty(LexiconRole::Emoticon, false),
            gazetteer: Lexicon::empty(LexiconRole::Gazetteer, true),
        }
    }

    pub fn languages(&self) -> &[Label] {
        &self.languages
    }

    /// Language lexicons in column order.
    pub fn language_lexicons(&self) -> &[Lexicon] {
        &self.per_language
    }

    pub fn lexicon(&self, language: &Label) -> Option<&Lexicon> {
        self.languages
            .iter()
            .position(|l| l == language)
            .map(|i| &self.per_language[i])
    }

    pub fn emoticons(&self) -> &Lexicon {
        &self.emoticons
    }

    pub fn gazetteer(&self) -> &Lexicon {
        &self.gazetteer
    }
}
