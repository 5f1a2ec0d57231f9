//! Per-token feature extraction and the observation matrix indexed by
//! feature templates.
//!
//! Column layout of every matrix row:
//!
//! | col   | content                                        |
//! |-------|------------------------------------------------|
//! | 0     | token surface                                  |
//! | 1     | token length in characters                     |
//! | 2–4   | capitalization flags (first, any, all letters) |
//! | 5–11  | `#`, `@`, `http`, emoticon, symbol, digit, number |
//! | 12–20 | dictionary membership: en bn hi gu kn ml mr ta te |
//! | 21    | gazetteer match                                |
//! | 22    | external NE annotation                         |
//!
//! Flag columns hold `"0"` or `"1"`. Optional character n-grams are kept
//! beside the fixed columns, not inside them.

use thiserror::Error;

use crate::corpus::{Token, Utterance};
use crate::lexicons::{Lexicon, ResourceBundle};

pub const NUM_COLUMNS: usize = 23;

pub const COL_TOKEN: usize = 0;
pub const COL_LENGTH: usize = 1;
pub const COL_CAP: usize = 2;
pub const COL_CHR: usize = 5;
pub const COL_LEX: usize = 12;
pub const COL_NE: usize = 21;

pub const MAX_NGRAM: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("character n-gram order must be in 1..={MAX_NGRAM}, got {0}")]
    NgramOrder(usize),
}

/// Switches that change how observations are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureConfig {
    /// Restrict "letter" and "uppercase" to ASCII.
    pub ascii_only: bool,
    /// Emit character n-grams of order 1..=n when set.
    pub ngram_max: Option<usize>,
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        match self.ngram_max {
            Some(n) if !(1..=MAX_NGRAM).contains(&n) => Err(FeatureError::NgramOrder(n)),
            _ => Ok(()),
        }
    }
}

fn is_letter(c: char, ascii_only: bool) -> bool {
    if ascii_only {
        c.is_ascii_alphabetic()
    } else {
        c.is_alphabetic()
    }
}

fn is_upper(c: char, ascii_only: bool) -> bool {
    if ascii_only {
        c.is_ascii_uppercase()
    } else {
        c.is_uppercase()
    }
}

/// `[first letter uppercase, any uppercase, all letters uppercase]`.
///
/// The last flag requires at least one letter, so `3G` counts as all-caps.
pub fn capitalization_flags(token: &str, ascii_only: bool) -> [bool; 3] {
    let first = token
        .chars()
        .next()
        .is_some_and(|c| is_letter(c, ascii_only) && is_upper(c, ascii_only));
    let any = token
        .chars()
        .any(|c| is_letter(c, ascii_only) && is_upper(c, ascii_only));
    let mut letters = token
        .chars()
        .filter(|&c| is_letter(c, ascii_only))
        .peekable();
    let all = letters.peek().is_some() && letters.all(|c| is_upper(c, ascii_only));
    [first, any, all]
}

/// `[#, @, http, emoticon, symbol, digit, number]`.
///
/// The symbol flag ignores tokens already caught by one of the first four
/// flags, so it marks word-internal punctuation only.
pub fn character_flags(token: &str, emoticons: &Lexicon) -> [bool; 7] {
    let hashtag = token.starts_with('#');
    let mention = token.starts_with('@');
    let url = token
        .get(..4)
        .is_some_and(|p| p.eq_ignore_ascii_case("http"));
    let emoticon = emoticons.contains(token);
    let structural = hashtag || mention || url || emoticon;
    let symbol = !structural
        && token
            .chars()
            .any(|c| !c.is_alphabetic() && !c.is_ascii_digit());
    let digit = token.chars().any(|c| c.is_ascii_digit());
    let number = !token.is_empty() && token.chars().all(|c| c.is_ascii_digit());
    [hashtag, mention, url, emoticon, symbol, digit, number]
}

/// Membership in each language lexicon, in bundle order.
pub fn dictionary_flags(token: &str, bundle: &ResourceBundle) -> Vec<bool> {
    bundle
        .language_lexicons()
        .iter()
        .map(|lex| lex.contains(token))
        .collect()
}

/// `[gazetteer match, external NE flag]`.
pub fn ne_flags(token: &Token, gazetteer: &Lexicon) -> [bool; 2] {
    [
        gazetteer.contains(&token.surface),
        token.external_ne.unwrap_or(false),
    ]
}

/// All contiguous character substrings of length 1..=`n_max`, grouped by
/// length and prefixed `NG<n>:`.
pub fn char_ngrams(token: &str, n_max: usize) -> Result<Vec<String>, FeatureError> {
    if !(1..=MAX_NGRAM).contains(&n_max) {
        return Err(FeatureError::NgramOrder(n_max));
    }
    let chars: Vec<char> = token.chars().collect();
    let mut out = Vec::new();
    for n in 1..=n_max.min(chars.len()) {
        for window in chars.windows(n) {
            let mut s = format!("NG{n}:");
            s.extend(window);
            out.push(s);
        }
    }
    Ok(out)
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// Feature table for one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMatrix {
    rows: Vec<Vec<String>>,
    extras: Vec<Vec<String>>,
}

impl ObservationMatrix {
    /// Wraps pre-computed rows. Rows may have any width; templates check the
    /// width before expanding.
    pub fn from_rows(rows: Vec<Vec<String>>) -> Self {
        let extras = vec![Vec::new(); rows.len()];
        Self { rows, extras }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Smallest row width, i.e. the number of columns every template may use.
    pub fn num_columns(&self) -> usize {
        self.rows.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.rows[row][col]
    }

    /// Template-free features attached to a row (character n-grams).
    pub fn extras(&self, row: usize) -> &[String] {
        &self.extras[row]
    }

    /// Tab-separated dump, one line per row, with the gold label appended
    /// when given.
    pub fn to_tsv(&self, gold: Option<&[crate::corpus::Label]>) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            let mut fields: Vec<&str> = row.iter().map(String::as_str).collect();
            fields.extend(self.extras[i].iter().map(String::as_str));
            if let Some(labels) = gold {
                fields.push(labels[i].as_str());
            }
            out.push_str(&fields.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Computes the observation matrix of an utterance.
pub fn build_observation_matrix(
    utt: &Utterance,
    bundle: &ResourceBundle,
    config: &FeatureConfig,
) -> Result<ObservationMatrix, FeatureError> {
    config.validate()?;
    let mut rows = Vec::with_capacity(utt.len());
    let mut extras = Vec::with_capacity(utt.len());
    for token in utt.tokens() {
        let surface = token.surface.as_str();
        let mut row = Vec::with_capacity(NUM_COLUMNS);
        row.push(surface.to_string());
        row.push(surface.chars().count().to_string());
        row.extend(capitalization_flags(surface, config.ascii_only).map(flag));
        row.extend(character_flags(surface, bundle.emoticons()).map(flag));
        row.extend(dictionary_flags(surface, bundle).into_iter().map(flag));
        row.extend(ne_flags(token, bundle.gazetteer()).map(flag));
        rows.push(row);
        extras.push(match config.ngram_max {
            Some(n) => char_ngrams(surface, n)?,
            None => Vec::new(),
        });
    }
    Ok(ObservationMatrix { rows, extras })
}
