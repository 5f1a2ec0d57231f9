//! Optional TOML config file. Command-line flags override its values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{read_file, CliError};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lexicon_dir: Option<PathBuf>,
    /// Language code to `[lines|freq|pairs:]path`.
    #[serde(default)]
    pub lexicons: BTreeMap<String, String>,
    pub emoticons: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub min_frequency: Option<u64>,
    pub labels: Option<Vec<String>>,
    pub ascii_only: Option<bool>,
    pub ngrams: Option<usize>,
    pub templates: Option<String>,
    pub l2: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub min_count: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_file(path)?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_fields() {
        let cfg: FileConfig = toml::from_str(
            r#"
            lexicon_dir = "lex"
            min_frequency = 3
            labels = ["en", "bn", "NE"]
            l2 = 0.5
            ngrams = 3
            [lexicons]
            en = "freq:data/en.tsv"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.lexicon_dir, Some(PathBuf::from("lex")));
        assert_eq!(cfg.min_frequency, Some(3));
        assert_eq!(cfg.lexicons["en"], "freq:data/en.tsv");
        assert_eq!(cfg.l2, Some(0.5));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("l3 = 1.0").is_err());
    }
}
