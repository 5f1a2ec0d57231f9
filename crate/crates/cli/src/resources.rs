//! Assembling a [`ResourceBundle`] from flags and config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mixtag::corpus::LabelSet;
use mixtag::lexicons::{
    default_emoticons, load_frequency_list, load_line_list, load_pair_list, Lexicon, LexiconRole,
    ResourceBundle,
};
use mixtag::Label;

use crate::args::{LabelArgs, ResourceArgs};
use crate::config::FileConfig;
use crate::error::{read_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ListFormat {
    Lines,
    Frequency,
    Pairs,
}

#[derive(Debug, Clone, PartialEq)]
struct LexiconSpec {
    language: Label,
    format: ListFormat,
    path: PathBuf,
}

fn parse_lexicon_spec(spec: &str) -> Result<LexiconSpec, CliError> {
    let (lang, rest) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--lexicon {spec:?}: expected LANG=PATH")))?;
    let (format, path) = match rest.split_once(':') {
        Some(("lines", p)) => (ListFormat::Lines, p),
        Some(("freq", p)) => (ListFormat::Frequency, p),
        Some(("pairs", p)) => (ListFormat::Pairs, p),
        _ => (ListFormat::Lines, rest),
    };
    if lang.is_empty() || path.is_empty() {
        return Err(CliError::Usage(format!(
            "--lexicon {spec:?}: expected LANG=PATH"
        )));
    }
    Ok(LexiconSpec {
        language: Label::new(lang),
        format,
        path: PathBuf::from(path),
    })
}

pub fn label_set(args: &LabelArgs, file: &FileConfig) -> LabelSet {
    match args.labels.as_ref().or(file.labels.as_ref()) {
        Some(codes) => LabelSet::new(codes.iter().map(|c| Label::new(c.trim()))),
        None => LabelSet::default(),
    }
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn load_spec(spec: &LexiconSpec, min_frequency: u64) -> Result<Lexicon, CliError> {
    let text = read_file(&spec.path)?;
    let lang = spec.language.clone();
    match spec.format {
        ListFormat::Lines => load_line_list(&text, LexiconRole::Language(lang), true),
        ListFormat::Frequency => load_frequency_list(&text, lang, min_frequency),
        ListFormat::Pairs => load_pair_list(&text, lang),
    }
    .map_err(|e| CliError::in_file(&spec.path, e))
}

fn load_optional_list(
    path: &Path,
    role: LexiconRole,
    case_folded: bool,
) -> Result<Lexicon, CliError> {
    let text = read_file(path)?;
    load_line_list(&text, role, case_folded).map_err(|e| CliError::in_file(path, e))
}

/// Loads every configured resource. Languages without any resource get an
/// empty lexicon and a warning.
pub fn load_bundle(args: &ResourceArgs, file: &FileConfig) -> Result<ResourceBundle, CliError> {
    let languages = LabelSet::languages();
    let min_frequency = args.min_frequency.or(file.min_frequency).unwrap_or(1);
    let lexicon_dir = args.lexicon_dir.as_ref().or(file.lexicon_dir.as_ref());

    let mut specs = Vec::new();
    if let Some(dir) = lexicon_dir {
        if !dir.is_dir() {
            return Err(CliError::Data(format!(
                "{}: lexicon directory not found",
                dir.display()
            )));
        }
        for lang in &languages {
            let path = dir.join(format!("{lang}.txt"));
            if path.is_file() {
                specs.push(LexiconSpec {
                    language: lang.clone(),
                    format: ListFormat::Lines,
                    path,
                });
            }
        }
    }
    let mut explicit: Vec<String> = file
        .lexicons
        .iter()
        .map(|(lang, path)| format!("{lang}={path}"))
        .collect();
    explicit.extend(args.lexicons.iter().cloned());
    for s in &explicit {
        let spec = parse_lexicon_spec(s)?;
        if !languages.contains(&spec.language) {
            return Err(CliError::Usage(format!(
                "--lexicon {s:?}: unknown language {}",
                spec.language
            )));
        }
        specs.push(spec);
    }

    let mut per_language: BTreeMap<Label, Lexicon> = BTreeMap::new();
    for spec in &specs {
        let lex = load_spec(spec, min_frequency)?;
        per_language
            .entry(spec.language.clone())
            .and_modify(|existing| existing.merge(&lex))
            .or_insert(lex);
    }
    for lang in &languages {
        per_language.entry(lang.clone()).or_insert_with(|| {
            warn(&format!(
                "no lexicon for {lang}; its dictionary feature is always 0"
            ));
            Lexicon::empty(LexiconRole::Language(lang.clone()), true)
        });
    }

    let emoticon_path = args
        .emoticons
        .clone()
        .or_else(|| file.emoticons.clone())
        .or_else(|| {
            lexicon_dir
                .map(|d| d.join("emoticons.txt"))
                .filter(|p| p.is_file())
        });
    let emoticons = match emoticon_path {
        Some(p) => load_optional_list(&p, LexiconRole::Emoticon, false)?,
        None => default_emoticons(),
    };

    let gazetteer_path = args
        .gazetteer
        .clone()
        .or_else(|| file.gazetteer.clone())
        .or_else(|| {
            lexicon_dir
                .map(|d| d.join("gazetteer.txt"))
                .filter(|p| p.is_file())
        });
    let gazetteer = match gazetteer_path {
        Some(p) => load_optional_list(&p, LexiconRole::Gazetteer, true)?,
        None => {
            warn("no gazetteer; the gazetteer feature is always 0");
            Lexicon::empty(LexiconRole::Gazetteer, true)
        }
    };

    ResourceBundle::new(&languages, per_language, emoticons, gazetteer).map_err(CliError::lib)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicon_specs() {
        assert_eq!(
            parse_lexicon_spec("hi=pairs:data/hi.tsv").unwrap(),
            LexiconSpec {
                language: Label::new("hi"),
                format: ListFormat::Pairs,
                path: PathBuf::from("data/hi.tsv"),
            }
        );
        assert_eq!(
            parse_lexicon_spec("en=freq:en.tsv").unwrap().format,
            ListFormat::Frequency
        );
        let plain = parse_lexicon_spec("bn=C:/lists/bn.txt").unwrap();
        assert_eq!(plain.format, ListFormat::Lines);
        assert_eq!(plain.path, PathBuf::from("C:/lists/bn.txt"));
        assert!(parse_lexicon_spec("bn").is_err());
        assert!(parse_lexicon_spec("=x").is_err());
    }
}
