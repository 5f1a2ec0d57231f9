use std::collections::BTreeMap;

use mixtag::corpus::LabelSet;
use mixtag::lexicons::{default_emoticons, Lexicon, LexiconRole, ResourceBundle};
use mixtag::Label;

/// Bundle with `take` in both the English and Bengali lists, `ami` in
/// Bengali, `kolkata` in the gazetteer and the shipped emoticons.
pub fn fixture_bundle() -> ResourceBundle {
    let langs = LabelSet::languages();
    let words = |code: &str| -> Vec<&str> {
        match code {
            "en" => vec!["take"],
            "bn" => vec!["ami", "take"],
            _ => vec![],
        }
    };
    let map: BTreeMap<Label, Lexicon> = langs
        .iter()
        .map(|l| {
            (
                l.clone(),
                Lexicon::from_entries(LexiconRole::Language(l.clone()), true, words(l.as_str())),
            )
        })
        .collect();
    let gaz = Lexicon::from_entries(LexiconRole::Gazetteer, true, ["kolkata"]);
    ResourceBundle::new(&langs, map, default_emoticons(), gaz).unwrap()
}
