//! Feature template language.
//!
//! Each line is a template such as `U03:%x[0,0]` or
//! `U40:%x[0,12]/%x[0,13]`. A macro `%x[row,col]` is replaced by the cell at
//! `row` positions relative to the current token and column `col` of the
//! observation matrix. Rows that fall off either end of the utterance expand
//! to `_B-k` or `_B+k`. Unigram templates start with `U`, label-bigram
//! templates with `B`.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::features::ObservationMatrix;

const DEFAULT_TEMPLATES: &str = include_str!("../resources/default.tpl");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("template set has no unigram template")]
    NoUnigram,
    #[error("template {id} references column {col} but observations have {columns} columns")]
    LayoutMismatch {
        id: String,
        col: usize,
        columns: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    Unigram,
    Bigram,
}

/// A `%x[row,col]` reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Macro {
    pub row: i32,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: String,
    kind: TemplateKind,
    has_body: bool,
    macros: Vec<Macro>,
    /// Literal text around the macros; always one longer than `macros`.
    literal_parts: Vec<String>,
}

impl Template {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> TemplateKind {
        self.kind
    }

    pub fn macros(&self) -> &[Macro] {
        &self.macros
    }

    pub fn literal_parts(&self) -> &[String] {
        &self.literal_parts
    }

    fn max_col(&self) -> Option<usize> {
        self.macros.iter().map(|m| m.col).max()
    }

    /// Expands the template at position `t`. The caller guarantees
    /// `t < matrix.len()` and that every referenced column exists.
    pub fn expand(&self, matrix: &ObservationMatrix, t: usize) -> String {
        let mut out = self.id.clone();
        if !self.has_body {
            return out;
        }
        out.push(':');
        out.push_str(&self.literal_parts[0]);
        let len = matrix.len() as i64;
        for (m, lit) in self.macros.iter().zip(&self.literal_parts[1..]) {
            let row = t as i64 + i64::from(m.row);
            if row < 0 {
                out.push_str(&format!("_B{row}"));
            } else if row >= len {
                out.push_str(&format!("_B+{}", row - len + 1));
            } else {
                out.push_str(matrix.cell(row as usize, m.col));
            }
            out.push_str(lit);
        }
        out
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)?;
        if !self.has_body {
            return Ok(());
        }
        f.write_str(":")?;
        f.write_str(&self.literal_parts[0])?;
        for (m, lit) in self.macros.iter().zip(&self.literal_parts[1..]) {
            write!(f, "%x[{},{}]{}", m.row, m.col, lit)?;
        }
        Ok(())
    }
}

/// Ordered collection of templates with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn unigrams(&self) -> impl Iterator<Item = &Template> {
        self.templates
            .iter()
            .filter(|t| t.kind == TemplateKind::Unigram)
    }

    pub fn bigrams(&self) -> impl Iterator<Item = &Template> {
        self.templates
            .iter()
            .filter(|t| t.kind == TemplateKind::Bigram)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Number of observation columns the set needs.
    pub fn required_columns(&self) -> usize {
        self.templates
            .iter()
            .filter_map(Template::max_col)
            .max()
            .map_or(0, |c| c + 1)
    }

    /// Checks that the set can be trained: at least one unigram template.
    pub fn require_unigram(&self) -> Result<(), TemplateError> {
        if self.unigrams().next().is_none() {
            return Err(TemplateError::NoUnigram);
        }
        Ok(())
    }

    /// Checks every macro column against a matrix width.
    pub fn check_layout(&self, columns: usize) -> Result<(), TemplateError> {
        for t in &self.templates {
            if let Some(col) = t.max_col().filter(|&c| c >= columns) {
                return Err(TemplateError::LayoutMismatch {
                    id: t.id.clone(),
                    col,
                    columns,
                });
            }
        }
        Ok(())
    }

    /// One template per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.templates {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

fn parse_macro(s: &str) -> Option<(Macro, usize)> {
    let inner_start = s.strip_prefix("%x[")?;
    let close = inner_start.find(']')?;
    let (row, col) = inner_start[..close].split_once(',')?;
    let row: i32 = row.trim().parse().ok()?;
    let col: usize = col.trim().parse().ok()?;
    Some((Macro { row, col }, 3 + close + 1))
}

fn parse_line(line: &str, line_no: usize) -> Result<Template, TemplateError> {
    let err = |message: String| TemplateError::Parse {
        line: line_no,
        message,
    };
    if line.contains('\t') {
        return Err(err("tab characters are not allowed in templates".into()));
    }
    let (id, body) = match line.split_once(':') {
        Some((id, body)) => (id, Some(body)),
        None => (line, None),
    };
    let kind = match id.chars().next() {
        Some('U') => TemplateKind::Unigram,
        Some('B') => TemplateKind::Bigram,
        _ => return Err(err(format!("template id {id:?} must start with U or B"))),
    };
    if id.contains('%') || id.chars().any(char::is_whitespace) {
        return Err(err(format!("invalid template id {id:?}")));
    }

    let mut macros = Vec::new();
    let mut literal_parts = vec![String::new()];
    if let Some(mut rest) = body {
        while let Some(pos) = rest.find('%') {
            literal_parts
                .last_mut()
                .expect("non-empty")
                .push_str(&rest[..pos]);
            let (m, consumed) = parse_macro(&rest[pos..]).ok_or_else(|| {
                let snippet: String = rest[pos..].chars().take(12).collect();
                err(format!("malformed macro at {snippet:?}"))
            })?;
            macros.push(m);
            literal_parts.push(String::new());
            rest = &rest[pos + consumed..];
        }
        literal_parts.last_mut().expect("non-empty").push_str(rest);
    }
    Ok(Template {
        id: id.to_string(),
        kind,
        has_body: body.is_some(),
        macros,
        literal_parts,
    })
}

/// Parses a template file. Blank lines and `#` comments are skipped.
pub fn parse_templates(text: &str) -> Result<TemplateSet, TemplateError> {
    let mut templates = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tpl = parse_line(line, idx + 1)?;
        if !seen.insert(tpl.id.clone()) {
            return Err(TemplateError::Parse {
                line: idx + 1,
                message: format!("duplicate template id {}", tpl.id),
            });
        }
        templates.push(tpl);
    }
    Ok(TemplateSet { templates })
}

/// The shipped template set covering the full feature battery.
pub fn default_template_set() -> TemplateSet {
    parse_templates(DEFAULT_TEMPLATES).expect("shipped default.tpl parses")
}

/// Text of the shipped template file.
pub fn default_template_text() -> &'static str {
    DEFAULT_TEMPLATES
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::NUM_COLUMNS;
    use proptest::prelude::*;

    fn matrix(tokens: &[&str]) -> ObservationMatrix {
        ObservationMatrix::from_rows(
            tokens
                .iter()
                .map(|t| {
                    let mut row = vec![t.to_string()];
                    row.extend((1..NUM_COLUMNS).map(|c| c.to_string()));
                    row
                })
                .collect(),
        )
    }

    #[test]
    fn parses_relational_unigram() {
        let set = parse_templates("U1:%x[0,20]/%x[0,21]").unwrap();
        let t = &set.templates()[0];
        assert_eq!(t.id(), "U1");
        assert_eq!(t.kind(), TemplateKind::Unigram);
        assert_eq!(
            t.macros(),
            [Macro { row: 0, col: 20 }, Macro { row: 0, col: 21 }]
        );
        assert_eq!(t.literal_parts(), ["", "/", ""]);
    }

    #[test]
    fn parses_bare_bigram_and_window() {
        let set = parse_templates("B\nU9:%x[-3,0]\n").unwrap();
        assert_eq!(set.templates()[0].kind(), TemplateKind::Bigram);
        assert!(set.templates()[0].macros().is_empty());
        assert_eq!(set.templates()[1].macros(), [Macro { row: -3, col: 0 }]);
    }

    #[test]
    fn parse_errors() {
        let e = parse_templates("U1:%x[0,1]\nU1:%x[0,2]").unwrap_err();
        assert!(matches!(e, TemplateError::Parse { line: 2, .. }), "{e}");
        let e = parse_templates("# c\nX1:%x[0,1]").unwrap_err();
        assert!(matches!(e, TemplateError::Parse { line: 2, .. }), "{e}");
        for bad in [
            "U1:%x[0]",
            "U1:%x[0,0]\t%x[0,1]",
            "U1:%x[a,1]",
            "U1:%x[0,-1]",
            "U1:%t[0,1]",
            "U1:%m[0,1,\"x\"]",
            "U1:%x[0,1",
        ] {
            assert!(parse_templates(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn expansion_examples() {
        let m = matrix(&["ami", "take", "boli"]);
        let set = parse_templates("U00:%x[0,0]\nU01:%x[-1,0]\nU02:%x[2,0]\nB").unwrap();
        let t = set.templates();
        assert_eq!(t[0].expand(&m, 1), "U00:take");
        assert_eq!(t[1].expand(&m, 0), "U01:_B-1");
        assert_eq!(t[2].expand(&m, 1), "U02:_B+1");
        assert_eq!(t[2].expand(&m, 2), "U02:_B+2");
        assert_eq!(t[3].expand(&m, 1), "B");
        let far = parse_templates("U:%x[-3,0]").unwrap();
        assert_eq!(far.templates()[0].expand(&m, 1), "U:_B-2");
    }

    #[test]
    fn relational_expansion() {
        let mut row: Vec<String> = vec!["take".into(), "4".into()];
        row.extend((2..NUM_COLUMNS).map(|_| "0".to_string()));
        row[12] = "1".into();
        row[13] = "1".into();
        let m = ObservationMatrix::from_rows(vec![row]);
        let set = parse_templates("U1:%x[0,12]/%x[0,13]").unwrap();
        assert_eq!(set.templates()[0].expand(&m, 0), "U1:1/1");
    }

    #[test]
    fn layout_check() {
        let set = parse_templates("U1:%x[0,40]").unwrap();
        assert_eq!(
            set.check_layout(NUM_COLUMNS),
            Err(TemplateError::LayoutMismatch {
                id: "U1".into(),
                col: 40,
                columns: NUM_COLUMNS
            })
        );
        assert!(default_template_set().check_layout(NUM_COLUMNS).is_ok());
        assert_eq!(
            parse_templates("B").unwrap().require_unigram(),
            Err(TemplateError::NoUnigram)
        );
    }

    #[test]
    fn default_set_contents() {
        let set = default_template_set();
        let window: Vec<i32> = set
            .unigrams()
            .filter(|t| t.macros().len() == 1 && t.macros()[0].col == 0)
            .map(|t| t.macros()[0].row)
            .collect();
        assert_eq!(window, [-3, -2, -1, 0, 1, 2, 3]);
        assert!(set
            .bigrams()
            .any(|t| t.id() == "B" && t.macros().is_empty()));
        assert!(set
            .unigrams()
            .any(|t| t.macros() == [Macro { row: 0, col: 21 }, Macro { row: 0, col: 22 }]));
        for col in 1..NUM_COLUMNS {
            assert!(
                set.unigrams()
                    .any(|t| t.macros() == [Macro { row: 0, col }]),
                "col {col}"
            );
        }
        for a in 12..20 {
            assert!(set
                .unigrams()
                .any(|t| t.macros() == [Macro { row: 0, col: a }, Macro { row: 0, col: a + 1 }]));
        }
    }

    fn arb_template_line() -> impl Strategy<Value = String> {
        let mac = (-4i32..5, 0usize..30).prop_map(|(r, c)| format!("%x[{r},{c}]"));
        (
            prop_oneof![Just("U"), Just("B")],
            0u32..1000,
            proptest::collection::vec((mac, "[a-z/_=|]{0,3}"), 0..4),
        )
            .prop_map(|(k, n, parts)| {
                let body: String = parts.into_iter().map(|(m, l)| format!("{m}{l}")).collect();
                format!("{k}{n}:{body}")
            })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(lines in proptest::collection::vec(arb_template_line(), 1..8)) {
            let mut uniq = Vec::new();
            for l in lines {
                let id = l.split(':').next().unwrap().to_string();
                if !uniq.iter().any(|u: &String| u.split(':').next().unwrap() == id) {
                    uniq.push(l);
                }
            }
            let set = parse_templates(&uniq.join("\n")).unwrap();
            let again = parse_templates(&set.to_text()).unwrap();
            prop_assert_eq!(again, set);
        }

        #[test]
        fn expansion_is_total_and_deterministic(
            tokens in proptest::collection::vec("[a-z]{1,4}", 1..6),
            row in -5i32..6,
        ) {
            let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let m = matrix(&refs);
            let set = parse_templates(&format!("U:%x[{row},0]/%x[0,22]")).unwrap();
            for t in 0..m.len() {
                let a = set.templates()[0].expand(&m, t);
                prop_assert_eq!(&a, &set.templates()[0].expand(&m, t));
                prop_assert!(a.starts_with("U:"));
            }
        }
    }
}
