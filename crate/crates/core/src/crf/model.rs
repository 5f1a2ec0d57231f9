use std::fmt::Write as _;

use crate::corpus::{Label, Utterance};
use crate::features::{build_observation_matrix, FeatureConfig, ObservationMatrix};
use crate::lexicons::ResourceBundle;
use crate::templates::{parse_templates, TemplateKind, TemplateSet};

use super::index::{expand_position, FeatureIndex};
use super::lattice::{viterbi_decode, Lattice};
use super::train::{TrainConfig, TrainReport};
use super::CrfError;

pub const MODEL_HEADER: &str = "MIXTAG-CRF v1";

/// A trained model: labels, the templates and feature switches that produce
/// its observations, and one weight per indexed feature/label combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    labels: Vec<Label>,
    templates: TemplateSet,
    features: FeatureConfig,
    index: FeatureIndex,
    weights: Vec<f64>,
    config: TrainConfig,
    report: Option<TrainReport>,
}

impl CrfModel {
    pub fn new(
        labels: Vec<Label>,
        templates: TemplateSet,
        features: FeatureConfig,
        index: FeatureIndex,
        weights: Vec<f64>,
        config: TrainConfig,
        report: Option<TrainReport>,
    ) -> Result<Self, CrfError> {
        if labels.len() < 2 {
            return Err(CrfError::TooFewLabels(labels.len()));
        }
        if index.num_labels() != labels.len() || weights.len() != index.num_weights() {
            return Err(CrfError::Config(
                "weight vector does not match the feature index".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(CrfError::NumericOverflow);
        }
        Ok(Self {
            labels,
            templates,
            features,
            index,
            weights,
            config,
            report,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn feature_config(&self) -> &FeatureConfig {
        &self.features
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn report(&self) -> Option<&TrainReport> {
        self.report.as_ref()
    }

    /// Node and edge scores of `matrix`. Feature strings missing from the
    /// index contribute nothing.
    pub fn score_lattice(&self, matrix: &ObservationMatrix) -> Result<Lattice, CrfError> {
        self.templates.check_layout(matrix.num_columns())?;
        let l = self.labels.len();
        let mut lat = Lattice::zeros(matrix.len(), l);
        for t in 0..matrix.len() {
            let (uni, bi) = expand_position(&self.templates, matrix, t);
            for s in &uni {
                if let Some((TemplateKind::Unigram, base)) = self.index.lookup(s) {
                    for y in 0..l {
                        *lat.node_mut(t, y) += self.weights[base + y];
                    }
                }
            }
            for s in &bi {
                if let Some((TemplateKind::Bigram, base)) = self.index.lookup(s) {
                    for p in 0..l {
                        for y in 0..l {
                            *lat.edge_mut(t, p, y) += self.weights[base + p * l + y];
                        }
                    }
                }
            }
        }
        Ok(lat)
    }

    /// Best label sequence for a pre-computed observation matrix.
    pub fn decode(&self, matrix: &ObservationMatrix) -> Result<Vec<Label>, CrfError> {
        let lat = self.score_lattice(matrix)?;
        let (path, _) = viterbi_decode(&lat);
        Ok(path.into_iter().map(|y| self.labels[y].clone()).collect())
    }

    /// Extracts features with the model's own settings, then decodes.
    pub fn tag(&self, utt: &Utterance, bundle: &ResourceBundle) -> Result<Vec<Label>, CrfError> {
        let matrix = build_observation_matrix(utt, bundle, &self.features)?;
        self.decode(&matrix)
    }

    /// Serialises the model to the versioned text format.
    pub fn save(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_HEADER}");
        let _ = writeln!(out, "labels\t{}", self.labels.len());
        for l in &self.labels {
            let _ = writeln!(out, "{l}");
        }
        let _ = writeln!(
            out,
            "features\tascii_only={}\tngram_max={}",
            u8::from(self.features.ascii_only),
            self.features.ngram_max.unwrap_or(0)
        );
        let c = &self.config;
        let _ = writeln!(
            out,
            "training\tl2={}\tmax_iters={}\ttol={}\tmin_count={}",
            c.l2, c.max_iters, c.tol, c.min_count
        );
        match &self.report {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "report\titerations={}\tobjective={}\tconverged={}",
                    r.iterations,
                    r.objective,
                    u8::from(r.converged)
                );
            }
            None => out.push_str("report\tnone\n"),
        }
        let _ = writeln!(out, "templates\t{}", self.templates.len());
        out.push_str(&self.templates.to_text());
        let _ = writeln!(out, "weights\t{}", self.weights.len());
        let l = self.labels.len();
        for (s, kind, base) in self.index.iter() {
            match kind {
                TemplateKind::Unigram => {
                    for (y, label) in self.labels.iter().enumerate() {
                        let _ = writeln!(out, "{s}\t{label}\t{}", self.weights[base + y]);
                    }
                }
                TemplateKind::Bigram => {
                    for (p, prev) in self.labels.iter().enumerate() {
                        for (y, label) in self.labels.iter().enumerate() {
                            let w = self.weights[base + p * l + y];
                            let _ = writeln!(out, "{s}\t{prev}\t{label}\t{w}");
                        }
                    }
                }
            }
        }
        out
    }

    /// Parses a model written by [`CrfModel::save`].
    pub fn load(text: &str) -> Result<Self, CrfError> {
        let mut lines = Lines::new(text);

        let (n, header) = lines.next_line()?;
        if header != MODEL_HEADER {
            return Err(format_err(
                n,
                format!("unsupported model header {header:?}, expected {MODEL_HEADER:?}"),
            ));
        }

        let num_labels = lines.section("labels")?;
        let mut labels = Vec::with_capacity(num_labels);
        for _ in 0..num_labels {
            let (n, code) = lines.next_line()?;
            if code.is_empty() || code.chars().any(char::is_whitespace) {
                return Err(format_err(n, format!("invalid label {code:?}")));
            }
            labels.push(Label::new(code));
        }

        let (n, line) = lines.next_line()?;
        let fields = keyed_fields(n, line, "features", &["ascii_only", "ngram_max"])?;
        let ngram_max: usize = parse_field(n, &fields[1])?;
        let features = FeatureConfig {
            ascii_only: parse_flag(n, &fields[0])?,
            ngram_max: (ngram_max > 0).then_some(ngram_max),
        };
        features
            .validate()
            .map_err(|e| format_err(n, e.to_string()))?;

        let (n, line) = lines.next_line()?;
        let fields = keyed_fields(
            n,
            line,
            "training",
            &["l2", "max_iters", "tol", "min_count"],
        )?;
        let config = TrainConfig {
            l2: parse_finite(n, &fields[0])?,
            max_iters: parse_field(n, &fields[1])?,
            tol: parse_finite(n, &fields[2])?,
            min_count: parse_field(n, &fields[3])?,
        };

        let (n, line) = lines.next_line()?;
        let report = if line == "report\tnone" {
            None
        } else {
            let fields =
                keyed_fields(n, line, "report", &["iterations", "objective", "converged"])?;
            Some(TrainReport {
                iterations: parse_field(n, &fields[0])?,
                objective: parse_finite(n, &fields[1])?,
                converged: parse_flag(n, &fields[2])?,
            })
        };

        let num_templates = lines.section("templates")?;
        let first_template_line = lines.line_no + 1;
        let mut tpl_text = String::new();
        for _ in 0..num_templates {
            let (_, line) = lines.next_line()?;
            tpl_text.push_str(line);
            tpl_text.push('\n');
        }
        let templates = parse_templates(&tpl_text).map_err(|e| match e {
            crate::templates::TemplateError::Parse { line, message } => {
                format_err(first_template_line + line - 1, message)
            }
            other => CrfError::Template(other),
        })?;

        let num_weights = lines.section("weights")?;
        let l = labels.len();
        let mut weights = Vec::with_capacity(num_weights);
        let mut features_list: Vec<(String, TemplateKind)> = Vec::new();
        while weights.len() < num_weights {
            let (n, line) = lines.next_line()?;
            let parts: Vec<&str> = line.split('\t').collect();
            let (name, kind) = match parts.len() {
                3 => (parts[0], TemplateKind::Unigram),
                4 => (parts[0], TemplateKind::Bigram),
                _ => return Err(format_err(n, "malformed weight line".into())),
            };
            if let Some((prev, _)) = features_list.last() {
                if name <= prev.as_str() {
                    return Err(format_err(n, format!("feature {name:?} out of order")));
                }
            }
            let width = if kind == TemplateKind::Unigram {
                l
            } else {
                l * l
            };
            for k in 0..width {
                let (n, line) = if k == 0 {
                    (n, line)
                } else {
                    lines.next_line()?
                };
                let parts: Vec<&str> = line.split('\t').collect();
                let expected: Vec<&str> = match kind {
                    TemplateKind::Unigram => vec![name, labels[k].as_str()],
                    TemplateKind::Bigram => {
                        vec![name, labels[k / l].as_str(), labels[k % l].as_str()]
                    }
                };
                if parts.len() != expected.len() + 1 || parts[..expected.len()] != expected[..] {
                    return Err(format_err(
                        n,
                        format!("expected weight line for {}", expected.join("\t")),
                    ));
                }
                weights.push(parse_finite(n, parts[expected.len()])?);
            }
            features_list.push((name.to_string(), kind));
        }
        if weights.len() != num_weights {
            return Err(format_err(lines.line_no, "weight count mismatch".into()));
        }
        if let Some((n, extra)) = lines.next_nonempty() {
            return Err(format_err(n, format!("unexpected trailing line {extra:?}")));
        }

        let index = FeatureIndex::from_sorted(l, features_list);
        CrfModel::new(labels, templates, features, index, weights, config, report)
    }
}

fn format_err(line: usize, message: String) -> CrfError {
    CrfError::Format { line, message }
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines(),
            line_no: 0,
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str), CrfError> {
        let line = self
            .inner
            .next()
            .ok_or_else(|| format_err(self.line_no + 1, "unexpected end of model".into()))?;
        self.line_no += 1;
        Ok((self.line_no, line.strip_suffix('\r').unwrap_or(line)))
    }

    fn next_nonempty(&mut self) -> Option<(usize, &'a str)> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            if !line.trim().is_empty() {
                return Some((self.line_no, line));
            }
        }
        None
    }

    /// Reads a `name<TAB>count` section header.
    fn section(&mut self, name: &str) -> Result<usize, CrfError> {
        let (n, line) = self.next_line()?;
        let count = line
            .strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('\t'))
            .ok_or_else(|| format_err(n, format!("expected {name} section")))?;
        parse_field(n, count)
    }
}

fn keyed_fields(n: usize, line: &str, name: &str, keys: &[&str]) -> Result<Vec<String>, CrfError> {
    let mut parts = line.split('\t');
    if parts.next() != Some(name) {
        return Err(format_err(n, format!("expected {name} line")));
    }
    let parts: Vec<&str> = parts.collect();
    if parts.len() != keys.len() {
        return Err(format_err(
            n,
            format!("{name} line needs {} fields", keys.len()),
        ));
    }
    parts
        .iter()
        .zip(keys)
        .map(|(p, k)| {
            p.strip_prefix(k)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| format_err(n, format!("expected {k}=...")))
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(n: usize, s: &str) -> Result<T, CrfError> {
    s.parse()
        .map_err(|_| format_err(n, format!("malformed value {s:?}")))
}

fn parse_finite(n: usize, s: &str) -> Result<f64, CrfError> {
    let v: f64 = parse_field(n, s)?;
    if !v.is_finite() {
        return Err(format_err(n, format!("non-finite value {s:?}")));
    }
    Ok(v)
}

fn parse_flag(n: usize, s: &str) -> Result<bool, CrfError> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format_err(n, format!("expected 0 or 1, got {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, tokenize_query, LabelSet};
    use crate::crf::train::train;
    use crate::templates::default_template_set;

    fn trained() -> CrfModel {
        let text = "ami\tbn\nbhalo\tbn\nthis\ten\n\nhello\ten\nworld\ten\nkichu\tbn\n\n\
                    Kolkata\tNE\nami\tbn\n";
        let corpus = parse_corpus(text, true, &LabelSet::default()).unwrap();
        train(
            &corpus,
            &default_template_set(),
            &ResourceBundle::empty(),
            &LabelSet::default(),
            FeatureConfig::default(),
            TrainConfig::default(),
        )
        .unwrap()
    }

    fn tiny() -> CrfModel {
        let tpl = parse_templates("U00:%x[0,0]\nB").unwrap();
        let index = FeatureIndex::from_sorted(
            2,
            [
                ("B".to_string(), TemplateKind::Bigram),
                ("U00:take".to_string(), TemplateKind::Unigram),
            ],
        );
        CrfModel::new(
            vec!["en".into(), "bn".into()],
            tpl,
            FeatureConfig::default(),
            index,
            vec![0.0, 0.0, 0.0, 0.0, 1.5, 0.0],
            TrainConfig::default(),
            None,
        )
        .unwrap()
    }

    fn one_col(tokens: &[&str]) -> ObservationMatrix {
        ObservationMatrix::from_rows(tokens.iter().map(|t| vec![t.to_string()]).collect())
    }

    #[test]
    fn lattice_scores() {
        let m = tiny();
        let lat = m.score_lattice(&one_col(&["take", "other"])).unwrap();
        assert_eq!(lat.node(0, 0), 1.5);
        assert_eq!(lat.node(0, 1), 0.0);
        assert_eq!(lat.node(1, 0), 0.0);
        assert_eq!(lat.node(1, 1), 0.0);
        assert_eq!(lat.edge(1, 0, 1), 0.0);

        let zero = CrfModel::new(
            m.labels.clone(),
            m.templates.clone(),
            m.features,
            m.index.clone(),
            vec![0.0; 6],
            m.config,
            None,
        )
        .unwrap();
        assert_eq!(
            zero.decode(&one_col(&["a", "b", "c"])).unwrap(),
            ["en", "en", "en"].map(Label::from)
        );
        assert_eq!(m.decode(&one_col(&["take"])).unwrap(), [Label::new("en")]);
    }

    #[test]
    fn layout_mismatch() {
        let tpl = parse_templates("U00:%x[0,40]").unwrap();
        let index = FeatureIndex::from_sorted(2, [("U00:x".to_string(), TemplateKind::Unigram)]);
        let m = CrfModel::new(
            vec!["en".into(), "bn".into()],
            tpl,
            FeatureConfig::default(),
            index,
            vec![0.0; 2],
            TrainConfig::default(),
            None,
        )
        .unwrap();
        let utt = tokenize_query("ami").unwrap();
        assert!(matches!(
            m.tag(&utt, &ResourceBundle::empty()),
            Err(CrfError::Template(_))
        ));
    }

    #[test]
    fn save_load_fixed_point() {
        let m = trained();
        let text = m.save();
        assert!(text.starts_with("MIXTAG-CRF v1\n"));
        let back = CrfModel::load(&text).unwrap();
        assert_eq!(back.save(), text);
        assert_eq!(back, m);
        for q in ["ami bhalo this", "unseen words here", "Kolkata"] {
            let u = tokenize_query(q).unwrap();
            let b = ResourceBundle::empty();
            assert_eq!(back.tag(&u, &b).unwrap(), m.tag(&u, &b).unwrap());
        }
    }

    #[test]
    fn load_errors() {
        let text = tiny().save();
        let v0 = text.replacen("MIXTAG-CRF v1", "MIXTAG-CRF v0", 1);
        assert!(matches!(
            CrfModel::load(&v0),
            Err(CrfError::Format { line: 1, .. })
        ));

        let nan = text.replacen("U00:take\ten\t1.5", "U00:take\ten\tNaN", 1);
        let err = CrfModel::load(&nan).unwrap_err();
        let expected_line = text
            .lines()
            .position(|l| l.starts_with("U00:take\ten"))
            .unwrap()
            + 1;
        assert_eq!(
            err,
            CrfError::Format {
                line: expected_line,
                message: "non-finite value \"NaN\"".into()
            }
        );

        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(CrfModel::load(&truncated).is_err());

        let garbled = text.replacen("B\ten\tbn\t0", "B\tbn\ten\t0", 1);
        assert!(CrfModel::load(&garbled).is_err());
    }
}
