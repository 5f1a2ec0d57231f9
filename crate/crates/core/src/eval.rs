//! Token-level evaluation: confusion matrix, per-label precision, recall
//! and F-measure, token and utterance accuracy, macro and weighted F.

use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty evaluation")]
    Empty,
    #[error("label {0} is not in the evaluation label set")]
    UnknownLabel(Label),
}

/// Counts indexed by (gold, predicted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<Label>,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn count(&self, gold: usize, pred: usize) -> usize {
        self.counts[gold * self.labels.len() + pred]
    }

    pub fn count_of(&self, gold: &Label, pred: &Label) -> usize {
        match (self.position(gold), self.position(pred)) {
            (Some(g), Some(p)) => self.count(g, p),
            _ => 0,
        }
    }

    fn position(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn row_sum(&self, gold: usize) -> usize {
        (0..self.labels.len()).map(|p| self.count(gold, p)).sum()
    }

    pub fn col_sum(&self, pred: usize) -> usize {
        (0..self.labels.len()).map(|g| self.count(g, pred)).sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.count(i, i)).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Strict (exact label) token-level confusion over `labels`.
pub fn confusion_matrix(
    gold: &[Vec<Label>],
    pred: &[Vec<Label>],
    labels: &[Label],
) -> Result<ConfusionMatrix, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::ShapeMismatch(format!(
            "{} gold utterances, {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let l = labels.len();
    let mut cm = ConfusionMatrix {
        labels: labels.to_vec(),
        counts: vec![0; l * l],
    };
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::ShapeMismatch(format!(
                "utterance {i}: {} gold tokens, {} predicted",
                g.len(),
                p.len()
            )));
        }
        for (gl, pl) in g.iter().zip(p) {
            let gi = cm
                .position(gl)
                .ok_or_else(|| EvalError::UnknownLabel(gl.clone()))?;
            let pi = cm
                .position(pl)
                .ok_or_else(|| EvalError::UnknownLabel(pl.clone()))?;
            cm.counts[gi * l + pi] += 1;
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// Number of gold tokens with this label.
    pub support: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-label scores in the matrix's label order. Undefined ratios are 0.
pub fn per_label_prf(cm: &ConfusionMatrix) -> Vec<(Label, Prf)> {
    cm.labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let tp = cm.count(i, i);
            let precision = ratio(tp, cm.col_sum(i));
            let recall = ratio(tp, cm.row_sum(i));
            let f_measure = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            (
                label.clone(),
                Prf {
                    precision,
                    recall,
                    f_measure,
                    support: cm.row_sum(i),
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_label: Vec<(Label, Prf)>,
    pub token_accuracy: f64,
    pub utterance_accuracy: f64,
    /// Mean F over labels seen in gold or predictions.
    pub macro_f: f64,
    /// F weighted by gold support.
    pub weighted_f: f64,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    /// Labels that occur in gold or predictions, in configured order.
    pub fn active_labels(&self) -> impl Iterator<Item = (usize, &Label, &Prf)> {
        self.per_label
            .iter()
            .enumerate()
            .filter(|(i, (_, prf))| prf.support + self.confusion.col_sum(*i) > 0)
            .map(|(i, (l, prf))| (i, l, prf))
    }
}

pub fn aggregate(
    cm: &ConfusionMatrix,
    gold: &[Vec<Label>],
    pred: &[Vec<Label>],
) -> Result<EvalReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::Empty);
    }
    if gold.len() != pred.len() {
        return Err(EvalError::ShapeMismatch(format!(
            "{} gold utterances, {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    let per_label = per_label_prf(cm);
    let token_accuracy = cm.trace() as f64 / total as f64;
    let exact = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    let utterance_accuracy = ratio(exact, gold.len());

    let active: Vec<f64> = per_label
        .iter()
        .enumerate()
        .filter(|(i, (_, prf))| prf.support + cm.col_sum(*i) > 0)
        .map(|(_, (_, prf))| prf.f_measure)
        .collect();
    let macro_f = active.iter().sum::<f64>() / active.len() as f64;
    let weighted_f = per_label
        .iter()
        .map(|(_, prf)| prf.support as f64 * prf.f_measure)
        .sum::<f64>()
        / total as f64;

    Ok(EvalReport {
        per_label,
        token_accuracy,
        utterance_accuracy,
        macro_f,
        weighted_f,
        confusion: cm.clone(),
    })
}

/// Confusion matrix plus full report in one call.
pub fn evaluate(
    gold: &[Vec<Label>],
    pred: &[Vec<Label>],
    labels: &[Label],
) -> Result<EvalReport, EvalError> {
    let cm = confusion_matrix(gold, pred, labels)?;
    aggregate(&cm, gold, pred)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Csv => render_csv(report),
    }
}

fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Language\tPrecision\tRecall\tF-Measure\tSupport");
    for (_, label, prf) in report.active_labels() {
        let _ = writeln!(
            out,
            "{label}\t{:.4}\t{:.4}\t{:.4}\t{}",
            prf.precision, prf.recall, prf.f_measure, prf.support
        );
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "Tokens Accuracy (in %)\t{:.4}",
        100.0 * report.token_accuracy
    );
    let _ = writeln!(
        out,
        "Utterances Accuracy (in %)\t{:.4}",
        100.0 * report.utterance_accuracy
    );
    let _ = writeln!(out, "Average F-Measure\t{:.6}", report.macro_f);
    let _ = writeln!(out, "Weighted F-Measure\t{:.6}", report.weighted_f);
    out.push('\n');

    let active: Vec<(usize, &Label)> = report.active_labels().map(|(i, l, _)| (i, l)).collect();
    out.push_str("gold\\pred");
    for (_, l) in &active {
        let _ = write!(out, "\t{l}");
    }
    out.push('\n');
    for &(g, gl) in &active {
        let _ = write!(out, "{gl}");
        for &(p, _) in &active {
            let _ = write!(out, "\t{}", report.confusion.count(g, p));
        }
        out.push('\n');
    }
    out
}

fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("label,precision,recall,f_measure,support\n");
    for (_, label, prf) in report.active_labels() {
        let _ = writeln!(
            out,
            "{label},{},{},{},{}",
            prf.precision, prf.recall, prf.f_measure, prf.support
        );
    }
    out.push('\n');
    out.push_str("metric,value\n");
    let _ = writeln!(out, "tokens_accuracy,{}", report.token_accuracy);
    let _ = writeln!(out, "utterances_accuracy,{}", report.utterance_accuracy);
    let _ = writeln!(out, "average_f_measure,{}", report.macro_f);
    let _ = writeln!(out, "weighted_f_measure,{}", report.weighted_f);
    out.push('\n');

    let active: Vec<(usize, &Label)> = report.active_labels().map(|(i, l, _)| (i, l)).collect();
    out.push_str("gold\\pred");
    for (_, l) in &active {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for &(g, gl) in &active {
        let _ = write!(out, "{gl}");
        for &(p, _) in &active {
            let _ = write!(out, ",{}", report.confusion.count(g, p));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabelSet;
    use proptest::prelude::*;

    fn seq(codes: &[&str]) -> Vec<Label> {
        codes.iter().map(|c| Label::new(*c)).collect()
    }

    fn labels() -> Vec<Label> {
        LabelSet::default().labels().to_vec()
    }

    fn prf_of<'a>(r: &'a [(Label, Prf)], code: &str) -> &'a Prf {
        &r.iter().find(|(l, _)| l.as_str() == code).unwrap().1
    }

    #[test]
    fn confusion_examples() {
        let cm = confusion_matrix(&[seq(&["en", "bn"])], &[seq(&["en", "bn"])], &labels()).unwrap();
        assert_eq!(cm.count_of(&"en".into(), &"en".into()), 1);
        assert_eq!(cm.count_of(&"bn".into(), &"bn".into()), 1);
        assert_eq!(cm.trace(), cm.total());

        let cm = confusion_matrix(&[seq(&["en"])], &[seq(&["bn"])], &labels()).unwrap();
        assert_eq!(cm.count_of(&"en".into(), &"bn".into()), 1);

        let err = confusion_matrix(&[seq(&["en"]), seq(&["en"])], &[seq(&["en"])], &labels());
        assert!(matches!(err, Err(EvalError::ShapeMismatch(_))));
        let err = confusion_matrix(&[seq(&["en"])], &[seq(&["zz"])], &labels());
        assert_eq!(err, Err(EvalError::UnknownLabel("zz".into())));
    }

    #[test]
    fn four_token_case() {
        // Hand-computed: en P=1 R=1/2, bn P=1/2 R=1, hi all 1.
        let gold = [seq(&["en", "en", "bn", "hi"])];
        let pred = [seq(&["en", "bn", "bn", "hi"])];
        let r = evaluate(&gold, &pred, &labels()).unwrap();
        let en = prf_of(&r.per_label, "en");
        assert_eq!((en.precision, en.recall), (1.0, 0.5));
        assert!((en.f_measure - 2.0 / 3.0).abs() < 1e-15);
        let bn = prf_of(&r.per_label, "bn");
        assert_eq!((bn.precision, bn.recall), (0.5, 1.0));
        assert!((bn.f_measure - 2.0 / 3.0).abs() < 1e-15);
        let hi = prf_of(&r.per_label, "hi");
        assert_eq!((hi.precision, hi.recall, hi.f_measure), (1.0, 1.0, 1.0));
        let x = prf_of(&r.per_label, "X");
        assert_eq!(
            (x.precision, x.recall, x.f_measure, x.support),
            (0.0, 0.0, 0.0, 0)
        );

        assert_eq!(r.token_accuracy, 0.75);
        assert!((r.weighted_f - 0.75).abs() < 1e-15);
        assert!((r.macro_f - (2.0 / 3.0 + 2.0 / 3.0 + 1.0) / 3.0).abs() < 1e-15);
        assert_eq!(r.utterance_accuracy, 0.0);
    }

    #[test]
    fn perfect_predictions() {
        let gold = [seq(&["en", "bn", "NE"])];
        let r = evaluate(&gold, &gold, &labels()).unwrap();
        assert_eq!(r.token_accuracy, 1.0);
        assert_eq!(r.utterance_accuracy, 1.0);
        assert_eq!(r.macro_f, 1.0);
        assert_eq!(r.weighted_f, 1.0);
        for (_, l, prf) in r.active_labels() {
            assert_eq!(
                (prf.precision, prf.recall, prf.f_measure),
                (1.0, 1.0, 1.0),
                "{l}"
            );
        }
    }

    #[test]
    fn empty_evaluation() {
        assert_eq!(evaluate(&[], &[], &labels()), Err(EvalError::Empty));
        assert_eq!(
            evaluate(&[vec![]], &[vec![]], &labels()),
            Err(EvalError::Empty)
        );
    }

    #[test]
    fn text_report_layout() {
        let gold = [seq(&["en", "en", "bn", "hi"])];
        let pred = [seq(&["en", "bn", "bn", "hi"])];
        let r = evaluate(&gold, &pred, &labels()).unwrap();
        let text = render_report(&r, ReportFormat::Text);
        assert!(text.contains("Tokens Accuracy (in %)\t75.0000\n"));
        assert!(text.contains("Utterances Accuracy (in %)\t0.0000\n"));
        assert!(text.contains("Average F-Measure\t0.777778\n"));
        assert!(text.contains("Weighted F-Measure\t0.750000\n"));
        assert!(text.contains("gold\\pred\ten\tbn\thi\n"));
        assert!(text.contains("en\t1\t1\t0\n"));
        assert_eq!(text, render_report(&r, ReportFormat::Text));
    }

    #[test]
    fn csv_report_layout() {
        let gold = [seq(&["en", "en", "bn", "hi"])];
        let pred = [seq(&["en", "bn", "bn", "hi"])];
        let r = evaluate(&gold, &pred, &labels()).unwrap();
        let csv = render_report(&r, ReportFormat::Csv);
        let per_label: Vec<&str> = csv.split("\n\n").next().unwrap().lines().collect();
        assert_eq!(per_label.len(), 3 + 1);
        assert_eq!(per_label[0], "label,precision,recall,f_measure,support");
        assert!(csv.contains("tokens_accuracy,0.75\n"));
    }

    fn arb_eval() -> impl Strategy<Value = (Vec<Vec<Label>>, Vec<Vec<Label>>)> {
        let codes = vec!["en", "bn", "hi", "NE"];
        proptest::collection::vec(
            proptest::collection::vec(
                (
                    proptest::sample::select(codes.clone()),
                    proptest::sample::select(codes),
                ),
                1..6,
            ),
            1..6,
        )
        .prop_map(|utts| {
            let gold = utts
                .iter()
                .map(|u| u.iter().map(|(g, _)| Label::new(*g)).collect())
                .collect();
            let pred = utts
                .iter()
                .map(|u| u.iter().map(|(_, p)| Label::new(*p)).collect())
                .collect();
            (gold, pred)
        })
    }

    proptest! {
        #[test]
        fn metric_invariants((gold, pred) in arb_eval()) {
            let r = evaluate(&gold, &pred, &labels()).unwrap();
            let cm = &r.confusion;
            prop_assert!(cm.trace() <= cm.total());
            prop_assert_eq!(r.token_accuracy, cm.trace() as f64 / cm.total() as f64);
            prop_assert_eq!(r.utterance_accuracy == 1.0, r.token_accuracy == 1.0);
            let support: usize = r.per_label.iter().map(|(_, p)| p.support).sum();
            prop_assert_eq!(support, cm.total());
            for v in [r.token_accuracy, r.utterance_accuracy, r.macro_f, r.weighted_f] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            for (_, prf) in &r.per_label {
                prop_assert!(prf.f_measure >= 0.0);
                prop_assert!(prf.f_measure <= 1.0_f64.min(prf.precision + prf.recall) + 1e-15);
                if prf.precision + prf.recall > 0.0 {
                    let h = 2.0 * prf.precision * prf.recall / (prf.precision + prf.recall);
                    prop_assert!((prf.f_measure - h).abs() < 1e-15);
                }
            }

            let mut order: Vec<usize> = (0..gold.len()).collect();
            order.reverse();
            let g2: Vec<_> = order.iter().map(|&i| gold[i].clone()).collect();
            let p2: Vec<_> = order.iter().map(|&i| pred[i].clone()).collect();
            let r2 = evaluate(&g2, &p2, &labels()).unwrap();
            prop_assert_eq!(r2, r);
        }

        #[test]
        fn perfect_and_all_wrong((gold, _) in arb_eval()) {
            let r = evaluate(&gold, &gold, &labels()).unwrap();
            prop_assert_eq!(r.weighted_f, 1.0);
            let wrong: Vec<Vec<Label>> = gold
                .iter()
                .map(|u| u.iter().map(|_| Label::new("X")).collect())
                .collect();
            let r = evaluate(&gold, &wrong, &labels()).unwrap();
            prop_assert_eq!(r.weighted_f, 0.0);
        }
    }
}
