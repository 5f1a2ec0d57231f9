use std::path::Path;

use rayon::prelude::*;

use mixtag::corpus::{parse_corpus, write_tagged, LabelSet};
use mixtag::crf::train;
use mixtag::eval::{evaluate, render_report, ReportFormat};
use mixtag::features::build_observation_matrix;
use mixtag::lexicons::{build_gazetteer_from_corpus, build_wordlists_from_corpus};
use mixtag::templates::{default_template_set, parse_templates};
use mixtag::{CrfModel, FeatureConfig, Label, LabeledCorpus, TemplateSet, TrainConfig};

use crate::args::{Command, LabelArgs, ResourceArgs};
use crate::config::FileConfig;
use crate::error::{read_file, write_file, CliError};
use crate::resources::{label_set, load_bundle};

pub fn run(command: Command, file: &FileConfig) -> Result<(), CliError> {
    match command {
        Command::BuildLexicons {
            corpus,
            out_dir,
            labels,
        } => build_lexicons(&corpus, &out_dir, &labels, file),
        Command::Features {
            corpus,
            labeled,
            output,
            ngrams,
            resources,
        } => {
            let config = feature_config(&resources, ngrams, file);
            features(
                &corpus,
                labeled,
                output.as_deref(),
                config,
                &resources,
                file,
            )
        }
        Command::Train {
            corpus,
            model,
            templates,
            l2,
            max_iters,
            tol,
            min_count,
            ngrams,
            seed: _,
            resources,
        } => {
            let defaults = TrainConfig::default();
            let config = TrainConfig {
                l2: l2.or(file.l2).unwrap_or(defaults.l2),
                max_iters: max_iters.or(file.max_iters).unwrap_or(defaults.max_iters),
                tol: tol.or(file.tol).unwrap_or(defaults.tol),
                min_count: min_count.or(file.min_count).unwrap_or(defaults.min_count),
            };
            config
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let features = feature_config(&resources, ngrams, file);
            let templates = load_templates(templates.as_deref().or(file.templates.as_deref()))?;
            train_model(
                &corpus, &model, &templates, features, config, &resources, file,
            )
        }
        Command::Tag {
            model,
            input,
            output,
            labeled_input,
            resources,
        } => tag(
            &model,
            &input,
            output.as_deref(),
            labeled_input,
            &resources,
            file,
        ),
        Command::Eval {
            gold,
            pred,
            csv,
            labels,
        } => {
            let format = if csv {
                ReportFormat::Csv
            } else {
                ReportFormat::Text
            };
            eval(&gold, &pred, format, &labels, file)
        }
    }
}

fn feature_config(
    resources: &ResourceArgs,
    ngrams: Option<usize>,
    file: &FileConfig,
) -> FeatureConfig {
    FeatureConfig {
        ascii_only: resources.ascii_only || file.ascii_only.unwrap_or(false),
        ngram_max: ngrams.or(file.ngrams).filter(|&n| n > 0),
    }
}

fn load_templates(spec: Option<&str>) -> Result<TemplateSet, CliError> {
    match spec {
        None | Some("default") => Ok(default_template_set()),
        Some(path) => {
            let path = Path::new(path);
            parse_templates(&read_file(path)?).map_err(|e| CliError::in_file(path, e))
        }
    }
}

fn read_corpus(path: &Path, labeled: bool, labels: &LabelSet) -> Result<LabeledCorpus, CliError> {
    parse_corpus(&read_file(path)?, labeled, labels).map_err(|e| CliError::in_file(path, e))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_lexicons(
    corpus: &Path,
    out_dir: &Path,
    labels: &LabelArgs,
    file: &FileConfig,
) -> Result<(), CliError> {
    let label_set = label_set(labels, file);
    let corpus_data = read_corpus(corpus, true, &label_set)?;
    let languages: Vec<Label> = LabelSet::languages()
        .into_iter()
        .filter(|l| label_set.position(l).is_some())
        .collect();
    let lists = build_wordlists_from_corpus(&corpus_data, &languages)
        .map_err(|e| CliError::in_file(corpus, e))?;
    let ne = Label::new("NE");
    let gazetteer =
        build_gazetteer_from_corpus(&corpus_data, &ne).map_err(|e| CliError::in_file(corpus, e))?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
    for (lang, lex) in &lists {
        if lex.is_empty() {
            eprintln!("warning: no {lang} tokens in corpus; {lang}.txt not written");
            continue;
        }
        write_file(&out_dir.join(format!("{lang}.txt")), &lex.to_line_list())?;
        eprintln!("{lang}: {} entries", lex.len());
    }
    if gazetteer.is_empty() {
        eprintln!("warning: no NE tokens in corpus; gazetteer.txt not written");
    } else {
        write_file(&out_dir.join("gazetteer.txt"), &gazetteer.to_line_list())?;
        eprintln!("gazetteer: {} entries", gazetteer.len());
    }
    Ok(())
}

fn features(
    corpus: &Path,
    labeled: bool,
    output: Option<&Path>,
    config: FeatureConfig,
    resources: &ResourceArgs,
    file: &FileConfig,
) -> Result<(), CliError> {
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let bundle = load_bundle(resources, file)?;
    let labels = label_set(&resources.labels, file);
    let data = read_corpus(corpus, labeled, &labels)?;
    let mut out = String::new();
    for (i, utt) in data.utterances().iter().enumerate() {
        let matrix = build_observation_matrix(utt, &bundle, &config).map_err(CliError::lib)?;
        if i > 0 {
            out.push('\n');
        }
        let gold = utt.gold();
        out.push_str(&matrix.to_tsv(gold.as_deref()));
    }
    emit(output, &out)
}

fn train_model(
    corpus: &Path,
    model_path: &Path,
    templates: &TemplateSet,
    features: FeatureConfig,
    config: TrainConfig,
    resources: &ResourceArgs,
    file: &FileConfig,
) -> Result<(), CliError> {
    features
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let bundle = load_bundle(resources, file)?;
    let labels = label_set(&resources.labels, file);
    let data = read_corpus(corpus, true, &labels)?;
    let model = train(&data, templates, &bundle, &labels, features, config)
        .map_err(|e| CliError::in_file(corpus, e))?;
    if let Some(report) = model.report() {
        eprintln!(
            "iterations: {}, objective: {:.6}",
            report.iterations, report.objective
        );
        if !report.converged {
            eprintln!(
                "warning: stopped after {} iterations without reaching tol {}",
                report.iterations, config.tol
            );
        }
    }
    write_file(model_path, &model.save())
}

fn tag(
    model_path: &Path,
    input: &Path,
    output: Option<&Path>,
    labeled_input: bool,
    resources: &ResourceArgs,
    file: &FileConfig,
) -> Result<(), CliError> {
    let model =
        CrfModel::load(&read_file(model_path)?).map_err(|e| CliError::in_file(model_path, e))?;
    let bundle = load_bundle(resources, file)?;
    let labels = label_set(&resources.labels, file);
    let mut data = read_corpus(input, labeled_input, &labels)?;
    if labeled_input {
        data = data.without_labels();
    }
    let predictions: Vec<Vec<Label>> = data
        .utterances()
        .par_iter()
        .map(|utt| model.tag(utt, &bundle))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::in_file(model_path, e))?;
    let text = write_tagged(&data, &predictions).map_err(CliError::lib)?;
    emit(output, &text)
}

fn eval(
    gold_path: &Path,
    pred_path: &Path,
    format: ReportFormat,
    labels: &LabelArgs,
    file: &FileConfig,
) -> Result<(), CliError> {
    let label_set = label_set(labels, file);
    let gold = read_corpus(gold_path, true, &label_set)?;
    let pred = read_corpus(pred_path, true, &label_set)?;
    if gold.len() != pred.len() {
        return Err(CliError::Data(format!(
            "{}: {} utterances, gold has {}",
            pred_path.display(),
            pred.len(),
            gold.len()
        )));
    }
    for (i, (g, p)) in gold.utterances().iter().zip(pred.utterances()).enumerate() {
        if !g.surfaces().eq(p.surfaces()) {
            return Err(CliError::Data(format!(
                "{}: utterance {} does not match gold tokens",
                pred_path.display(),
                i + 1
            )));
        }
    }
    let gold_labels = gold.gold().map_err(CliError::lib)?;
    let pred_labels = pred.gold().map_err(CliError::lib)?;
    let report = evaluate(&gold_labels, &pred_labels, label_set.labels()).map_err(CliError::lib)?;
    print!("{}", render_report(&report, format));
    Ok(())
}
