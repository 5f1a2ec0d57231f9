use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const TRAIN: &str =
    "ami\tbn\ntake\ten\nKolkata\tNE\n\nthis\ten\nis\ten\nbhalo\tbn\n\nami\tbn\nthis\ten\n";

fn mixtag(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixtag"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run mixtag")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("train.txt"), TRAIN).unwrap();
    dir
}

fn train(dir: &Path, model: &str) -> Output {
    mixtag(
        &[
            "train",
            "--corpus",
            "train.txt",
            "--model",
            model,
            "--lexicon-dir",
            "lex",
        ],
        dir,
    )
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(mixtag(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(mixtag(&["--version"], dir.path()).status.code(), Some(0));
    assert_eq!(mixtag(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(
        mixtag(&["train", "--corpus", "train.txt"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        mixtag(&["eval", "missing.txt", "train.txt"], dir.path())
            .status
            .code(),
        Some(2)
    );
    std::fs::write(dir.path().join("bad.txt"), "ami\txx\n").unwrap();
    assert_eq!(
        mixtag(&["eval", "bad.txt", "bad.txt"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mixtag(
            &[
                "train",
                "--corpus",
                "train.txt",
                "--model",
                "m",
                "--l2",
                "-1"
            ],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    std::fs::write(dir.path().join("cfg.toml"), "l3 = 2\n").unwrap();
    assert_eq!(
        mixtag(
            &["--config", "cfg.toml", "eval", "train.txt", "train.txt"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn eval_of_gold_against_itself() {
    let dir = setup();
    let out = mixtag(&["eval", "train.txt", "train.txt"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("Tokens Accuracy (in %)\t100.0000"), "{text}");
    assert!(text.contains("Utterances Accuracy (in %)\t100.0000"));
    let csv = stdout(&mixtag(
        &["eval", "train.txt", "train.txt", "--csv"],
        dir.path(),
    ));
    assert!(
        csv.starts_with("label,precision,recall,f_measure,support\n"),
        "{csv}"
    );
}

#[test]
fn eval_rejects_misaligned_tokens() {
    let dir = setup();
    let other = TRAIN.replace("bhalo", "bhaalo");
    std::fs::write(dir.path().join("pred.txt"), other).unwrap();
    let out = mixtag(&["eval", "train.txt", "pred.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_tag_pipeline_is_deterministic() {
    let dir = setup();
    let p = dir.path();
    assert!(mixtag(
        &[
            "build-lexicons",
            "--corpus",
            "train.txt",
            "--out-dir",
            "lex"
        ],
        p
    )
    .status
    .success());
    assert!(p.join("lex/bn.txt").is_file());
    assert!(p.join("lex/gazetteer.txt").is_file());
    assert!(!p.join("lex/ta.txt").exists());

    assert!(train(p, "a.crf").status.success());
    assert!(train(p, "b.crf").status.success());
    let a = std::fs::read(p.join("a.crf")).unwrap();
    let b = std::fs::read(p.join("b.crf")).unwrap();
    assert_eq!(a, b);

    let tag = mixtag(
        &[
            "tag",
            "--model",
            "a.crf",
            "--input",
            "train.txt",
            "--labeled-input",
            "--lexicon-dir",
            "lex",
            "--output",
            "pred.txt",
        ],
        p,
    );
    assert!(tag.status.success());
    let out = mixtag(&["eval", "train.txt", "pred.txt"], p);
    assert!(stdout(&out).contains("Tokens Accuracy (in %)\t100.0000"));
}

#[test]
fn features_dump_rows_and_gold() {
    let dir = setup();
    let out = mixtag(
        &[
            "features",
            "--corpus",
            "train.txt",
            "--labeled",
            "--ngrams",
            "2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.split('\t').nth(22).is_some()));
    assert_eq!(text.split("\n\n").count(), 3);
    assert!(rows[0].starts_with("ami\t3\t"));
    assert!(rows[0].ends_with("\tbn"));
}

#[test]
fn model_with_out_of_layout_template_fails_to_tag() {
    let dir = setup();
    let p = dir.path();
    std::fs::create_dir_all(p.join("lex")).unwrap();
    assert!(train(p, "m.crf").status.success());
    let model = std::fs::read_to_string(p.join("m.crf")).unwrap();
    let broken = model.replace("U07:%x[0,1]", "U07:%x[0,40]");
    assert_ne!(model, broken);
    std::fs::write(p.join("broken.crf"), broken).unwrap();
    let out = mixtag(
        &[
            "tag",
            "--model",
            "broken.crf",
            "--input",
            "train.txt",
            "--labeled-input",
        ],
        p,
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("40"), "{err}");
}
