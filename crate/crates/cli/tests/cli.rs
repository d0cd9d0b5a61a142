use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quizcal_core::pipeline::load_bundle;
use quizcal_core::TraitKind;
use serde_json::{json, Value};
use tempfile::TempDir;

fn quizcal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quizcal"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn run(sub: &str, config: &Path, out: &Path) -> Output {
    quizcal(&[sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn small_synth() -> Value {
    json!({
        "n_questions": 60,
        "n_students": 120,
        "answers_per_student": 30,
        "text_signal_strength": 0.8,
        "seed": 5
    })
}

/// Config training on the synthetic files in `data`.
fn train_config(data: &Path) -> Value {
    json!({
        "questions_path": data.join("questions.csv"),
        "interactions_path": data.join("interactions.csv"),
        "split_seed": 1,
        "calibration_seed": 2,
        "search_seed": 3,
        "search": { "n_candidates": 2, "k_folds": 3 }
    })
}

/// Generates data and trains a bundle; returns (tempdir, data dir, bundle dir, train config).
fn trained() -> (TempDir, PathBuf, PathBuf, Value) {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let gen = write_config(tmp.path(), "gen.json", &json!({ "synth": small_synth() }));
    assert_ok(&run("gen-synth", &gen, &data));
    let cfg = train_config(&data);
    let train = write_config(tmp.path(), "train.json", &cfg);
    let bundle = tmp.path().join("bundle");
    assert_ok(&run("train", &train, &bundle));
    (tmp, data, bundle, cfg)
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn gen_synth_then_train_writes_a_bundle() {
    let (_tmp, data, bundle, _) = trained();
    for f in ["questions.csv", "interactions.csv", "planted_traits.csv"] {
        assert!(data.join(f).is_file(), "{f}");
    }
    for f in [
        "manifest.json",
        "traits.csv",
        "model_difficulty.json",
        "model_discrimination.json",
        "questions_train.json",
        "questions_test.json",
    ] {
        assert!(bundle.join(f).is_file(), "{f}");
    }
    let manifest: Value = serde_json::from_str(&read(&bundle.join("manifest.json"))).unwrap();
    assert!(manifest["files"]["traits.csv"].is_string());
}

#[test]
fn retraining_is_byte_identical() {
    let (tmp, _data, bundle, cfg) = trained();
    let again = tmp.path().join("again");
    let train = write_config(tmp.path(), "train.json", &cfg);
    assert_ok(&run("train", &train, &again));
    let mut names: Vec<_> = fs::read_dir(&bundle).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names {
        assert_eq!(fs::read(bundle.join(&name)).unwrap(), fs::read(again.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn predict_handles_test_questions_new_words_and_empty_files() {
    let (tmp, _data, bundle, _) = trained();

    let cfg = json!({ "bundle_dir": bundle, "predict_questions_path": bundle.join("questions_test.json") });
    let out = tmp.path().join("pred");
    assert_ok(&run("predict", &write_config(tmp.path(), "p1.json", &cfg), &out));
    let text = read(&out.join("predictions.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("question_id,estimated_difficulty,estimated_discrimination"));
    let tests: Value = serde_json::from_str(&read(&bundle.join("questions_test.json"))).unwrap();
    let n_test = tests.as_array().unwrap().len();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), n_test);
    // Same numbers the evaluation path computes for the test questions.
    let loaded = load_bundle(&bundle).unwrap();
    let est = loaded.estimate(&loaded.q_test, None).unwrap();
    for (i, row) in rows.iter().enumerate() {
        let want = format!(
            "{},{:.6},{:.6}",
            loaded.q_test[i].question_id,
            est[&TraitKind::Difficulty][i],
            est[&TraitKind::Discrimination][i]
        );
        assert_eq!(*row, want);
    }

    let novel = tmp.path().join("novel.csv");
    fs::write(
        &novel,
        "question_id,stem_text,choice_0_text,choice_1_text,choice_0_correct,choice_1_correct\n\
         n1,Zyxqwv blorptastic frumious bandersnatch?,vorpal,manxome,1,0\n",
    )
    .unwrap();
    let cfg = json!({ "bundle_dir": bundle, "predict_questions_path": novel });
    let out = tmp.path().join("pred2");
    assert_ok(&run("predict", &write_config(tmp.path(), "p2.json", &cfg), &out));
    assert_eq!(read(&out.join("predictions.csv")).lines().count(), 2);

    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let cfg = json!({ "bundle_dir": bundle, "predict_questions_path": empty });
    let out = tmp.path().join("pred3");
    assert_ok(&run("predict", &write_config(tmp.path(), "p3.json", &cfg), &out));
    assert_eq!(read(&out.join("predictions.csv")), "question_id,estimated_difficulty,estimated_discrimination\n");
}

#[test]
fn evaluate_writes_both_reports() {
    let (tmp, _data, bundle, _) = trained();
    let cfg = json!({ "bundle_dir": bundle });
    let out = tmp.path().join("eval");
    assert_ok(&run("evaluate", &write_config(tmp.path(), "e.json", &cfg), &out));
    let lte = read(&out.join("report_lte.csv"));
    let lte_rows: Vec<&str> = lte.lines().skip(1).collect();
    assert_eq!(lte_rows.len(), 2);
    assert!(lte_rows[0].starts_with("RF,"));
    assert!(lte_rows[1].starts_with("Majority,"));
    let sap = read(&out.join("report_sap.csv"));
    let labels: Vec<&str> = sap.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["IRT traits", "Text-estimated traits", "Majority"]);
    assert!(out.join("report_sap.txt").is_file());
}

#[test]
fn evaluation_groups_must_match_the_bundle() {
    let (tmp, data, _bundle, _) = trained();
    let mut cfg = train_config(&data);
    cfg["feature_groups"] = json!(["linguistic", "readability"]);
    let no_ir = tmp.path().join("no_ir");
    assert_ok(&run("train", &write_config(tmp.path(), "t.json", &cfg), &no_ir));
    let cfg = json!({ "bundle_dir": no_ir, "evaluation_groups": ["ir", "linguistic", "readability"] });
    let o = run("evaluate", &write_config(tmp.path(), "e.json", &cfg), &tmp.path().join("eval"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("GroupMismatch:"));
}

#[test]
fn calibrate_writes_traits_and_answer_splits() {
    let (tmp, data, bundle, cfg) = trained();
    let out = tmp.path().join("cal");
    assert_ok(&run("calibrate", &write_config(tmp.path(), "c.json", &cfg), &out));
    assert_eq!(read(&out.join("traits.csv")), read(&bundle.join("traits.csv")));
    assert_eq!(read(&out.join("interactions_gte.csv")), read(&bundle.join("interactions_gte.csv")));
    let answers = read(&data.join("interactions.csv")).lines().count() - 1;
    let gte = read(&out.join("interactions_gte.csv")).lines().count() - 1;
    let sap = read(&out.join("interactions_sap.csv")).lines().count() - 1;
    assert_eq!(gte + sap, answers);
}

#[test]
fn missing_inputs_exit_with_io_error() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let gen = write_config(tmp.path(), "gen.json", &json!({ "synth": small_synth() }));
    assert_ok(&run("gen-synth", &gen, &data));
    fs::remove_file(data.join("interactions.csv")).unwrap();
    let train = write_config(tmp.path(), "train.json", &train_config(&data));
    let o = run("train", &train, &tmp.path().join("bundle"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("IoError:"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn missing_bundle_exits_with_code_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({ "bundle_dir": tmp.path().join("nowhere") });
    let o = run("evaluate", &write_config(tmp.path(), "e.json", &cfg), &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("MissingBundle:"));
}

#[test]
fn bad_config_and_usage_errors_exit_with_code_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", &json!({ "no_such_field": 1 }));
    let o = run("train", &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("ConfigError:"));

    let o = quizcal(&["train"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("UsageError:"));

    let o = quizcal(&["--help"]);
    assert!(o.status.success());
}

#[test]
fn missing_seed_is_a_config_error() {
    let (tmp, data, _bundle, _) = trained();
    let mut cfg = train_config(&data);
    cfg.as_object_mut().unwrap().remove("split_seed");
    let o = run("train", &write_config(tmp.path(), "t.json", &cfg), &tmp.path().join("b2"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("ConfigError:"));
}
