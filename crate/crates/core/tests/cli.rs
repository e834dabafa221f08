//! End-to-end tests of the `stylerank` binary.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the golden report.

use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use stylerank::compat::{CompatibilityIndex, Registry, ValidationStatus};
use stylerank::dataset::FeatureTable;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Runs the binary with a clean `STYLERANK_*` environment plus `env`.
fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stylerank"));
    for (k, _) in std::env::vars() {
        if k.starts_with("STYLERANK_") {
            cmd.env_remove(k);
        }
    }
    cmd.env("STYLERANK_LOG", "warn").args(args).envs(env.iter().copied());
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "stylerank {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ingest(dir: &Path) -> PathBuf {
    let dataset = dir.join("dataset.json");
    let annotations = fixture("corpus/annotations.jsonl");
    ok(&[
        "ingest",
        "--annotations",
        p(&annotations),
        "--seed",
        "3",
        "--out",
        p(&dataset),
    ]);
    dataset
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {line}"))
}

#[test]
fn gen_comparisons_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = ingest(dir.path());
    let gen = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "gen-comparisons",
            "--dataset",
            p(&dataset),
            "--n",
            "400",
            "--seed",
            seed,
            "--out",
            p(&out),
        ]);
        std::fs::read(out).unwrap()
    };
    let a = gen("11", "a.jsonl");
    let b = gen("11", "b.jsonl");
    let c = gen("12", "c.jsonl");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 400);
}

fn index_fixture_catalog(dir: &Path) -> PathBuf {
    let index = dir.join("index.bin");
    ok(&[
        "build-index",
        "--registry",
        p(&fixture("catalog/registry.json")),
        "--embeddings",
        p(&fixture("catalog/embeddings.jsonl")),
        "--out",
        p(&index),
    ]);
    index
}

#[test]
fn suggest_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let index_path = index_fixture_catalog(dir.path());

    let registry = Registry::load(&fixture("catalog/registry.json")).unwrap();
    let file = std::fs::File::open(fixture("catalog/embeddings.jsonl")).unwrap();
    let embeddings = FeatureTable::read_jsonl(BufReader::new(file)).unwrap();
    let library = CompatibilityIndex::build(&registry, &embeddings).unwrap();
    assert_eq!(
        CompatibilityIndex::load(&index_path).unwrap().generation(),
        library.generation()
    );

    let expected: String = library
        .rank_single_seed("sofa_a", "coffee_table", 3)
        .unwrap()
        .iter()
        .enumerate()
        .map(|(r, s)| format!("{},{},{}\n", r + 1, s.furniture_id, s.distance))
        .collect();
    let out = ok(&[
        "suggest",
        "--index",
        p(&index_path),
        "--seed-item",
        "sofa_a",
        "--class",
        "coffee_table",
        "--k",
        "3",
    ]);
    assert_eq!(out, expected);
    assert_eq!(out.lines().next().unwrap(), "1,table_a,1");

    let multi = ok(&[
        "suggest",
        "--index",
        p(&index_path),
        "--scene",
        "sofa_b,lamp_a",
        "--class",
        "coffee_table",
    ]);
    let expected: Vec<String> = library
        .rank_multi_seed(&["sofa_b", "lamp_a"], "coffee_table", 150)
        .unwrap()
        .into_iter()
        .map(|s| s.furniture_id)
        .collect();
    let got: Vec<&str> = multi.lines().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(got, expected);
}

#[test]
fn suggest_rejects_stale_index() {
    let dir = tempfile::tempdir().unwrap();
    let index = index_fixture_catalog(dir.path());
    let mut registry = Registry::load(&fixture("catalog/registry.json")).unwrap();
    registry
        .record_validation("t6", "table_e", ValidationStatus::Similar)
        .unwrap();
    let edited = dir.path().join("registry.json");
    registry.save(&edited).unwrap();

    let base = [
        "suggest",
        "--index",
        p(&index),
        "--seed-item",
        "sofa_a",
        "--class",
        "lamp",
    ];
    ok(&[&base[..], &["--registry", p(&fixture("catalog/registry.json"))]].concat());
    let out = run(&[&base[..], &["--registry", p(&edited)]].concat());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "stale_index");
}

#[test]
fn train_then_eval_matches_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let dataset = ingest(d);
    let comparisons = d.join("comparisons.jsonl");
    let features = fixture("corpus/features.bin");
    let checkpoint = d.join("head.ckpt");
    let report = d.join("report.json");
    let csv = d.join("report.csv");
    ok(&[
        "gen-comparisons",
        "--dataset",
        p(&dataset),
        "--n",
        "2000",
        "--seed",
        "4",
        "--out",
        p(&comparisons),
    ]);
    ok(&[
        "train",
        "--dataset",
        p(&dataset),
        "--features",
        p(&features),
        "--comparisons",
        p(&comparisons),
        "--learning-rate",
        "0.01",
        "--epochs",
        "40",
        "--l-min",
        "6,6,6,6",
        "--seed",
        "5",
        "--out",
        p(&checkpoint),
    ]);
    ok(&[
        "eval",
        "--checkpoint",
        p(&checkpoint),
        "--dataset",
        p(&dataset),
        "--features",
        p(&features),
        "--l-min",
        "6,6,6,6",
        "--out",
        p(&report),
        "--csv",
        p(&csv),
    ]);

    let text = std::fs::read_to_string(&report).unwrap();
    let golden = fixture("golden/eval_report.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &text).unwrap();
    }
    assert_eq!(
        text,
        std::fs::read_to_string(&golden).unwrap(),
        "report differs from golden"
    );

    let parsed: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["format"], "stylerank-eval");
    let csv = std::fs::read_to_string(csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "section,metric,style,value");
}

#[test]
fn errors_are_json_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let out = run(&[
        "ingest",
        "--annotations",
        p(&missing),
        "--seed",
        "1",
        "--out",
        p(&dir.path().join("d.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(&out);
    assert_eq!(err["error"]["kind"], "io");
    assert!(err["error"]["message"].as_str().unwrap().contains("missing.jsonl"));

    let index = index_fixture_catalog(dir.path());
    let out = run(&[
        "suggest",
        "--index",
        p(&index),
        "--seed-item",
        "table_e",
        "--class",
        "lamp",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "unrankable");

    // Usage errors come from the argument parser.
    let out = run(&["ingest", "--annotations", p(&missing), "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2), "the seed has no default");
    let out = run(&[
        "suggest",
        "--index",
        p(&index),
        "--seed-item",
        "sofa_a",
        "--scene",
        "sofa_b",
        "--class",
        "lamp",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn flags_override_env_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = ingest(dir.path());
    let config = dir.path().join("gen.conf");
    std::fs::write(&config, "# comparison settings\nn = 10\nseed = 1\n").unwrap();
    let out = dir.path().join("c.jsonl");
    let count = |args: &[&str], env: &[(&str, &str)]| {
        let base = ["gen-comparisons", "--dataset", p(&dataset), "--out", p(&out)];
        let res = run_env(&[&base[..], args].concat(), env);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        std::fs::read_to_string(&out).unwrap().lines().count()
    };
    let cfg = ["--config", p(&config)];
    assert_eq!(count(&cfg, &[]), 10);
    assert_eq!(count(&cfg, &[("STYLERANK_N", "20")]), 20);
    assert_eq!(
        count(&[&cfg[..], &["--n", "30"]].concat(), &[("STYLERANK_N", "20")]),
        30
    );
    assert_eq!(count(&[], &[("STYLERANK_CONFIG", p(&config))]), 10);
    assert_eq!(count(&["--n", "5", "--seed", "2"], &[]), 5);
}
