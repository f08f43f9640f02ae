use std::fs;
use std::path::Path;
use std::process::{Command, Output};

macro_rules! args {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

fn wena(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wena"))
        .args(args)
        .output()
        .expect("failed to start wena")
}

fn ok(args: &[String]) -> String {
    let out = wena(args);
    assert!(
        out.status.success(),
        "wena {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

fn synth(dir: &Path) {
    ok(&args![
        "synth",
        "--out",
        p(dir),
        "--subjects",
        "24",
        "--rois",
        "6",
        "--timepoints",
        "40",
        "--planted-edges",
        "3"
    ]);
}

#[test]
fn missing_manifest_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = wena(&args![
        "run",
        "--manifest",
        p(&dir.path().join("absent.csv")),
        "--output",
        p(&dir.path().join("o"))
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingest: manifest not found"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn bad_flags_and_config_keys_exit_2() {
    assert_eq!(wena(&args!["run", "--no-such-flag"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "thresold = 0.3\n").unwrap();
    assert_eq!(
        wena(&args!["run", "--config", p(&cfg)]).status.code(),
        Some(2)
    );
}

#[test]
fn runtime_failure_exits_1_and_leaves_no_bundle() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    fs::write(dir.path().join("series/sub-003.csv"), "1,2\n3,4\n5,7\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = wena(&args![
        "run",
        "--manifest",
        p(&dir.path().join("manifest.csv")),
        "--output",
        p(&out_dir),
        "--k",
        "3"
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn staged_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let manifest = d.join("manifest.csv");
    let summary = ok(&args![
        "ingest-check",
        "--manifest",
        p(&manifest),
        "--out",
        p(&d.join("excl.json"))
    ]);
    assert!(summary.starts_with("24 subjects, 24 retained"));

    ok(&args![
        "fc",
        "--manifest",
        p(&manifest),
        "--out",
        p(&d.join("fc"))
    ]);
    ok(&args![
        "graph",
        "--manifest",
        p(&manifest),
        "--out",
        p(&d.join("fc"))
    ]);
    assert!(d.join("fc/fc/sub-001.csv").is_file());
    assert!(d.join("fc/networks/sub-024.csv").is_file());
    let edges = fs::read_to_string(d.join("fc/edges.csv")).unwrap();
    assert_eq!(edges.lines().count(), 25);
    assert_eq!(edges.lines().next().unwrap().split(',').count(), 1 + 15);

    ok(&args![
        "encode",
        "--features",
        p(&d.join("fc/edges.csv")),
        "--out",
        p(&d.join("edges_ae.csv")),
        "--model-out",
        p(&d.join("ae.json")),
        "--hidden",
        "4",
        "--epochs",
        "50"
    ]);
    ok(&args![
        "encode",
        "--features",
        p(&d.join("fc/graph.csv")),
        "--out",
        p(&d.join("graph_pc.csv")),
        "--pca",
        "3"
    ]);
    let blocks = args![
        "--block",
        p(&d.join("edges_ae.csv")),
        "--block",
        p(&d.join("graph_pc.csv"))
    ];
    let mut train = args![
        "train",
        "--manifest",
        p(&manifest),
        "--out",
        p(&d.join("stack.json"))
    ];
    train.extend(blocks.clone());
    ok(&train);
    let mut eval = args![
        "evaluate",
        "--stack",
        p(&d.join("stack.json")),
        "--manifest",
        p(&manifest),
        "--out",
        p(&d.join("eval"))
    ];
    eval.extend(blocks);
    ok(&eval);
    assert_eq!(
        fs::read_to_string(d.join("eval/predictions.csv"))
            .unwrap()
            .lines()
            .count(),
        25
    );

    ok(&args![
        "rank",
        "--features",
        p(&d.join("edges_ae.csv")),
        "--manifest",
        p(&manifest),
        "--out",
        p(&d.join("rank.csv")),
        "--k-neighbors",
        "5",
        "--covariate",
        "age",
        "--correlation-out",
        p(&d.join("corr.csv"))
    ]);
    assert_eq!(
        fs::read_to_string(d.join("rank.csv"))
            .unwrap()
            .lines()
            .count(),
        5
    );

    ok(&args![
        "pattern",
        "--model",
        p(&d.join("ae.json")),
        "--unit",
        "0",
        "--out",
        p(&d.join("pattern"))
    ]);
    assert_eq!(
        fs::read_to_string(d.join("pattern/pattern_rois.csv"))
            .unwrap()
            .lines()
            .count(),
        7
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let cfg = d.join("run.toml");
    fs::write(
        &cfg,
        "manifest = \"manifest.csv\"\noutput = \"from_config\"\nk = 4\n[edge_ae]\nhidden = 4\nepochs = 30\n\
         [graph_ae]\nhidden = 4\nepochs = 30\n[pattern_ae]\nhidden = 4\nepochs = 30\n[relief]\nk_neighbors = 5\n",
    )
    .unwrap();
    ok(&args!["run", "--config", p(&cfg), "--k", "3"]);
    let per_fold = fs::read_to_string(d.join("from_config/per_fold.csv")).unwrap();
    assert_eq!(per_fold.lines().count(), 4);
    for f in [
        "metrics.json",
        "predictions.csv",
        "weights.json",
        "pattern_edges.csv",
        "pattern_rois.csv",
        "relief_ranking.csv",
        "feature_age_correlation.csv",
        "exclusions.json",
    ] {
        assert!(d.join("from_config").join(f).is_file(), "{f} missing");
    }
}
