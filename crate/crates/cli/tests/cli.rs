use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sybil_lowpass_cli::config::{Preset, RunConfig};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sybil-lowpass"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = run(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn karate() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../datasets/karate")
}

#[test]
fn generate_is_deterministic_and_loadable() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "generate", "--n", "200", "--d-ave", "6", "--c-out", "1", "--seed", "9", "--out",
    ];
    ok(&[&args[..], &["a"]].concat(), tmp.path());
    ok(&[&args[..], &["b"]].concat(), tmp.path());
    for f in ["edges.txt", "communities.txt"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
    let ds = sybil_lowpass::Dataset::load_dir(&tmp.path().join("a")).unwrap();
    assert!(ds.n() > 150);
    assert_eq!(ds.communities.k(), 2);

    ok(
        &[
            "generate",
            "--n",
            "100",
            "--theta-cube-uniform",
            "3",
            "7",
            "--out",
            "dc",
        ],
        tmp.path(),
    );
    let comms = fs::read_to_string(tmp.path().join("dc/communities.txt")).unwrap();
    let row = comms.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(row.split_whitespace().count(), 3, "{row}");
}

#[test]
fn detect_writes_one_file_per_method() {
    let tmp = TempDir::new().unwrap();
    let root = karate().parent().unwrap().to_path_buf();
    let stdout = ok(
        &[
            "detect",
            "--dataset",
            "karate",
            "--datasets-dir",
            root.to_str().unwrap(),
            "--auc",
            "--reps",
            "3",
            "--out",
            "s",
        ],
        tmp.path(),
    );
    let mut files: Vec<String> = fs::read_dir(tmp.path().join("s"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(
        files,
        [
            "cia",
            "sybilbelief",
            "sybilheat",
            "sybilrank",
            "sybilscar-c",
            "sybilwalk"
        ]
        .map(|m| format!("scores_{m}.csv"))
    );
    assert_eq!(stdout.matches("auc=").count(), 6);
    let scores = fs::read_to_string(tmp.path().join("s/scores_sybilheat.csv")).unwrap();
    assert_eq!(scores.lines().count(), 35);
}

#[test]
fn nonstandard_variant_needs_opt_in() {
    let tmp = TempDir::new().unwrap();
    let ds = karate();
    let base = [
        "detect",
        "--dataset",
        ds.to_str().unwrap(),
        "--method",
        "sybilscar-d",
    ];
    let refused = run(&base, tmp.path());
    assert!(!refused.status.success());
    assert!(!String::from_utf8_lossy(&refused.stderr).is_empty());
    ok(&[&base[..], &["--allow-nonstandard"]].concat(), tmp.path());
}

#[test]
fn auc_needs_communities() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("e.txt"), "0 1\n1 2\n2 0\n2 3\n").unwrap();
    let out = run(&["detect", "--edges", "e.txt", "--auc"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("communit"));
}

#[test]
fn preset_configs_roundtrip_through_text() {
    for p in Preset::ALL {
        for quick in [false, true] {
            let cfg = p.config(quick);
            assert_eq!(
                RunConfig::from_text(&cfg.to_text()).unwrap(),
                cfg,
                "{p} quick={quick}"
            );
        }
    }
    let tmp = TempDir::new().unwrap();
    let dumped = ok(
        &[
            "sweep",
            "--preset",
            "fig5-dcsbm",
            "--quick",
            "--dump-config",
        ],
        tmp.path(),
    );
    fs::write(tmp.path().join("c.txt"), &dumped).unwrap();
    assert_eq!(
        ok(&["sweep", "--config", "c.txt", "--dump-config"], tmp.path()),
        dumped
    );
}

#[test]
fn table2_layout() {
    let tmp = TempDir::new().unwrap();
    ok(
        &["sweep", "--preset", "table2", "--quick", "--out", "r"],
        tmp.path(),
    );
    let agg = fs::read_to_string(tmp.path().join("r/table2/table2_karate_aggregate.csv")).unwrap();
    let mut lines = agg.lines();
    assert_eq!(lines.next(), Some("method,sweep,mean,std,n"));
    assert_eq!(lines.count(), 6 * 3);
}

#[test]
fn every_preset_runs_quick() {
    let tmp = TempDir::new().unwrap();
    for p in Preset::ALL {
        let name = p.to_string();
        // Smaller graphs keep the dense eigensolves cheap.
        let mut args = vec![
            "sweep", "--preset", &name, "--quick", "--reps", "2", "--out", "r",
        ];
        if p != Preset::Table2 {
            args.extend(["--n", "300"]);
        }
        ok(&args, tmp.path());
        let dir = tmp.path().join("r").join(p.dir());
        assert!(fs::read_dir(&dir).unwrap().count() >= 3, "{name}");
    }
}
