use std::path::Path;
use std::process::{Command, Output};

use cxr_phase::{save_image, BitDepth, GrayImage};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cxr-phase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_inputs(dir: &Path, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let img = GrayImage::from_fn(40, 36, |x, y| {
            0.5 + 0.3 * ((x as f64) * (0.2 + 0.05 * i as f64)).sin() * ((y as f64) * 0.15).cos()
        });
        save_image(&img, dir.join(name), BitDepth::Eight).unwrap();
    }
}

fn tree_bytes(out: &Path, stems: &[&str]) -> Vec<Vec<u8>> {
    let mut all = Vec::new();
    for feature in ["lwpa", "lpe", "elea", "mf"] {
        for stem in stems {
            all.push(std::fs::read(out.join(feature).join(format!("{stem}.png"))).unwrap());
        }
    }
    all
}

#[test]
fn batch_with_a_missing_file_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path(), &["a.png", "b.png"]);
    let manifest = dir.path().join("m.csv");
    std::fs::write(
        &manifest,
        "path,label,subject\na.png,normal,s1\ngone.png,pneumonia,s2\nb.png,covid19,s3\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "batch",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--working-size",
        "32",
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let runs = std::fs::read_to_string(out.join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    assert_eq!(runs.lines().filter(|l| l.contains("\"failed\"")).count(), 1);
    assert_eq!(std::fs::read_dir(out.join("mf")).unwrap().count(), 2);
}

#[test]
fn parallelism_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let stems = ["p", "q", "r", "s"];
    let names: Vec<String> = stems.iter().map(|s| format!("{s}.png")).collect();
    write_inputs(
        dir.path(),
        &names.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    let mut csv = String::from("path,label,subject\n");
    for (i, n) in names.iter().enumerate() {
        csv.push_str(&format!("{n},normal,s{i}\n"));
    }
    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, csv).unwrap();
    let mut trees = Vec::new();
    for p in ["1", "4"] {
        let out = dir.path().join(format!("out{p}"));
        let o = cli(&[
            "batch",
            manifest.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--parallelism",
            p,
            "--working-size",
            "48",
        ]);
        assert_eq!(o.status.code(), Some(0));
        trees.push(tree_bytes(&out, &stems));
    }
    assert_eq!(trees[0], trees[1]);
}

#[test]
fn empty_manifest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, "path,label,subject\n").unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "batch",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out.join("runs.jsonl")).unwrap(), "");
}

#[test]
fn unreadable_manifest_is_an_invocation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "batch",
        dir.path().join("none.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "file,class\nx.png,normal\n").unwrap();
    let o = cli(&[
        "batch",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[elea]\nlambda = 3.0\n").unwrap();
    let o = cli(&["config", "--config", cfg.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("lambda = 3.0"));
    let o = cli(&["config", "--config", cfg.to_str().unwrap(), "--lambda", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("lambda = 5.0"));
}

#[test]
fn out_of_range_values_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[elea]\ndelta = -1\n").unwrap();
    let o = cli(&["config", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
    let o = cli(&["config", "--delta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
    let o = cli(&["config", "--bit-depth", "12"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn enhance_prints_a_record() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path(), &["one.png"]);
    let out = dir.path().join("out");
    let o = cli(&[
        "enhance",
        dir.path().join("one.png").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--working-size",
        "0",
        "--bit-depth",
        "16",
        "--emit",
        "mf",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let record: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(record["status"], "ok");
    assert_eq!(record["solver_iterations"], 9);
    assert!(out.join("mf/one.png").is_file());
    assert!(!out.join("lwpa").exists());

    let o = cli(&[
        "enhance",
        dir.path().join("nope.png").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
