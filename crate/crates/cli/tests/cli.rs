//! Command-line behavior: exit codes, outputs and reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn taskforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taskforge")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sample(dir: &Path, extra: &[&str]) {
    let mut args = vec!["sample", "--generator", "all", "--count", "3", "--seed", "11", "--out", p(dir)];
    args.extend_from_slice(extra);
    let out = taskforge(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn sample_writes_files_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    sample(&dir, &["--with-witness", "--with-reasoning"]);
    let names: Vec<String> = snapshot(&dir).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names.len(), 18 * 3 + 1);
    assert!(names.contains(&"manifest.json".to_string()));
    assert!(names.contains(&"tgi.g4.gravity__13.witness.txt".to_string()));
    assert!(names.contains(&"tgi.g6.symmetry__11.reasoning.txt".to_string()));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = p(tmp.path());
    for args in [
        vec!["sample", "--generator", "all", "--count", "0", "--seed", "1", "--out", out],
        vec!["sample", "--generator", "all", "--count", "1", "--out", out],
        vec!["sample", "--generator", "tgi.g9.none", "--count", "1", "--seed", "1", "--out", out],
        vec!["list", "--verbose"],
        vec!["render", "--task", "x.json", "--format", "png", "--out", "y"],
        vec!["frobnicate"],
    ] {
        assert_eq!(taskforge(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_errors_exit_3() {
    let out = taskforge(&["verify", "--dataset", "/nonexistent/taskforge/dir"]);
    assert_eq!(out.status.code(), Some(3));
    let out = taskforge(&["render", "--task", "/nonexistent.json", "--format", "svg", "--out", "-"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_fresh_dataset_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    sample(&dir, &["--with-witness", "--with-reasoning"]);
    let out = taskforge(&["verify", "--dataset", p(&dir), "--strict"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("18/18 passed"));
    let first = fs::read(dir.join("verification_report.json")).unwrap();
    taskforge(&["verify", "--dataset", p(&dir), "--strict"]);
    assert_eq!(fs::read(dir.join("verification_report.json")).unwrap(), first);
}

#[test]
fn missing_witness_is_flagged_and_fails_only_when_strict() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    sample(&dir, &[]);
    assert_eq!(taskforge(&["verify", "--dataset", p(&dir)]).status.code(), Some(0));
    assert_eq!(taskforge(&["verify", "--dataset", p(&dir), "--strict"]).status.code(), Some(1));
}

#[test]
fn empty_dir_and_orphans_fail_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let out = taskforge(&["verify", "--dataset", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifest.json"));
    let dir = tmp.path().join("d");
    sample(&dir, &["--with-witness"]);
    fs::rename(dir.join("tgi.g1.stacked_segments__11.json"), tmp.path().join("moved.json")).unwrap();
    let out = taskforge(&["verify", "--dataset", p(&dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("has no matching sample"));
}

#[test]
fn render_one_by_one_episode() {
    let tmp = tempfile::tempdir().unwrap();
    let task = tmp.path().join("t.json");
    fs::write(&task, r#"{"train":[{"input":[[1]],"output":[[2]]},{"input":[[3]],"output":[[4]]}],"test":[{"input":[[5]],"output":[[6]]}]}"#).unwrap();
    let svg = tmp.path().join("t.svg");
    let out = taskforge(&["render", "--task", p(&task), "--format", "svg", "--out", p(&svg)]);
    assert!(out.status.success());
    let body = fs::read_to_string(&svg).unwrap();
    assert_eq!(body.matches("<rect").count(), 6);
    let ansi = taskforge(&["render", "--task", p(&task), "--format", "ansi", "--out", "-"]);
    assert!(ansi.status.success());
    assert_eq!(String::from_utf8_lossy(&ansi.stdout).matches("\x1b[48;2;").count(), 6);
    fs::write(&task, "{\"train\":[]}").unwrap();
    assert_eq!(taskforge(&["render", "--task", p(&task), "--format", "svg", "--out", p(&svg)]).status.code(), Some(1));
}

#[test]
fn stats_outputs_and_no_mutation() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    sample(&dir, &[]);
    let before = snapshot(&dir);
    let (heat, feat, div) = (tmp.path().join("h.csv"), tmp.path().join("f.csv"), tmp.path().join("d.json"));
    let out = taskforge(&["stats", "--dataset", p(&dir), "--heatmap", p(&heat), "--features", p(&feat), "--diversity", p(&div)]);
    assert!(out.status.success());
    assert_eq!(snapshot(&dir), before);

    let grids: usize = snapshot(&dir)
        .iter()
        .filter(|(n, _)| n.contains("__"))
        .map(|(_, b)| taskforge::grid::parse_arc_json(b).unwrap().grid_count() / 2)
        .sum();
    let csv = fs::read_to_string(&heat).unwrap();
    let rows: Vec<Vec<usize>> =
        csv.lines().skip(1).map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect()).collect();
    let row_sum: usize = rows.iter().map(|r| r.iter().sum::<usize>()).sum();
    let col_sum: usize = (0..26).map(|c| rows.iter().map(|r| r[c]).sum::<usize>()).sum();
    assert_eq!((row_sum, col_sum), (grids, grids));

    assert_eq!(fs::read_to_string(&feat).unwrap().lines().count(), 1 + 2 * grids);
    let d: serde_json::Value = serde_json::from_slice(&fs::read(&div).unwrap()).unwrap();
    assert_eq!(d["generators"].as_object().unwrap().len(), 6);
}

#[test]
fn score_writes_tables_without_touching_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    sample(&dir, &[]);
    let before = snapshot(&dir);
    // Predict every test output correctly for G1 only.
    let mut preds = serde_json::Map::new();
    for (name, bytes) in &before {
        if name.starts_with("tgi.g1") {
            let doc: serde_json::Value = serde_json::from_slice(bytes).unwrap();
            let outs: Vec<serde_json::Value> = doc["test"].as_array().unwrap().iter().map(|p| p["output"].clone()).collect();
            preds.insert(name.trim_end_matches(".json").to_string(), serde_json::Value::from(outs));
        }
    }
    let pred_path = tmp.path().join("p.json");
    fs::write(&pred_path, serde_json::to_vec(&preds).unwrap()).unwrap();
    let out_dir = tmp.path().join("s");
    let out = taskforge(&["score", "--dataset", p(&dir), "--predictions", p(&pred_path), "--out", p(&out_dir)]);
    assert!(out.status.success());
    assert_eq!(snapshot(&dir), before);
    let csv = fs::read_to_string(out_dir.join("scores.csv")).unwrap();
    assert!(csv.contains("tgi.g1.stacked_segments,3,3,1\n"));
    assert!(csv.contains("tgi.g2.size_rule,0,3,0\n"));
    let strict = taskforge(&["score", "--dataset", p(&dir), "--predictions", p(&pred_path), "--out", p(&out_dir), "--strict-predictions"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn list_names_every_exemplar() {
    let out = taskforge(&["list"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.starts_with("tgi.g")));
}
