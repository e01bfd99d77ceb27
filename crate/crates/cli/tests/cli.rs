use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use contoursim::dataset::{AnnotationEntry, ImageEntry};
use contoursim::{write_dataset, BinaryMask, ContourPolygon};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contoursim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn rect(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| (x0..x1).contains(&x) && (y0..y1).contains(&y))
}

fn rect_polygon(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> ContourPolygon {
    let pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)].map(|(x, y)| (x as f64, y as f64));
    ContourPolygon::from_pixels(pts, w, h)
}

fn entry(id: &str, w: u32, h: u32, boxes: &[(u32, u32, u32, u32)]) -> ImageEntry {
    ImageEntry {
        image_id: id.into(),
        annotations: boxes
            .iter()
            .map(|&(x0, y0, x1, y1)| AnnotationEntry {
                pos_contours: vec![rect_polygon(w, h, x0 - 2, y0 - 1, x1 + 1, y1 + 2)],
                neg_contours: vec![],
                mask: rect(w, h, x0, y0, x1, y1),
            })
            .collect(),
    }
}

fn dataset(root: &Path) -> PathBuf {
    let dir = root.join("data");
    write_dataset(
        &dir,
        &[
            entry("0000001", 64, 48, &[(10, 8, 30, 28), (36, 10, 58, 40)]),
            entry("0000002", 40, 40, &[(8, 8, 32, 32)]),
        ],
    )
    .unwrap();
    dir
}

fn stderr_json(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .filter_map(|l| serde_json::from_str(l).ok())
        .collect()
}

fn error_line(out: &Output) -> serde_json::Value {
    stderr_json(out).pop().expect("json error line")
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_64() {
    let bogus = run(&["bogus"]);
    assert_eq!(bogus.status.code(), Some(64));
    assert_eq!(error_line(&bogus)["exit_code"], 64);

    let flag = run(&["validate", "--dataset", "x", "--no-such-flag"]);
    assert_eq!(flag.status.code(), Some(64));

    let missing = run(&["generate"]);
    assert_eq!(missing.status.code(), Some(64));
    assert!(error_line(&missing)["error"].as_str().unwrap().contains("--dataset"));

    let bad_value = run(&["eval-contour", "--dataset", "x", "--out", "y", "--segmenter", "magic"]);
    assert_eq!(bad_value.status.code(), Some(64));

    let no_cmd = run(&[
        "eval-contour",
        "--dataset",
        "x",
        "--out",
        "y",
        "--segmenter",
        "external",
    ]);
    assert_eq!(no_cmd.status.code(), Some(64));
    assert!(error_line(&no_cmd)["error"]
        .as_str()
        .unwrap()
        .contains("--segmenter-cmd"));

    let help = run(&["generate", "--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("--seed"));
}

#[test]
fn validate_reports_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let out = tmp.path().join("report");
    let clean = run(&["validate", "--dataset", s(&data), "--out", s(&out)]);
    assert_eq!(
        clean.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&clean.stderr)
    );
    assert!(out.join("validation.json").exists());
    let config = &stderr_json(&clean)[0];
    assert_eq!(config["command"], "validate");

    std::fs::remove_file(data.join("masks/0000002_01.png")).unwrap();
    let broken = run(&["validate", "--dataset", s(&data)]);
    assert_eq!(broken.status.code(), Some(2));
    assert_eq!(error_line(&broken)["exit_code"], 2);
}

#[test]
fn oracle_contour_eval_scores_100() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let out = tmp.path().join("eval");
    let res = run(&[
        "eval-contour",
        "--dataset",
        s(&data),
        "--segmenter",
        "oracle",
        "--out",
        s(&out),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("mean_iou_at_1,100.00"), "{summary}");
    assert!(out.join("report.json").exists());
    assert_eq!(stderr_json(&res)[0]["config"]["segmenter"], "oracle");
}

#[test]
fn oracle_click_eval_needs_one_click() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let out = tmp.path().join("eval");
    let res = run(&[
        "eval-clicks",
        "--dataset",
        s(&data),
        "--segmenter",
        "oracle",
        "--out",
        s(&out),
        "--zoom-in",
        "--flip-average",
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("mean_noc_at_90,1.00"), "{summary}");
    assert!(summary.contains("equivalent_clicks,1"), "{summary}");
    assert!(out.join("curves.svg").exists());
}

#[test]
fn failing_external_segmenter_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let out = tmp.path().join("eval");
    let res = run(&[
        "eval-contour",
        "--dataset",
        s(&data),
        "--out",
        s(&out),
        "--segmenter",
        "external",
        "--segmenter-cmd",
        "false",
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(out.join("samples.csv").exists());
}

#[test]
fn generate_is_byte_identical_across_runs_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let outs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|n| tmp.path().join(n)).collect();
    for (out, workers) in outs.iter().zip(["1", "4", "1"]) {
        let res = run(&[
            "generate",
            "--dataset",
            s(&data),
            "--out",
            s(out),
            "--n",
            "1000",
            "--seed",
            "7",
            "--workers",
            workers,
        ]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let first = tree(&outs[0]);
    assert_eq!(first.len(), 1001);
    assert_eq!(first, tree(&outs[1]));
    assert_eq!(first, tree(&outs[2]));
    let log = String::from_utf8(first[Path::new("generation.jsonl")].clone()).unwrap();
    let line: serde_json::Value = serde_json::from_str(log.lines().nth(3).unwrap()).unwrap();
    assert_eq!(line["sample_id"], 3);
    assert_eq!(line["image_id"], "0000001");
    assert_eq!(line["annotation_number"], "01");
}

#[test]
fn writes_stay_under_out() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let before = tree(tmp.path());
    let out = tmp.path().join("out");
    let runs: [&[&str]; 5] = [
        &["heatmap", "--n", "5", "--line-width", "2"],
        &["encode", "--mode", "line", "--w", "0.05"],
        &[
            "mine",
            "--segmenter",
            "baseline",
            "--iou-threshold",
            "0.5",
            "--seed",
            "3",
        ],
        &["export-samples", "--n", "6", "--seed", "1"],
        &["generate", "--n", "3"],
    ];
    for args in runs {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--dataset", s(&data), "--out", s(&out)]);
        let res = bin().current_dir(tmp.path()).args(&full).output().unwrap();
        assert_eq!(
            res.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    let after: BTreeMap<_, _> = tree(tmp.path())
        .into_iter()
        .filter(|(p, _)| !p.starts_with("out"))
        .collect();
    assert_eq!(before, after);
    let produced = tree(&out);
    assert!(produced.contains_key(Path::new("heatmaps/0000001_01.png")));
    assert!(produced.contains_key(Path::new("encodings/0000002_01_pos.png")));
    assert!(produced.contains_key(Path::new("mining.json")));
    let manifest = String::from_utf8(produced[Path::new("manifest.jsonl")].clone()).unwrap();
    assert_eq!(manifest.lines().count(), 6);
}

#[test]
fn config_file_fills_flags_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!("dataset = {:?}\nseed = 11\nn = 4\nsegmenter = \"oracle\"\n", s(&data)),
    )
    .unwrap();
    let out = tmp.path().join("gen");
    let res = run(&["generate", "--config", s(&cfg), "--out", s(&out), "--seed", "12"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let config = &stderr_json(&res)[0]["config"];
    assert_eq!(config["seed"], 12);
    assert_eq!(config["n"], 4);

    std::fs::write(&cfg, "dataset = \"x\"\nunknown-key = 1\n").unwrap();
    let bad = run(&["validate", "--config", s(&cfg)]);
    assert_eq!(bad.status.code(), Some(64));
}
