//! Command-line behavior: golden help output, determinism, failure
//! modes and the no-partial-outputs rule.

mod common;

use std::fs;
use std::path::Path;

use inflow::imaging::pnm;
use inflow::synth::{render_scene, SceneSpec};

use common::{run_inflow, stderr_str, stdout_str};

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// No stray `*.partial-*` temp files anywhere under `dir`.
fn assert_no_partials(dir: &Path) {
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let entry = entry.unwrap();
            let name = entry.file_name().to_string_lossy().into_owned();
            assert!(
                !name.contains(".partial-"),
                "leftover temp file {}",
                entry.path().display()
            );
            if entry.file_type().unwrap().is_dir() {
                stack.push(entry.path());
            }
        }
    }
}

fn write_empty_frame(path: &Path) {
    let scene = render_scene(&SceneSpec::empty(160, 120, true)).unwrap();
    pnm::write_ppm(path, &scene).unwrap();
}

#[test]
fn help_matches_golden_files() {
    let cwd = std::env::temp_dir();
    let cases = [
        (vec!["--help"], "help_top.txt"),
        (vec!["calibrate", "--help"], "help_calibrate.txt"),
        (vec!["gen", "--help"], "help_gen.txt"),
        (vec!["train", "--help"], "help_train.txt"),
        (vec!["eval", "--help"], "help_eval.txt"),
        (vec!["infer", "--help"], "help_infer.txt"),
        (vec!["bench", "--help"], "help_bench.txt"),
    ];
    for (args, file) in cases {
        let out = run_inflow(&cwd, &args);
        assert!(out.status.success(), "{args:?} failed");
        assert_eq!(stdout_str(&out), golden(file), "help text drifted for {args:?}");
    }
}

#[test]
fn version_flag_prints_name_and_version() {
    let out = run_inflow(&std::env::temp_dir(), &["--version"]);
    assert!(out.status.success());
    assert!(stdout_str(&out).starts_with("inflow "));
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = run_inflow(&std::env::temp_dir(), &["estimate"]);
    assert!(!out.status.success());
    assert!(!stderr_str(&out).is_empty());
}

#[test]
fn gen_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    fs::write(dir.path().join("data/keep.txt"), "precious").unwrap();

    let out = run_inflow(dir.path(), &["gen", "--out", "data", "--count", "3"]);
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert_eq!(err.lines().count(), 1, "one-line diagnostic, got: {err}");
    assert!(err.starts_with("error: "), "got: {err}");
    assert_eq!(
        fs::read_to_string(dir.path().join("data/keep.txt")).unwrap(),
        "precious"
    );
    assert_no_partials(dir.path());
}

#[test]
fn calibrate_reruns_identically_and_fails_clean() {
    let dir = tempfile::tempdir().unwrap();
    write_empty_frame(&dir.path().join("empty.ppm"));

    for out_name in ["ref_a.pgm", "ref_b.pgm"] {
        let out = run_inflow(
            dir.path(),
            &["calibrate", "--frame", "empty.ppm", "--out", out_name],
        );
        assert!(out.status.success(), "calibrate: {}", stderr_str(&out));
        assert!(stdout_str(&out).contains("edge pixels"));
    }
    assert_eq!(
        fs::read(dir.path().join("ref_a.pgm")).unwrap(),
        fs::read(dir.path().join("ref_b.pgm")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("ref_a.pgm.toml")).unwrap(),
        fs::read(dir.path().join("ref_b.pgm.toml")).unwrap()
    );

    // Invalid sigma: no reference, no sidecar, no temp leftovers.
    let out = run_inflow(
        dir.path(),
        &[
            "calibrate", "--frame", "empty.ppm", "--out", "bad.pgm", "--sigma", "0",
        ],
    );
    assert!(!out.status.success());
    assert_eq!(stderr_str(&out).lines().count(), 1);
    assert!(!dir.path().join("bad.pgm").exists());
    assert!(!dir.path().join("bad.pgm.toml").exists());
    assert_no_partials(dir.path());
}

#[test]
fn train_rejects_degenerate_split_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run_inflow(
        dir.path(),
        &[
            "gen", "--out", "data", "--count", "6", "--width", "160", "--height", "120",
        ],
    );
    assert!(gen.status.success(), "gen: {}", stderr_str(&gen));

    let out = run_inflow(
        dir.path(),
        &[
            "train",
            "--manifest",
            "data/manifest.ndjson",
            "--model-out",
            "model.bin",
            "--ratio",
            "1.0",
        ],
    );
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert_eq!(err.lines().count(), 1, "got: {err}");
    assert!(err.contains("split ratio"), "got: {err}");
    assert!(!dir.path().join("model.bin").exists());
    assert_no_partials(dir.path());
}

#[test]
fn corrupt_manifest_record_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("bad.ndjson");
    fs::write(
        &manifest,
        "{\"features\":{\"near\":1,\"mid\":2,\"far\":3},\"label\":2}\n{\"features\":{\"near\":1,\"mid\":2,\"far\":3},\"label\":9}\n",
    )
    .unwrap();
    let out = run_inflow(dir.path(), &["train", "--manifest", "bad.ndjson"]);
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert!(err.contains("bad.ndjson:2"), "got: {err}");
    assert!(!dir.path().join("model.bin").exists());
    assert_no_partials(dir.path());
}

#[test]
fn bench_rejects_zero_passes() {
    let out = run_inflow(
        &std::env::temp_dir(),
        &[
            "bench", "--config", "nope.toml", "--frames", "nowhere", "--passes", "0",
        ],
    );
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("at least one pass"), "got: {err}");
}

#[test]
fn missing_config_is_a_single_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_inflow(
        dir.path(),
        &["infer", "--config", "absent.toml", "frame.ppm"],
    );
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert_eq!(err.lines().count(), 1, "got: {err}");
    assert!(err.starts_with("error: "));
    assert!(err.contains("absent.toml"), "got: {err}");
}

#[test]
fn pipeline_flow_scores_frames_and_survives_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run_inflow(
        dir.path(),
        &[
            "gen", "--out", "data", "--count", "6", "--width", "160", "--height", "120",
        ],
    );
    assert!(gen.status.success(), "gen: {}", stderr_str(&gen));

    let train = run_inflow(
        dir.path(),
        &[
            "train",
            "--manifest",
            "data/manifest.ndjson",
            "--model-out",
            "data/model.bin",
            "--max-epochs",
            "20",
            "--report-out",
            "report.json",
        ],
    );
    assert!(train.status.success(), "train: {}", stderr_str(&train));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    for key in ["n", "exact_rate", "within_one_rate", "mean_abs_error"] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }

    let eval = run_inflow(
        dir.path(),
        &[
            "eval",
            "--manifest",
            "data/manifest.ndjson",
            "--model",
            "data/model.bin",
        ],
    );
    assert!(eval.status.success(), "eval: {}", stderr_str(&eval));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&eval)).unwrap();
    assert_eq!(report["n"], 6);

    // Knock one frame out; scoring keeps going and says so.
    fs::write(dir.path().join("data/frames/frame_0002.ppm"), b"not a ppm").unwrap();
    let infer = run_inflow(
        dir.path(),
        &[
            "infer",
            "--config",
            "data/pipeline.toml",
            "--frames",
            "data/frames",
            "--out",
            "records.ndjson",
        ],
    );
    assert!(infer.status.success(), "infer: {}", stderr_str(&infer));
    assert!(
        stderr_str(&infer).contains("1 of 6 frames failed"),
        "got: {}",
        stderr_str(&infer)
    );
    let records: Vec<serde_json::Value> =
        fs::read_to_string(dir.path().join("records.ndjson"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
    assert_eq!(records.len(), 6);
    let failed: Vec<&serde_json::Value> =
        records.iter().filter(|r| r.get("error").is_some()).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0]["frame"].as_str().unwrap().contains("frame_0002"));
    for rec in records.iter().filter(|r| r.get("error").is_none()) {
        let est = rec["estimate"].as_f64().unwrap();
        assert!((1.0..=5.0).contains(&est));
    }

    // Explicit frame paths score in the given order.
    let infer = run_inflow(
        dir.path(),
        &[
            "infer",
            "--config",
            "data/pipeline.toml",
            "data/frames/frame_0001.ppm",
            "data/frames/frame_0000.ppm",
        ],
    );
    assert!(infer.status.success());
    let lines: Vec<String> = stdout_str(&infer).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("frame_0001"));
    assert!(lines[1].contains("frame_0000"));
    assert_no_partials(dir.path());
}
