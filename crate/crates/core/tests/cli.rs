use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn roughinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughinv"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_json(path: &Path, value: &Value) -> String {
    fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn small_scenario(height: f64) -> Value {
    json!({
        "name": "small",
        "surface": {"kind": "random", "corr_length": "70 cm", "height_std": "5 cm", "taper_width": "2 m", "seed": 4},
        "lower": {"eps_r": 4, "mu_r": 1, "sigma": "1e-5 S/m"},
        "wave": {"theta": "0 deg", "taper": "8 m"},
        "receivers": {"start": -10, "end": 10, "step": "50 cm", "height": height},
        "schedule": {"start": "150 MHz", "step": "50 MHz", "end": "200 MHz"},
        "noise_level": "5 %",
        "noise_seed": 3
    })
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&roughinv(&[])), 2);
    assert_eq!(code(&roughinv(&["frobnicate"])), 2);
    assert_eq!(code(&roughinv(&["gen-surface", "--out", "/tmp/never-written"])), 2);
    assert_eq!(code(&roughinv(&["experiment", "no_such_preset", "--out", "/tmp/never-written"])), 2);
    assert_eq!(code(&roughinv(&["experiment"])), 2);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ not json").unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(code(&roughinv(&["gen-surface", "--config", broken.to_str().unwrap(), "--out", out])), 2);

    let missing_field = write_json(&dir.path().join("gs.json"), &json!({"corr_length": 0.7}));
    assert_eq!(code(&roughinv(&["gen-surface", "--config", &missing_field, "--out", out])), 2);

    let zero_segments = write_json(
        &dir.path().join("fw.json"),
        &json!({
            "surface": {"kind": "flat"},
            "lower": {"eps_r": 4, "mu_r": 1, "sigma": 0},
            "wave": {"theta": 0, "taper": 8},
            "receivers": {"start": -1, "end": 1, "step": 0.5, "height": 4.25},
            "frequency": "300 MHz",
            "segments": 0
        }),
    );
    let result = roughinv(&["forward", "--config", &zero_segments, "--out", out]);
    assert_eq!(code(&result), 2);
    assert!(!Path::new(out).join("scattered.csv").exists());
}

#[test]
fn gen_surface_is_deterministic_and_guards_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        &dir.path().join("gs.json"),
        &json!({"corr_length": "70 cm", "height_std": "7 cm", "seed": 11}),
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = roughinv(&["gen-surface", "--config", &cfg, "--out", d.to_str().unwrap(), "--quiet"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(read_tree(&a), read_tree(&b));

    let again = roughinv(&["gen-surface", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert_eq!(code(&again), 2);
    let forced = roughinv(&["gen-surface", "--config", &cfg, "--out", a.to_str().unwrap(), "--force", "--seed", "12"]);
    assert_eq!(code(&forced), 0);
    assert_ne!(read_tree(&a), read_tree(&b));

    let stats: Value = serde_json::from_slice(&fs::read(b.join("stats.json")).unwrap()).unwrap();
    let std = stats["height_std"].as_f64().unwrap();
    assert!(std > 0.035 && std < 0.105, "rms height {std}");
    let csv = fs::read_to_string(b.join("surface.csv")).unwrap();
    assert!(csv.starts_with("x,s\n"));
    assert_eq!(csv.lines().count(), 2050);
}

#[test]
fn forward_writes_one_row_per_receiver() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        &dir.path().join("fw.json"),
        &json!({
            "surface": {"kind": "triangular"},
            "lower": {"eps_r": 4, "mu_r": 1, "sigma": "1e-5 S/m"},
            "wave": {"theta": "10 deg", "taper": "8 m"},
            "receivers": {"start": -10, "end": 10, "step": "10 cm", "height": "4.25 m"},
            "frequency": "200 MHz"
        }),
    );
    let out = dir.path().join("fw");
    let result = roughinv(&["forward", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    let csv = fs::read_to_string(out.join("scattered.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,Re,Im"));
    assert_eq!(lines.count(), 201);
    let meta: Value = serde_json::from_slice(&fs::read(out.join("scattered.json")).unwrap()).unwrap();
    assert_eq!(meta["frequency"], json!(200e6));
    assert_eq!(meta["receiver_count"], json!(201));
}

#[test]
fn reconstruct_and_plot_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(&dir.path().join("rc.json"), &small_scenario(4.25));
    let runs: Vec<_> = ["r1", "r2"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = out.to_str().unwrap();
            let r = roughinv(&["reconstruct", "--config", &cfg, "--out", o, "--quiet"]);
            assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
            let p = roughinv(&["plot", o, "--quiet"]);
            assert_eq!(code(&p), 0, "{}", String::from_utf8_lossy(&p.stderr));
            out
        })
        .collect();
    let first = read_tree(&runs[0]);
    assert_eq!(first, read_tree(&runs[1]));
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "report.json",
        "err_curve.csv",
        "measurements.json",
        "profile_f150.csv",
        "profile_f200.csv",
        "err_curve.svg",
        "profile_f150.svg",
        "profile_f200.svg",
    ] {
        assert!(names.contains(&expected), "missing {expected} in {names:?}");
    }

    // recorded measurements reproduce the synthesized run
    let mut without_surface = small_scenario(4.25);
    without_surface.as_object_mut().unwrap().remove("surface");
    let cfg2 = write_json(&dir.path().join("rc2.json"), &without_surface);
    let measurements = runs[0].join("measurements.json");
    let out = dir.path().join("r3");
    let r = roughinv(&[
        "reconstruct",
        "--config",
        &cfg2,
        "--measurements",
        measurements.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let steps = |d: &Path| -> Vec<String> {
        fs::read_to_string(d.join("err_curve.csv"))
            .unwrap()
            .lines()
            .map(|l| l.split(',').nth(4).unwrap().to_owned())
            .collect()
    };
    assert_eq!(steps(&runs[0]), steps(&out));
}

#[test]
fn runtime_failures_exit_with_one_and_keep_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // receivers inside the rough surface make every forward solve fail
    let cfg = write_json(&dir.path().join("low.json"), &small_scenario(0.01));
    let out = dir.path().join("low");
    let r = roughinv(&["reconstruct", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&r), 1, "{}", String::from_utf8_lossy(&r.stderr));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&roughinv(&["plot", empty.to_str().unwrap()])), 1);
}
