use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn rotpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotpack"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generated(dir: &TempDir, family: &str) -> PathBuf {
    let path = dir.path().join(format!("{family}.json"));
    let out = rotpack(&["generate", "--family", family, "-o", path_str(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generate_from_flags() {
    let out = rotpack(&[
        "generate", "--size", "10", "--radius", "5", "23", "--mass", "20", "93", "--seed", "4",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["format"], "rotpack-instance");
    assert_eq!(v["generator"]["distribution"], "uniform");
    let circles = v["circles"].as_array().unwrap();
    assert_eq!(circles.len(), 10);
    for c in circles {
        let r = c["radius"].as_f64().unwrap();
        assert!((5.0..=23.0).contains(&r));
    }
    assert_eq!(
        out.stdout,
        rotpack(&[
            "generate", "--size", "10", "--radius", "5", "23", "--mass", "20", "93", "--seed", "4"
        ])
        .stdout
    );
}

#[test]
fn generate_rejects_bad_family() {
    assert_eq!(
        code(&rotpack(&[
            "generate", "--size", "3", "--radius", "1", "2", "--mass", "1", "2"
        ])),
        1
    );
    assert_eq!(code(&rotpack(&["generate", "--family", "nope"])), 2);
    assert_eq!(code(&rotpack(&["generate"])), 2);
}

#[test]
fn solve_is_byte_identical_without_timing() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, "set2-25");
    let a = rotpack(&["solve", path_str(&inst), "--seed", "3", "--omit-timing"]);
    let b = rotpack(&["solve", path_str(&inst), "--seed", "3", "--omit-timing"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let timed: serde_json::Value =
        serde_json::from_slice(&rotpack(&["solve", path_str(&inst)]).stdout).unwrap();
    assert!(timed["timing"]["elapsed_secs"].is_number());
}

#[test]
fn batch_on_seven_circles_reaches_zero_imbalance() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, "set1-7");
    let sol = dir.path().join("best.json");
    let report = dir.path().join("report.json");
    let out = rotpack(&[
        "batch",
        path_str(&inst),
        "--runs",
        "5040",
        "-b",
        "1",
        "--parallelism",
        "4",
        "-o",
        path_str(&sol),
        "--report",
        path_str(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    let row = table.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[1], "7");
    assert!(cols[3].parse::<f64>().unwrap() < 1e-9);
    assert_eq!(cols[4], "5040");

    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["per_run"].as_array().unwrap().len(), 5040);
    assert!(v["timing"]["time_to_best_secs"].is_number());
    assert!(v["timing"]["total_secs"].is_number());

    assert_eq!(
        code(&rotpack(&[
            "verify",
            path_str(&sol),
            "--instance",
            path_str(&inst)
        ])),
        0
    );
}

#[test]
fn batch_needs_repeat_flag_for_small_spaces() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, "set2-10");
    assert_eq!(
        code(&rotpack(&["batch", path_str(&inst), "--runs", "100"])),
        2
    );
    let out = rotpack(&["batch", path_str(&inst), "--runs", "100", "--allow-repeats"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn verify_flags_tampered_solution() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, "set2-15");
    let out = rotpack(&["solve", path_str(&inst)]);
    let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = v["placements"].as_array_mut().unwrap();
    let (x, y) = (p[0]["x"].clone(), p[0]["y"].clone());
    p[1]["x"] = x;
    p[1]["y"] = y;
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let out = rotpack(&["verify", path_str(&tampered), "--instance", path_str(&inst)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap"));
}

#[test]
fn unknown_version_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, "set1-7");
    let text = std::fs::read_to_string(&inst)
        .unwrap()
        .replace("\"version\": 1", "\"version\": 7");
    std::fs::write(&inst, text).unwrap();
    let out = rotpack(&["solve", path_str(&inst)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version 7"));
}

#[test]
fn invalid_instance_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, "set1-7");
    let text = std::fs::read_to_string(&inst)
        .unwrap()
        .replacen("\"id\": 2", "\"id\": 1", 1);
    std::fs::write(&inst, text).unwrap();
    assert_eq!(code(&rotpack(&["solve", path_str(&inst)])), 1);
    assert_eq!(code(&rotpack(&["solve", "/nonexistent/x.json"])), 2);
}

#[test]
fn render_with_border_overlay() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, "set2-45");
    let sol = dir.path().join("s.json");
    assert_eq!(
        code(&rotpack(&["solve", path_str(&inst), "-o", path_str(&sol)])),
        0
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let t = v["border"].as_array().unwrap().len();
    let out = rotpack(&[
        "render",
        path_str(&sol),
        "--instance",
        path_str(&inst),
        "--border",
    ]);
    assert_eq!(code(&out), 0);
    let svg = String::from_utf8(out.stdout).unwrap();
    assert_eq!(svg.matches("<circle").count(), 46);
    assert_eq!(svg.matches("<line").count(), t);
}
