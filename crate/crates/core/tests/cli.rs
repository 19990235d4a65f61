use std::path::Path;
use std::process::{Command, Output};

fn uav_ee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uav-ee")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_presets() {
    for name in ["fig2", "fig3_4", "fig6_7"] {
        let out = uav_ee(&["validate", "--preset", name]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        assert!(out.stdout.is_empty());
        assert!(stderr(&out).contains("ok"));
    }
}

#[test]
fn unknown_preset_fails_with_message() {
    let out = uav_ee(&["validate", "--preset", "fig9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));
}

#[test]
fn missing_source_fails() {
    let out = uav_ee(&["validate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "preset = \"fig2\"\n[bs]\narray_size = 0\n").unwrap();
    let out = uav_ee(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bs.array_size"), "{}", stderr(&out));
}

fn run_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--preset",
        "fig3_4",
        "--out",
        out.to_str().unwrap(),
        "--seeds",
        "1",
        "--seed",
        "5",
    ];
    args.extend_from_slice(extra);
    uav_ee(&args)
}

#[test]
fn run_writes_csv_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.csv");
    let out = run_small(&out_path, &["--schemes", "sdma", "--workers", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("scenario_id,scheme,seed,sweep_kind,sweep_value,ee_1,ee_2,ee_sum"));
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 13);
    assert!(body.iter().all(|l| l.starts_with("fig3_4,sdma,5,uav2_altitude,")));
}

#[test]
fn unknown_scheme_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(&dir.path().join("x.csv"), &["--schemes", "tdma"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn unwritable_output_fails() {
    let out = run_small(Path::new("/nonexistent-dir/out.csv"), &["--schemes", "sdma"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/nonexistent-dir/out.csv"), "{}", stderr(&out));
}
