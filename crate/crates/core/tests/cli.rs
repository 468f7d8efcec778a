use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stripeloc"))
}

fn stdout_of(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn bounds_prints_csv_with_fixed_header() {
    let (code, text) = stdout_of(&["bounds"]);
    assert_eq!(code, 0);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,series,value,units"));
    let series: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(series, ["ceb_cp", "ceb_ncp", "peb_cp", "peb_ncp"]);
}

#[test]
fn mode_restricts_series() {
    let (code, text) = stdout_of(&["bounds", "--mode", "cp"]);
    assert_eq!(code, 0);
    assert!(text.contains("peb_cp") && !text.contains("ncp"));
}

#[test]
fn empty_config_equals_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let (a_code, a) = stdout_of(&["bounds"]);
    let (b_code, b) = stdout_of(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!((a_code, b_code), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    let (code, text) = stdout_of(&["simulate", "--trials", "3", "--seed", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(text.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("x,series,value,units\n"));
    for label in ["ils", "cp", "ncp"] {
        assert!(written.contains(&format!("rmse_position_{label},")), "{label} missing");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(stdout_of(&["bounds", "--config", bad.to_str().unwrap()]).0, 1);
    assert_eq!(stdout_of(&["simulate", "--trials", "0"]).0, 1);
    assert_eq!(stdout_of(&["bounds", "--mode", "sideways"]).0, 1);
    let missing = dir.path().join("nope.toml");
    assert_eq!(stdout_of(&["bounds", "--config", missing.to_str().unwrap()]).0, 3);
    let unwritable = dir.path().join("no_dir").join("x.csv");
    assert_eq!(stdout_of(&["bounds", "--out", unwritable.to_str().unwrap()]).0, 3);
    assert_eq!(stdout_of(&["--help"]).0, 0);
}
