use std::path::PathBuf;
use std::process::{Command, Output};

fn cavcool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavcool"))
        .args(args)
        .env("CAVCOOL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"));
    line[key.len()..].trim().parse().unwrap()
}

fn temp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cavcool-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn rates_at_the_working_point_cool_to_the_ground_state() {
    let o = cavcool(&["--delta", "opt", "rates"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(field(&text, "n_st") < 0.05);
    assert!(text.contains("small kappa, any Omega"));
}

#[test]
fn no_drive_is_reported() {
    let o = cavcool(&["--omega", "0", "rates"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(field(&text, "A+"), 0.0);
    assert_eq!(field(&text, "A-"), 0.0);
    assert_eq!(field(&text, "D"), 0.0);
    assert!(text.contains("no drive"));
}

#[test]
fn exact_pole_is_a_readable_diagnostic() {
    let o = cavcool(&[
        "--delta_c",
        "-1",
        "--kappa",
        "0",
        "--gamma",
        "0",
        "--delta",
        "-49",
        "rates",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("dressed-state pole"));
    assert!(err.contains("\"code\":\"pole-at-resonance\""));
}

#[test]
fn config_errors_carry_line_numbers() {
    let path = temp("bad.cfg");
    std::fs::write(&path, "gamma = 10\n\nkapa = 0.1\n").unwrap();
    let o = cavcool(&["--config", path.to_str().unwrap(), "rates"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":3: unknown key `kapa`"));
}

#[test]
fn flags_override_the_file() {
    let path = temp("good.cfg");
    std::fs::write(&path, "kappa = 0.5\ndelta = opt\n").unwrap();
    let from_file = stdout(&cavcool(&["--config", path.to_str().unwrap(), "rates"]));
    let flagged = stdout(&cavcool(&[
        "--config",
        path.to_str().unwrap(),
        "--kappa",
        "0.05",
        "rates",
    ]));
    let direct = stdout(&cavcool(&["--kappa", "0.05", "--delta", "opt", "rates"]));
    assert_ne!(from_file, flagged);
    assert_eq!(flagged, direct);
}

#[test]
fn unknown_command_is_a_usage_error() {
    assert_eq!(cavcool(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        cavcool(&["validate", "--only", "12"]).status.code(),
        Some(2)
    );
}

#[test]
fn scan_is_deterministic_and_reparses() {
    let args = ["scan", "--axis1", "delta_c:-2:1.5:15", "--along-opt"];
    let a = cavcool(&args);
    let b = cavcool(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = stdout(&a);
    let base = cavcool::scan::parse_metadata(&csv).unwrap();
    assert_eq!(base, cavcool::config::ParamFile::default());
    assert!(csv.contains("divergent-optimum"));
}

#[test]
fn scan_writes_companions() {
    let (curve, matrix) = (temp("opt.csv"), temp("m.dat"));
    let o = cavcool(&[
        "scan",
        "--axis1",
        "delta:-20:20:5",
        "--axis2",
        "delta_c:-2:2:4",
        "--opt-curve",
        curve.to_str().unwrap(),
        "--matrix",
        matrix.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&matrix).unwrap().lines().count(), 6);
    assert!(std::fs::read_to_string(&curve)
        .unwrap()
        .starts_with("# params_hash"));
}

#[test]
fn spectrum_has_markers() {
    let o = cavcool(&[
        "--kappa", "0.01", "--delta", "2", "spectrum", "--from", "-10", "--to", "10", "--points",
        "41",
    ]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.contains("# marker resonance_plus"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 42);
}

#[test]
fn mcwf_is_byte_identical_for_a_fixed_seed() {
    let (a, b) = (temp("a.csv"), temp("b.csv"));
    let (ra, rb) = (temp("a.bin"), temp("b.bin"));
    for (out, rec) in [(&a, &ra), (&b, &rb)] {
        let o = cavcool(&[
            "--delta",
            "opt",
            "--g",
            "10",
            "--kappa",
            "0.1",
            "mcwf",
            "--trajectories",
            "1",
            "--t-end",
            "50",
            "--n-motion",
            "8",
            "--out",
            out.to_str().unwrap(),
            "--records",
            rec.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(&ra).unwrap(), std::fs::read(&rb).unwrap());
    let (_, back) = cavcool::mcwf::read_records(&mut std::fs::File::open(&ra).unwrap()).unwrap();
    assert_eq!(back.len(), 1);
    let csv = std::fs::read_to_string(&a).unwrap();
    assert!(csv.lines().nth(8).unwrap().contains(",NaN,"));
}

#[test]
fn validate_quick_criteria() {
    let json = temp("verdicts.json");
    let o = cavcool(&[
        "validate",
        "--only",
        "1,4,8",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with("PASS")));
}

#[test]
fn failing_criterion_exits_with_one() {
    let o = cavcool(&["validate", "--only", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}
