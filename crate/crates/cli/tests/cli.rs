use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    root.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key} = "))).unwrap_or_else(|| panic!("no `{key}` in\n{text}")).parse().unwrap()
}

#[test]
fn validate_reports_pfaffian() {
    let o = run(&["--config", &config("sq1.json"), "validate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("pfaffian_abs = 1\n"));
    assert!(text.contains("valid = true"));
    let o = run(&["--config", &config("d2.json"), "validate"]);
    assert!(stdout(&o).contains("pfaffian_abs = 2\n"));
}

#[test]
fn density_vanishes_at_half_period() {
    let o = run(&["--config", &config("sq1.json"), "--k", "1", "--point", "0.5,0.5", "--eps", "1e-10", "rho"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (rho, tail) = (field(&text, "rho"), field(&text, "tail"));
    assert!(rho.abs() <= tail);
    assert!(tail <= 1e-10);
}

#[test]
fn density_at_origin() {
    let o = run(&["--config", &config("sq1.json"), "--point", "0,0", "rho"]);
    let two_pi_rho = field(&stdout(&o), "two_pi_rho");
    assert!((two_pi_rho - 1.669_253_683_348_146_8).abs() < 1e-10);
}

#[test]
fn missing_hermitian_form_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n":1,"basis":[[1,0],[0,1]]}"#).unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("ConfigParseError"));
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let o = run(&["--config", "/nonexistent/torus.json", "validate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_with_one() {
    let o = run(&["validate", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn grid_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(&["--config", &config("skew.json"), "--res", "12", "--threads", threads, "--out", path.to_str().unwrap(), "grid"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("coord_1,coord_2,rho,tail\n"));
    let again = run(&["--config", &config("skew.json"), "--res", "12", "grid"]);
    assert_eq!(again.stdout, b);
}

#[test]
fn cylinder_table() {
    let o = run(&["cylinder", "--eta", "1.5", "--alpha", "0.25", "--k", "3", "--steps", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,rho_direct,rho_poisson,absdiff"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!(r[3] <= 1e-11 * r[1]);
    }
}

#[test]
fn localization_table() {
    let o = run(&["--config", &config("sq1.json"), "extrema", "--k-range", "2..4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,dist,bound,ratio"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn holonomy_methods_agree() {
    let o = run(&["--config", &config("skew.json"), "--point", "0.3,0.7", "hol", "--vector", "1,1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("closed = ")));
    assert!(field(&text, "absdiff") < 1e-8);
    let alpha = field(&text, "alpha");
    assert!((0.0..1.0).contains(&alpha));
}

#[test]
fn offdiag_respects_bound() {
    let o = run(&["--config", &config("sq1.json"), "--point", "0,0", "offdiag", "--point2", "0.5,0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let bound = field(&text, "bound");
    assert!((2.0 * std::f64::consts::PI * bound - 1.985_088_356_982_114).abs() < 1e-10);
}
