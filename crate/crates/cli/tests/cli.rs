use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "N = 2\nnoise_level = 0.01\nnoise_truncation = false\nn_eval = 60\n";

fn phaseless(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaseless"))
        .current_dir(dir)
        .env_remove("PHASELESS_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    dir
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn summary_error(path: &Path) -> f64 {
    let text = std::fs::read_to_string(path).unwrap();
    let row = text.lines().nth(1).unwrap();
    row.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn staged_run_matches_pipeline() {
    let dir = setup();
    let d = dir.path();
    ok(&phaseless(d, &["--config", "small.toml", "--out", "sim", "simulate"]));
    assert!(d.join("sim/wavenumbers.csv").exists());
    assert!(d.join("sim/phaseless_k000.csv").exists());
    ok(&phaseless(d, &["--config", "small.toml", "--out", "ret", "retrieve", "--input", "sim"]));
    assert!(d.join("ret/diagnostics.csv").exists());
    ok(&phaseless(
        d,
        &["--config", "small.toml", "--out", "rec", "reconstruct", "--input", "ret", "--compare"],
    ));
    ok(&phaseless(d, &["--config", "small.toml", "--out", "pipe", "pipeline"]));

    let staged = std::fs::read(d.join("rec/coefficients.csv")).unwrap();
    let piped = std::fs::read(d.join("pipe/coefficients.csv")).unwrap();
    assert_eq!(staged, piped);
    let e = summary_error(&d.join("rec/summary.csv"));
    assert!(e > 0.0 && e < 1.0, "{e}");
}

#[test]
fn pipeline_output_is_deterministic() {
    let dir = setup();
    let d = dir.path();
    ok(&phaseless(d, &["--config", "small.toml", "--out", "a", "pipeline"]));
    ok(&phaseless(d, &["--config", "small.toml", "--out", "b", "pipeline"]));
    let mut names: Vec<_> = std::fs::read_dir(d.join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 5);
    for name in names {
        let a = std::fs::read(d.join("a").join(&name)).unwrap();
        let b = std::fs::read(d.join("b").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}

#[test]
fn seed_changes_the_data() {
    let dir = setup();
    let d = dir.path();
    ok(&phaseless(d, &["--config", "small.toml", "--out", "a", "--seed", "1", "pipeline"]));
    ok(&phaseless(d, &["--config", "small.toml", "--out", "b", "--seed", "2", "pipeline"]));
    let a = std::fs::read(d.join("a/coefficients.csv")).unwrap();
    let b = std::fs::read(d.join("b/coefficients.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn percent_noise_equals_fraction() {
    let dir = setup();
    let d = dir.path();
    ok(&phaseless(d, &["--config", "small.toml", "--out", "p", "--noise", "2%", "pipeline"]));
    ok(&phaseless(d, &["--config", "small.toml", "--out", "f", "--noise", "0.02", "pipeline"]));
    let p = std::fs::read(d.join("p/coefficients.csv")).unwrap();
    let f = std::fs::read(d.join("f/coefficients.csv")).unwrap();
    assert_eq!(p, f);
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "tau = 3.0\n").unwrap();
    let out = phaseless(d, &["--config", "bad.toml", "pipeline"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(d.join("typo.toml"), "nosie_level = 0.01\n").unwrap();
    let out = phaseless(d, &["--config", "typo.toml", "pipeline"]);
    assert_eq!(out.status.code(), Some(2));

    let out = phaseless(d, &["--config", "small.toml", "--noise", "150%", "pipeline"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_an_error() {
    let dir = setup();
    let out = phaseless(dir.path(), &["--config", "small.toml", "retrieve", "--input", "nowhere"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}

#[test]
fn grid_source_round_trips() {
    let dir = setup();
    let d = dir.path();
    let n = 64;
    let a = 0.3;
    let h = 2.0 * a / n as f64;
    let mut text = format!("a {a:e}\nn {n}\ndtype real\n");
    for row in 0..n {
        let x2 = -a + (row as f64 + 0.5) * h;
        for col in 0..n {
            let x1 = -a + (col as f64 + 0.5) * h;
            text.push_str(&format!("{:e}\n", (-20.0 * (x1 * x1 + x2 * x2)).exp()));
        }
    }
    std::fs::write(d.join("bump.grid"), text).unwrap();
    let out = phaseless(
        d,
        &["--config", "small.toml", "--noise", "0", "--source", "bump.grid", "--out", "g", "pipeline"],
    );
    ok(&out);
    let e = summary_error(&d.join("g/summary.csv"));
    // smooth source, N = 2, exact data: truncation error only
    assert!(e < 0.1, "{e}");
}
