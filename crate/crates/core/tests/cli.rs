use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mimo_wiretap::experiments::{read_csv, CSV_HEADER};

fn wiretap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wiretap"))
        .args(args)
        .env_remove("WIRETAP_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("missing {key} in {text}"))
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["sweep", "--help"]] {
        let o = wiretap(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(!o.stdout.is_empty());
    }
    let help = stdout(&wiretap(&["sweep", "--help"]));
    assert!(help.contains("[default: 0:2:20]"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["sweep", "--bogus"][..],
        &["design", "--ne", "6"],
        &["sweep", "--pj-grid", "10:2:0"],
        &["design", "--rate-bits", "4,8"],
        &["eval", "--trials", "0"],
        &[],
    ] {
        let o = wiretap(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn design_reports_a_feasible_link() {
    let o = wiretap(&["design", "--rate-bits", "4", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "outage"), "false");
    let bob: f64 = field(&text, "bob_rate_bits").parse().unwrap();
    assert!((bob - 4.0).abs() < 1e-6);
    let rho: f64 = field(&text, "rho").parse().unwrap();
    assert!((0.0..=1.0).contains(&rho));
}

#[test]
fn unreachable_target_exits_with_outage_code() {
    let o = wiretap(&["design", "--rate-bits", "60"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(field(&stdout(&o), "outage"), "true");
    let o = wiretap(&["eval", "--rate-bits", "60"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(field(&stdout(&o), "secrecy_rate_bits"), "0.000000");
}

#[test]
fn eval_is_reproducible_and_seed_sensitive() {
    let args = ["eval", "--strategy", "statistical", "--n-sim", "20", "--seed", "9", "--trial", "4"];
    let a = wiretap(&args);
    let b = wiretap(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = wiretap(&["eval", "--strategy", "statistical", "--n-sim", "20", "--seed", "10", "--trial", "4"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn seed_can_come_from_the_environment() {
    let flag = wiretap(&["eval", "--seed", "77"]);
    let env = Command::new(env!("CARGO_BIN_EXE_wiretap"))
        .args(["eval"])
        .env("WIRETAP_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn sweep_writes_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = wiretap(&[
        "sweep",
        "--strategy",
        "unknown,statistical",
        "--rate-bits",
        "4",
        "--n-sim",
        "5",
        "--trials",
        "20",
        "--pj-grid",
        "0,10,20",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), out.to_str().unwrap());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].strategy, "statistical_ecsi");
    assert_eq!(rows[3].strategy, "unknown_ecsi");
    assert!(rows.iter().all(|r| r.n_trials == 20 && r.seed == 5));
    assert_eq!(rows.iter().map(|r| r.pj_db).collect::<Vec<_>>(), [0.0, 10.0, 20.0, 0.0, 10.0, 20.0]);
}

#[test]
fn sweep_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_file.csv");
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "[system]\nna = 5\nnb = 3\nne = 2\nnj = 2\np_db = 8.0\n\n[run]\npj_grid = \"0:10:20\"\nrate_bits = [2.0]\ntrials = 10\nseed = 42\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = wiretap(&["sweep", "--config", config.to_str().unwrap(), "--trials", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.n_trials == 12 && r.seed == 42 && r.target_rate_bits == 2.0));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[system]\nantennas = 4\n").unwrap();
    let o = wiretap(&["design", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_fails_without_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_dir").join("out.csv");
    let o = wiretap(&["sweep", "--trials", "2", "--pj-grid", "0", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert!(!Path::new(&missing).exists());
}
