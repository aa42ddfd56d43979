//! End-to-end runs of the `vacdrag` binary.

use std::path::Path;
use std::process::{Command, Output};

const SLABS: &str = r#""bodies":[{"type":"slab","n":14,"h":1.0,"v":-0.1},{"type":"slab","n":14,"h":1.0,"v":0.1}],"gap":1.0"#;
const SHEETS: &str = r#""bodies":[{"type":"sheet","omega_sp":1.0,"v":-0.1},{"type":"sheet","omega_sp":1.0,"v":0.1}],"gap":0.5"#;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, format!("{{{body}}}")).unwrap();
    path
}

fn vacdrag(config: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vacdrag"));
    cmd.arg(config).args(args).env_remove("VACDRAG_THREADS");
    if let Some(t) = threads {
        cmd.env("VACDRAG_THREADS", t);
    }
    cmd.output().unwrap()
}

fn run_ok(body: &str, args: &[&str]) -> String {
    let dir = tempfile::tempdir().unwrap();
    let out = vacdrag(&write_config(dir.path(), body), args, None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows as fields, skipping the header.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    (
        cols,
        lines
            .map(|l| l.split(',').map(String::from).collect())
            .collect(),
    )
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let (cols, data) = rows(csv);
    let i = cols.iter().position(|c| c == name).unwrap();
    data.into_iter().map(|r| r[i].clone()).collect()
}

fn error_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("not JSON: {text}"))
}

#[test]
fn modes_csv_has_metadata_and_branches() {
    let csv = run_ok(
        &format!(
            r#"{SLABS},"command":"modes","pol":["p"],"k_grid":{{"start":0.5,"stop":2.0,"steps":4}}"#
        ),
        &[],
    );
    for key in [
        "# config_sha256: ",
        "# force_convention: ",
        "# h_s_meters: 1e-6",
        "# command: modes",
    ] {
        assert!(csv.contains(key), "{key}");
    }
    let (cols, data) = rows(&csv);
    assert_eq!(
        cols,
        ["body", "pol", "branch", "k", "omega_co", "n_ph", "residue", "v_g_co"]
    );
    assert!(data.len() >= 4);
    for r in &data {
        let (k, w, n): (f64, f64, f64) = (
            r[3].parse().unwrap(),
            r[4].parse().unwrap(),
            r[5].parse().unwrap(),
        );
        assert_eq!(k / w, n);
    }
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
}

#[test]
fn output_override_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(r#"{SLABS},"command":"modes","pol":["s"],"output":"ignored.csv""#),
    );
    let target = dir.path().join("out.csv");
    let out = vacdrag(&cfg, &["--output", target.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(target)
        .unwrap()
        .contains("body,pol,branch"));
}

#[test]
fn sweep_without_steps_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(r#"{SLABS},"command":"force-sweep","sweep":{{"start":0.8,"stop":2.0}}"#),
    );
    let out = vacdrag(&cfg, &[], None);
    assert_eq!(out.status.code(), Some(2));
    let e = error_record(&out);
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["path"], "sweep.steps");
}

#[test]
fn modes_on_sheets_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{SHEETS},"command":"pendry""#));
    let out = vacdrag(&cfg, &["--command", "modes"], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        error_record(&out)["error"]["message"],
        "modes requires slab media"
    );
}

#[test]
fn missing_file_is_reported() {
    let out = vacdrag(Path::new("/nonexistent/config.json"), &[], None);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"]["kind"], "io");
}

#[test]
fn solver_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{SLABS},"command":"evolve","pol":["s"],"times":{{"start":0,"stop":1e7,"steps":2}}"#
        ),
    );
    let out = vacdrag(&cfg, &[], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["error"]["kind"], "saturation");
}

#[test]
fn sweep_below_threshold_is_all_zero() {
    let csv = run_ok(
        &format!(
            r#"{SLABS},"command":"force-sweep","pol":["s","p"],"sweep":{{"start":0.5,"stop":0.95,"steps":4}}"#
        ),
        &[],
    );
    let f = column(&csv, "force");
    assert_eq!(f.len(), 4 * 2 * 4);
    assert!(f.iter().all(|x| x == "0.0"), "{f:?}");
}

#[test]
fn evolve_starts_at_zero() {
    let csv = run_ok(&format!(r#"{SLABS},"command":"evolve","pol":["s"]"#), &[]);
    let t = column(&csv, "t");
    let f = column(&csv, "force");
    assert_eq!((t[0].as_str(), f[0].as_str()), ("0.0", "0.0"));
    let f: Vec<f64> = f.iter().map(|x| x.parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn hybrid_rate_peaks_at_the_selection_point() {
    let csv = run_ok(
        &format!(
            r#"{SLABS},"command":"hybrid","pol":["p"],"k_grid":{{"start":1.4,"stop":1.8,"steps":201}}"#
        ),
        &[],
    );
    let kx: Vec<f64> = column(&csv, "kx")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    let lambda: Vec<f64> = column(&csv, "lambda")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    let (i, top) = lambda.iter().enumerate().fold(
        (0, 0.0),
        |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc },
    );
    assert!(top > 0.0);
    assert!((kx[i] / 1.598 - 1.0).abs() < 0.01, "{}", kx[i]);
    assert_eq!(lambda[0], 0.0);
    assert_eq!(*lambda.last().unwrap(), 0.0);
}

#[test]
fn output_is_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{SLABS},"command":"force-sweep","pol":["s"],"methods":["mode_sum","weak_coupling"],"sweep":{{"start":1.1,"stop":1.3,"steps":2}}"#
        ),
    );
    let a = vacdrag(&cfg, &["--threads", "1"], None);
    let b = vacdrag(&cfg, &[], Some("3"));
    let c = vacdrag(&cfg, &[], None);
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let csv = String::from_utf8(a.stdout).unwrap();
    for x in column(&csv, "force") {
        let v: f64 = x.parse().unwrap();
        assert_eq!(vacdrag_cli::output::format_float(v), x);
    }
}

#[test]
fn pendry_on_sheets_reports_closed_form() {
    let csv = run_ok(&format!(r#"{SHEETS},"command":"pendry","pol":["p"]"#), &[]);
    let c16: f64 = column(&csv, "pendry_c16")[0].parse().unwrap();
    let closed: f64 = column(&csv, "closed_form")[0].parse().unwrap();
    assert!((c16 - closed).abs() < 1e-8 * closed);
    assert_eq!(column(&csv, "x")[0], "0.2");
}
