use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shipped_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/dragonfly_hover.cfg")
}

fn ornithopter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ornithopter"))
        .args(args)
        .env("ORNITHOPTER_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

fn assert_headers_have_units(dir: &Path) {
    for f in csv_files(dir) {
        let text = fs::read_to_string(&f).unwrap();
        let header = text.lines().next().unwrap();
        for col in header.split(',') {
            let ok = col.ends_with(']') && col.contains(" [") && !col.starts_with(' ');
            assert!(ok, "{}: column {col:?} has no unit", f.display());
        }
    }
}

#[test]
fn missing_config_exits_1_and_names_the_path() {
    let o = ornithopter(&["simulate-reduced", "/definitely/not/here.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/definitely/not/here.cfg"), "{}", stderr(&o));
}

#[test]
fn malformed_config_and_bad_overrides_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    let text = fs::read_to_string(shipped_config()).unwrap().replace("[aero]", "[aero]\nwingspan = 3");
    fs::write(&cfg, text).unwrap();
    let o = ornithopter(&["simulate-reduced", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("wingspan"), "{}", stderr(&o));

    let o = ornithopter(&["simulate-reduced", s(&shipped_config()), "--out", s(dir.path()), "--dt", "-1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = ornithopter(&["simulate-reduced", s(&shipped_config()), "--dt", "fast"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ornithopter(&["simulate-sideways", s(&shipped_config())]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(ornithopter(&["--help"]).status.code(), Some(0));
}

#[test]
fn unstable_step_exits_2_with_the_failing_time() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        ornithopter(&["simulate-full", s(&shipped_config()), "--out", s(dir.path()), "--dt", "1", "--duration", "5"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("non-finite") && err.contains("t = "), "{err}");
    // nothing half-written is left behind
    assert!(csv_files(dir.path()).is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = shipped_config();
    for dir in [&a, &b] {
        let o =
            ornithopter(&["simulate-reduced", s(&cfg), "--out", s(dir.path()), "--duration", "0.004", "--seed", "9"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert_eq!(fa.len(), 1);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
    // manifests differ at most in the timestamp
    let strip = |d: &Path| {
        let mut m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
        m.as_object_mut().unwrap().remove("created_unix_s");
        m
    };
    assert_eq!(strip(a.path()), strip(b.path()));
    let m = strip(a.path());
    assert_eq!(m["seed"], 9);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["versions"]["ornithopter"].is_string());
}

#[test]
fn full_run_writes_strided_trajectory_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = ornithopter(&[
        "simulate-full",
        s(&shipped_config()),
        "--out",
        s(dir.path()),
        "--duration",
        "0.001",
        "--stride",
        "25",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // 100 steps, rows at 0, 25, .., 100
    for name in ["trajectory.csv", "diagnostics.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().count(), 1 + 5, "{name}");
    }
    let diag = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let last: Vec<f64> = diag.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[0] - 1e-3).abs() < 1e-15);
    assert!((last[3] - (last[1] + last[2])).abs() <= 1e-12 * last[3].abs());
    assert_headers_have_units(dir.path());
}

#[test]
fn decomposition_and_wing_loads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped_config();
    let o = ornithopter(&["decompose-forces", s(&cfg), "--out", s(dir.path()), "--duration", "0.002"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("decomposition.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| h.starts_with(name)).unwrap();
    let (fr, fc) = (col("force_residual"), col("F_c_norm"));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[fr] < 1e-8);
        assert!(v[fc] > 0.0);
    }

    let o = ornithopter(&["wing-forces", s(&cfg), "--out", s(dir.path()), "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stations = fs::read_to_string(dir.path().join("stations.csv")).unwrap();
    assert_eq!(stations.lines().count(), 1 + 3 * 4 * 300);
    let loads = fs::read_to_string(dir.path().join("loads.csv")).unwrap();
    assert_eq!(loads.lines().count(), 1 + 3 * 4);

    let o = ornithopter(&["wing-forces", s(&cfg), "--out", s(dir.path()), "--sweep-alpha"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let coeffs = fs::read_to_string(dir.path().join("coefficients.csv")).unwrap();
    assert_eq!(coeffs.lines().count(), 1 + 361);
    assert_headers_have_units(dir.path());
}

#[test]
fn optimized_parameters_can_be_simulated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    let text = fs::read_to_string(shipped_config())
        .unwrap()
        .replace("horizon_periods = 10.0", "horizon_periods = 0.5")
        .replace("dt = 1e-4", "dt = 5e-4");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("opt");
    let args = ["optimize-hover", s(&cfg), "--out", s(&out), "--generations", "2", "--population", "4"];
    let o = ornithopter(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let hist = fs::read_to_string(out.join("history.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 3);
    let best: Vec<f64> = hist.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(best.windows(2).all(|w| w[1] <= w[0]), "elitism keeps the best: {best:?}");
    assert!(fs::read_to_string(out.join("best.cfg")).unwrap().starts_with("# Best hover parameters"));

    let o = ornithopter(&["simulate-reduced", s(&out.join("best.cfg")), "--out", s(&out), "--duration", "0.001"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_headers_have_units(&out);
}

#[test]
fn quick_validation_passes_on_the_shipped_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = ornithopter(&["validate", s(&shipped_config()), "--out", s(dir.path()), "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.contains("PASS") && report.contains("0 failed"), "{report}");
    let csv = fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("equivalence,")));
    assert_headers_have_units(dir.path());
}
