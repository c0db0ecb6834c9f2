use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oscprop_cli::config::{parse, Severity};
use oscprop_cli::run::Results;
use oscprop_cli::{Mode, Report};

const FREE: &str = "
[oscillator]
t0 = 0.0
t = 1.0
k = 0.0
x0 = 0.0
x = 0.0
";

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.toml"), config).unwrap();
        Run { dir }
    }

    fn config(&self) -> PathBuf {
        self.dir.path().join("c.toml")
    }

    fn exec(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_oscprop"))
            .args(&args[..1])
            .arg("--config")
            .arg(self.config())
            .args(&args[1..])
            .output()
            .unwrap()
    }

    fn json(&self, mode: &str) -> Report {
        let out = self.exec(&[mode, "--format", "json"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn kernel_row_for_the_free_propagator() {
    let run = Run::new(FREE);
    let out = run.exec(&["kernel"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,t,re,im,modulus,phase"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[2] - 0.282_094_8).abs() < 1e-7);
    assert!((row[3] + 0.282_094_8).abs() < 1e-7);
    assert_eq!(lines.next(), None);
}

#[test]
fn csv_numbers_have_seventeen_digits() {
    let run = Run::new(&format!("{FREE}\n[grids]\nx = {{ from = -1.0, to = 1.0, points = 3 }}\n"));
    let text = String::from_utf8(run.exec(&["kernel"]).stdout).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let (mantissa, exp) = cell.split_once('e').expect("scientific notation");
            let digits = mantissa.trim_start_matches('-').replace('.', "");
            assert_eq!(digits.len(), 17, "{cell}");
            exp.parse::<i32>().unwrap();
            assert_eq!(cell.parse::<f64>().unwrap().to_string().parse::<f64>().unwrap(), cell.parse::<f64>().unwrap());
        }
    }
}

#[test]
fn series_without_measure_has_one_term() {
    let run = Run::new(FREE);
    let report = run.json("series");
    let Results::Series(s) = report.results else { panic!("not a series result") };
    assert_eq!(s.points.len(), 1);
    assert_eq!(s.points[0].series.terms.len(), 1);
    assert_eq!(s.points[0].series.certified_error, 0.0);
}

#[test]
fn frequency_out_of_range_is_a_validation_failure() {
    let run = Run::new("[oscillator]\nt0 = 0.0\nt = 1.0\nk = 2.0\nx0 = 0.0\nx = 0.0\n");
    let out = run.exec(&["kernel"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FrequencyOutOfRange: k|Δ| = 2 ≥ π/2"), "{}", stderr(&out));
    assert!(stderr(&out).contains("oscillator.k"));
}

#[test]
fn temporal_atoms_are_rejected_by_the_schema() {
    let run = Run::new(&format!(
        "{FREE}\n[[measure.components]]\ncoefficient = 1.0\nspatial = {{ atom = 0.0 }}\ntemporal = {{ atom = 0.5 }}\n"
    ));
    let out = run.exec(&["series"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("ConfigError") && err.contains("line"), "{err}");
}

#[test]
fn unknown_keys_and_bad_grids_name_their_field() {
    let run = Run::new(&format!("{FREE}\n[tolerances]\ntoll = 1e-9\n"));
    let out = run.exec(&["series"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("toll"), "{}", stderr(&out));

    let run = Run::new(&format!("{FREE}\n[grids]\nt = [0.5, -1.0]\n"));
    let out = run.exec(&["kernel"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("grids.t[1]"), "{}", stderr(&out));
}

#[test]
fn valid_config_has_no_diagnostics() {
    let cfg = parse(FREE).unwrap();
    for mode in [Mode::Kernel, Mode::Series, Mode::Bounds, Mode::Verify] {
        assert!(cfg.validate(mode).is_empty(), "{mode:?}");
    }
    let bad = parse("[oscillator]\nt0 = 1.0\nt = 1.0\nx0 = 0.0\nx = 0.0\n").unwrap();
    let d = bad.validate(Mode::Kernel);
    assert_eq!(d.len(), 1);
    assert_eq!((d[0].severity, d[0].code.as_str(), d[0].field.as_str()), (Severity::Error, "InvalidWindow", "oscillator.t"));
}

#[test]
fn pins_are_checked_and_spatial_order_is_flagged() {
    let base = "[oscillator]\nt0 = 0.0\nt = 1.0\nk = 0.5\nx0 = 0.0\nx = 1.0\n";
    let cfg = parse(&format!("{base}[bounds]\npins = [[0.6, 0.5], [0.3, 0.5]]\n")).unwrap();
    assert_eq!(cfg.validate(Mode::Bounds)[0].field, "bounds.pins");
    let cfg = parse(&format!("{base}[bounds]\npins = [[0.3, 2.0]]\n")).unwrap();
    let d = cfg.validate(Mode::Bounds);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].severity, Severity::Warning);
}

#[test]
fn mode_must_match_the_command() {
    let run = Run::new(&format!("mode = \"series\"\n{FREE}"));
    let out = run.exec(&["kernel"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ModeMismatch"));
}

#[test]
fn unreachable_tolerance_is_a_numeric_failure() {
    let run = Run::new(
        "[oscillator]\nt0 = 0.0\nt = 0.5\nk = 1.0\nx0 = 0.3\nx = 0.3\n\
         [[measure.components]]\ncoefficient = 0.2\nspatial = { atom = 0.0 }\n\
         temporal = { breakpoints = [0.0, 0.5], values = [1.0] }\n\
         [tolerances]\ntol = 1e-30\nmax_order = 3\n",
    );
    let out = run.exec(&["series"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("MaxOrderExceeded"));
}

fn round_trip(run: &Run, mode: &str) {
    let out = run.exec(&[mode, "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 5);
    for k in ["mode", "config_echo", "results", "diagnostics", "versions"] {
        assert!(keys.contains(&k), "{k}");
    }
    let report: Report = serde_json::from_value(value.clone()).unwrap();
    assert_eq!(report.mode.name(), mode);
    assert!(report.config_echo.validate(report.mode).iter().all(|d| !d.is_error()));
    assert_eq!(serde_json::to_value(&report).unwrap(), value);
}

#[test]
fn json_reports_round_trip() {
    let run = Run::new(
        "seed = 3\n[oscillator]\nt0 = 0.0\nt = 0.5\nk = 1.0\nx0 = 0.3\nx = 0.3\n\
         [[measure.components]]\ncoefficient = 0.2\nspatial = { atom = 0.0 }\n\
         temporal = { breakpoints = [0.0, 0.5], values = [1.0] }\n\
         [bounds]\nsamples = 5\n",
    );
    for mode in ["kernel", "series", "bounds"] {
        round_trip(&run, mode);
    }
}

#[test]
fn out_flag_writes_a_file_and_seed_is_echoed() {
    let run = Run::new(&format!("{FREE}\n[bounds]\nsamples = 3\n"));
    let path = run.dir.path().join("o.json");
    let out = run.exec(&["bounds", "--format", "json", "--seed", "11", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.config_echo.seed, Some(11));
    let Results::Bounds(b) = report.results else { panic!("not a bounds result") };
    assert_eq!(b.growth_samples.len(), 3);
    assert_eq!(b.violations, 0);
}

#[test]
fn verify_with_default_seed_passes() {
    let run = Run::new("");
    let report = run.json("verify");
    let Results::Verify(v) = report.results else { panic!("not a verify result") };
    assert_eq!(v.seed, 20_240_601);
    for s in &v.suites {
        assert!(s.passed && s.max_defect < s.threshold, "{s:?}");
    }
    assert!(v.all_passed);
}

#[test]
fn missing_config_is_a_validation_failure() {
    let out = Command::new(env!("CARGO_BIN_EXE_oscprop"))
        .args(["kernel", "--config"])
        .arg(Path::new("/nonexistent/c.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_oscprop")).arg("nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
