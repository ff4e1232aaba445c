use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phase-qubit"));
    c.env_remove("PHASEQUBIT_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn error_record(o: &Output) -> serde_json::Value {
    let line = stderr(o).lines().last().unwrap_or_default().to_string();
    serde_json::from_str(&line).unwrap_or_else(|_| panic!("not a JSON record: {line}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn presets_are_listed() {
    let o = run(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["fig2-bloch", "fig3-rabi", "fig4-deviation"] {
        assert!(text.contains(name));
    }
    let o = run(&["presets", "--show", "fig2-bloch"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("rabi0 = "));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    for args in [
        &["simulate", "--preset", "fig3-rabi"][..],
        &["simulate", "--preset", "fig2-bloch", "--format", "json"][..],
        &["simulate", "--preset", "fig3-rabi", "--fit-data", "--noise", "0.01", "--seed", "5"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success(), "{}", stderr(&a));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stderr, b.stderr);
    }
}

#[test]
fn summary_reports_deviation_for_undriven_preset() {
    let o = run(&["simulate", "--preset", "fig4-deviation"]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    let f = summary["max_abs_f"].as_f64().unwrap();
    assert!(f > 1e-4 && f < 1e-2, "{f}");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["simulate", "--preset", "fig2-bloch"])
        .env("PHASEQUBIT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let csv = fs::read_to_string(dir.path().join("fig2-bloch.csv")).unwrap();
    assert!(csv.starts_with("t_ns,rho11,rho00,p_esc,n0,nx,ny,nz\n"));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = run(&["simulate", "--params", "/nonexistent/params.txt", "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_record(&o)["error"]["kind"], "io");
}

#[test]
fn malformed_parameter_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.txt", "omega10 = 5 GHz\ngamma1 = 0.1\ngamma0 = 0.1 GHz\n");
    let o = run(&["simulate", "--params", &p, "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(4));
    let msg = error_record(&o)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn malformed_data_row_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = write(dir.path(), "d.csv", "# time_unit = us\nt,p\n0,0.1\n0.5,0.2\n1.0,zz\n");
    let o = run(&["fit", "--data", &d, "--gamma", "0.204 us^-1", "--gamma0", "0"]);
    assert_eq!(o.status.code(), Some(4));
    let rec = error_record(&o);
    assert_eq!(rec["error"]["kind"], "data");
    assert!(rec["error"]["message"].as_str().unwrap().starts_with("line 5:"));
}

#[test]
fn bad_flags_are_parse_errors() {
    assert_eq!(run(&["simulate", "--preset", "fig2-bloch", "--initial", "1,0,1,0"]).status.code(), Some(4));
    assert_eq!(run(&["simulate", "--preset", "nope"]).status.code(), Some(4));
    assert_eq!(run(&["simulate", "--preset", "fig2-bloch", "--grid", "3:1:10"]).status.code(), Some(4));
    assert_eq!(run(&["simulate"]).status.code(), Some(4));
}

#[test]
fn overflow_is_a_model_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.txt", "omega10 = 1\ngamma1 = 40\ngamma0 = 0\n");
    let o = run(&["simulate", "--params", &p, "--grid", "0:100:11", "--mode", "zero-drive"]);
    assert_eq!(o.status.code(), Some(6), "{}", stderr(&o));
    assert_eq!(error_record(&o)["error"]["kind"], "model");
}

#[test]
fn unfittable_data_is_a_fit_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("t,p\n");
    for k in 0..50 {
        text.push_str(&format!("{},{}\n", k * 200, 0.1 * ((k % 7) as f64) / 7.0));
    }
    let d = write(dir.path(), "d.csv", &text);
    // decay so fast that every model evaluation overflows
    let o = run(&["fit", "--data", &d, "--gamma", "1000", "--gamma0", "0"]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    let rec = error_record(&o);
    assert_eq!(rec["error"]["kind"], "fit");
    assert!(!rec["error"]["seeds"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("rabi.csv");
    let o = run(&[
        "simulate",
        "--preset",
        "fig3-rabi",
        "--initial",
        "0,0,1,0",
        "--grid",
        "0:10:200",
        "--grid-unit",
        "us",
        "--fit-data",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["fit", "--data", data.to_str().unwrap(), "--gamma", "0.204 us^-1", "--gamma0", "0.4e-3 us^-1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["converged"], true);
    let get = |name: &str| {
        report["params"]
            .as_array()
            .unwrap()
            .iter()
            .find(|p| p["name"] == name)
            .unwrap()["display_value"]
            .as_f64()
            .unwrap()
    };
    assert!((get("rabi0") / 0.47 - 1.0).abs() < 1e-6);
    assert!((get("detuning") / 1.34 - 1.0).abs() < 1e-6);
}

#[test]
fn compare_reports_agreement() {
    let o = run(&["compare", "--preset", "fig4-deviation"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["rwa_vs_numeric"].as_f64().unwrap() < 1e-9);
    // the closed-form coefficients are exact at the physical cross rate
    assert!(r["zero_drive_vs_closed_form"].as_f64().unwrap() < 1e-12);
    assert!(r["lab_frame_vs_rwa_rho11"].is_null());
}
