use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kdvinv_cli::CliError;
use serde_json::Value;

fn kdvinv(args: &[&str], config: Option<&str>) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kdvinv"));
    cmd.args(args);
    if let Some(text) = config {
        let path = dir.path().join("run.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(&path);
    }
    (cmd.output().unwrap(), dir)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn records(o: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn csv(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

const PARAMS: &str = "[params]\nalpha = 0.1\nbeta = 0.1\n";

fn soliton_profile(extra: &str) -> Vec<Vec<f64>> {
    let cfg = format!("{extra}\n{PARAMS}\n[solution]\nfamily = \"kdv_soliton\"\namplitude = 1.0\n\n[grid]\nn = 256\n");
    let (o, _d) = kdvinv(&["profile"], Some(&cfg));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,x,u\n"));
    csv(&text)
}

#[test]
fn profile_peak_is_the_amplitude() {
    let rows = soliton_profile("");
    let crest = rows.iter().find(|r| r[1] == 0.0).unwrap();
    assert_eq!(crest[2], 1.0);
    assert!(rows.iter().all(|r| r[2] <= 1.0));
}

#[test]
fn inverted_profile_is_negated() {
    let up = soliton_profile("");
    let down = soliton_profile("inverted = true");
    assert_eq!(up.len(), down.len());
    for (a, b) in up.iter().zip(&down) {
        assert_eq!(a[1], b[1]);
        assert_eq!(a[2], -b[2]);
    }
}

#[test]
fn two_soliton_has_two_peaks_before_and_after() {
    let cfg = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/profile_two_soliton.toml"))
        .unwrap();
    let (o, _d) = kdvinv(&["profile"], Some(&cfg));
    assert_eq!(code(&o), 0);
    let rows = csv(&String::from_utf8(o.stdout).unwrap());
    for t in [-40.0, 40.0] {
        let u: Vec<f64> = rows.iter().filter(|r| r[0] == t).map(|r| r[2]).collect();
        // local maxima above the noise floor, from sign changes of the slope
        let peaks = (1..u.len() - 1)
            .filter(|&j| u[j] > u[j - 1] && u[j] >= u[j + 1] && u[j] > 0.1)
            .count();
        assert_eq!(peaks, 2, "t = {t}");
    }
}

#[test]
fn catalog_sweep_passes() {
    let (o, _d) = kdvinv(&["verify"], Some("catalog = true\n"));
    assert_eq!(code(&o), 0);
    let r = records(&o);
    assert_eq!(r.len(), 5);
    for rep in r {
        assert_eq!(rep["passed"], true);
        for key in ["equation", "norm_inf", "norm_2", "scale", "relative", "tolerance"] {
            assert!(rep.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn mismatch_fails_with_status_one() {
    let cfg = format!(
        "{PARAMS}\n[[check]]\nsolution = {{ family = \"kdv_soliton\", amplitude = 1.0 }}\nequation = {{ kind = \"gardner\" }}\n"
    );
    let (o, _d) = kdvinv(&["verify"], Some(&cfg));
    assert_eq!(code(&o), 1);
    let r = records(&o);
    assert_eq!(r[0]["passed"], false);
    assert!(r[0]["relative"].as_f64().unwrap() >= 1e-3);
}

#[test]
fn empty_request_is_an_empty_success() {
    let (o, _d) = kdvinv(&["verify"], Some(""));
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
}

#[test]
fn tolerance_and_backend_flags() {
    let cfg = format!(
        "{PARAMS}\n[[check]]\nsolution = {{ family = \"kdv_cnoidal\", amplitude = 1.0, m = 0.9 }}\nequation = {{ kind = \"kdv\" }}\n"
    );
    let (o, _d) = kdvinv(&["verify", "--tolerance", "1e-14"], Some(&cfg));
    assert_eq!(code(&o), 1);
    assert_eq!(records(&o)[0]["tolerance"], 1e-14);
    // on a coarse grid the eighth-order stencil is visibly less accurate
    let cfg = format!("{cfg}grid = {{ n = 48 }}\n");
    let (o, _d) = kdvinv(&["verify", "--backend", "fd8"], Some(&cfg));
    let fd8 = records(&o)[0]["relative"].as_f64().unwrap();
    let (o, _d) = kdvinv(&["verify"], Some(&cfg));
    let spectral = records(&o)[0]["relative"].as_f64().unwrap();
    assert!(fd8 > spectral);
}

#[test]
fn symmetry_matrix_and_selection() {
    let (o, _d) = kdvinv(&["symmetry"], None);
    assert_eq!(code(&o), 0);
    let r = records(&o);
    let summary = &r.last().unwrap()["summary"];
    assert_eq!(summary["cases"], 200);
    assert!(summary["worst_relative"].as_f64().unwrap() <= 1e-13);
    // flat and shelf variants of each case agree on pass status
    for rep in &r[..r.len() - 1] {
        assert_eq!(rep["passed"], true);
    }

    let (o, _d) = kdvinv(&["symmetry"], Some("select = \"kdv2/shelf/kdv_cnoidal\"\n"));
    assert_eq!(code(&o), 0);
    assert_eq!(records(&o).len(), 2);

    let (o, _d) = kdvinv(&["symmetry"], Some("select = \"nope\"\n"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("select"));
}

#[test]
fn symmetry_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = Command::new(env!("CARGO_BIN_EXE_kdvinv"))
            .args(["symmetry", "--seed", "7", "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    }
    let fa = fs::read(a.path().join("symmetry.jsonl")).unwrap();
    let fb = fs::read(b.path().join("symmetry.jsonl")).unwrap();
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
}

#[test]
fn fit_matches_closed_form() {
    let cfg = format!(
        "shape = \"sech2\"\nfree = [\"B\", \"V\"]\n{PARAMS}\n[equation]\nkind = \"kdv\"\n\n[init]\na = 1.0\nb = 0.7\nv = 1.0\n"
    );
    let (o, _d) = kdvinv(&["fit"], Some(&cfg));
    assert_eq!(code(&o), 0);
    let r = &records(&o)[0];
    assert_eq!(r["status"], "converged");
    let b = r["coefficients"]["b"].as_f64().unwrap();
    let v = r["coefficients"]["v"].as_f64().unwrap();
    assert!((b - 0.75f64.sqrt()).abs() < 1e-8 * 0.75f64.sqrt());
    assert!((v - 1.05).abs() < 1e-8 * 1.05);
}

#[test]
fn evolve_stride_zero_and_translation() {
    let cfg = format!(
        "dt = 0.05\nt_end = 10.0\n{PARAMS}\n[equation]\nkind = \"kdv\"\n\n[initial]\nfamily = \"kdv_soliton\"\namplitude = 1.0\n\n[grid]\nn = 512\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, cfg).unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_kdvinv"))
        .args(["evolve", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&fs::read_to_string(out.join("trajectory.csv")).unwrap());
    let mut times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    times.dedup();
    assert_eq!(times, vec![0.0, 10.0]);

    let s = &records(&o)[0];
    let length = 48.0 / 0.75f64.sqrt();
    let dx = length / 512.0;
    let expected = (s["peak_initial"].as_f64().unwrap() + 1.05 * 10.0 + 0.5 * length).rem_euclid(length) - 0.5 * length;
    assert!((s["peak_final"].as_f64().unwrap() - expected).abs() <= dx);
    assert!(s["monitors"]["mass_drift"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn config_errors_exit_two_and_name_the_parameter() {
    let (o, _d) = kdvinv(&["evolve"], Some(&format!("t_end = 1.0\n{PARAMS}")));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("equation"));

    let (o, _d) = kdvinv(&["profile"], Some(&format!("bogus = 1\n{PARAMS}")));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let cfg = format!("{PARAMS}\n[solution]\nfamily = \"kdv_soliton\"\namplitude = -1.0\n");
    let (o, _d) = kdvinv(&["profile"], Some(&cfg));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha * A"));

    let (o, _d) = kdvinv(&["evolve", "--backend", "fd8"], Some(PARAMS));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--backend"));

    let (o, _d) = kdvinv(&["verify", "--tolerance", "-1"], None);
    assert_eq!(code(&o), 2);

    let (o, _d) = kdvinv(&["profile"], None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("params"));
}

#[test]
fn unstable_step_is_a_config_error() {
    let cfg = format!(
        "dt = 5.0\nt_end = 10.0\n{PARAMS}\n[equation]\nkind = \"kdv\"\n\n[initial]\nfamily = \"kdv_soliton\"\namplitude = 1.0\n"
    );
    let (o, _d) = kdvinv(&["evolve"], Some(&cfg));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt"));
}

#[test]
fn numerical_abort_maps_to_three() {
    let e = CliError::Core(kdvinv_core::Error::NumericalAbort {
        time: 1.0,
        step: 3,
        reason: "nan".into(),
        partial: Box::default(),
    });
    assert_eq!(e.exit_code(), 3);
}
