use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn gaussbv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussbv"))
        .args(args)
        .current_dir(dir)
        .env_remove("GAUSSBV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["--help"],
        vec!["norms", "--help"],
        vec!["coarea", "--help"],
        vec!["extend", "cost", "--help"],
        vec!["reflect", "--help"],
        vec!["bv", "ibp-check", "--help"],
        vec!["bv", "semivar", "--help"],
        vec!["bv", "lambda-indicator", "--help"],
        vec!["bv", "extend-zero", "--help"],
        vec!["product", "table", "--help"],
        vec!["run", "--help"],
        vec!["all", "--help"],
    ] {
        let o = gaussbv(&args, dir.path());
        assert_eq!(code(&o), 0, "{args:?}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"), "{args:?}");
    }
}

#[test]
fn missing_config_is_an_operational_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gaussbv(&["run", "--config", "missing.toml"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not found"), "{}", stderr(&o));
}

#[test]
fn bad_flag_is_an_operational_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gaussbv(&["norms", "--bogus"], dir.path())), 1);
}

#[test]
fn norms_p1_passes_assert() {
    let dir = tempfile::tempdir().unwrap();
    let o = gaussbv(&["norms", "--p", "1", "--m", "4,8,16,32", "--assert"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,p,lp_part_log,grad_part_log,relative_norm,fitted_slope"));
    let slope: f64 = lines.next().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((slope + 3.0).abs() < 0.15, "{slope}");
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
}

#[test]
fn contract_violation_exits_2_only_under_assert() {
    // inverse-square damping does not make the divergence column increase
    let dir = tempfile::tempdir().unwrap();
    let args = ["product", "table", "--p", "1", "--kmax", "4", "--damping", "inverse-square", "--samples", "1000"];
    let o = gaussbv(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("contract violation"));
    let mut strict = args.to_vec();
    strict.push("--assert");
    assert_eq!(code(&gaussbv(&strict, dir.path())), 2);
}

#[test]
fn product_table_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["product", "table", "--p", "1", "--kmax", "4", "--seed", "7", "--samples", "20000", "--out", "table.csv", "--assert"];
    for d in [&a, &b] {
        let o = gaussbv(&args, d.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["table.csv", "table.json", "manifest.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let csv = std::fs::read_to_string(a.path().join("table.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("k,m,log_C,bounded_partial_sum,divergence_term_log,ratio_certificate"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let o = gaussbv(&["extend", "cost", "--p", "1", "--m", "4,8,16", "--out", "cost.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "extend-cost");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["cost.csv", "cost.json"]);
    for f in files {
        let bytes = std::fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let cert: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("cost.json")).unwrap()).unwrap();
    assert_eq!(cert["certificates"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "command = \"norms\"\np = 1.0\nresolution = 3\n").unwrap();
    let o = gaussbv(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("resolution"), "{}", stderr(&o));
}

#[test]
fn config_errors_are_reported_per_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "command = \"norms\"\np = 0.5\nm = [1, 4, 8]\ntol = 1.0\n").unwrap();
    let o = gaussbv(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    for field in ["p: 0.5", "m: 1", "tol: 1"] {
        assert!(e.contains(field), "{field} missing from {e}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "p = 2.0\nm = [4, 8, 16]\nout = \"from_file.csv\"\n").unwrap();
    let o = gaussbv(&["norms", "--config", "c.toml", "--p", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("from_file.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("1")), "{csv}");
}

#[test]
fn run_dispatches_on_the_config_command() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "command = \"bv-semivar\"\neta = 4\nout_dir = \"res\"\n").unwrap();
    let o = gaussbv(&["run", "--config", "c.toml", "--assert"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("res/semivar.json")).unwrap()).unwrap();
    assert_eq!(v["variation"].as_f64().unwrap(), 1.0 + 0.5 + 1.0 / 3.0 + 0.25);
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gaussbv"))
        .args(["bv", "lambda-indicator", "--assert"])
        .current_dir(dir.path())
        .env("GAUSSBV_OUT_DIR", "env_out")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("env_out/lambda_indicator.json").exists());
    // the flag wins over the environment
    let o = Command::new(env!("CARGO_BIN_EXE_gaussbv"))
        .args(["bv", "semivar", "--out-dir", "flag_out"])
        .current_dir(dir.path())
        .env("GAUSSBV_OUT_DIR", "env_out")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("flag_out/semivar.json").exists());
}

#[test]
fn domain_and_line_function_json_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("k2.json"), r#"{"kind":"rhomb","m":2}"#).unwrap();
    let o = gaussbv(&["bv", "lambda-indicator", "--domain", "k2.json", "--theta", "0.3", "--assert"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let f = r#"{"continuous":{"kind":"piecewise_linear","knots":[[-1.0,0.2],[0.5,-0.6]]},"jumps":[[0.5,-0.6,0.1]]}"#;
    let o = gaussbv(&["bv", "extend-zero", "--line-function", f, "--bound", "1", "--assert"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = gaussbv(&["bv", "ibp-check", "--domain", "{\"kind\":\"disc\",\"center\":[0,0],\"radius\":-1}"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn coarea_saves_grids_that_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = gaussbv(&["coarea", "--res", "96", "--m", "4", "--save-grids", "--assert"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sidecar: gaussbv::coarea::GridSidecar =
        serde_json::from_slice(&std::fs::read(dir.path().join("cone.grid.json")).unwrap()).unwrap();
    let g = gaussbv::coarea::GridFunction::read_binary(std::fs::File::open(dir.path().join("cone.grid")).unwrap(), &sidecar).unwrap();
    assert_eq!(g.dims(), (sidecar.nx, sidecar.ny));
    assert!(dir.path().join("coarea_levels.csv").exists());
}
