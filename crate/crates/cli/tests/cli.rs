use std::fs;
use std::path::Path;
use std::process::Command;

fn lab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sobolev-lab"));
    c.env_remove("SOBOLEV_LAB_THREADS");
    c
}

fn run(args: &[&str], out: &Path) -> i32 {
    let status = lab().args(args).arg("--out-dir").arg(out).output().unwrap();
    status.status.code().unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn landscape_header_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["landscape", "--dim", "2", "--theta-grid", "64", "--random-points", "5", "--quad-grid", "10"], dir.path()), 0);
    assert_eq!(header(&dir.path().join("landscape.csv")), "theta,alpha,kappa_l2,kappa_h1,lam_min_l2,lam_min_h1");
    let text = fs::read_to_string(dir.path().join("landscape.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 64 + 3 * 5);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["landscape"]["config"]["theta_grid"], 64);
    assert_eq!(m["landscape"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["landscape"]["timestamp"].is_string());
}

#[test]
fn verify_gradients_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify-gradients", "--dims", "4,16", "--n-min", "6", "--n-max", "8", "--trials", "2", "--pointwise-points", "1", "--pointwise-n", "1000"];
    assert_eq!(run(&args, dir.path()), 0);
    assert_eq!(header(&dir.path().join("convergence.csv")), "model,kind,dim,log2_n,mse");
    let rows = fs::read_to_string(dir.path().join("convergence.csv")).unwrap().lines().count() - 1;
    // (3 + 3 + 2 kinds) x 2 dims x 3 sample sizes
    assert_eq!(rows, 8 * 2 * 3);
}

#[test]
fn flow_sobolev_below_value_loss() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["flow", "--kind", "both", "--dim", "8", "--inits", "10", "--t-end", "2"], dir.path()), 0);
    assert_eq!(header(&dir.path().join("flow.csv")), "init_id,kind,t,v");
    let mut rdr = csv::Reader::from_path(dir.path().join("flow.csv")).unwrap();
    let rows: Vec<(String, String, f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    let l2: Vec<_> = rows.iter().filter(|r| r.1 == "l2").collect();
    let h1: Vec<_> = rows.iter().filter(|r| r.1 == "h1").collect();
    assert_eq!(l2.len(), h1.len());
    for (a, b) in l2.iter().zip(&h1) {
        assert_eq!((&a.0, a.2), (&b.0, b.2));
        assert!(b.3 <= a.3);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["landscape", "--dim", "1"], dir.path()), 2);
    assert_eq!(run(&["flow", "--kind", "h3"], dir.path()), 2);
    assert_eq!(lab().arg("no-such-command").output().unwrap().status.code(), Some(2));
    let file = dir.path().join("plain");
    fs::write(&file, "").unwrap();
    assert_eq!(run(&["chebyshev"], &file.join("sub")), 1);
    assert_eq!(lab().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 7, "chebyshev": {"n_max": 6, "dump_orders": [3]}, "flow": {"dim": 99}}"#).unwrap();
    let out = dir.path().join("o");
    let code = lab().args(["chebyshev", "--config"]).arg(&cfg).args(["--n-max", "5", "--out-dir"]).arg(&out).output().unwrap().status.code();
    assert_eq!(code, Some(0));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["chebyshev"]["config"], serde_json::json!({"seed": 7, "n_max": 5, "dump_orders": [3]}));
    fs::write(&cfg, r#"{"n_maxx": 6}"#).unwrap();
    let code = lab().args(["chebyshev", "--config"]).arg(&cfg).arg("--out-dir").arg(&out).output().unwrap().status.code();
    assert_eq!(code, Some(2));
}

#[test]
fn thread_env_fallback_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let code = lab().env("SOBOLEV_LAB_THREADS", "2").args(["toeplitz", "--out-dir"]).arg(dir.path()).output().unwrap().status.code();
    assert_eq!(code, Some(0));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["toeplitz"]["threads"], 2);
}

#[test]
fn summarize_partial_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab().args(["summarize", "--out-dir"]).arg(dir.path()).output().unwrap().status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["criteria"].as_array().unwrap().len(), 0);
    assert_eq!(r["missing"].as_array().unwrap().len(), 13);

    assert_eq!(run(&["landscape", "--random-points", "20", "--quad-grid", "10"], dir.path()), 0);
    for f in ["spectra.csv", "quadforms.csv", "manifest.json"] {
        fs::remove_file(dir.path().join(f)).unwrap();
    }
    assert_eq!(lab().args(["summarize", "--out-dir"]).arg(dir.path()).output().unwrap().status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let ids: Vec<u64> = r["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![1]);
    assert_eq!(r["criteria"][0]["pass"], true);
}

#[test]
fn summarize_missing_dir_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = lab().args(["summarize", "--out-dir"]).arg(dir.path().join("nope")).output().unwrap().status.code();
    assert_eq!(code, Some(2));
}
