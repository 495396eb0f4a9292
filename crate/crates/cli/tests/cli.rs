use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn swmhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swmhd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn coriolis_tables_match() {
    let o = swmhd(&["tables", "--case", "coriolis"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("table5 (coriolis): 49 match, 0 annotated, 0 mismatch"), "{out}");
    assert!(out.contains("| [Xi, Xj] |"));
}

#[test]
fn full_case_uses_a_six_by_six_subtable() {
    let dir = tempfile::tempdir().unwrap();
    let o = swmhd(&["tables", "--case", "full", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tables-full.json")).unwrap()).unwrap();
    let table5 = &json["result"][0];
    assert_eq!(table5["table"], "table5");
    assert_eq!(table5["rows"].as_array().unwrap().len(), 6);
    assert_eq!(table5["cols"].as_array().unwrap().len(), 6);
    assert_eq!(json["config"]["case"], "full");
}

#[test]
fn verify_reports_lost_galilean_symmetry() {
    let o = swmhd(&["verify", "--case", "full", "--g", "1", "--f0", "1", "--include", "X5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("6/6 generators pass"), "{out}");
    assert!(out.contains("included X5: FAIL"));
    assert!(out.contains("control X3: FAIL"));
}

#[test]
fn verify_free_case() {
    let o = swmhd(&["verify", "--case", "free"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("10/10 generators pass"));
}

#[test]
fn verify_rejects_parameters_outside_the_case() {
    let o = swmhd(&["verify", "--case", "free", "--g", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn optimal_branches() {
    let o = swmhd(&["optimal", "--a1", "1", "--z1", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("branch: I\n"));
    let o = swmhd(&["optimal", "--a2", "1", "--a10", "1", "--z2", "1", "--z3", "1"]);
    assert!(stdout(&o).contains("branch: IV\n"));
    assert!(stdout(&o).contains("representative: {a2X2+a10X10+z2Z2+z3Z3}"));
    let o = swmhd(&["optimal", "--z1", "-2", "--invariance", "20"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("branch: III"));
    assert!(stdout(&o).contains("passed true"));
}

#[test]
fn optimal_rejects_the_zero_element() {
    let o = swmhd(&["optimal"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("all coefficients are zero"));
}

#[test]
fn reduce_z1_prints_the_reduced_system() {
    let o = swmhd(&["reduce", "--case", "Z1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("dH/dt = (-3)*H*U"), "{out}");
    assert!(out.contains("dA/dt = 0"));
    assert!(out.contains("right-hand side consistent: true"));
}

#[test]
fn reduce_reports_corrected_closed_forms() {
    let o = swmhd(&["reduce", "--case", "Z3", "--set", "f0=0.9"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("printed form fails; corrected form passes"), "{out}");
    assert!(out.contains("\"params\":{\"f0\":0.9}"));
}

#[test]
fn unknown_reduction_is_a_config_error() {
    assert_eq!(code(&swmhd(&["reduce", "--case", "X7"])), 1);
    assert_eq!(code(&swmhd(&["reduce"])), 1);
}

#[test]
fn integrate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = swmhd(&["integrate", "--case", "X1+a2X2", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let read = |p: &Path| fs::read(p.join("integrate-fig1.csv")).unwrap();
    let (x, y) = (read(a.path()), read(b.path()));
    // only the echoed output directory differs
    let body = |v: &[u8]| String::from_utf8_lossy(v).lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&x), body(&y));
    let text = String::from_utf8(x).unwrap();
    assert!(text.lines().nth(1).unwrap() == "xi,H,V");
    assert_eq!(text.lines().count(), 2 + 501);
}

#[test]
fn byte_identical_reruns_with_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = {
        swmhd(&["integrate", "--case", "z1", "--out", d]);
        fs::read(dir.path().join("integrate-z1.csv")).unwrap()
    };
    swmhd(&["integrate", "--case", "z1", "--out", d]);
    assert_eq!(first, fs::read(dir.path().join("integrate-z1.csv")).unwrap());
}

#[test]
fn sonic_wall_is_a_numerical_failure() {
    let o = swmhd(&["integrate", "--case", "fig1-sonic"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sonic point"));
}

#[test]
fn simulate_convergence_table() {
    let o = swmhd(&["simulate", "--init", "x2-closed-form", "--convergence", "50,100"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("cells,steps,l1_error,order\n50,"), "{out}");
}

#[test]
fn simulate_snapshot_and_bad_cfl() {
    let o = swmhd(&["simulate", "--init", "riemann", "--cells", "20", "--t-end", "0.1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("x,h,u,v,a,b\n"));
    assert!(out.contains("relative mass change"));
    let o = swmhd(&["simulate", "--init", "smooth", "--cfl", "2"]);
    assert_eq!(code(&o), 1);
    let o = swmhd(&["simulate", "--init", "smooth", "--convergence", "10,20"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_is_merged_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"case": "free", "trials": 10, "seed": 7}"#).unwrap();
    let o = swmhd(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code(&o), 0);
    let header = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(
        header,
        r#"# config: {"case":"free","g":0.0,"f0":0.0,"seed":9,"trials":10,"tol":1e-9}"#
    );
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"gravity": 1}"#).unwrap();
    assert_eq!(code(&swmhd(&["verify", "--config", bad.to_str().unwrap()])), 1);
    assert_eq!(code(&swmhd(&["verify", "--config", "/nonexistent/run.json"])), 1);
    assert_eq!(code(&swmhd(&["frobnicate"])), 1);
    assert_eq!(code(&swmhd(&["--help"])), 0);
}
