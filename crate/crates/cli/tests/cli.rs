use std::process::{Command, Output};

fn robinspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robinspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn missing_curve_file_exits_one() {
    let out = robinspec(&["expand", "--curve", "/nonexistent/curve.json", "--h-grid", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty(), "error goes to stderr");
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = robinspec(&["frobnicate"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn corrections_exact_ellipse_first_zeta() {
    let ellipse = fixture("ellipse.json");
    let out = robinspec(&[
        "corrections",
        "--curve",
        &ellipse,
        "--order",
        "1",
        "--exact",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json rows");
    let zeta = rows[0]["zeta"].as_array().expect("zeta array");
    // odd symmetry of the curvature well kills the even coefficients
    assert_eq!(zeta[0].as_f64().unwrap(), 0.0);
    assert!((zeta[1].as_f64().unwrap() - (-5.8125)).abs() < 1e-12);
    assert_eq!(rows[0]["exact"], serde_json::Value::Bool(true));
}

#[test]
fn expand_circle_three_term_values() {
    let circle = fixture("circle.json");
    let out = robinspec(&[
        "expand",
        "--curve",
        &circle,
        "--h-grid",
        "0.01",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json rows");
    let row = &rows[0];
    assert_eq!(row["gamma"].as_f64().unwrap(), -10.0);
    let terms = row["terms"].as_array().unwrap();
    assert_eq!(terms[0].as_f64().unwrap(), -100.0);
    assert!((terms[1].as_f64().unwrap() - (-10.0)).abs() < 1e-10);
    // constant curvature: the half-power term is sampling noise
    assert!(terms[2].as_f64().unwrap().abs() < 1e-6);
    assert!((row["value"].as_f64().unwrap() - (-110.0)).abs() < 1e-6);
}

#[test]
fn shoot_disc_emits_csv_records() {
    let out = robinspec(&["shoot-disc", "--h-grid", "0.01,0.02"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("h,gamma,n,method,value,residual"));
    assert_eq!(text.matches("shooting").count(), 2);
}

#[test]
fn model1d_output_is_deterministic() {
    let args = ["model1d", "--l-grid", "6", "--grid-n", "500"];
    let a = robinspec(&args);
    let b = robinspec(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "identical runs produce identical bytes");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("transcendental"));
    assert!(text.contains(",fd,"));
}

#[test]
fn out_flag_writes_file_instead_of_stdout() {
    let dir = std::env::temp_dir().join("robinspec-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("disc.csv");
    let out = robinspec(&[
        "shoot-disc",
        "--h-grid",
        "0.01",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("shooting"));
    std::fs::remove_file(&path).unwrap();
}
