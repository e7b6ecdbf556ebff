use std::process::{Command, Output};

fn homsing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homsing")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

const LANDAU: &str = r#"{"family":"landau","params":{"sigma":0.5}}"#;
const EULER_ONLY: &str = r#"{"family":"euler_no_swirl","params":{"c0":1,"c1":0,"c2":1,"sign":1}}"#;

#[test]
fn eval_landau_three_rows() {
    let o = homsing(&["--grid-ntheta", "3", "--grid-nphi", "1", "eval", "--input", LANDAU]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "theta,phi,u_r,u_theta,u_phi,p");
    assert_eq!(rows.len(), 4);
    let mid: Vec<f64> = rows[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((mid[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!((mid[3] - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn eval_empty_grid_is_header_only() {
    let o = homsing(&["--grid-ntheta", "0", "eval", "--input", LANDAU]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "theta,phi,u_r,u_theta,u_phi,p\n");
}

#[test]
fn eval_reports_domain_omissions() {
    let spec = r#"{"family":"type_two_log","params":{"alpha":0}}"#;
    let o = homsing(&["--grid-ntheta", "10", "--grid-nphi", "1", "eval", "--input", spec]);
    assert!(o.status.success());
    let omitted = stderr_json(&o)["omitted_rows"].as_u64().unwrap() as usize;
    assert!(omitted > 0);
    assert_eq!(stdout(&o).lines().count() - 1 + omitted, 10);
}

#[test]
fn verify_exit_codes() {
    let o = homsing(&["verify", "--input", LANDAU]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["pass"], true);

    let o = homsing(&["verify", "--input", EULER_ONLY]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["report"]["max_momentum"].as_f64().unwrap() > 0.1);
    assert_eq!(stderr_json(&o)["exit_code"], 1);

    let o = homsing(&["verify", "--euler", "--input", EULER_ONLY]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_input_exit_2() {
    let o = homsing(&["verify", "--input", r#"{"family":"#]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "input");

    let o = homsing(&["eval", "--input", r#"{"family":"landau","params":{"sigma":2}}"#]);
    assert_eq!(o.status.code(), Some(2));

    let o = homsing(&["eval", "--input", "/nonexistent/spec.json"]);
    assert_eq!(o.status.code(), Some(2));

    let o = homsing(&["classify", "--input", LANDAU, "--pole", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_reports() {
    let spec = r#"{"family":"no_swirl_one_sing","params":{"tau":4,"sigma":1}}"#;
    let o = homsing(&["classify", "--input", spec, "--pole", "S"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["type"], "Type3");
    assert_eq!(r["gradient"]["type"], "Type3'");
    assert!((r["tau_hat"].as_f64().unwrap() - 4.0).abs() < 1e-3);

    let o = homsing(&["classify", "--input", r#"{"family":"type_two_log","params":{"alpha":0}}"#]);
    assert_eq!(json(&o)["type"], "Type2");

    let o = homsing(&["classify", "--input", LANDAU, "--pole", "0,0,-1"]);
    assert!(matches!(json(&o)["type"].as_str(), Some("Type1" | "Removable")));
}

#[test]
fn liouville_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("field.csv");
    let p = r#"{"points":[[0,0,-1],[0,0,1]],"exponents":[2,-2]}"#;
    let o = homsing(&["liouville", "--input", p, "--field-csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    let slopes: Vec<f64> = r["fits"].as_array().unwrap().iter().map(|f| f["slope"].as_f64().unwrap()).collect();
    assert_eq!(slopes.len(), 2);
    assert!(slopes.iter().all(|s| (s - 2.0).abs() < 0.06));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("theta,phi,u_r,u_theta,u_phi,p\n"));
    assert!(text.lines().count() > 100);

    let p = r#"{"points":[[0.6,0,0.8],[0,-0.6,0.8],[0.28,0.96,0]],"exponents":[2,2,-3]}"#;
    let r = json(&homsing(&["liouville", "--input", p]));
    let mut slopes: Vec<f64> = r["fits"].as_array().unwrap().iter().map(|f| f["slope"].as_f64().unwrap()).collect();
    slopes.sort_by(f64::total_cmp);
    for (s, e) in slopes.iter().zip([2.0, 2.0, 4.0]) {
        assert!((s - e).abs() < 0.03 * e, "{slopes:?}");
    }

    let o = homsing(&["liouville", "--input", r#"{"points":[[0,0,-1],[0,0,1]],"exponents":[2,-3]}"#]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gamma_bounds() {
    let r = json(&homsing(&["gamma-bounds", "--c1", "0", "--c2", "0", "--c3", "0"]));
    assert!((r["gamma_minus_hat"].as_f64().unwrap() + 2.0).abs() < 0.05);
    assert!((r["gamma_plus_hat"].as_f64().unwrap() - 2.0).abs() < 0.05);
    let o = homsing(&["gamma-bounds", "--c3", "-5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ode_trajectory_row() {
    let o = homsing(&["ode", "--gamma", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("y,U_theta,U_phi,U_phi_prime\n"));
    let row = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|r| r[0] == 0.5)
        .unwrap();
    assert!((row[1] - 0.6).abs() < 1e-8);
    let o = homsing(&["ode", "--gamma", "1", "--y-max", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = homsing(&["--seed", "7", "--out", path.to_str().unwrap(), "eval", "--input", LANDAU]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let plain = homsing(&["eval", "--input", LANDAU]);
    assert_ne!(std::fs::read(&a).unwrap(), plain.stdout);
    let v1 = homsing(&["verify", "--input", LANDAU]);
    let v2 = homsing(&["verify", "--input", LANDAU]);
    assert_eq!(v1.stdout, v2.stdout);
}
