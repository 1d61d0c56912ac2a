use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckn-lab")).args(args).output().expect("spawn ckn-lab")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

const P: [&str; 8] = ["--N", "5", "--p", "2", "--mu", "1", "--s", "2"];

fn with_params(cmd: &str, extra: &[&str]) -> Vec<String> {
    let mut v = vec![cmd.to_string()];
    v.extend(P.iter().map(|s| s.to_string()));
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    lab(&refs)
}

#[test]
fn validate_reports_derived_exponents() {
    let v = json(&run(&with_params("validate", &[])));
    let r = &v["results"];
    // r = p(N−s)/(N−p−μ) = 2·3/2, K = p(N−s)/(p−s+μ) = 6/1, ς = p/(p−s+μ)
    assert!((r["r"].as_f64().unwrap() - 3.0).abs() < 1e-14);
    assert!((r["k_dim"].as_f64().unwrap() - 6.0).abs() < 1e-14);
    assert!((r["sigma"].as_f64().unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(v["params"]["n"], 5);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn inadmissible_parameters_exit_1() {
    let out = lab(&["validate", "--N", "3", "--p", "4", "--mu", "0", "--s", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p < N"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(lab(&["validate", "--N", "5"]).status.code(), Some(1));
    assert_eq!(lab(&["regions", "--N", "5", "--p", "2"]).status.code(), Some(1));
    assert_eq!(lab(&["all", "--only", "11"]).status.code(), Some(1));
}

#[test]
fn spectrum_mode_zero_has_known_eigenvalues() {
    let v = json(&run(&with_params("spectrum", &["--grid", "1024"])));
    let xis = v["results"]["xis"].as_array().unwrap();
    assert!((xis[0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((xis[1].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert!(v["results"].get("eigenfunctions").is_none());

    let v = json(&run(&with_params("spectrum", &["--grid", "256", "--neigs", "2", "--eigenfunctions"])));
    let f = v["results"]["eigenfunctions"].as_array().unwrap();
    assert_eq!(f.len(), 2);
    assert_eq!(f[0].as_array().unwrap().len(), v["results"]["tau"].as_array().unwrap().len());
}

#[test]
fn regions_point_and_map() {
    let v = json(&lab(&["regions", "--N", "5", "--p", "2", "--a", "-1", "--b", "-0.5"]));
    assert_eq!(v["results"]["verdict"], "Symmetric");

    let v = json(&lab(&["regions", "--N", "5", "--p", "3", "--map", "--grid", "15"]));
    assert_eq!(v["results"]["cells"].as_array().unwrap().len(), 225);
    let names: Vec<&str> =
        v["results"]["curves"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["b_eq_a", "b_eq_a_plus_1", "caldiroli_musina", "ciraolo_corso", "conjectured"] {
        assert!(names.contains(&want), "missing curve {want}");
    }
}

#[test]
fn output_is_byte_deterministic() {
    let args = ["ineq", "--kind", "c2", "--exponent", "1.5", "--kappa", "0.3", "--samples", "2000", "--verify", "2000"];
    let a = lab(&args);
    let b = lab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let mut csv_args = vec!["--format", "csv", "--seed", "11"];
    csv_args.extend_from_slice(&args);
    let c = lab(&csv_args);
    let text = String::from_utf8(c.stdout).unwrap();
    assert!(text.starts_with("# ckn-lab "));
    assert!(text.lines().next().unwrap().ends_with("seed=11"));
}

#[test]
fn out_writes_file_and_curve_siblings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    let out = lab(&[
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
        "regions",
        "--N",
        "4",
        "--p",
        "2",
        "--map",
        "--grid",
        "10",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let body = std::fs::read_to_string(&path).unwrap();
    assert_eq!(body.lines().nth(1), Some("a,b,verdict,provenance"));
    assert_eq!(body.lines().count(), 2 + 100);
    assert!(dir.path().join("map.b_fs.csv").exists());
    // only the target and its siblings; no stray temporaries
    let n = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(n, 1 + 5);
}

#[test]
fn distance_of_sampled_bubble_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    // 2·(1 + ρ/2)^{−2} is a multiple of a dilated bubble at P = (5, 2, 1, 2)
    let mut s = String::from("radius,value\n");
    for i in 0..=2000 {
        let r = 10f64.powf(-4.0 + 8.0 * i as f64 / 2000.0);
        s.push_str(&format!("{r},{}\n", 2.0 * (1.0 + r / 2.0).powi(-2)));
    }
    std::fs::write(&path, s).unwrap();
    let v = json(&run(&with_params("distance", &["--input", path.to_str().unwrap()])));
    let d = v["results"]["distance"].as_f64().unwrap();
    let norm = v["results"]["norm_u"].as_f64().unwrap();
    assert!(d / norm < 1e-3, "relative distance {}", d / norm);
    assert!((v["results"]["point"]["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn failed_criterion_exits_2() {
    let out = lab(&["all", "--only", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["criteria"][0]["passed"], false);
}
