//! CLI acceptance: exit-code contract, report content for the bundled
//! job, and byte-identical reruns.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_shubin-spectra")
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("tmp dir");
    dir
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(binary())
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn write_job(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("write job");
    path
}

#[test]
fn criterion_12_bundled_job_is_deterministic() {
    let out1 = tmp_dir("run1");
    let out2 = tmp_dir("run2");
    let job = workspace_root().join("jobs/ho1d_gevrey_half.json");
    for out in [&out1, &out2] {
        let result = run_cli(&["run", job.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(
            result.status.success(),
            "run failed: {}",
            String::from_utf8_lossy(&result.stderr)
        );
    }
    for name in [
        "report.json",
        "spectrum.csv",
        "coefficients.csv",
        "decay.csv",
        "decay.svg",
        "weyl.svg",
    ] {
        let a = std::fs::read(out1.join(name)).unwrap_or_else(|_| panic!("{name} missing"));
        let b = std::fs::read(out2.join(name)).unwrap_or_else(|_| panic!("{name} missing"));
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // report content for the bundled job
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out1.join("report.json")).unwrap()).unwrap();
    let b = report["weyl"]["b"].as_f64().expect("weyl.b present");
    assert!((1.9..=2.1).contains(&b), "weyl B = {b}");
    assert_eq!(report["classify"]["verdict_roumieu"], true);
    assert_eq!(report["hypothesis_failure"], serde_json::Value::Null);
    assert_eq!(report["normality"]["is_normal"], true);
    assert_eq!(report["ellipticity"]["verdict"], true);
    println!("criterion 12 PASS: byte-identical outputs, weyl B = {b:.4}, Roumieu verdict true");
}

#[test]
fn non_elliptic_operator_exits_2_with_argmin() {
    let dir = tmp_dir("nonelliptic");
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": [{"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0}]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 64},
            "truncation": {"per_axis": 16, "pad": 2},
            "test_function": "gaussian",
            "seed": 3,
            "output_dir": "unused"
        }"#,
    );
    let out = dir.join("out");
    let result = run_cli(&["run", job.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2), "expected exit 2");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["hypothesis_failure"], "ellipticity");
    assert_eq!(report["ellipticity"]["verdict"], false);
    let min = report["ellipticity"]["min_modulus"].as_f64().unwrap();
    assert!(min < 1e-9);
    let x = report["ellipticity"]["argmin_x"][0].as_f64().unwrap();
    let xi = report["ellipticity"]["argmin_xi"][0].as_f64().unwrap();
    assert!(x.abs() > 0.99, "argmin x = {x}");
    assert!(xi.abs() < 1e-3, "argmin xi = {xi}");
}

#[test]
fn annihilation_operator_exits_2_with_unit_discrepancy() {
    let dir = tmp_dir("annihilation");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let job = write_job(
        &dir,
        "job.json",
        &format!(
            r#"{{
                "operator": {{"dim": 1, "terms": [
                    {{"beta": [1], "alpha": [0], "re": {s}, "im": 0.0}},
                    {{"beta": [0], "alpha": [1], "re": 0.0, "im": {s}}}
                ]}},
                "weights": {{"kind": "gevrey", "mu": 0.5, "p_max": 64}},
                "truncation": {{"per_axis": 16, "pad": 2}},
                "test_function": "gaussian",
                "seed": 3,
                "output_dir": "unused"
            }}"#
        ),
    );
    let out = dir.join("out");
    let result = run_cli(&["run", job.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["hypothesis_failure"], "normality");
    let disc = report["normality"]["discrepancy"].as_f64().unwrap();
    assert!((disc - 1.0).abs() <= 1e-14, "discrepancy = {disc}");
}

#[test]
fn malformed_config_exits_1_naming_the_field() {
    let dir = tmp_dir("malformed");
    // missing the required weights field
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": []},
            "truncation": {"per_axis": 8, "pad": 2},
            "output_dir": "unused"
        }"#,
    );
    let result = run_cli(&["run", job.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("weights"), "stderr: {stderr}");

    // bad grid named explicitly
    let job = write_job(
        &dir,
        "job2.json",
        r#"{
            "operator": {"dim": 1, "terms": [{"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0}, {"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0}]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 64},
            "truncation": {"per_axis": 8, "pad": 2},
            "lambda_grid": [2.0, 1.0],
            "output_dir": "unused"
        }"#,
    );
    let result = run_cli(&["run", job.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("lambda_grid"), "stderr: {stderr}");
}

#[test]
fn check_weights_prints_conditions() {
    let dir = tmp_dir("checkweights");
    let weights = write_job(
        &dir,
        "w.json",
        r#"{"kind": "gevrey", "mu": 1.0, "p_max": 64}"#,
    );
    let result = run_cli(&["check-weights", "--weights", weights.to_str().unwrap()]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("(M.1) ok"), "stdout: {stdout}");
    assert!(stdout.contains("(M.2)' ok"), "stdout: {stdout}");
}

#[test]
fn classify_subcommand_reads_coefficient_csv() {
    let dir = tmp_dir("classifycsv");
    let mut csv = String::from("j,re,im\n");
    for j in 1..=400usize {
        csv.push_str(&format!("{j},{:.17e},0.0\n", (-(j as f64).sqrt()).exp()));
    }
    let coeffs = write_job(&dir, "a.csv", &csv);
    let weights = write_job(
        &dir,
        "w.json",
        r#"{"kind": "gevrey", "mu": 1.0, "p_max": 4096}"#,
    );
    let result = run_cli(&[
        "classify",
        "--coeffs",
        coeffs.to_str().unwrap(),
        "--weights",
        weights.to_str().unwrap(),
        "--dim",
        "1",
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let fit: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(fit["verdict_roumieu"], true);
    assert_eq!(fit["verdict_beurling"], false);
}

#[test]
fn solve_reports_kernel_obstruction() {
    let dir = tmp_dir("solve");
    // H - I has a kernel direction carrying the Gaussian's whole mass
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": [
                {"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0},
                {"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0},
                {"beta": [0], "alpha": [0], "re": -1.0, "im": 0.0}
            ]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 256},
            "truncation": {"per_axis": 24, "pad": 2},
            "test_function": "gaussian",
            "seed": 5,
            "output_dir": "unused"
        }"#,
    );
    let result = run_cli(&["solve", job.to_str().unwrap(), "--policy", "reject"]);
    assert_ne!(result.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(
        stderr.contains("eigen-division obstructed"),
        "stderr: {stderr}"
    );

    // projecting the kernel out succeeds and records the dropped mass
    let result = run_cli(&["solve", job.to_str().unwrap(), "--policy", "project"]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let section: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    let dropped = section["dropped_mass"].as_f64().unwrap();
    assert!(dropped > 1.0, "dropped mass = {dropped}");
    assert_eq!(section["kernel_indices"][0], 1);
}

#[test]
fn check_operator_accepts_the_oscillator() {
    let dir = tmp_dir("checkop");
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": [
                {"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0},
                {"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0}
            ]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 64},
            "truncation": {"per_axis": 8, "pad": 2},
            "test_function": "gaussian",
            "seed": 1,
            "output_dir": "unused"
        }"#,
    );
    let result = run_cli(&["check-operator", job.to_str().unwrap()]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("operator hypotheses hold"), "stdout: {stdout}");
}

#[test]
fn classify_subcommand_runs_from_a_job() {
    let dir = tmp_dir("classifyjob");
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": [
                {"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0},
                {"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0}
            ]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 4096},
            "truncation": {"per_axis": 32, "pad": 2},
            "quad_order": 64,
            "test_function": "gaussian",
            "seed": 1,
            "output_dir": "unused"
        }"#,
    );
    let result = run_cli(&["classify", job.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let fit: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(fit["verdict_roumieu"], true);
}

#[test]
fn run_without_output_dir_names_the_field() {
    let dir = tmp_dir("nooutdir");
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": [
                {"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0},
                {"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0}
            ]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 64},
            "truncation": {"per_axis": 8, "pad": 2},
            "test_function": "gaussian",
            "seed": 1
        }"#,
    );
    let result = run_cli(&["run", job.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("output_dir"), "stderr: {stderr}");
}

#[test]
fn norms_subcommand_prints_tables() {
    let dir = tmp_dir("normssub");
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": [
                {"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0},
                {"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0}
            ]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 64},
            "truncation": {"per_axis": 16, "pad": 2},
            "quad_order": 32,
            "test_function": "hermite_1",
            "seed": 1,
            "output_dir": "unused",
            "caps": { "p_cap": 2, "s_cap": 4, "bound_cap": 2, "j_min": 20, "trust_cap": null }
        }"#,
    );
    let result = run_cli(&["norms", job.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let tables: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    // f = h_1 is an eigenvector with eigenvalue 3: at h = 1 the iterate
    // norm is 3/sqrt(2)
    let v = tables["iterate"]["norms"][1]["value"].as_f64().unwrap();
    assert!((v - 3.0 / 2.0f64.sqrt()).abs() < 1e-9, "value = {v}");
}

#[test]
fn sampled_grid_csv_feeds_the_transform() {
    let dir = tmp_dir("sampledcsv");
    // gaussian samples on the tensor quadrature grid for N = 12, quad 24
    let rule = shubin_spectra::hermite::gauss_hermite(24).unwrap();
    let grid = shubin_spectra::hermite::quadrature_grid(1, &rule);
    let mut csv = String::from("re,im\n");
    for pt in &grid {
        csv.push_str(&format!("{:.17e},0.0\n", (-0.5 * pt[0] * pt[0]).exp()));
    }
    let samples = write_job(&dir, "f.csv", &csv);
    let job = write_job(
        &dir,
        "job.json",
        &format!(
            r#"{{
                "operator": {{"dim": 1, "terms": [
                    {{"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0}},
                    {{"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0}}
                ]}},
                "weights": {{"kind": "gevrey", "mu": 0.5, "p_max": 256}},
                "truncation": {{"per_axis": 12, "pad": 2}},
                "quad_order": 24,
                "test_function": {{"csv": {:?}}},
                "seed": 11,
                "output_dir": "unused"
            }}"#,
            samples.to_str().unwrap()
        ),
    );
    let out = dir.join("out");
    let result = run_cli(&["run", job.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(out.join("coefficients.csv")).unwrap();
    let first_coeff = csv.lines().nth(1).unwrap();
    let re: f64 = first_coeff.split(',').nth(2).unwrap().parse().unwrap();
    assert!(
        (re - std::f64::consts::PI.powf(0.25)).abs() < 1e-8,
        "c_0 = {re}"
    );
}

#[test]
fn spectrum_subcommand_writes_csv() {
    let dir = tmp_dir("spectrum");
    let job = write_job(
        &dir,
        "job.json",
        r#"{
            "operator": {"dim": 1, "terms": [
                {"beta": [0], "alpha": [2], "re": 1.0, "im": 0.0},
                {"beta": [2], "alpha": [0], "re": 1.0, "im": 0.0}
            ]},
            "weights": {"kind": "gevrey", "mu": 0.5, "p_max": 64},
            "truncation": {"per_axis": 48, "pad": 2},
            "test_function": "gaussian",
            "seed": 9,
            "output_dir": "unused"
        }"#,
    );
    let out = dir.join("out");
    let result = run_cli(&[
        "spectrum",
        job.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,re_lambda,im_lambda,residual"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("1,"), "first row: {first}");
    let fields: Vec<&str> = first.split(',').collect();
    let lam: f64 = fields[1].parse().unwrap();
    assert!((lam - 1.0).abs() < 1e-12);
    assert_eq!(csv.lines().count(), 49);
}
