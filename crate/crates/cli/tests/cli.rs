use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsrdp"))
        .args(args)
        .output()
        .expect("spawn fsrdp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

const BASE: [&str; 6] = ["--batch", "120", "--dataset", "50000", "--sigma", "6"];

#[test]
fn curve_single_step_matches_library() {
    let mut args = vec!["curve"];
    args.extend(BASE);
    args.extend(["--steps", "1", "--alpha-grid", "2,3", "--adjacency", "add-remove"]);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("method,alpha,epsilon,m,sigma,q,B,D,steps\n"));
    assert!(!text.contains('\r'));
    let r = rows(&text);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][0], "fswor_ar");
    assert_eq!(r[0][3], "3");
    let eps: f64 = r[0][2].parse().unwrap();
    let want = fsrdp::step_add_remove(2.0f64, 6.0, 0.0024, 3).unwrap().value;
    assert!((eps / want - 1.0).abs() < 1e-11);
}

#[test]
fn curve_rows_are_sorted_and_deterministic() {
    let mut args = vec!["curve"];
    args.extend(BASE);
    args.extend(["--epochs", "2", "--alpha-grid", "1.5,2:4", "--method", "wang_upper,fswor_ro,wang_lower"]);
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = rows(&stdout(&a));
    let methods: Vec<&str> = r.iter().map(|x| x[0].as_str()).collect();
    let mut sorted = methods.clone();
    sorted.sort();
    assert_eq!(methods, sorted);
    // Lower bounds are reported on integer orders only.
    assert_eq!(r.iter().filter(|x| x[0] == "wang_lower").count(), 3);
    assert_eq!(r[0][8], (2 * 417).to_string());
}

#[test]
fn sigma_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("sigmas.txt");
    std::fs::write(&sig, "# schedule\n6\n6\n\n8\n").unwrap();
    let out = dir.path().join("curve.csv");
    let o = run(&[
        "curve",
        "--batch",
        "120",
        "--dataset",
        "50000",
        "--sigma-file",
        sig.to_str().unwrap(),
        "--alpha-grid",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let r = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][4], "");
    assert_eq!(r[0][8], "3");
    let eps: f64 = r[0][2].parse().unwrap();
    let step = |s: f64| fsrdp::step_replace_one(2.0f64, s, 0.0024, 4).unwrap().value;
    assert!((eps / (2.0 * step(6.0) + step(8.0)) - 1.0).abs() < 1e-11);
}

#[test]
fn convert_rows_and_lower_bound_rejection() {
    let mut args = vec!["convert"];
    args.extend(BASE);
    args.extend(["--steps", "1000", "--alpha-grid", "2:64", "--variant", "classic"]);
    let o = run(&args);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 7);
    let eps: Vec<f64> = r.iter().map(|x| x[2].parse().unwrap()).collect();
    assert!(eps.windows(2).all(|w| w[1] > w[0]));
    assert!(r.iter().all(|x| x[4] == "classic"));

    let mut args = vec!["convert"];
    args.extend(BASE);
    args.extend(["--steps", "1", "--method", "fswr_lower"]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lower bound"));
}

#[test]
fn compare_has_ratio_columns() {
    let mut args = vec!["compare"];
    args.extend(BASE);
    args.extend(["--steps", "1", "--alpha-grid", "1.5,2", "--method", "fswor_ro,wang_upper,wang_lower"]);
    let o = run(&args);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("alpha,fswor_ro,wang_upper,wang_lower,wang_upper/fswor_ro,wang_lower/fswor_ro\n"));
    let r = rows(&text);
    assert_eq!(r[0][3], "");
    assert_eq!(r[0][5], "");
    let ratio: f64 = r[1][4].parse().unwrap();
    assert!(ratio > 3.0 && ratio < 5.0);
}

#[test]
fn variance_command() {
    let dir = tempfile::tempdir().unwrap();
    let pop = dir.path().join("pop.txt");
    std::fs::write(&pop, "1\n2\n3\n10\n").unwrap();
    let o = run(&["variance", "--population", pop.to_str().unwrap(), "--batch", "2"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r[0], ["4", "2", "7.125", "4.16666666667", "6.25", "0.584795321637", "1.5"]);
}

#[test]
fn domain_and_usage_errors() {
    let cases: [&[&str]; 5] = [
        &["curve", "--batch", "120", "--dataset", "50000", "--sigma", "6", "--steps", "0"],
        &["curve", "--batch", "120", "--dataset", "100", "--sigma", "6", "--steps", "1"],
        &["curve", "--batch", "1", "--dataset", "10", "--sigma", "6", "--steps", "1", "--alpha-grid", "1"],
        &["curve", "--batch", "1", "--dataset", "10", "--sigma", "6", "--steps", "1", "--mode", "poisson", "--adjacency", "add-remove"],
        &["curve", "--nonsense"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert!(!Path::new("nonexistent").exists());
    let o = run(&["variance", "--population", "nonexistent", "--batch", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_rejects_too_few_samples() {
    let o = run(&["validate", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
}
