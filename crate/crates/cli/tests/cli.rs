use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_painleve-tau"));
    c.env_remove("PAINLEVE_TAU_BITS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn result<'a>(v: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    v["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no result {name}"))
}

#[test]
fn cumulants_are_exact_fractions() {
    let out = run(&["cumulants", "--n", "2", "--alpha", "3", "--order", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(result(&v, "kappa_1")["value"], "2/3");
    assert_eq!(result(&v, "kappa_2")["value"], "5/36");
    assert_eq!(result(&v, "kappa_1")["bits"], 0);
}

#[test]
fn cumulants_csv_has_header_and_rows() {
    let out = run(&[
        "cumulants",
        "--n",
        "2",
        "--alpha",
        "3",
        "--order",
        "2",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("command,name,value,method,bits,tol_achieved")
    );
    assert!(text
        .lines()
        .any(|l| l.starts_with("cumulants,kappa_2,5/36,")));
}

#[test]
fn mgf_routes_agree() {
    let out = run(&[
        "mgf", "--n", "2", "--alpha", "1", "--t", "1", "--method", "all",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["results"].as_array().unwrap().len() >= 5);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = bin()
            .args(["sweep", "--n", "3", "--alpha", "1/2", "--t-grid", "1,1/4,3"])
            .arg("--out")
            .arg(p)
            .output()
            .unwrap();
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn sampling_is_reproducible_from_seed() {
    let args = [
        "sample", "--n", "3", "--alpha", "5", "--seed", "11", "--count", "20000",
    ];
    let (x, y) = (run(&args), run(&args));
    assert!(x.status.success());
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(run(&["mgf", "--n", "2", "--t", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["mgf", "--n", "2", "--alpha", "-3", "--t", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["mgf", "--n", "2", "--alpha", "x/y", "--t", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["limit-series", "Y", "--alpha", "2", "--order", "4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_certificate_exits_3() {
    let out = run(&[
        "mgf",
        "--n",
        "2",
        "--alpha",
        "1",
        "--t",
        "1",
        "--max-bits",
        "256",
        "--tol",
        "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bits_from_environment() {
    let out = bin()
        .args([
            "mgf", "--n", "2", "--alpha", "1", "--t", "1", "--tol", "1e-20",
        ])
        .env("PAINLEVE_TAU_BITS", "128")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json(&out)["inputs"]["bits"], "128");

    let bad = bin()
        .args(["mgf", "--n", "2", "--alpha", "1", "--t", "1"])
        .env("PAINLEVE_TAU_BITS", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn backlund_t1_shifts_parameters() {
    let out = run(&[
        "backlund", "t1", "--v1", "1", "--v2", "0", "--p", "1/2", "--q", "3", "--t", "2",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(result(&v, "v1")["value"], "2");
    assert_eq!(result(&v, "v2")["value"], "1");
}

#[test]
fn quick_suite_passes() {
    let out = run(&["verify", "--suite", "quick"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let v = json(&out);
    assert!(v["checks"].as_array().unwrap().len() >= 12);
}
