use std::path::Path;
use std::process::{Command, Output};

use pag::cli::read_csv;

fn pag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pag")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_models_prints_eight_rows() {
    let o = pag(&["list-models"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().skip(1).count(), 8);
    assert!(text.contains("C233"));
}

#[test]
fn unknown_case_exits_2() {
    let o = pag(&["list-models", "--case", "C99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown case"));
}

#[test]
fn validate_reports_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "g.json", r#"{"model":{"case":"C212","params":{"c1":2}},"t_span":[0,1]}"#);
    assert_eq!(pag(&["validate", "--config", &good]).status.code(), Some(0));
    let bad = write(dir.path(), "b.json", r#"{"model":{"case":"C212","params":{"c1":0}},"t_span":[0,1]}"#);
    assert_eq!(pag(&["validate", "--config", &bad]).status.code(), Some(2));
    let typo = write(dir.path(), "t.json", r#"{"model":{"case":"C212","parms":{}},"t_span":[0,1]}"#);
    assert_eq!(pag(&["validate", "--config", &typo]).status.code(), Some(2));
    assert_eq!(pag(&["validate", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn drift_flow_csv_has_shifted_time_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model":{"case":"C11","params":{"c1":0.5}},"initial":{"x":[0.25,0],"p":[0,0]},"t_span":[0,1],
            "integrator":{"method":"rk4_fixed","step":0.01}}"#,
    );
    let out = dir.path().join("o.csv");
    let o = pag(&["integrate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("stop_reason=horizon"));
    let t = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(t.header, ["t", "x1", "x2", "p1", "p2", "u", "H", "I_p2"]);
    assert_eq!(t.rows.len(), 101);
    for r in &t.rows {
        assert!((r[1] - (r[0] + 0.25)).abs() < 1e-12);
    }

    let strided = dir.path().join("s.csv");
    let o = pag(&["integrate", "--config", &cfg, "--out", strided.to_str().unwrap(), "--stride", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = read_csv(std::fs::File::open(&strided).unwrap()).unwrap();
    assert_eq!(s.rows.len(), 11);
    assert_eq!(s.rows[1], t.rows[10]);
}

#[test]
fn k_negative_flow_exits_3_with_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "k.json",
        r#"{"model":{"case":"C12","params":{"j0":0,"g0":1}},"initial":{"x":[0,1],"p":[-1,0]},"t_span":[0,3]}"#,
    );
    let out = dir.path().join("k.csv");
    let o = pag(&["integrate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("stop_reason=blow_up"));
}

#[test]
fn closed_form_grid_and_poles() {
    let dir = tempfile::tempdir().unwrap();
    let lin = write(
        dir.path(),
        "l.json",
        r#"{"model":{"case":"C11","params":{"c1":0}},"initial":{"family":{"case11":{"c2":1,"c3":0}}},
            "t_span":[0,1],"grid_step":0.1}"#,
    );
    let o = pag(&["closed-form", "--config", &lin]);
    assert_eq!(o.status.code(), Some(0));
    let t = read_csv(&o.stdout[..]).unwrap();
    assert_eq!(t.rows.len(), 11);
    for r in &t.rows {
        assert_eq!(r[2], r[0]);
    }

    let cubic = write(
        dir.path(),
        "c.json",
        r#"{"model":{"case":"C211","params":{"c2":0,"c3":0}},"initial":{"family":{"case211":{"coeffs":[0,0,0,1]}}},
            "t_span":[0,2],"grid_step":0.25}"#,
    );
    let o = pag(&["closed-form", "--config", &cubic]);
    assert_eq!(o.status.code(), Some(0));
    for r in read_csv(&o.stdout[..]).unwrap().rows {
        assert!((r[2] - r[0].powi(3)).abs() < 1e-12);
    }

    let tan = write(
        dir.path(),
        "t.json",
        r#"{"model":{"case":"C212","params":{"c1":1}},"initial":{"family":{"case212":{"tan_family":{"a":1,"b":1,"c":0,"d":0}}}},
            "t_span":[0,2],"grid_step":0.1}"#,
    );
    let o = pag(&["closed-form", "--config", &tan]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t = 1.57"));
}

#[test]
fn check_suites() {
    for case in ["C11", "C12", "C211", "C212", "C22", "C231", "C232", "C233"] {
        let o = pag(&["check", "--case", case, "--suite", "all"]);
        assert_eq!(o.status.code(), Some(0), "{case}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let o = pag(&["check", "--case", "C231", "--suite", "appendix"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for tag in ["appendix/A9", "appendix/A10", "appendix/A19"] {
        assert!(text.contains(tag), "{text}");
    }
    let o = pag(&["check", "--case", "C12", "--suite", "duality"]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("C12 PASS duality/max_error"));
}

#[test]
fn check_output_depends_on_seed_only() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_pag"))
            .args(["check", "--case", "C22", "--suite", "homogeneity"])
            .env("PAG_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("7"), run("7"));
    let bad = Command::new(env!("CARGO_BIN_EXE_pag"))
        .args(["check", "--case", "C22"])
        .env("PAG_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn compare_examples() {
    let dir = tempfile::tempdir().unwrap();
    let c11 = write(
        dir.path(),
        "a.json",
        r#"{"model":{"case":"C11","params":{"c1":1}},"initial":{"x":[0,0],"p":[0.3,2]},"t_span":[0,1]}"#,
    );
    let o = pag(&["compare", "--config", &c11]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let d: f64 = text.split("max_discrepancy=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(d < 1e-8, "{text}");

    let line = write(
        dir.path(),
        "b.json",
        r#"{"model":{"case":"C12","params":{"j0":0.5,"g0":2}},"initial":{"x":[0,1],"p":[0,-1]},"t_span":[0,1]}"#,
    );
    let o = pag(&["compare", "--config", &line]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("subcase=c1zero_c2zero"));

    let c22 = write(
        dir.path(),
        "c.json",
        r#"{"model":{"case":"C22"},"initial":{"x":[0,1,0],"p":[0,0,0]},"t_span":[0,1]}"#,
    );
    let o = pag(&["compare", "--config", &c22]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no closed form"));
}
