use std::process::{Command, Output};

fn bcb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcb"))
        .args(args)
        .env_remove("BCB_THREADS")
        .output()
        .expect("bcb runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const ORIGIN: &str = r#"{"b1":[0,0],"b2":[0,0]}"#;

#[test]
fn bergman_kernel_at_origin() {
    let out = bcb(&["kernel", "eval", "--Z", ORIGIN, "--W", ORIGIN]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let expected = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
    for slot in ["b1", "b2"] {
        assert!((v[slot][0].as_f64().unwrap() - expected).abs() < 1e-12);
        assert!(v[slot][1].as_f64().unwrap().abs() < 1e-15);
    }
}

#[test]
fn cartesian_points_are_accepted() {
    let z = r#"{"z1":[0.1,0.0],"z2":[0.0,0.2]}"#;
    let out = bcb(&["kernel", "eval", "--kind", "tilde", "--Z", z, "--W", ORIGIN]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn point_outside_domain_is_domain_error() {
    let far = r#"{"b1":[2,0],"b2":[0,0]}"#;
    let out = bcb(&["kernel", "eval", "--kind", "hat", "--Z", far, "--W", ORIGIN]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_point_is_usage_error() {
    let out = bcb(&["kernel", "eval", "--Z", "{b1:", "--W", ORIGIN]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_kernel_kind_is_usage_error() {
    let out = bcb(&[
        "kernel", "eval", "--kind", "szego", "--Z", ORIGIN, "--W", ORIGIN,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = bcb(&["verify", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_label_is_usage_error() {
    let out = bcb(&["classify", "no-such-field"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn order_too_small_is_usage_error() {
    let out = bcb(&["integrate", "one", "--order", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_domain_file_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dom.json");
    std::fs::write(&path, r#"{"omega1": {"disk": {"radius": -1}}}"#).unwrap();
    let out = bcb(&["classify", "square", "--domain", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

fn membership(label: &str) -> serde_json::Value {
    let out = bcb(&["classify", label]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    json(&out)["membership"].clone()
}

#[test]
fn classify_holomorphic_square() {
    let m = membership("square");
    for k in ["ker_star", "ker_dagger", "ker_bar", "hol_bc"] {
        assert_eq!(m[k], true, "{k}");
    }
}

#[test]
fn classify_mixed_star_bar() {
    let m = membership("mixed-star-bar");
    assert_eq!(m["ker_star_bar"], true);
    assert_eq!(m["ker_dagger"], false);
    assert_eq!(m["hol_bc"], false);
}

#[test]
fn classify_antiholomorphic_in_e() {
    let m = membership("antiholo-e");
    assert_eq!(m["ker_star"], false);
}

#[test]
fn integrate_constant_gives_area_product() {
    let out = bcb(&["integrate", "one", "--order", "8"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    for slot in ["b1", "b2"] {
        assert!((v["integral"][slot][0].as_f64().unwrap() - pi2).abs() < 1e-10);
    }
}

#[test]
fn kernel_table_is_csv() {
    let out = bcb(&["kernel", "table", "--W", ORIGIN, "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));
}

#[test]
fn output_is_deterministic_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (p, threads) in [(&a, "1"), (&b, "2")] {
        let out = Command::new(env!("CARGO_BIN_EXE_bcb"))
            .args([
                "verify",
                "--suite",
                "kernels-projected",
                "--order",
                "12",
                "--seed",
                "7",
            ])
            .arg("--output")
            .arg(p)
            .env("BCB_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.stdout.is_empty());
        assert!(matches!(out.status.code(), Some(0) | Some(1)));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn bad_thread_count_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_bcb"))
        .args(["classify", "square"])
        .env("BCB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
