use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ordered-copulas")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Data rows as `f64` vectors, skipping the comment and header.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn output_starts_with_comment_and_header() {
    let (code, out, _) = run(&["bounds", "--config", &data("example61.json"), "--grid", "3"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# seed=none command=bounds"));
    assert_eq!(lines.next().unwrap(), "x1,x2,L,upper,P");
    assert_eq!(lines.count(), 9);
}

#[test]
fn disjoint_uniforms_give_the_lower_frechet_bound() {
    let (code, out, _) = run(&["bounds", "--config", &data("disjoint.json"), "--grid", "3"]);
    assert_eq!(code, 0);
    for r in rows(&out) {
        let (f1, f2) = ((r[0] - 1.0).clamp(0.0, 1.0), r[1].clamp(0.0, 1.0));
        assert!((r[2] - (f1 + f2 - 1.0).max(0.0)).abs() <= 1e-12, "{r:?}");
    }
}

#[test]
fn identical_marginals_collapse_the_bounds() {
    let (code, out, _) = run(&["bounds", "--config", &data("identical.json"), "--grid", "5"]);
    assert_eq!(code, 0);
    for r in rows(&out) {
        let want = r[0].min(r[1]);
        assert!((r[2] - want).abs() <= 1e-12 && (r[3] - want).abs() <= 1e-12, "{r:?}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["bounds", "--config", &data("example61.json"), "--grid", "0"]).0, 2);
    assert_eq!(run(&["tau-rho-curve", "cauchy", "--points", "3"]).0, 2);
    assert_eq!(run(&["bounds", "--config", "/nonexistent/config.json", "--grid", "3"]).0, 2);
    let bad = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(bad.path(), r#"{"F1": {"type": "power", "alpha": -1}, "F2": {"type": "uniform", "a": 0, "b": 1}}"#)
        .unwrap();
    let (code, _, err) = run(&["validate", "--config", bad.path().to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    assert!(!err.is_empty());
}

#[test]
fn sampler_preconditions_exit_with_three() {
    let (code, _, err) = run(&["sample", "--config", &data("identical.json"), "--law", "L", "--n", "10", "--seed", "1"]);
    assert_eq!(code, 3);
    assert!(!err.is_empty());
}

#[test]
fn samples_are_reproducible_and_ordered() {
    for law in ["comonotone", "L", "maxent"] {
        let args = ["sample", "--config", &data("example61.json"), "--law", law, "--n", "300", "--seed", "9"];
        let (code, a, _) = run(&args);
        assert_eq!(code, 0);
        assert_eq!(a, run(&args).1, "{law}");
        let r = rows(&a);
        assert_eq!(r.len(), 300);
        assert!(r.iter().all(|p| p[0] >= p[1]), "{law}");
    }
}

#[test]
fn maxent_density_matches_the_closed_form() {
    let (code, out, _) = run(&["maxent-density", "--config", &data("example61.json"), "--grid", "5"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    let at = r.iter().find(|p| (p[0] - 0.5).abs() < 1e-6 && (p[1] - 0.25).abs() < 1e-6).unwrap();
    assert!((at[2] - 16.0 / 9.0).abs() <= 1e-4, "{at:?}");
}

#[test]
fn validate_reports_missing_maxent() {
    let (code, out, _) = run(&["validate", "--config", &data("identical.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("no-maxent: entropy condition fails"), "{out}");
}

#[test]
fn validate_flags_a_d3_violation() {
    let (code, out, _) = run(&["validate", "--config", &data("cubic_diagonal.json")]);
    assert_eq!(code, 3);
    let row = out.lines().find(|l| l.starts_with("diagonal_D3,")).unwrap();
    assert!(row.starts_with("diagonal_D3,fail,"), "{row}");
}

#[test]
fn tau_rho_curve_hits_the_endpoints() {
    let (code, out, _) = run(&["tau-rho-curve", "power", "--points", "4"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 4);
    let last = r.last().unwrap();
    assert_eq!((last[0], last[1], last[2]), (1.0, 1.0, 1.0));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_ordered-copulas"))
        .args(["bounds", "--config", &data("example61.json"), "--grid", "3"])
        .env("ORDERED_COPULAS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
