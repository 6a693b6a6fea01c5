use std::path::Path;
use std::process::Command;

fn heatlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const SMALL: &str = r#"
name = "small"
formulas = ["finite-full", "finite-leading"]
{extra}

[solver]
geometry = "circle"
radius = 0.5
d_plus = 0.2
d_minus = 1.0
lambda = 17.0
h = 0.03125
t_end = 2e-3
container_factor = 2.0
sample_times = [5e-4, 1e-3, 2e-3]
{solver_extra}
"#;

fn write_config(dir: &Path, extra: &str, solver_extra: &str) -> String {
    let p = dir.join("small.toml");
    std::fs::write(
        &p,
        SMALL
            .replace("{extra}", extra)
            .replace("{solver_extra}", solver_extra),
    )
    .unwrap();
    p.display().to_string()
}

#[test]
fn constants_are_printed() {
    let (code, out, _) = heatlab(&["constants"]);
    assert_eq!(code, 0);
    assert!(out.contains("C0,0.2217963"));
    assert!(out.contains("C1,0.5206830"));
    assert!(out.contains("1,0.2769"));
}

#[test]
fn compare_writes_files_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "", "");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let (code, out, err) =
            heatlab(&["compare", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("experiment small"));
    }
    for f in [
        "small.compare.csv",
        "small.numeric.csv",
        "small.finite-full.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap()
        );
    }
}

#[test]
fn failed_check_gives_status_two_only_with_flag() {
    let dir = tempfile::tempdir().unwrap();
    let extra = "[[checks]]\nkind = \"deviation\"\nformula = \"finite-full\"\nt_min = 5e-4\nt_max = 2e-3\nmax = 1e-12\n";
    let cfg = write_config(dir.path(), extra, "");
    assert_eq!(heatlab(&["compare", "--config", &cfg]).0, 0);
    let (code, out, _) = heatlab(&["compare", "--config", &cfg, "--check"]);
    assert_eq!(code, 2);
    assert!(out.contains("FAIL deviation"));
}

#[test]
fn numerical_failure_gives_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "",
        "picard = { tol = 1e-30, max_iter = 1, relaxation = 0.7 }",
    );
    let (code, _, err) = heatlab(&[
        "compare",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("Picard"));
    let partial = std::fs::read_to_string(dir.path().join("o/small.numeric.csv")).unwrap();
    assert!(partial.starts_with("# heatlab experiment=small"));
}

#[test]
fn asymptote_runs_without_solver() {
    let (code, out, _) = heatlab(&["asymptote", "--preset", "fig3a"]);
    assert_eq!(code, 0);
    let row = out.lines().find(|l| l.starts_with("1.0000")).unwrap();
    assert_eq!(row.split(',').nth(1), Some(""));
    assert!(out
        .lines()
        .any(|l| l.starts_with("t,N_numeric,N_regular-infinite")));
}

#[test]
fn geometry_and_sausage_tables() {
    let (code, out, _) = heatlab(&["geometry", "--preset", "fig5b"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("# heatlab experiment=fig5b config_sha256="));
    assert_eq!(
        out.lines()
            .filter(|l| l.contains(',') && !l.starts_with('#'))
            .count(),
        4 * 64 + 1
    );
    let (code, out, _) = heatlab(&[
        "sausage",
        "--shape",
        "circle",
        "--count",
        "3",
        "--mode",
        "monte-carlo",
        "--samples",
        "1000",
        "--seed",
        "5",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("seed=5"));
    let again = heatlab(&[
        "sausage",
        "--shape",
        "circle",
        "--count",
        "3",
        "--mode",
        "monte-carlo",
        "--samples",
        "1000",
        "--seed",
        "5",
    ])
    .1;
    assert_eq!(out, again);
}

#[test]
fn bad_input_gives_status_one() {
    assert_eq!(heatlab(&["compare", "--preset", "fig9"]).0, 1);
    assert_eq!(heatlab(&["compare"]).0, 1);
    assert_eq!(heatlab(&["frobnicate"]).0, 1);
    assert_eq!(heatlab(&["--help"]).0, 0);
}
