//! End-to-end tests of the command-line interface: exit codes, output
//! artifacts and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starcurv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn solve_radial_default_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = run(&[
        "solve",
        "--out",
        out_dir.to_str().unwrap(),
        "--resolution",
        "64",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("solution.csv").is_file());
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"converged\": true"));
    // wall time never enters the canonical report
    assert!(!report.contains("wall"));
}

#[test]
fn solve_with_explicit_psi_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
n = 1
m = 1
k = -1
r1 = 0.8
r2 = 1.6
resolution = 64
psi = "cosh(1.2)/sinh(rho)"

[solver]
continuation_steps = 2
linear_solver = "direct-dense"
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    assert!(csv.starts_with("node_index,theta,z,v,lambda_1,S_1,residual"));
    // radial prescription: z identically 1.2
    for line in csv.lines().skip(1) {
        let z: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((z - 1.2).abs() < 1e-10);
    }
}

#[test]
fn flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    // config prescribes a monotone-violating psi; the flag replaces it
    std::fs::write(&config, "resolution = 32\npsi = \"coth(rho)\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "check-psi",
        "--config",
        config.to_str().unwrap(),
        "--psi",
        "cosh(1.2)/sinh(rho)",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_psi_rejects_coth_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "check-psi",
        "--psi",
        "coth(rho)",
        "--resolution",
        "32",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let conditions =
        std::fs::read_to_string(dir.path().join("o").join("conditions.json")).unwrap();
    assert!(conditions.contains("\"monotone_ok\": false"));
}

#[test]
fn strict_psi_rejects_equality_case() {
    let dir = tempfile::tempdir().unwrap();
    // the equality-case radial prescription is monotone but not strictly
    let out = run(&[
        "check-psi",
        "--psi",
        "cosh(1.2)/sinh(rho)",
        "--resolution",
        "32",
        "--strict-psi",
        "true",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "this is not valid toml [").unwrap();
    let out = run(&["solve", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let out = run(&["solve", "--K", "2"]);
    assert_eq!(code(&out), 2);

    let out = run(&["solve", "--psi", "cosh(1.2)/snh(rho)"]);
    assert_eq!(code(&out), 2);

    let out = run(&["solve", "--m", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_with_bad_barriers_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // root of the radial prescription lies far outside the annulus, so the
    // outer barrier condition fails
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "r1 = 0.8\nr2 = 1.0\nresolution = 32\npsi = \"cosh(3.0)/sinh(rho)\"\n",
    )
    .unwrap();
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn iteration_starved_solve_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    // a valid prescription, but one Newton iteration from a displaced guess
    // cannot reach the tolerance
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
resolution = 32
psi = "cosh(1.2)*exp(0.24)*exp(-0.2*rho)/sinh(rho)"

[solver]
max_newton_iters = 1
continuation_steps = 1
initial_guess = 0.9
"#,
    )
    .unwrap();
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn verify_identities_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&[
        "verify-identities",
        "--resolution",
        "48",
        "--seed",
        "11",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let identities = std::fs::read_to_string(out_dir.join("identities.json")).unwrap();
    assert!(identities.contains("\"all_pass\": true"));
    for name in [
        "det_identity",
        "dual_path_lambda",
        "scaling_expansion",
        "scaling_inequality",
        "ellipticity_negative",
        "q_profile_equality",
        "q_profile_monotone",
        "boundary_touch",
    ] {
        assert!(identities.contains(name), "missing check {name}");
    }
}

fn solve_to(dir: &Path, extra: &[&str]) -> std::path::PathBuf {
    let out_dir = dir.join(format!("run{}", extra.join("_").replace('.', "p")));
    let mut args = vec![
        "solve",
        "--resolution",
        "64",
        "--out",
        out_dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out_dir
}

#[test]
fn compare_identical_solutions_gives_c_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = solve_to(dir.path(), &["--psi", "cosh(1.2)/sinh(rho)"]);
    let b = solve_to(dir.path(), &["--psi", "cosh(1.2)/sinh(rho)", "--seed", "1"]);
    let out_dir = dir.path().join("cmp");
    let out = run(&[
        "compare",
        a.join("solution.csv").to_str().unwrap(),
        b.join("solution.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let scaling = std::fs::read_to_string(out_dir.join("scaling.json")).unwrap();
    assert!(scaling.contains("\"related\": true"));
    assert!(scaling.contains("\"identical\": true"));
}

#[test]
fn compare_unrelated_solutions_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let a = solve_to(dir.path(), &["--psi", "cosh(1.2)/sinh(rho)"]);
    // an angular modulation gives a non-radial solution; comparing against
    // the sphere the per-node ratios spread and no scaling constant fits
    let b = solve_to(
        dir.path(),
        &["--psi", "cosh(1.2)/sinh(rho)*(1+0.1*cos(theta))"],
    );
    let out_dir = dir.path().join("cmp");
    let out = run(&[
        "compare",
        a.join("solution.csv").to_str().unwrap(),
        b.join("solution.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn compare_mismatched_grids_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let a = solve_to(dir.path(), &["--psi", "cosh(1.2)/sinh(rho)"]);
    let b_dir = dir.path().join("smaller");
    let out = run(&[
        "solve",
        "--resolution",
        "32",
        "--psi",
        "cosh(1.2)/sinh(rho)",
        "--out",
        b_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "compare",
        a.join("solution.csv").to_str().unwrap(),
        b_dir.join("solution.csv").to_str().unwrap(),
        "--out",
        dir.path().join("cmp").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run_once = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let out_dir = dir.path().join(tag);
        let out = run(&[
            "solve",
            "--resolution",
            "64",
            "--psi",
            "cosh(1.2)*exp(0.24)*exp(-0.2*rho)/sinh(rho)",
            "--seed",
            "7",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        (
            std::fs::read(out_dir.join("report.json")).unwrap(),
            std::fs::read(out_dir.join("solution.csv")).unwrap(),
        )
    };
    let (json1, csv1) = run_once("a");
    let (json2, csv2) = run_once("b");
    assert_eq!(json1, json2, "report.json differs between identical runs");
    assert_eq!(csv1, csv2, "solution.csv differs between identical runs");
}

#[test]
fn elliptic_solve_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
k = 1
r1 = 0.5
r2 = 1.2
resolution = 64
psi = "cot(rho)"
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for line in std::fs::read_to_string(out_dir.join("solution.csv"))
        .unwrap()
        .lines()
        .skip(1)
    {
        let z: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((z - 0.85).abs() < 1e-10);
    }
}

#[test]
fn n2_solve_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
n = 2
m = 2
resolution = 12
psi = "pow(cosh(1.2),2)/pow(sinh(rho),2)"
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    assert!(csv.starts_with("node_index,theta,phi,z,v,lambda_1,lambda_2,S_1,S_2,residual"));
    assert_eq!(csv.lines().count() - 1, 12 * 24);
}
