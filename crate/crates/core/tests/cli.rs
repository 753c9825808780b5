use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trimstab"))
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("trimstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const STABILITY: &str = "experiment = stability
geometry = identity
region.kind = half_plane
region.threshold = 0.757
degree = 2
levels = 3
eps_list = 1e-2, 1e-4
theta = 1
beta = 1
stab_mode = none, parametric
sides = neumann
";

const CONVERGENCE: &str = "experiment = convergence
geometry = quarter_annulus
region.kind = disk
region.radius = 0.76
degree = 2
levels = 2, 3, 4
theta = 0.1
stab_mode = parametric
solution = exp_sin
";

#[test]
fn stability_csv_header() {
    let cfg = scratch("eps.cfg", STABILITY);
    let out = run(&["stability", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("eps,mode,lambda_max,lambda_min\n"));
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.ends_with('\n'));
}

#[test]
fn convergence_csv_header_and_out_flag() {
    let cfg = scratch("test1.cfg", CONVERGENCE);
    let out_path = cfg.with_file_name("conv.csv");
    let out = run(&[
        "convergence",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h,dofs,err_nnorm,err_l2,rate_nnorm"));
    assert!(lines.next().unwrap().ends_with(','));
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["stability", "--config", "/nonexistent/eps.cfg"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["stability"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--config", "x", "--bogus"]).status.code(),
        Some(2)
    );
    let bad = scratch(
        "bad.cfg",
        "experiment = stability\ngeometry = identity\nlevels = 3\n",
    );
    assert_eq!(
        run(&["stability", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    // wrong subcommand for the configured experiment
    let conv = scratch("conv.cfg", CONVERGENCE);
    assert_eq!(
        run(&["stability", "--config", conv.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    // a bad cell with no good neighbor in reach is a numerical failure
    let hopeless = scratch(
        "hopeless.cfg",
        "experiment = convergence\ngeometry = identity\nregion.kind = half_plane\nregion.threshold = 0.1\nlevels = 0\ntheta = 0.5\n",
    );
    assert_eq!(
        run(&[
            "convergence",
            "--config",
            hopeless.to_str().unwrap(),
            "--quiet"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn verify_passes() {
    let out = run(&["verify"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn output_is_independent_of_thread_count() {
    let cfg = scratch("det.cfg", CONVERGENCE);
    let csv = |threads: &str| {
        let out = bin()
            .args(["convergence", "--config", cfg.to_str().unwrap(), "--quiet"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let one = csv("1");
    assert_eq!(one, csv("4"));
    assert_eq!(one, csv("4"));
}

#[test]
fn solve_exports_the_matrix() {
    let cfg = scratch(
        "solve.cfg",
        &CONVERGENCE
            .replace("convergence", "solve")
            .replace("2, 3, 4", "2"),
    );
    let mtx = cfg.with_file_name("a.mtx");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--export-matrix",
        mtx.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("h,dofs,err_nnorm,err_l2\n"));
    let text = std::fs::read_to_string(mtx).unwrap();
    let head: Vec<usize> = text
        .lines()
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(head[0], head[1]);
    assert_eq!(text.lines().count(), head[2] + 1);
}
