use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graded-fem"))
        .args(args)
        .current_dir(dir)
        .env_remove("GRADFEM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{out}"))
        .trim()
        .to_string()
}

#[test]
fn rescaled_mesh_matches_reference_count() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "mesh",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.3",
            "--h",
            "0.0625",
        ],
        d.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = stdout(&o);
    assert_eq!(field(&s, "vertices:"), "856");
    assert!(s.contains("validation: ok"));
    assert!(s.contains("grading audit: pass"));
    assert!(d
        .path()
        .join("point2d_rescaled_mu0.3_h0.0625.mesh")
        .exists());
}

#[test]
fn constructed_mesh_is_close_to_reference_count() {
    let d = tempfile::tempdir().unwrap();
    let vtk = d.path().join("m.vtk");
    let o = run(
        &[
            "mesh",
            "--problem",
            "point2d",
            "--strategy",
            "constructed",
            "--mu",
            "0.3",
            "--h",
            "0.0625",
            "--vtk",
        ],
        d.path(),
    );
    // --vtk needs a value
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &[
            "mesh",
            "--problem",
            "point2d",
            "--strategy",
            "constructed",
            "--mu",
            "0.3",
            "--h",
            "0.0625",
            "--vtk",
            vtk.to_str().unwrap(),
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let n: f64 = field(&stdout(&o), "vertices:").parse().unwrap();
    assert!((n - 730.0).abs() / 730.0 < 0.05, "N = {n}");
    assert!(std::fs::read_to_string(vtk)
        .unwrap()
        .starts_with("# vtk DataFile"));
}

#[test]
fn invalid_configuration_exits_with_code_two() {
    let d = tempfile::tempdir().unwrap();
    let base = [
        "mesh",
        "--problem",
        "point2d",
        "--strategy",
        "rescaled",
        "--h",
        "0.0625",
    ];
    for extra in [&["--mu", "0"][..], &["--mu", "1.5"], &[]] {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        let o = run(&args, d.path());
        assert_eq!(o.status.code(), Some(2), "args {args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    }
    let o = run(
        &[
            "mesh",
            "--problem",
            "point4d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.3",
            "--h",
            "0.1",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_mu_reports_bounds_and_missing_theory() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "check-mu",
            "--problem",
            "segment3d",
            "--strategy",
            "constructed",
            "--mu",
            "0.4",
            "--beta",
            "0.4",
            "--sigma",
            "0.5",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("bound: mu < 0.700000"), "{s}");
    assert!(s.contains("bound: mu < 0.500000"), "{s}");
    let o = run(
        &[
            "check-mu",
            "--problem",
            "segment3d",
            "--strategy",
            "anisotropic",
            "--mu",
            "0.4",
            "--beta",
            "0",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not give estimates for the L2 norm"));
    let o = run(
        &[
            "check-mu",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.6",
            "--beta",
            "0",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("mu = 0.6: fail"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# study\nproblem = point2d\nstrategy = rescaled\nmu = 0.3\nh = 0.125\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = run(&["mesh", "--config", c], d.path());
    assert_eq!(from_file.status.code(), Some(0));
    let with_flag = run(&["mesh", "--config", c, "--h", "0.0625"], d.path());
    assert_eq!(with_flag.status.code(), Some(0));
    assert_eq!(field(&stdout(&with_flag), "vertices:"), "856");
    assert_ne!(field(&stdout(&from_file), "vertices:"), "856");
    std::fs::write(&cfg, "mu 0.3\n").unwrap();
    assert_eq!(
        run(&["mesh", "--config", c], d.path()).status.code(),
        Some(2)
    );
}

#[test]
fn out_dir_falls_back_to_environment() {
    let d = tempfile::tempdir().unwrap();
    let target = d.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_graded-fem"))
        .args([
            "mesh",
            "--problem",
            "point2d",
            "--strategy",
            "uniform",
            "--h",
            "0.25",
        ])
        .current_dir(d.path())
        .env("GRADFEM_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("point2d_uniform_mu1_h0.25.mesh").exists());
}

#[test]
fn solve_on_reimported_mesh_reproduces_errors() {
    let d = tempfile::tempdir().unwrap();
    let common = [
        "--problem",
        "point2d",
        "--strategy",
        "rescaled",
        "--mu",
        "0.4",
        "--beta",
        "0.4",
        "--h",
        "0.0625",
    ];
    let mesh = d.path().join("a.mesh");
    let mut args = vec!["mesh"];
    args.extend_from_slice(&common);
    args.extend_from_slice(&["--output", mesh.to_str().unwrap()]);
    assert_eq!(run(&args, d.path()).status.code(), Some(0));

    let mut args = vec!["solve"];
    args.extend_from_slice(&common);
    let direct = run(&args, d.path());
    assert_eq!(direct.status.code(), Some(0));
    args.extend_from_slice(&["--mesh-in", mesh.to_str().unwrap(), "--output", "b.mtx"]);
    let again = run(&args, d.path());
    assert_eq!(again.status.code(), Some(0));
    for key in ["error L2:", "error L2beta:", "vertices:"] {
        assert_eq!(field(&stdout(&direct), key), field(&stdout(&again), key));
    }
    let e: f64 = field(&stdout(&direct), "error L2:").parse().unwrap();
    assert!((e - 5.84e-4).abs() < 0.1e-4, "L2 error {e}");
    assert!(std::fs::read_to_string(d.path().join("b.mtx"))
        .unwrap()
        .starts_with("%%MatrixMarket"));
}

#[test]
fn corrupt_mesh_file_is_a_mesh_stage_failure() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.mesh"), "not a mesh\n").unwrap();
    let o = run(
        &[
            "solve",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.4",
            "--mesh-in",
            "bad.mesh",
        ],
        d.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn study_writes_table_and_csv() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "study",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.4",
            "--beta",
            "0.4",
            "--h0",
            "0.125",
            "--count",
            "3",
            "--out-dir",
            ".",
        ],
        d.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = stdout(&o);
    assert!(s.contains("e.o.c.(N)") && s.contains("e.o.c.(h)"), "{s}");
    let csv = std::fs::read_to_string(d.path().join("point2d_rescaled_mu0.4.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("level,h,N,NT"));
    assert_eq!(lines[1].split(',').count(), lines[0].split(',').count());
}

#[test]
fn single_level_study_reports_undefined_order() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "study",
            "--problem",
            "point2d",
            "--strategy",
            "uniform",
            "--levels",
            "0.25",
            "--out-dir",
            ".",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("e.o.c. undefined"));
}
