use std::f64::consts::PI;

use graded_fem::analysis::eoc::{estimate_eoc, fit_order, StudyRecord};
use graded_fem::analysis::exact::{ExactSolution, FnSolution, PointSolution};
use graded_fem::analysis::interp::truncated_interpolant;
use graded_fem::analysis::norms::{weighted_error, NormKind, WeightedNormSpec};
use graded_fem::assembly::{assemble_rhs_point, assemble_stiffness, assemble_system, SparseSystem};
use graded_fem::mesh::{generate, uniform_mesh};
use graded_fem::solver::{solve_spd, Method, Preconditioner};
use graded_fem::sparse::norm2;
use graded_fem::study::{run_study, solve_on_mesh};
use graded_fem::{
    Domain, Error, GradingSpec, GradingStrategy, Mesh, Point, ProblemKind, Result, SingularSource,
    SolveConfig, Stage, StudyConfig,
};

fn origin(dim: usize) -> SingularSource {
    SingularSource::point(Point::origin(dim))
}

fn problem_mesh(p: ProblemKind, s: GradingStrategy, mu: f64, h: f64) -> Mesh {
    generate(
        &p.domain(),
        &p.source(),
        &GradingSpec::new(mu, h, s).unwrap(),
    )
    .unwrap()
}

fn relative_residual(sys: &SparseSystem, u: &[f64]) -> f64 {
    let au = sys.matrix.mul(u);
    let r: Vec<f64> = au.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
    norm2(&r) / norm2(&sys.rhs)
}

#[test]
fn solver_meets_tolerance_on_graded_meshes() {
    for (p, s, mu, h) in [
        (
            ProblemKind::Point2d,
            GradingStrategy::RescaledIsotropic,
            0.4,
            1.0 / 32.0,
        ),
        (
            ProblemKind::Point3d,
            GradingStrategy::ConstructedIsotropic,
            0.25,
            0.125,
        ),
        (
            ProblemKind::Segment3d,
            GradingStrategy::AnisotropicTensor,
            0.4,
            0.4,
        ),
    ] {
        let mesh = problem_mesh(p, s, mu, h);
        let sys = assemble_system(&mesh, &p.source(), 3).unwrap();
        assert!(sys.matrix.symmetry_defect() <= 1e-12 * sys.matrix.max_abs());
        let (u, rep) = solve_spd(&sys, &SolveConfig::default()).unwrap();
        assert!(rep.residual <= 1e-10, "{p}: {}", rep.residual);
        assert!(relative_residual(&sys, &u) <= 1e-10);

        let plain = SolveConfig {
            preconditioner: Preconditioner::None,
            ..SolveConfig::default()
        };
        let (_, bare) = solve_spd(&sys, &plain).unwrap();
        assert!(
            rep.iterations <= 2 * bare.iterations,
            "{p}: {} vs {}",
            rep.iterations,
            bare.iterations
        );
    }
}

#[test]
fn direct_and_iterative_solutions_agree() {
    let mesh = problem_mesh(
        ProblemKind::Point2d,
        GradingStrategy::RescaledIsotropic,
        0.4,
        1.0 / 16.0,
    );
    let sys = assemble_system(&mesh, &origin(2), 3).unwrap();
    let (cg, _) = solve_spd(
        &sys,
        &SolveConfig {
            rel_tolerance: 1e-13,
            ..SolveConfig::default()
        },
    )
    .unwrap();
    let (direct, rep) = solve_spd(
        &sys,
        &SolveConfig {
            method: Method::Direct,
            ..SolveConfig::default()
        },
    )
    .unwrap();
    assert_eq!(rep.method, Method::Direct);
    let diff: Vec<f64> = cg.iter().zip(&direct).map(|(a, b)| a - b).collect();
    assert!(norm2(&diff) <= 1e-9 * norm2(&direct));
}

#[test]
fn solution_does_not_depend_on_vertex_labels() {
    let mesh = problem_mesh(
        ProblemKind::Point2d,
        GradingStrategy::RescaledIsotropic,
        0.4,
        1.0 / 32.0,
    );
    let n = mesh.n_vertices();
    // a fixed shuffle: multiplication by a unit modulo n
    let perm: Vec<usize> = (0..n).map(|i| (i * 7919 + 13) % n).collect();
    assert_eq!(
        perm.iter().collect::<std::collections::BTreeSet<_>>().len(),
        n
    );
    let relabelled = mesh.permuted(&perm);
    let cfg = StudyConfig::new(
        ProblemKind::Point2d,
        GradingStrategy::RescaledIsotropic,
        0.4,
        vec![1.0 / 32.0],
    );
    let (u, _) = solve_on_mesh(&mesh, &cfg).unwrap();
    let (v, _) = solve_on_mesh(&relabelled, &cfg).unwrap();
    let a = assemble_stiffness(&mesh).unwrap();
    let d: Vec<f64> = (0..n).map(|i| u[i] - v[perm[i]]).collect();
    let energy = |x: &[f64]| graded_fem::sparse::dot(x, &a.mul(x)).sqrt();
    assert!(
        energy(&d) <= 1e-8 * energy(&u),
        "{} vs {}",
        energy(&d),
        energy(&u)
    );
}

#[test]
fn unit_load_at_a_vertex_gives_a_positive_peak() {
    let mesh = uniform_mesh(&Domain::UnitDisk, 0.25).unwrap();
    let v = (0..mesh.n_vertices())
        .find(|&i| mesh.vertex(i).norm() < 1e-12)
        .unwrap();
    let b = assemble_rhs_point(&mesh, &Point::origin(2)).unwrap();
    assert_eq!(b[v], 1.0);
    assert_eq!(b.iter().sum::<f64>(), 1.0);
    let cfg = StudyConfig::new(
        ProblemKind::Point2d,
        GradingStrategy::Uniform,
        1.0,
        vec![0.25],
    );
    let (u, _) = solve_on_mesh(&mesh, &cfg).unwrap();
    assert!(u[v] > 0.0);
    assert!(u.iter().all(|&x| x <= u[v]));
}

#[test]
fn weighted_norm_of_a_radial_power() {
    let mesh = uniform_mesh(&Domain::UnitDisk, 1.0 / 32.0).unwrap();
    let exact = FnSolution {
        value: |x: &Point| x.dot(x),
        gradient: |x: &Point| [2.0 * x.c[0], 2.0 * x.c[1], 0.0],
    };
    let spec = WeightedNormSpec::new(NormKind::L2Weighted, 0.5, origin(2));
    let e = weighted_error(&mesh, &vec![0.0; mesh.n_vertices()], &exact, &spec).unwrap();
    let expected = (2.0 * PI / 7.0).sqrt();
    assert!((e - expected).abs() <= 0.02 * expected, "{e} vs {expected}");
}

#[test]
fn linear_functions_are_reproduced() {
    let mesh = problem_mesh(
        ProblemKind::Point3d,
        GradingStrategy::ConstructedIsotropic,
        0.5,
        0.25,
    );
    let f = |x: &Point| 0.3 + 1.5 * x.c[0] - 2.0 * x.c[1] + 0.25 * x.c[2];
    let exact = FnSolution {
        value: f,
        gradient: |_: &Point| [1.5, -2.0, 0.25],
    };
    let uh: Vec<f64> = (0..mesh.n_vertices()).map(|i| f(&mesh.vertex(i))).collect();
    for (kind, exponent) in [
        (NormKind::L2Weighted, 0.0),
        (NormKind::L2Weighted, 0.7),
        (NormKind::H1SemiWeighted, 1.0),
    ] {
        let spec = WeightedNormSpec::new(kind, exponent, origin(3));
        assert!(weighted_error(&mesh, &uh, &exact, &spec).unwrap() <= 1e-13);
    }
}

struct AlwaysSingular;

impl ExactSolution for AlwaysSingular {
    fn value(&self, x: &Point) -> Result<f64> {
        Err(Error::SingularEvaluation(x.c))
    }
    fn gradient(&self, x: &Point) -> Result<[f64; 3]> {
        Err(Error::SingularEvaluation(x.c))
    }
}

#[test]
fn persistent_singularity_is_a_quadrature_failure() {
    let mesh = uniform_mesh(&Domain::UnitDisk, 0.5).unwrap();
    let spec = WeightedNormSpec::new(NormKind::L2Weighted, 0.0, origin(2));
    let err =
        weighted_error(&mesh, &vec![0.0; mesh.n_vertices()], &AlwaysSingular, &spec).unwrap_err();
    assert!(matches!(err, Error::Quadrature(_)), "{err}");
    assert_eq!(err.stage(), Stage::Quadrature);
    let bad = WeightedNormSpec::new(NormKind::L2Weighted, -1.0, origin(2));
    assert!(bad.check(2).is_err());
}

/// Errors on the singular elements at increasing subdivision depth.
fn depth_sequence(p: ProblemKind, s: GradingStrategy, mu: f64, h: f64, beta: f64) -> Vec<f64> {
    let mesh = problem_mesh(p, s, mu, h);
    let cfg = StudyConfig::new(p, s, mu, vec![h]);
    let (uh, _) = solve_on_mesh(&mesh, &cfg).unwrap();
    let exact = p.exact();
    (1..=5)
        .map(|depth| {
            let mut spec = WeightedNormSpec::new(NormKind::L2Weighted, beta, p.source());
            spec.depth = depth;
            weighted_error(&mesh, &uh, exact.as_ref(), &spec).unwrap()
        })
        .collect()
}

#[test]
fn error_quadrature_converges_with_depth() {
    for (p, s, mu, h, beta) in [
        (
            ProblemKind::Point2d,
            GradingStrategy::RescaledIsotropic,
            0.4,
            1.0 / 16.0,
            0.4,
        ),
        (
            ProblemKind::Point3d,
            GradingStrategy::ConstructedIsotropic,
            0.25,
            0.125,
            0.7,
        ),
        (
            ProblemKind::Segment3d,
            GradingStrategy::AnisotropicTensor,
            0.4,
            0.4,
            0.4,
        ),
    ] {
        let e = depth_sequence(p, s, mu, h, beta);
        let steps: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(
            steps
                .iter()
                .all(|d| d.signum() == steps[0].signum() || d.abs() < 1e-6 * e[0]),
            "{p}: {e:?}"
        );
        let largest = steps.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        assert!(
            steps[3].abs() < largest && steps[3].abs() <= steps[2].abs(),
            "{p}: {e:?}"
        );
        let change = (e[3] - e[2]).abs() / e[2];
        assert!(
            change <= 0.01,
            "{p}: depth 3 -> 4 changes the error by {change}"
        );
    }
}

#[test]
fn truncated_interpolant_vanishes_near_the_source() {
    let mesh = uniform_mesh(&Domain::UnitDisk, 0.125).unwrap();
    let exact = PointSolution { dim: 2 };
    let src = origin(2);
    let a = truncated_interpolant(&mesh, &exact, &src).unwrap();
    for (i, &ai) in a.iter().enumerate() {
        let x = mesh.vertex(i);
        if x.norm() < 1e-12 {
            assert_eq!(ai, 0.0);
        }
        if x.norm() > 0.5 {
            assert_eq!(ai, exact.value(&x).unwrap());
        }
    }
}

fn published(h: &[f64], n: &[usize], e: &[f64]) -> Vec<StudyRecord> {
    h.iter()
        .zip(n)
        .zip(e)
        .map(|((&h, &n), &e)| StudyRecord {
            h,
            n_vertices: n,
            n_elements: 2 * n,
            errors: vec![("L2".into(), e)],
            seconds: 0.0,
        })
        .collect()
}

#[test]
fn orders_from_published_point_source_errors() {
    let recs = published(
        &[0.0625, 0.03125, 0.015625, 0.0078125],
        &[856, 3319, 13070, 51875],
        &[5.802e-3, 1.147e-3, 0.371e-3, 0.093e-3],
    );
    let r = estimate_eoc(&recs, 2).unwrap();
    let l2 = r.get("L2").unwrap();
    assert!(
        (l2.by_nodes.value - 2.013).abs() <= 0.01,
        "{}",
        l2.by_nodes.value
    );
    // the second published entry sits off the fitted line
    assert!(l2.by_nodes.residual > 0.05);
}

#[test]
fn orders_from_published_segment_errors() {
    let recs = published(
        &[0.4, 0.2, 0.1],
        &[693, 3902, 33663],
        &[3.09e-2, 2.06e-2, 1.01e-2],
    );
    let r = estimate_eoc(&recs, 3).unwrap();
    let l2 = r.get("L2").unwrap();
    // ln(3.09 / 1.01) / ln 4
    assert!(
        (l2.by_step.value - 0.806).abs() <= 1e-3,
        "{}",
        l2.by_step.value
    );
    assert!((l2.by_step.least_squares - l2.by_step.value).abs() <= 1e-12);
    assert!(
        (l2.by_nodes.value - 0.85).abs() <= 0.03,
        "{}",
        l2.by_nodes.value
    );
}

#[test]
fn order_fit_recovers_exact_powers() {
    let x = [1.0, 0.5, 0.25, 0.125];
    let e: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
    let f = fit_order(&x, &e).unwrap();
    assert!(
        (f.value - 1.5).abs() < 1e-12
            && (f.least_squares - 1.5).abs() < 1e-12
            && f.residual < 1e-12
    );
}

#[test]
fn studies_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = StudyConfig::new(
        ProblemKind::Segment3d,
        GradingStrategy::AnisotropicTensor,
        0.4,
        vec![0.4, 0.3],
    );
    cfg.beta = Some(0.4);
    cfg.out_dir = Some(dir.path().to_path_buf());
    let strip = |s: String| -> Vec<String> {
        s.lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
            .collect()
    };
    let first = run_study(&cfg).map_err(|f| f.error).unwrap();
    let csv1 = strip(std::fs::read_to_string(first.csv_path.unwrap()).unwrap());
    let second = run_study(&cfg).map_err(|f| f.error).unwrap();
    let csv2 = strip(std::fs::read_to_string(second.csv_path.unwrap()).unwrap());
    assert_eq!(csv1.len(), 3);
    assert_eq!(csv1, csv2);
    assert!(first
        .mu_checks
        .iter()
        .any(|c| c.contains("does not give estimates for the L2 norm")));
}
