mod common;

use std::f64::consts::PI;

use graded_fem::analysis::exact::exact_segment_3d;
use graded_fem::analysis::quadrature::SimplexRule;
use graded_fem::assembly::{assemble_rhs, assemble_rhs_point, assemble_stiffness, locate_point};
use graded_fem::geometry::{dist_to_endpoints, dist_to_source};
use graded_fem::mesh::{grade_by_rescaling, read_mesh, uniform_mesh, write_mesh, Simplex};
use graded_fem::theory::mu_bound;
use graded_fem::{Density, Domain, MeshKind, Point, ProblemClass, SingularSource, TargetNorm};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `∫_T Π λ_j^{α_j} = |T| n! α! / (n + |α|)!`
fn barycentric_monomial(vol: f64, dim: usize, alpha: &[usize]) -> f64 {
    let deg: usize = alpha.iter().sum();
    vol * factorial(dim) * alpha.iter().map(|&a| factorial(a)).product::<f64>()
        / factorial(dim + deg)
}

/// Integral of a product of affine functions, each given by its vertex
/// values, expanded over barycentric monomials.
fn product_integral(vol: f64, dim: usize, factors: &[Vec<f64>]) -> f64 {
    let nv = dim + 1;
    let mut total = 0.0;
    let mut idx = vec![0usize; factors.len()];
    loop {
        let mut alpha = vec![0usize; nv];
        let mut coef = 1.0;
        for (f, &j) in factors.iter().zip(&idx) {
            alpha[j] += 1;
            coef *= f[j];
        }
        total += coef * barycentric_monomial(vol, dim, &alpha);
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < nv {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return total;
        }
    }
}

fn simplex_strategy(dim: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-2.0..2.0f64), dim + 1).prop_map(move |mut v| {
        for p in v.iter_mut() {
            for c in p.iter_mut().skip(dim) {
                *c = 0.0;
            }
        }
        v
    })
}

fn rule_integral(s: &Simplex, rule: &SimplexRule, factors: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        let v: f64 = factors
            .iter()
            .map(|f| f.iter().zip(lam).map(|(a, l)| a * l).sum::<f64>())
            .product();
        acc += w * v;
    }
    acc * s.volume()
}

#[test]
fn segment_potential_matches_line_integral_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 100 {
        let x = Point::new3(
            rng.gen_range(-1.7..1.7),
            rng.gen_range(-1.7..1.7),
            rng.gen_range(-1.9..1.9),
        );
        let (q, z) = ((x.c[0] * x.c[0] + x.c[1] * x.c[1]).sqrt(), x.c[2]);
        if q < 1e-3 && z.abs() <= 1.0 {
            continue;
        }
        let expected = common::line_integral(&x) - 3f64.ln() / (4.0 * PI);
        let got = exact_segment_3d(&x).unwrap();
        assert!(
            (got - expected).abs() < 1e-10,
            "x = {x:?}: {got} vs {expected}"
        );
        let mirrored = Point::new3(x.c[0], x.c[1], -x.c[2]);
        assert!((exact_segment_3d(&mirrored).unwrap() - got).abs() < 1e-12);
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_rules_integrate_cubics(dim in 2usize..=3, verts in simplex_strategy(3), vals in prop::collection::vec(-1.0..1.0f64, 12)) {
        let s = Simplex::new(dim, &verts[..=dim]);
        prop_assume!(s.volume() > 1e-3);
        let rule = SimplexRule::of_degree(dim, 3).unwrap();
        let nv = dim + 1;
        let factors: Vec<Vec<f64>> = vals.chunks(4).map(|c| c[..nv].to_vec()).collect();
        for k in 1..=3 {
            let exact = product_integral(s.volume(), dim, &factors[..k]);
            let got = rule_integral(&s, &rule, &factors[..k]);
            let scale = product_integral(s.volume(), dim, &vec![vec![1.0; nv]; k]);
            prop_assert!((got - exact).abs() <= 1e-12 * scale.max(exact.abs()), "degree {k}: {got} vs {exact}");
        }
    }

    #[test]
    fn stiffness_is_symmetric_with_constant_kernel(h in 0.15..0.6f64, mu in 0.3..1.0f64, ball in any::<bool>()) {
        let dom = if ball { Domain::UnitBall } else { Domain::UnitDisk };
        let h = if ball { h.max(0.3) } else { h };
        let mesh = grade_by_rescaling(&uniform_mesh(&dom, h).unwrap(), mu, &Point::origin(dom.dim())).unwrap();
        let a = assemble_stiffness(&mesh).unwrap();
        prop_assert!(a.symmetry_defect() <= 1e-12 * a.max_abs());
        for s in a.row_sums() {
            prop_assert!(s.abs() <= 1e-12);
        }
    }

    #[test]
    fn planar_stiffness_is_scale_invariant(h in 0.2..0.6f64, scale in 0.1..10.0f64) {
        let mesh = uniform_mesh(&Domain::UnitDisk, h).unwrap();
        let scaled = graded_fem::Mesh::new(
            2,
            (0..mesh.n_vertices()).map(|i| mesh.vertex(i) * scale).collect(),
            mesh.elements().map(|e| e.to_vec()).collect(),
            mesh.boundary_flags().to_vec(),
        ).unwrap();
        let (a, b) = (assemble_stiffness(&mesh).unwrap(), assemble_stiffness(&scaled).unwrap());
        for i in 0..a.n() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                prop_assert!((b.get(i, j) - v).abs() <= 1e-12 * a.max_abs());
            }
        }
    }

    #[test]
    fn stiffness_is_permutation_equivariant(h in 0.2..0.5f64, seed in any::<u64>()) {
        let mesh = uniform_mesh(&Domain::UnitDisk, h).unwrap();
        let mut perm: Vec<usize> = (0..mesh.n_vertices()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let (a, b) = (assemble_stiffness(&mesh).unwrap(), assemble_stiffness(&mesh.permuted(&perm)).unwrap());
        for i in 0..a.n() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                prop_assert!((b.get(perm[i], perm[j]) - v).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn point_load_is_a_partition_of_unity(r in 0.0..0.9f64, t in 0.0..(2.0 * PI), z in -0.4..0.4f64, ball in any::<bool>()) {
        let (mesh, x) = if ball {
            (uniform_mesh(&Domain::UnitBall, 0.3).unwrap(), Point::new3(r * t.cos() * 0.9, r * t.sin() * 0.9, z))
        } else {
            (uniform_mesh(&Domain::UnitDisk, 0.1).unwrap(), Point::new2(r * t.cos(), r * t.sin()))
        };
        let b = assemble_rhs_point(&mesh, &x).unwrap();
        prop_assert!((b.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        prop_assert!(b.iter().filter(|v| **v != 0.0).count() <= mesh.dim() + 1);
        prop_assert!(b.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn point_load_is_affine_inside_an_element(e in 0usize..200, l in prop::array::uniform3(0.05..1.0f64), s in 0.1..0.9f64) {
        let mesh = uniform_mesh(&Domain::UnitDisk, 0.2).unwrap();
        let e = e % mesh.n_elements();
        let tri = mesh.simplex(e);
        let norm = l[0] + l[1] + l[2];
        let p = Point::from_raw(2, tri.point_at(&[l[0] / norm, l[1] / norm, l[2] / norm]));
        let c = Point::from_raw(2, tri.centroid());
        let m = p * (1.0 - s) + c * s;
        prop_assert_eq!(locate_point(&mesh, &p).unwrap().0, e);
        let (bp, bc, bm) = (assemble_rhs_point(&mesh, &p).unwrap(), assemble_rhs_point(&mesh, &c).unwrap(), assemble_rhs_point(&mesh, &m).unwrap());
        for i in 0..bp.len() {
            prop_assert!((bm[i] - ((1.0 - s) * bp[i] + s * bc[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn segment_load_carries_total_mass(a in prop::array::uniform3(-0.5..0.5f64), b in prop::array::uniform3(-0.5..0.5f64), c in 0.0..2.0f64) {
        let (pa, pb) = (Point::new3(a[0], a[1], a[2]), Point::new3(b[0], b[1], b[2]));
        prop_assume!(pa.dist(&pb) > 1e-3);
        let mesh = uniform_mesh(&Domain::UnitBall, 0.35).unwrap();
        let src = SingularSource::segment(pa, pb, Density::Constant(c)).unwrap();
        let load = assemble_rhs(&mesh, &src, 3).unwrap();
        prop_assert!((load.iter().sum::<f64>() - c * pa.dist(&pb)).abs() <= 1e-12);
    }

    #[test]
    fn distances_are_lipschitz_and_ordered(x in prop::array::uniform3(-3.0..3.0f64), y in prop::array::uniform3(-3.0..3.0f64)) {
        let src = SingularSource::axis_segment(3, 0.5);
        let (px, py) = (Point::new3(x[0], x[1], x[2]), Point::new3(y[0], y[1], y[2]));
        let (rx, ry) = (dist_to_source(&px, &src).unwrap(), dist_to_source(&py, &src).unwrap());
        prop_assert!((rx - ry).abs() <= px.dist(&py) + 1e-12);
        let re = dist_to_endpoints(&px, &src).unwrap();
        prop_assert!(rx <= re + 1e-15);
        if x[2].abs() < 1.0 - 1e-9 && (x[0] != 0.0 || x[1] != 0.0) {
            prop_assert!(rx < re);
        } else if x[2].abs() > 1.0 {
            prop_assert!((rx - re).abs() <= 1e-12);
        }
        let point = SingularSource::point(Point::origin(3));
        prop_assert!(dist_to_endpoints(&px, &point).is_err());
    }

    #[test]
    fn boundary_projection_is_idempotent(x in prop::array::uniform3(-3.0..3.0f64), which in 0usize..3) {
        let dom = [Domain::UnitDisk, Domain::UnitBall, Domain::Ellipsoid][which].clone();
        let p = Point::from_raw(dom.dim(), if dom.dim() == 2 { [x[0], x[1], 0.0] } else { x });
        prop_assume!(p.norm() > 1e-6);
        let once = dom.boundary_project(&p).unwrap();
        prop_assert!(dom.boundary_residual(&once).abs() <= 1e-12);
        let twice = dom.boundary_project(&once).unwrap();
        prop_assert!(once.dist(&twice) <= 1e-12);
    }

    #[test]
    fn rescaling_maps_distances_by_a_power(h in 0.1..0.5f64, mu in 0.2..1.0f64) {
        let mesh = uniform_mesh(&Domain::UnitDisk, h).unwrap();
        let graded = grade_by_rescaling(&mesh, mu, &Point::origin(2)).unwrap();
        prop_assert_eq!(graded.n_vertices(), mesh.n_vertices());
        for i in 0..mesh.n_vertices() {
            let (r, g) = (mesh.vertex(i).norm(), graded.vertex(i).norm());
            prop_assert!((g - r.powf(1.0 / mu)).abs() <= 1e-14);
        }
        let same = grade_by_rescaling(&mesh, 1.0, &Point::origin(2)).unwrap();
        prop_assert_eq!(same.raw_vertices(), mesh.raw_vertices());
    }

    #[test]
    fn mesh_text_round_trip_is_bitwise(h in 0.1..0.6f64, mu in 0.2..1.0f64) {
        let mesh = grade_by_rescaling(&uniform_mesh(&Domain::UnitDisk, h).unwrap(), mu, &Point::origin(2)).unwrap();
        let mut first = Vec::new();
        write_mesh(&mesh, &mut first).unwrap();
        let back = read_mesh(first.as_slice()).unwrap();
        prop_assert_eq!(back.raw_vertices(), mesh.raw_vertices());
        let mut second = Vec::new();
        write_mesh(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn grading_bounds_grow_with_the_weight(beta in -0.99..0.99f64, step in 0.0..0.5f64, which in 0usize..6) {
        let pc = [
            ProblemClass::point(2),
            ProblemClass::point(3),
            ProblemClass::segment(3, MeshKind::Isotropic),
            ProblemClass::segment(3, MeshKind::Anisotropic),
            ProblemClass::segment(2, MeshKind::Isotropic),
            ProblemClass::segment(2, MeshKind::Anisotropic),
        ][which];
        let lo = mu_bound(&pc, TargetNorm::L2(beta));
        let hi = mu_bound(&pc, TargetNorm::L2(beta + step));
        if let (Ok(lo), Ok(hi)) = (&lo, &hi) {
            prop_assert!(lo.bound > 0.0 && lo.bound <= 1.5);
            prop_assert!(hi.bound >= lo.bound);
        }
        if lo.is_ok() {
            prop_assert!(hi.is_ok() || beta + step >= 0.5 * (pc.n - pc.m) as f64);
        }
    }
}
