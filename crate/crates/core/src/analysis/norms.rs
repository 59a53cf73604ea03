//! Weighted L² and H¹-seminorm errors against an exact solution.

use rayon::prelude::*;

use super::exact::ExactSolution;
use super::quadrature::{gauss_legendre, SimplexRule};
use crate::error::{Error, Result};
use crate::geometry::{Point, SingularSource};
use crate::mesh::simplex::Simplex;
use crate::mesh::{touches, Mesh};

pub const DEFAULT_DEPTH: usize = 3;
const MAX_DEPTH: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// `‖r^β (u - u_h)‖_{L²}`
    L2Weighted,
    /// `‖r^σ ∇(u - u_h)‖_{L²}`
    H1SemiWeighted,
}

#[derive(Clone, Debug)]
pub struct WeightedNormSpec {
    pub kind: NormKind,
    pub exponent: f64,
    pub source: SingularSource,
    pub quad_order: usize,
    /// Levels of refinement applied to elements meeting the singular set.
    pub depth: usize,
    /// Collapsed-coordinate rule on sub-simplices with a vertex at a point
    /// source; when off, the base rule is used everywhere.
    pub collapsed: bool,
}

impl WeightedNormSpec {
    pub fn new(kind: NormKind, exponent: f64, source: SingularSource) -> Self {
        WeightedNormSpec {
            kind,
            exponent,
            source,
            quad_order: 3,
            depth: DEFAULT_DEPTH,
            collapsed: true,
        }
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        let codim = (dim - self.source.set_dim()) as f64;
        if !(self.exponent > -codim / 2.0) || !self.exponent.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "weight exponent {} must exceed {} for integrability",
                self.exponent,
                -codim / 2.0
            )));
        }
        if self.depth > MAX_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "subdivision depth at most {MAX_DEPTH}"
            )));
        }
        SimplexRule::of_degree(dim, self.quad_order).map(|_| ())
    }
}

/// Sub-simplex as barycentric coordinates of its vertices in the parent.
type Bary = [[f64; 4]; 4];

fn mid(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
        0.5 * (a[3] + b[3]),
    ]
}

/// Red refinement into `2^dim` children of equal volume.
fn children(dim: usize, b: &Bary) -> Vec<Bary> {
    let m = |i: usize, j: usize| mid(&b[i], &b[j]);
    let z = [0.0; 4];
    if dim == 2 {
        let (m01, m02, m12) = (m(0, 1), m(0, 2), m(1, 2));
        vec![
            [b[0], m01, m02, z],
            [m01, b[1], m12, z],
            [m02, m12, b[2], z],
            [m01, m12, m02, z],
        ]
    } else {
        let (m01, m02, m03, m12, m13, m23) = (m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3));
        vec![
            [b[0], m01, m02, m03],
            [m01, b[1], m12, m13],
            [m02, m12, b[2], m23],
            [m03, m13, m23, b[3]],
            [m01, m02, m03, m13],
            [m01, m02, m12, m13],
            [m02, m03, m13, m23],
            [m02, m12, m13, m23],
        ]
    }
}

fn identity_bary(dim: usize) -> Bary {
    let mut b = [[0.0; 4]; 4];
    for (i, row) in b.iter_mut().enumerate().take(dim + 1) {
        row[i] = 1.0;
    }
    b
}

const COLLAPSED_POINTS: usize = 5;

/// Collapsed-coordinate Gauss rule on the reference simplex whose Jacobian
/// vanishes at vertex 0. Barycentric nodes, weights summing to one.
fn collapsed_rule(dim: usize) -> SimplexRule {
    let (x, w) = gauss_legendre(COLLAPSED_POINTS);
    let g: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            if dim == 2 {
                points.push([1.0 - s, s * (1.0 - t), s * t, 0.0]);
                weights.push(2.0 * s * ws * wt);
            } else {
                for &(u, wu) in &g {
                    points.push([1.0 - s, s * (1.0 - t), s * t * (1.0 - u), s * t * u]);
                    weights.push(6.0 * s * s * t * ws * wt * wu);
                }
            }
        }
    }
    SimplexRule {
        dim,
        points,
        weights,
    }
}

struct ElementData<'a> {
    s: Simplex,
    vals: [f64; 4],
    grad: [f64; 3],
    rule: &'a SimplexRule,
    collapsed: &'a SimplexRule,
    spec: &'a WeightedNormSpec,
    exact: &'a dyn ExactSolution,
}

impl ElementData<'_> {
    fn sub_simplex(&self, b: &Bary) -> Simplex {
        let dim = self.s.dim;
        let verts: Vec<[f64; 3]> = (0..=dim).map(|k| self.s.point_at(&b[k])).collect();
        Simplex::new(dim, &verts)
    }

    fn integrand(&self, lambda: &[f64; 4]) -> Result<f64> {
        let dim = self.s.dim;
        let x = Point::from_raw(dim, self.s.point_at(lambda));
        let r = self.spec.source.r(&x);
        let weight = if self.spec.exponent == 0.0 {
            1.0
        } else if r == 0.0 {
            return Err(Error::SingularEvaluation(x.c));
        } else {
            r.powf(2.0 * self.spec.exponent)
        };
        let e2 = match self.spec.kind {
            NormKind::L2Weighted => {
                let uh: f64 = (0..=dim).map(|i| lambda[i] * self.vals[i]).sum();
                let d = self.exact.value(&x)? - uh;
                d * d
            }
            NormKind::H1SemiWeighted => {
                let g = self.exact.gradient(&x)?;
                (0..dim).map(|k| (g[k] - self.grad[k]).powi(2)).sum()
            }
        };
        Ok(weight * e2)
    }

    fn integrate(&self, b: &Bary, frac: f64, levels: usize) -> Result<f64> {
        let dim = self.s.dim;
        if levels > 0 && touches(&self.sub_simplex(b), &self.spec.source) {
            let child_frac = frac / (1 << dim) as f64;
            let mut sum = 0.0;
            for c in children(dim, b) {
                sum += self.integrate(&c, child_frac, levels - 1)?;
            }
            return Ok(sum);
        }
        let (b, rule) = match self.singular_vertex(b) {
            Some(k) => {
                let mut r = *b;
                r.swap(0, k);
                (r, self.collapsed)
            }
            None => (*b, self.rule),
        };
        let vol = self.s.volume() * frac;
        let mut sum = 0.0;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let mut lambda = [0.0; 4];
            for (k, row) in b.iter().enumerate().take(dim + 1) {
                for i in 0..=dim {
                    lambda[i] += p[k] * row[i];
                }
            }
            sum += w * self.integrand(&lambda)?;
        }
        Ok(vol * sum)
    }

    /// Vertex of the sub-simplex at a point source, if any.
    fn singular_vertex(&self, b: &Bary) -> Option<usize> {
        let SingularSource::Point { location } = &self.spec.source else {
            return None;
        };
        if !self.spec.collapsed {
            return None;
        }
        let sub = self.sub_simplex(b);
        let tol = 1e-12 * sub.diameter();
        (0..=self.s.dim).find(|&k| sub.vertex(k).dist(location) <= tol)
    }
}

fn element_contribution(d: &ElementData<'_>) -> Result<f64> {
    let root = identity_bary(d.s.dim);
    match d.integrate(&root, 1.0, d.spec.depth) {
        Err(Error::SingularEvaluation(_)) => match d.integrate(&root, 1.0, d.spec.depth + 1) {
            Err(Error::SingularEvaluation(x)) => Err(Error::Quadrature(format!(
                "exact solution singular at quadrature node {x:?}"
            ))),
            other => other,
        },
        other => other,
    }
}

/// Per-element squared contributions, in element order.
pub fn element_errors(
    mesh: &Mesh,
    uh: &[f64],
    exact: &dyn ExactSolution,
    spec: &WeightedNormSpec,
) -> Result<Vec<f64>> {
    let dim = mesh.dim();
    spec.check(dim)?;
    if spec.source.dim() != dim {
        return Err(Error::InvalidArgument(
            "source and mesh dimensions differ".into(),
        ));
    }
    if uh.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector has {} entries for {} vertices",
            uh.len(),
            mesh.n_vertices()
        )));
    }
    let rule = SimplexRule::of_degree(dim, spec.quad_order)?;
    let collapsed = collapsed_rule(dim);
    (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let s = mesh.simplex(e);
            let el = mesh.element(e);
            let mut vals = [0.0; 4];
            for i in 0..=dim {
                vals[i] = uh[el[i]];
            }
            let g = s.grads();
            let mut grad = [0.0; 3];
            for i in 0..=dim {
                for k in 0..dim {
                    grad[k] += vals[i] * g[i][k];
                }
            }
            element_contribution(&ElementData {
                s,
                vals,
                grad,
                rule: &rule,
                collapsed: &collapsed,
                spec,
                exact,
            })
        })
        .collect()
}

pub fn weighted_error(
    mesh: &Mesh,
    uh: &[f64],
    exact: &dyn ExactSolution,
    spec: &WeightedNormSpec,
) -> Result<f64> {
    let parts = element_errors(mesh, uh, exact, spec)?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

pub fn weighted_errors(
    mesh: &Mesh,
    uh: &[f64],
    exact: &dyn ExactSolution,
    specs: &[WeightedNormSpec],
) -> Result<Vec<f64>> {
    specs
        .iter()
        .map(|s| weighted_error(mesh, uh, exact, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::exact::FnSolution;

    fn triangle() -> Mesh {
        let v = vec![
            Point::new2(0.0, 0.0),
            Point::new2(1.0, 0.0),
            Point::new2(0.0, 1.0),
        ];
        Mesh::new(2, v, vec![vec![0, 1, 2]], vec![true; 3]).unwrap()
    }

    #[test]
    fn constant_on_unit_triangle() {
        let m = triangle();
        let one = FnSolution {
            value: |_: &Point| 1.0,
            gradient: |_: &Point| [0.0; 3],
        };
        let spec = WeightedNormSpec::new(
            NormKind::L2Weighted,
            0.0,
            SingularSource::point(Point::new2(0.3, 0.3)),
        );
        let e = weighted_error(&m, &[0.0; 3], &one, &spec).unwrap();
        assert!((e - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn collapsed_rule_integrates_radial_powers() {
        // ∫ over the reference triangle of |x| with the singular vertex at 0
        for dim in [2, 3] {
            let r = collapsed_rule(dim);
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let lin: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[1]).sum();
            assert!((lin - 1.0 / (dim + 1) as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn children_tile_parent() {
        for dim in [2, 3] {
            let s = Simplex::new(
                dim,
                &[
                    [0.1, 0.0, 0.2],
                    [1.3, 0.2, 0.0],
                    [0.2, 0.9, 0.1],
                    [0.3, 0.1, 1.1],
                ][..=dim],
            );
            let d = ElementData {
                s,
                vals: [0.0; 4],
                grad: [0.0; 3],
                rule: &SimplexRule::of_degree(dim, 3).unwrap(),
                collapsed: &collapsed_rule(dim),
                spec: &WeightedNormSpec::new(
                    NormKind::L2Weighted,
                    0.0,
                    SingularSource::point(Point::origin(dim)),
                ),
                exact: &FnSolution {
                    value: |_: &Point| 0.0,
                    gradient: |_: &Point| [0.0; 3],
                },
            };
            let total: f64 = children(dim, &identity_bary(dim))
                .iter()
                .map(|c| d.sub_simplex(c).volume())
                .sum();
            assert!((total - s.volume()).abs() < 1e-14);
            for c in children(dim, &identity_bary(dim)) {
                assert!(d.sub_simplex(&c).signed_volume().abs() > 0.0);
            }
        }
    }
}
