//! Conforming simplicial meshes and their generators.

mod audit;
mod ball;
mod disk;
mod io;
mod refine;
mod segment;
pub mod simplex;
mod validate;

use std::collections::HashMap;

pub use audit::{grading_audit, prescribed_size, GradingAudit};
pub use ball::{graded_ball_by_construction, octahedral_ball};
pub use disk::{graded_disk_by_construction, ring_disk};
pub use io::{read_mesh, write_mesh, write_vtk};
pub use refine::{refine_to_size, RefineOptions};
pub use segment::{
    anisotropic_segment_mesh, isotropic_segment_mesh, SegmentMeshOptions, DEFAULT_TAU,
};
pub use simplex::Simplex;
pub use validate::{validate_mesh, ValidationReport};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, SingularSource};

/// Upper bound on generated vertex counts.
pub const MAX_VERTICES: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradingStrategy {
    Uniform,
    RescaledIsotropic,
    ConstructedIsotropic,
    AnisotropicTensor,
}

impl std::str::FromStr for GradingStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(GradingStrategy::Uniform),
            "rescaled" => Ok(GradingStrategy::RescaledIsotropic),
            "constructed" | "isotropic" => Ok(GradingStrategy::ConstructedIsotropic),
            "anisotropic" => Ok(GradingStrategy::AnisotropicTensor),
            _ => Err(Error::InvalidArgument(format!(
                "unknown grading strategy `{s}`"
            ))),
        }
    }
}

impl std::fmt::Display for GradingStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GradingStrategy::Uniform => "uniform",
            GradingStrategy::RescaledIsotropic => "rescaled",
            GradingStrategy::ConstructedIsotropic => "constructed",
            GradingStrategy::AnisotropicTensor => "anisotropic",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GradingSpec {
    pub mu: f64,
    pub h: f64,
    pub strategy: GradingStrategy,
    pub tau: f64,
}

impl GradingSpec {
    pub fn new(mu: f64, h: f64, strategy: GradingStrategy) -> Result<Self> {
        let s = GradingSpec {
            mu,
            h,
            strategy,
            tau: DEFAULT_TAU,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "grading exponent {} not in (0,1]",
                self.mu
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mesh step {} must be positive",
                self.h
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "split constant {} must be positive",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Per-element data relative to a singular source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementMeta {
    /// Distance to the singular set (0 when the closed element touches it).
    pub r: f64,
    /// Distance to the segment endpoints (equals `r` for point sources).
    pub r_e: f64,
    /// Transverse sizes followed by the axial size; all equal to the
    /// diameter for point sources.
    pub sizes: [f64; 3],
    pub diameter: f64,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    elements: Vec<[usize; 4]>,
    boundary: Vec<bool>,
    domain: Option<Domain>,
    meta: Option<Vec<ElementMeta>>,
}

impl Mesh {
    /// Checked constructor. Elements are reoriented to positive volume.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("mesh dimension {dim}")));
        }
        if boundary.len() != vertices.len() {
            return Err(Error::InvalidArgument(
                "one boundary flag per vertex required".into(),
            ));
        }
        let mut verts = Vec::with_capacity(vertices.len());
        for p in &vertices {
            if p.dim != dim || !p.is_finite() {
                return Err(Error::InvalidArgument(format!("bad vertex {p:?}")));
            }
            verts.push(p.c);
        }
        let mut elems = Vec::with_capacity(elements.len());
        for e in &elements {
            if e.len() != dim + 1 {
                return Err(Error::InvalidArgument("element arity must be dim+1".into()));
            }
            let mut a = [usize::MAX; 4];
            for (k, &i) in e.iter().enumerate() {
                if i >= verts.len() {
                    return Err(Error::InvalidArgument(format!(
                        "vertex index {i} out of range"
                    )));
                }
                if e[..k].contains(&i) {
                    return Err(Error::InvalidArgument("repeated vertex in element".into()));
                }
                a[k] = i;
            }
            elems.push(a);
        }
        let mut m = Mesh::from_parts(dim, verts, elems, boundary);
        m.orient();
        Ok(m)
    }

    pub(crate) fn from_parts(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        mut elements: Vec<[usize; 4]>,
        boundary: Vec<bool>,
    ) -> Self {
        if dim == 2 {
            for e in &mut elements {
                e[3] = usize::MAX;
            }
        }
        Mesh {
            dim,
            vertices,
            elements,
            boundary,
            domain: None,
            meta: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertex(&self, i: usize) -> Point {
        Point::from_raw(self.dim, self.vertices[i])
    }

    pub fn raw_vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..=self.dim]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.elements.iter().map(move |e| &e[..=self.dim])
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn with_domain(mut self, d: Domain) -> Self {
        self.domain = Some(d);
        self
    }

    pub fn simplex(&self, e: usize) -> Simplex {
        let el = &self.elements[e];
        let mut v = [[0.0; 3]; 4];
        for k in 0..=self.dim {
            v[k] = self.vertices[el[k]];
        }
        Simplex { dim: self.dim, v }
    }

    /// Swaps two vertices of every negatively oriented element.
    pub(crate) fn orient(&mut self) {
        for e in 0..self.elements.len() {
            if self.simplex(e).det() < 0.0 {
                self.elements[e].swap(0, 1);
            }
        }
    }

    pub fn meta(&self) -> Option<&[ElementMeta]> {
        self.meta.as_deref()
    }

    /// Computes and caches per-element distances and sizes for `src`.
    pub fn attach_metadata(&mut self, src: &SingularSource) {
        self.meta = Some(self.compute_metadata(src));
    }

    pub fn compute_metadata(&self, src: &SingularSource) -> Vec<ElementMeta> {
        (0..self.n_elements())
            .map(|e| element_meta(&self.simplex(e), src))
            .collect()
    }

    /// Cached metadata, or a fresh computation when none is attached.
    pub fn metadata_for(&self, src: &SingularSource) -> std::borrow::Cow<'_, [ElementMeta]> {
        match &self.meta {
            Some(m) => std::borrow::Cow::Borrowed(m.as_slice()),
            None => std::borrow::Cow::Owned(self.compute_metadata(src)),
        }
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.simplex(e).diameter())
            .fold(0.0, f64::max)
    }

    /// Elements incident to each vertex, in increasing element order.
    pub fn vertex_elements(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for (e, el) in self.elements().enumerate() {
            for &v in el {
                adj[v].push(e);
            }
        }
        adj
    }

    /// Facet incidence: sorted facet vertex tuple to the incident elements.
    pub fn facet_map(&self) -> HashMap<[usize; 3], Vec<usize>> {
        let mut map: HashMap<[usize; 3], Vec<usize>> =
            HashMap::with_capacity(self.n_elements() * 2);
        for (e, el) in self.elements().enumerate() {
            for f in facets_of(el) {
                map.entry(f).or_default().push(e);
            }
        }
        map
    }

    /// Facets owned by exactly one element, sorted.
    pub fn boundary_facets(&self) -> Vec<[usize; 3]> {
        let mut b: Vec<[usize; 3]> = self
            .facet_map()
            .into_iter()
            .filter(|(_, v)| v.len() == 1)
            .map(|(f, _)| f)
            .collect();
        b.sort_unstable();
        b
    }

    /// Same mesh with vertices relabelled: new index of old vertex `i` is `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Mesh {
        let mut verts = vec![[0.0; 3]; self.n_vertices()];
        let mut bnd = vec![false; self.n_vertices()];
        for (i, &p) in perm.iter().enumerate() {
            verts[p] = self.vertices[i];
            bnd[p] = self.boundary[i];
        }
        let elems = self
            .elements
            .iter()
            .map(|e| {
                let mut a = [usize::MAX; 4];
                for k in 0..=self.dim {
                    a[k] = perm[e[k]];
                }
                a
            })
            .collect();
        Mesh {
            dim: self.dim,
            vertices: verts,
            elements: elems,
            boundary: bnd,
            domain: self.domain.clone(),
            meta: None,
        }
    }
}

/// Sorted facets of an element (2D facets have `usize::MAX` in the last slot).
pub fn facets_of(el: &[usize]) -> Vec<[usize; 3]> {
    let n = el.len();
    (0..n)
        .map(|skip| {
            let mut f = [usize::MAX; 3];
            let mut k = 0;
            for (i, &v) in el.iter().enumerate() {
                if i != skip {
                    f[k] = v;
                    k += 1;
                }
            }
            f[..n - 1].sort_unstable();
            f
        })
        .collect()
}

/// Whether the closed simplex meets the singular set.
pub fn touches(s: &Simplex, src: &SingularSource) -> bool {
    let tol = 1e-12;
    match src {
        SingularSource::Point { location } => s.contains(&location.c, tol),
        SingularSource::Segment { a, b, .. } => s.clip(&a.c, &b.c, tol).is_some(),
    }
}

pub fn element_meta(s: &Simplex, src: &SingularSource) -> ElementMeta {
    let diameter = s.diameter();
    let touching = touches(s, src);
    let nv = s.nv();
    let pts: Vec<Point> = (0..nv).map(|i| s.vertex(i)).collect();
    let r = if touching {
        0.0
    } else {
        pts.iter().map(|p| src.r(p)).fold(f64::INFINITY, f64::min)
    };
    let (r_e, sizes) = match src {
        SingularSource::Point { .. } => (r, [diameter; 3]),
        SingularSource::Segment { a, b, .. } => {
            let holds_end = s.contains(&a.c, 1e-12) || s.contains(&b.c, 1e-12);
            let r_e = if holds_end {
                0.0
            } else {
                pts.iter().map(|p| src.r_e(p)).fold(f64::INFINITY, f64::min)
            };
            let axis = (*b - *a) * (1.0 / a.dist(b));
            let proj: Vec<(Point, f64)> = pts
                .iter()
                .map(|p| {
                    let t = (*p - *a).dot(&axis);
                    (*p - axis * t, t)
                })
                .collect();
            let mut trans: f64 = 0.0;
            for i in 0..nv {
                for j in i + 1..nv {
                    trans = trans.max(proj[i].0.dist(&proj[j].0));
                }
            }
            let tmin = proj.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let tmax = proj.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let ax = tmax - tmin;
            (
                r_e,
                if s.dim == 2 {
                    [trans, ax, ax]
                } else {
                    [trans, trans, ax]
                },
            )
        }
    };
    ElementMeta {
        r,
        r_e,
        sizes,
        diameter,
    }
}

/// Quasi-uniform mesh of a disk or ball with step `h`.
pub fn uniform_mesh(dom: &Domain, h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h < dom.diameter()) {
        return Err(Error::InvalidArgument(format!(
            "mesh step {h} outside (0, diameter)"
        )));
    }
    match dom {
        Domain::UnitDisk => disk::uniform_disk(h),
        Domain::UnitBall => octahedral_ball(h, 1.0),
        Domain::Ellipsoid => {
            let src = SingularSource::axis_segment(3, 0.5);
            anisotropic_segment_mesh(dom, &src, h, 1.0, DEFAULT_TAU)
        }
        Domain::Custom(_) => Err(Error::InvalidArgument(
            "uniform meshing of custom domains is not supported".into(),
        )),
    }
}

/// Moves every vertex `q` to `c + (q-c)·|q-c|^((1-μ)/μ)`.
pub fn grade_by_rescaling(mesh: &Mesh, mu: f64, center: &Point) -> Result<Mesh> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grading exponent {mu} not in (0,1]"
        )));
    }
    if center.dim != mesh.dim {
        return Err(Error::InvalidArgument("center dimension mismatch".into()));
    }
    let mut out = mesh.clone();
    out.meta = None;
    let p = (1.0 - mu) / mu;
    if p != 0.0 {
        for v in out.vertices.iter_mut() {
            let q = Point::from_raw(mesh.dim, *v);
            let d = q - *center;
            let r = d.norm();
            if r > 0.0 {
                *v = (*center + d * r.powf(p)).c;
            }
        }
    }
    for e in 0..out.n_elements() {
        if out.simplex(e).det() <= 0.0 {
            return Err(Error::GradingFailure { element: e });
        }
    }
    Ok(out)
}

/// Generates the mesh for a grading spec around a source.
pub fn generate(dom: &Domain, src: &SingularSource, spec: &GradingSpec) -> Result<Mesh> {
    spec.check()?;
    let mut mesh = match (src, spec.strategy) {
        (SingularSource::Point { location }, s) => {
            if location.norm() != 0.0 {
                return Err(Error::InvalidArgument(
                    "point-source meshes are generated around the origin".into(),
                ));
            }
            match (dom, s) {
                (_, GradingStrategy::Uniform) => uniform_mesh(dom, spec.h)?,
                (_, GradingStrategy::RescaledIsotropic) => {
                    grade_by_rescaling(&uniform_mesh(dom, spec.h)?, spec.mu, location)?
                }
                (Domain::UnitDisk, GradingStrategy::ConstructedIsotropic) => {
                    graded_disk_by_construction(spec.h, spec.mu)?
                }
                (Domain::UnitBall, GradingStrategy::ConstructedIsotropic) => {
                    graded_ball_by_construction(spec.h, spec.mu)?
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "strategy {:?} not available for a point source on {}",
                        s,
                        dom.name()
                    )))
                }
            }
        }
        (SingularSource::Segment { .. }, GradingStrategy::AnisotropicTensor) => {
            anisotropic_segment_mesh(dom, src, spec.h, spec.mu, spec.tau)?
        }
        (SingularSource::Segment { .. }, GradingStrategy::ConstructedIsotropic) => {
            isotropic_segment_mesh(dom, src, spec.h, spec.mu)?
        }
        (SingularSource::Segment { .. }, GradingStrategy::Uniform) => {
            anisotropic_segment_mesh(dom, src, spec.h, 1.0, spec.tau)?
        }
        (SingularSource::Segment { .. }, s) => {
            return Err(Error::InvalidArgument(format!(
                "strategy {s:?} not available for a segment source"
            )))
        }
    };
    mesh.attach_metadata(src);
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_checks_and_orients() {
        let v = vec![
            Point::new2(0.0, 0.0),
            Point::new2(0.0, 1.0),
            Point::new2(1.0, 0.0),
        ];
        let m = Mesh::new(2, v.clone(), vec![vec![0, 1, 2]], vec![true; 3]).unwrap();
        assert!(m.simplex(0).signed_volume() > 0.0);
        assert!(Mesh::new(2, v.clone(), vec![vec![0, 1, 5]], vec![true; 3]).is_err());
        assert!(Mesh::new(2, v, vec![vec![0, 1, 1]], vec![true; 3]).is_err());
    }

    #[test]
    fn rescaling_formula() {
        let m = uniform_mesh(&Domain::UnitDisk, 0.25).unwrap();
        let same = grade_by_rescaling(&m, 1.0, &Point::origin(2)).unwrap();
        assert_eq!(same.raw_vertices(), m.raw_vertices());
        let g = grade_by_rescaling(&m, 0.5, &Point::origin(2)).unwrap();
        for (q, p) in m.raw_vertices().iter().zip(g.raw_vertices()) {
            let rq = (q[0] * q[0] + q[1] * q[1]).sqrt();
            let rp = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((rp - rq * rq).abs() < 1e-15);
        }
        assert_eq!(g.n_vertices(), m.n_vertices());
    }

    #[test]
    fn facet_lists() {
        assert_eq!(
            facets_of(&[3, 1, 2]),
            vec![[1, 2, usize::MAX], [2, 3, usize::MAX], [1, 3, usize::MAX]]
        );
        assert_eq!(facets_of(&[0, 1, 2, 3]).len(), 4);
    }
}
