//! P1 Galerkin system: stiffness matrix, measure loads and homogeneous
//! Dirichlet elimination.

use std::io::Write;

use rayon::prelude::*;

use crate::analysis::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::geometry::{Point, SingularSource};
use crate::mesh::simplex::Simplex;
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// Default order of the 1D rule on segment pieces.
pub const DEFAULT_QUAD_ORDER: usize = 3;

/// Reduced system over the free (interior) vertices.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// System index to mesh vertex.
    pub free: Vec<usize>,
    /// Mesh vertex to system index.
    pub index: Vec<Option<usize>>,
}

impl SparseSystem {
    pub fn n(&self) -> usize {
        self.free.len()
    }

    /// Nodal vector over all mesh vertices, zero on the boundary.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        self.index.iter().map(|i| i.map_or(0.0, |i| u[i])).collect()
    }

    pub fn write_matrix_market<W: Write>(&self, w: W) -> Result<()> {
        Ok(self.matrix.write_matrix_market(w)?)
    }
}

/// Sorted vertex neighbourhoods (including the vertex itself).
pub fn sparsity(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_vertices()];
    for el in mesh.elements() {
        for &i in el {
            rows[i].extend_from_slice(el);
        }
    }
    for r in rows.iter_mut() {
        r.sort_unstable();
        r.dedup();
    }
    rows
}

/// Element stiffness `|T| ∇λ_i·∇λ_j`; `None` for a degenerate simplex.
pub fn local_stiffness(s: &Simplex) -> Option<[[f64; 4]; 4]> {
    let vol = s.volume();
    let scale = s.diameter().powi(s.dim as i32);
    if !(vol > 1e-14 * scale) {
        return None;
    }
    let g = s.grads();
    let mut k = [[0.0; 4]; 4];
    for i in 0..s.nv() {
        for j in i..s.nv() {
            let v = vol * (g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    Some(k)
}

pub fn assemble_stiffness(mesh: &Mesh) -> Result<CsrMatrix> {
    let locals: Vec<Option<[[f64; 4]; 4]>> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| local_stiffness(&mesh.simplex(e)))
        .collect();
    let mut a = CsrMatrix::from_pattern(&sparsity(mesh));
    for (e, k) in locals.iter().enumerate() {
        let k = k.ok_or(Error::AssemblyFailure { element: e })?;
        let el = mesh.element(e);
        for (i, &vi) in el.iter().enumerate() {
            for (j, &vj) in el.iter().enumerate() {
                a.add(vi, vj, k[i][j]);
            }
        }
    }
    Ok(a)
}

const LOCATE_TOL: f64 = 1e-12;

/// Element containing `x` (lowest index among all containing elements) and
/// the barycentric coordinates of `x` in it.
pub fn locate_point(mesh: &Mesh, x: &Point) -> Result<(usize, [f64; 4])> {
    if x.dim != mesh.dim() || !x.is_finite() {
        return Err(Error::InvalidArgument("bad query point".into()));
    }
    if mesh.n_elements() == 0 {
        return Err(Error::PointLocation("empty mesh".into()));
    }
    let ve = mesh.vertex_elements();
    let start = (0..mesh.n_vertices())
        .min_by(|&a, &b| mesh.vertex(a).dist(x).total_cmp(&mesh.vertex(b).dist(x)))
        .unwrap();
    let mut e = ve[start].iter().copied().min().unwrap_or(0);
    let mut seen = vec![false; mesh.n_elements()];
    let found = loop {
        if seen[e] {
            break brute_force(mesh, x);
        }
        seen[e] = true;
        let lam = mesh.simplex(e).barycentric(&x.c);
        let n = mesh.dim() + 1;
        let k = (0..n).min_by(|&a, &b| lam[a].total_cmp(&lam[b])).unwrap();
        if lam[k] >= -LOCATE_TOL {
            break Some(e);
        }
        let el = mesh.element(e);
        let facet: Vec<usize> = (0..n).filter(|&i| i != k).map(|i| el[i]).collect();
        let next = ve[facet[0]]
            .iter()
            .copied()
            .find(|&t| t != e && facet[1..].iter().all(|v| ve[*v].contains(&t)));
        match next {
            Some(t) => e = t,
            None => break None,
        }
    };
    let e = found.ok_or_else(|| Error::PointLocation(format!("{x:?} lies outside the mesh")))?;
    // lowest-index element among those sharing a vertex with `e`
    let mut best = e;
    for &v in mesh.element(e) {
        for &t in &ve[v] {
            if t < best && mesh.simplex(t).contains(&x.c, LOCATE_TOL) {
                best = t;
            }
        }
    }
    Ok((best, mesh.simplex(best).barycentric(&x.c)))
}

fn brute_force(mesh: &Mesh, x: &Point) -> Option<usize> {
    (0..mesh.n_elements()).find(|&e| mesh.simplex(e).contains(&x.c, LOCATE_TOL))
}

/// Load of a unit point mass: `b_i = φ_i(x0)`.
pub fn assemble_rhs_point(mesh: &Mesh, x0: &Point) -> Result<Vec<f64>> {
    let (e, mut lam) = locate_point(mesh, x0)?;
    let n = mesh.dim() + 1;
    for l in lam[..n].iter_mut() {
        if l.abs() < 1e-13 {
            *l = 0.0;
        }
    }
    let s: f64 = lam[..n].iter().sum();
    let mut b = vec![0.0; mesh.n_vertices()];
    for (k, &v) in mesh.element(e).iter().enumerate() {
        b[v] += lam[k] / s;
    }
    Ok(b)
}

/// Load of the line measure `∫_Γ φ_i γ̂ ds`, Gauss rule exact to `quad_order`
/// on every piece of the segment inside one element.
pub fn assemble_rhs_segment(
    mesh: &Mesh,
    src: &SingularSource,
    quad_order: usize,
) -> Result<Vec<f64>> {
    let SingularSource::Segment { a, b, density } = src else {
        return Err(Error::InvalidArgument(
            "segment load needs a segment source".into(),
        ));
    };
    if a.dim != mesh.dim() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let len = a.dist(b);
    let (pieces, breaks) = clip_segment(mesh, &a.c, &b.c)?;
    let (nodes, weights) = gauss_legendre(quad_order.div_ceil(2).max(1));
    let mut rhs = vec![0.0; mesh.n_vertices()];
    let n = mesh.dim() + 1;
    for w in breaks.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let mid = 0.5 * (s0 + s1);
        let e = pieces
            .iter()
            .filter(|p| p.1 <= mid && mid <= p.2)
            .map(|p| p.0)
            .min()
            .ok_or_else(|| Error::Clipping(format!("segment leaves the mesh near t = {mid:.6}")))?;
        let s = mesh.simplex(e);
        let el = mesh.element(e);
        for (&xi, &wi) in nodes.iter().zip(&weights) {
            let t = mid + 0.5 * (s1 - s0) * xi;
            let x = (*a + (*b - *a) * t).c;
            let lam = s.barycentric(&x);
            let f = 0.5 * (s1 - s0) * len * wi * density.eval(t * len);
            for k in 0..n {
                rhs[el[k]] += f * lam[k];
            }
        }
    }
    Ok(rhs)
}

type Piece = (usize, f64, f64);

/// Per-element parameter intervals of the segment and the merged breakpoints.
fn clip_segment(mesh: &Mesh, a: &[f64; 3], b: &[f64; 3]) -> Result<(Vec<Piece>, Vec<f64>)> {
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for k in 0..3 {
        lo[k] = a[k].min(b[k]);
        hi[k] = a[k].max(b[k]);
    }
    let pieces: Vec<Piece> = (0..mesh.n_elements())
        .into_par_iter()
        .filter_map(|e| {
            let s = mesh.simplex(e);
            let slack = 1e-12 * s.diameter();
            for k in 0..mesh.dim() {
                let (mn, mx) = (0..s.nv())
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), i| {
                        (mn.min(s.v[i][k]), mx.max(s.v[i][k]))
                    });
                if mx < lo[k] - slack || mn > hi[k] + slack {
                    return None;
                }
            }
            let (t0, t1) = s.clip(a, b, LOCATE_TOL)?;
            (t1 > t0).then_some((e, t0, t1))
        })
        .collect();
    let mut ts: Vec<f64> = vec![0.0, 1.0];
    for p in &pieces {
        ts.push(p.1.clamp(0.0, 1.0));
        ts.push(p.2.clamp(0.0, 1.0));
    }
    ts.sort_by(f64::total_cmp);
    let mut breaks: Vec<f64> = Vec::with_capacity(ts.len());
    for t in ts {
        match breaks.last() {
            Some(&l) if t - l <= 1e-12 => {}
            _ => breaks.push(t),
        }
    }
    *breaks.last_mut().unwrap() = 1.0;
    if breaks.len() < 2 {
        return Err(Error::Clipping("segment does not meet the mesh".into()));
    }
    Ok((pieces, breaks))
}

/// Removes boundary rows and columns.
pub fn apply_dirichlet(a: &CsrMatrix, b: &[f64], mesh: &Mesh) -> Result<SparseSystem> {
    if a.n() != mesh.n_vertices() || b.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(
            "system and mesh sizes differ".into(),
        ));
    }
    let mut index = vec![None; mesh.n_vertices()];
    let mut free = Vec::new();
    for (v, slot) in index.iter_mut().enumerate() {
        if !mesh.is_boundary(v) {
            *slot = Some(free.len());
            free.push(v);
        }
    }
    if free.is_empty() {
        return Err(Error::EmptySystem);
    }
    let matrix = a.restrict(&index, free.len());
    let rhs = free.iter().map(|&v| b[v]).collect();
    Ok(SparseSystem {
        matrix,
        rhs,
        free,
        index,
    })
}

/// Load vector of the source on this mesh.
pub fn assemble_rhs(mesh: &Mesh, src: &SingularSource, quad_order: usize) -> Result<Vec<f64>> {
    match src {
        SingularSource::Point { location } => assemble_rhs_point(mesh, location),
        SingularSource::Segment { .. } => assemble_rhs_segment(mesh, src, quad_order),
    }
}

/// Stiffness, load and elimination in one call.
pub fn assemble_system(
    mesh: &Mesh,
    src: &SingularSource,
    quad_order: usize,
) -> Result<SparseSystem> {
    let a = assemble_stiffness(mesh)?;
    let b = assemble_rhs(mesh, src, quad_order)?;
    apply_dirichlet(&a, &b, mesh)
}
