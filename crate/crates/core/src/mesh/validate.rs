//! Structural checks of a mesh.

use std::collections::HashMap;

use super::simplex::dist;
use super::Mesh;

const DUPLICATE_TOL: f64 = 1e-12;
const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    /// Elements with non-positive signed volume.
    pub inverted: Vec<usize>,
    /// Facets shared by more than two elements.
    pub overshared_facets: Vec<[usize; 3]>,
    /// Vertices lying inside a facet that only one element owns.
    pub hanging_nodes: Vec<(usize, [usize; 3])>,
    /// Vertices of boundary facets without the boundary flag.
    pub unflagged_boundary: Vec<usize>,
    /// Flagged vertices that belong to no boundary facet.
    pub flagged_interior: Vec<usize>,
    /// Flagged vertices off the analytic boundary.
    pub off_boundary: Vec<usize>,
    pub duplicate_vertices: Vec<(usize, usize)>,
    pub boundary_facets: usize,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.inverted.is_empty()
            && self.overshared_facets.is_empty()
            && self.hanging_nodes.is_empty()
            && self.unflagged_boundary.is_empty()
            && self.flagged_interior.is_empty()
            && self.off_boundary.is_empty()
            && self.duplicate_vertices.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "inverted={} overshared={} hanging={} unflagged={} flagged_interior={} off_boundary={} duplicates={}",
            self.inverted.len(),
            self.overshared_facets.len(),
            self.hanging_nodes.len(),
            self.unflagged_boundary.len(),
            self.flagged_interior.len(),
            self.off_boundary.len(),
            self.duplicate_vertices.len()
        )
    }
}

pub fn validate_mesh(mesh: &Mesh) -> ValidationReport {
    let mut rep = ValidationReport::default();
    for e in 0..mesh.n_elements() {
        let s = mesh.simplex(e);
        let scale = s.diameter().powi(mesh.dim() as i32);
        if !(s.signed_volume() > 1e-14 * scale) {
            rep.inverted.push(e);
        }
    }

    let facets = mesh.facet_map();
    let mut bfacets = Vec::new();
    for (f, owners) in &facets {
        match owners.len() {
            1 => bfacets.push(*f),
            2 => {}
            _ => rep.overshared_facets.push(*f),
        }
    }
    bfacets.sort_unstable();
    rep.overshared_facets.sort_unstable();
    rep.boundary_facets = bfacets.len();

    let nf = mesh.dim();
    let mut on_bfacet = vec![false; mesh.n_vertices()];
    for f in &bfacets {
        for &v in &f[..nf] {
            on_bfacet[v] = true;
        }
    }
    rep.hanging_nodes = hanging_nodes(mesh, &bfacets, &on_bfacet);

    for v in 0..mesh.n_vertices() {
        match (on_bfacet[v], mesh.is_boundary(v)) {
            (true, false) => rep.unflagged_boundary.push(v),
            (false, true) => rep.flagged_interior.push(v),
            _ => {}
        }
        if mesh.is_boundary(v) {
            if let Some(d) = mesh.domain() {
                if !(d.boundary_residual(&mesh.vertex(v)) <= BOUNDARY_TOL) {
                    rep.off_boundary.push(v);
                }
            }
        }
    }
    rep.duplicate_vertices = duplicates(mesh.raw_vertices());
    rep
}

type Cell = (i64, i64, i64);

fn cell_of(x: &[f64; 3], size: f64) -> Cell {
    (
        (x[0] / size).floor() as i64,
        (x[1] / size).floor() as i64,
        (x[2] / size).floor() as i64,
    )
}

fn duplicates(verts: &[[f64; 3]]) -> Vec<(usize, usize)> {
    let size = 4.0 * DUPLICATE_TOL;
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::with_capacity(verts.len());
    let mut out = Vec::new();
    for (i, x) in verts.iter().enumerate() {
        let c = cell_of(x, size);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&(c.0 + dx, c.1 + dy, c.2 + dz)) {
                        for &j in list {
                            if dist(x, &verts[j]) <= DUPLICATE_TOL {
                                out.push((j, i));
                            }
                        }
                    }
                }
            }
        }
        grid.entry(c).or_default().push(i);
    }
    out.sort_unstable();
    out
}

/// Vertices lying in the relative interior of a single-owner facet.
fn hanging_nodes(
    mesh: &Mesh,
    bfacets: &[[usize; 3]],
    on_bfacet: &[bool],
) -> Vec<(usize, [usize; 3])> {
    if bfacets.is_empty() {
        return Vec::new();
    }
    let nf = mesh.dim();
    let v = mesh.raw_vertices();
    let sizes: Vec<f64> = bfacets
        .iter()
        .map(|f| {
            (0..nf)
                .flat_map(|a| (a + 1..nf).map(move |b| (a, b)))
                .map(|(a, b)| dist(&v[f[a]], &v[f[b]]))
                .fold(0.0, f64::max)
        })
        .collect();
    let mut sorted = sizes.clone();
    sorted.sort_by(f64::total_cmp);
    let cell = sorted[sorted.len() / 2].max(1e-12);
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (i, x) in v.iter().enumerate() {
        if on_bfacet[i] {
            grid.entry(cell_of(x, cell)).or_default().push(i);
        }
    }
    let mut out = Vec::new();
    for (fi, f) in bfacets.iter().enumerate() {
        let pts: Vec<[f64; 3]> = f[..nf].iter().map(|&i| v[i]).collect();
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let tol = 1e-9 * sizes[fi];
        let (c0, c1) = (cell_of(&lo, cell), cell_of(&hi, cell));
        for cx in c0.0..=c1.0 {
            for cy in c0.1..=c1.1 {
                for cz in c0.2..=c1.2 {
                    let Some(list) = grid.get(&(cx, cy, cz)) else {
                        continue;
                    };
                    for &q in list {
                        if f[..nf].contains(&q) {
                            continue;
                        }
                        if inside_facet(&pts, &v[q], tol) {
                            out.push((q, *f));
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn inside_facet(pts: &[[f64; 3]], x: &[f64; 3], tol: f64) -> bool {
    if pts.len() == 2 {
        let d = sub(&pts[1], &pts[0]);
        let w = sub(x, &pts[0]);
        let l2 = dot(&d, &d);
        let t = dot(&w, &d) / l2;
        let off = sub(&w, &[d[0] * t, d[1] * t, d[2] * t]);
        let eps = tol / l2.sqrt();
        return t > eps && t < 1.0 - eps && dot(&off, &off).sqrt() <= tol;
    }
    let e1 = sub(&pts[1], &pts[0]);
    let e2 = sub(&pts[2], &pts[0]);
    let w = sub(x, &pts[0]);
    let (a, b, c) = (dot(&e1, &e1), dot(&e1, &e2), dot(&e2, &e2));
    let (d, e) = (dot(&w, &e1), dot(&w, &e2));
    let det = a * c - b * b;
    let s = (c * d - b * e) / det;
    let t = (a * e - b * d) / det;
    let proj = [
        pts[0][0] + s * e1[0] + t * e2[0],
        pts[0][1] + s * e1[1] + t * e2[1],
        pts[0][2] + s * e1[2] + t * e2[2],
    ];
    let eps = 1e-9;
    dist(&proj, x) <= tol && s > -eps && t > -eps && s + t < 1.0 + eps
}
