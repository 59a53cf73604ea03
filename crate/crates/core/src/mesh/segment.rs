//! Meshes graded toward a straight segment on the last coordinate axis.
//!
//! The anisotropic mesh has three parts:
//! * caps: half-balls (half-disks in 2D) of radius `R` around each
//!   endpoint, isotropically graded toward the endpoint;
//! * core: the equatorial section of the cap, extruded along the axis
//!   through planes graded toward the endpoints, prisms split into
//!   tetrahedra by the minimum-index rule;
//! * outer zone: prism layers on the capsule surface `r = R`, following rays
//!   normal to the segment out to the domain boundary.
//!
//! The isotropic mesh bisects the quasi-uniform version of this mesh until
//! every element satisfies the isotropic size rule.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use super::audit::prescribed_size;
use super::ball::{octahedral_to_sphere, shell_complex, shell_schedule, split_prism, Shells};
use super::disk::march_strip;
use super::refine::{refine_to_size, RefineOptions};
use super::simplex::Simplex;
use super::{facets_of, touches, Mesh, MAX_VERTICES};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, SingularSource};

pub const DEFAULT_TAU: f64 = 0.8;

/// Effective ratio of the endpoint neighbourhood `r_e < t r`. Values above
/// one are used as given; values up to one are read as a cone slope, giving
/// `sqrt(1 + τ²)`.
pub fn outer_factor(tau: f64) -> f64 {
    if tau > 1.0 {
        tau
    } else {
        (1.0 + tau * tau).sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SegmentMeshOptions {
    /// Radius of the structured capsule around the segment.
    pub inner_radius: f64,
    /// Isotropic meshes: bisect while `diameter > size_factor · prescribed`.
    pub size_factor: f64,
    pub max_elements: usize,
}

impl Default for SegmentMeshOptions {
    fn default() -> Self {
        SegmentMeshOptions {
            inner_radius: 0.8,
            size_factor: 2.0,
            max_elements: 20_000_000,
        }
    }
}

struct CapTemplate {
    /// Positions relative to the endpoint, axial component `≥ 0`.
    pos: Vec<[f64; 3]>,
    disk_index: Vec<Option<usize>>,
    cells: Vec<[usize; 4]>,
    /// Transverse positions of the equatorial section.
    disk_pos: Vec<[f64; 3]>,
    disk_cells: Vec<[usize; 3]>,
}

fn cap_template_3d(shells: &Shells) -> CapTemplate {
    let cx = shell_complex(shells, true);
    let mut pos = Vec::with_capacity(cx.keys.len());
    let mut disk_index = Vec::with_capacity(cx.keys.len());
    let mut disk_pos = Vec::new();
    for &(s, i, j, l) in &cx.keys {
        let u = octahedral_to_sphere(i, j, l, shells.res[s]);
        let r = shells.radii[s];
        let p = [r * u[0], r * u[1], if l == 0 { 0.0 } else { r * u[2] }];
        pos.push(p);
        if l == 0 {
            disk_index.push(Some(disk_pos.len()));
            disk_pos.push([p[0], p[1], 0.0]);
        } else {
            disk_index.push(None);
        }
    }
    let mut disk_cells = Vec::new();
    for t in &cx.tets {
        for f in facets_of(t) {
            if f.iter().all(|&v| disk_index[v].is_some()) {
                disk_cells.push(f.map(|v| disk_index[v].unwrap()));
            }
        }
    }
    CapTemplate {
        pos,
        disk_index,
        cells: cx.tets,
        disk_pos,
        disk_cells,
    }
}

fn cap_template_2d(shells: &Shells) -> CapTemplate {
    let mut pos = vec![[0.0; 3]];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for s in 1..shells.len() {
        let (r, k) = (shells.radii[s], shells.res[s]);
        let mut ring = Vec::new();
        for j in 0..=2 * k {
            ring.push(pos.len());
            pos.push(if j == 0 {
                [r, 0.0, 0.0]
            } else if j == 2 * k {
                [-r, 0.0, 0.0]
            } else if 2 * j == 2 * k {
                [0.0, r, 0.0]
            } else {
                let t = PI * j as f64 / (2 * k) as f64;
                [r * t.cos(), r * t.sin(), 0.0]
            });
        }
        rings.push(ring);
    }
    let mut cells = Vec::new();
    march_strip(&rings[0], &rings[1], false, &mut cells);
    for w in rings[1..].windows(2) {
        march_strip(&w[0], &w[1], false, &mut cells);
    }
    let mut eq: Vec<usize> = (0..pos.len()).filter(|&v| pos[v][1] == 0.0).collect();
    eq.sort_by(|&a, &b| pos[a][0].total_cmp(&pos[b][0]));
    let mut disk_index = vec![None; pos.len()];
    let mut disk_pos = Vec::new();
    for (d, &v) in eq.iter().enumerate() {
        disk_index[v] = Some(d);
        disk_pos.push([pos[v][0], 0.0, 0.0]);
    }
    let disk_cells = (0..eq.len() - 1).map(|d| [d, d + 1, usize::MAX]).collect();
    CapTemplate {
        pos,
        disk_index,
        cells,
        disk_pos,
        disk_cells,
    }
}

/// Offsets from an endpoint: `0, h^{1/μ}, …` with steps `h d^{1-μ}`, ending at `half`.
fn axial_offsets(h: f64, mu: f64, half: f64) -> Result<Vec<f64>> {
    let mut d = vec![0.0];
    let mut x = h.powf(1.0 / mu).min(h);
    while x < half {
        d.push(x);
        x += h * x.powf(1.0 - mu);
        if d.len() > 10_000_000 {
            return Err(Error::ResourceLimit("too many axial planes".into()));
        }
    }
    d.push(x);
    let n = d.len();
    if n >= 3 && half - d[n - 2] < 0.5 * (d[n - 1] - d[n - 2]) {
        d.remove(n - 2);
    }
    *d.last_mut().unwrap() = half;
    Ok(d)
}

/// Axial extent `(z_min, z_max)` of a segment on the last axis.
fn axis_extent(src: &SingularSource) -> Result<(f64, f64)> {
    let SingularSource::Segment { a, b, .. } = src else {
        return Err(Error::InvalidArgument(
            "segment meshes need a segment source".into(),
        ));
    };
    let n = a.dim;
    if (0..n - 1).any(|k| a.c[k] != 0.0 || b.c[k] != 0.0) {
        return Err(Error::InvalidArgument(
            "segment must lie on the last coordinate axis".into(),
        ));
    }
    let (z0, z1) = (a.c[n - 1], b.c[n - 1]);
    Ok((z0.min(z1), z0.max(z1)))
}

fn axis_point(dim: usize, z: f64) -> Point {
    let mut p = Point::origin(dim);
    p.c[dim - 1] = z;
    p
}

fn check_domain(dom: &Domain, dim: usize, za: f64, zb: f64, inner: f64) -> Result<()> {
    if dom.dim() != dim {
        return Err(Error::InvalidArgument(
            "domain and source dimensions differ".into(),
        ));
    }
    let mut probes = vec![axis_point(dim, za - inner), axis_point(dim, zb + inner)];
    for k in 0..=8 {
        let z = za + (zb - za) * k as f64 / 8.0;
        for q in 0..8 {
            let t = 2.0 * PI * q as f64 / 8.0;
            let mut p = axis_point(dim, z);
            p.c[0] = inner * t.cos();
            if dim == 3 {
                p.c[1] = inner * t.sin();
            }
            probes.push(p);
        }
    }
    for p in probes {
        if !dom.inside(&p) || dom.boundary_residual(&p) < 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "the capsule of radius {inner} around the segment must lie inside the domain (probe {p:?})"
            )));
        }
    }
    Ok(())
}

pub fn anisotropic_segment_mesh(
    dom: &Domain,
    src: &SingularSource,
    h: f64,
    mu: f64,
    tau: f64,
) -> Result<Mesh> {
    anisotropic_segment_mesh_with(dom, src, h, mu, tau, &SegmentMeshOptions::default())
}

pub fn anisotropic_segment_mesh_with(
    dom: &Domain,
    src: &SingularSource,
    h: f64,
    mu: f64,
    tau: f64,
    opts: &SegmentMeshOptions,
) -> Result<Mesh> {
    if !(mu > 0.0 && mu <= 1.0) || !(h > 0.0) || !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad grading h={h}, mu={mu}, tau={tau}"
        )));
    }
    let dim = src.dim();
    let (za, zb) = axis_extent(src)?;
    let big_r = opts.inner_radius;
    if !(big_r > 0.0 && big_r < 1.0) {
        return Err(Error::InvalidArgument(
            "inner radius must lie in (0,1)".into(),
        ));
    }
    check_domain(dom, dim, za, zb, big_r)?;
    let shells = shell_schedule(h, mu, big_r)?;
    let cap = if dim == 3 {
        cap_template_3d(&shells)
    } else {
        cap_template_2d(&shells)
    };
    let half = 0.5 * (zb - za);
    let offs = axial_offsets(h, mu, half)?;
    let mut planes: Vec<f64> = offs.iter().map(|d| za + d).collect();
    planes.extend(offs[..offs.len() - 1].iter().rev().map(|d| zb - d));
    let nd = cap.disk_pos.len();
    let np = planes.len();
    if nd.saturating_mul(np) > MAX_VERTICES {
        return Err(Error::ResourceLimit(format!(
            "{} core vertices requested",
            nd * np
        )));
    }
    let ax = dim - 1;

    let mut verts: Vec<[f64; 3]> = Vec::with_capacity(nd * np + 2 * cap.pos.len());
    for &z in &planes {
        for d in &cap.disk_pos {
            let mut p = *d;
            p[ax] = z;
            verts.push(p);
        }
    }
    let mut cells: Vec<[usize; 4]> = Vec::new();
    for p in 0..np - 1 {
        let (lo, hi) = (p * nd, (p + 1) * nd);
        for c in &cap.disk_cells {
            if dim == 3 {
                cells.extend(split_prism([
                    lo + c[0],
                    lo + c[1],
                    lo + c[2],
                    hi + c[0],
                    hi + c[1],
                    hi + c[2],
                ]));
            } else {
                cells.extend(split_quad(lo + c[0], lo + c[1], hi + c[1], hi + c[0]));
            }
        }
    }
    for (end, z, sign) in [(np - 1, zb, 1.0), (0, za, -1.0)] {
        let ids: Vec<usize> = cap
            .pos
            .iter()
            .zip(&cap.disk_index)
            .map(|(p, d)| match d {
                Some(d) => end * nd + d,
                None => {
                    let mut q = *p;
                    q[ax] = z + sign * p[ax];
                    verts.push(q);
                    verts.len() - 1
                }
            })
            .collect();
        for c in &cap.cells {
            let mut t = [usize::MAX; 4];
            for k in 0..=dim {
                t[k] = ids[c[k]];
            }
            cells.push(t);
        }
    }

    // capsule surface facets
    let inner = Mesh::from_parts(dim, verts.clone(), cells.clone(), vec![false; verts.len()]);
    let surface = inner.boundary_facets();
    let surf_verts: BTreeSet<usize> = surface.iter().flat_map(|f| f[..dim].to_vec()).collect();
    let mut rays = Vec::with_capacity(surf_verts.len());
    let mut max_gap: f64 = 0.0;
    for &v in &surf_verts {
        let x = Point::from_raw(dim, verts[v]);
        let foot = axis_point(dim, x.c[ax].clamp(za, zb));
        let off = x - foot;
        let r0 = off.norm();
        let n = off * (1.0 / r0);
        let t = dom.ray_exit(&foot, &n)?;
        if !(t > r0) {
            return Err(Error::ConstructionFailure(1));
        }
        max_gap = max_gap.max(t - r0);
        rays.push((v, foot, n, r0, t));
    }
    let layers = ((max_gap / h).ceil() as usize).max(1);
    if verts.len() + layers * rays.len() > MAX_VERTICES {
        return Err(Error::ResourceLimit("outer zone too large".into()));
    }
    let mut layer_id: HashMap<usize, Vec<usize>> = HashMap::with_capacity(rays.len());
    let mut bnd = vec![false; verts.len()];
    for &(v, foot, n, r0, t) in &rays {
        let mut ids = vec![v];
        for l in 1..=layers {
            let s = if l == layers {
                t
            } else {
                r0 + (t - r0) * l as f64 / layers as f64
            };
            verts.push((foot + n * s).c);
            bnd.push(l == layers);
            ids.push(verts.len() - 1);
        }
        layer_id.insert(v, ids);
    }
    for f in &surface {
        for l in 0..layers {
            let at = |k: usize, l: usize| layer_id[&f[k]][l];
            if dim == 3 {
                cells.extend(split_prism([
                    at(0, l),
                    at(1, l),
                    at(2, l),
                    at(0, l + 1),
                    at(1, l + 1),
                    at(2, l + 1),
                ]));
            } else {
                cells.extend(split_quad(at(0, l), at(1, l), at(1, l + 1), at(0, l + 1)));
            }
        }
    }
    let mut m = Mesh::from_parts(dim, verts, cells, bnd);
    m.orient();
    Ok(m.with_domain(dom.clone()))
}

/// Two triangles of the quad `a b c d` (in cyclic order), diagonal through
/// the smallest index.
fn split_quad(a: usize, b: usize, c: usize, d: usize) -> [[usize; 4]; 2] {
    let x = usize::MAX;
    if a.min(c) < b.min(d) {
        [[a, b, c, x], [a, c, d, x]]
    } else {
        [[a, b, d, x], [b, c, d, x]]
    }
}

pub fn isotropic_segment_mesh(dom: &Domain, src: &SingularSource, h: f64, mu: f64) -> Result<Mesh> {
    isotropic_segment_mesh_with(dom, src, h, mu, &SegmentMeshOptions::default())
}

pub fn isotropic_segment_mesh_with(
    dom: &Domain,
    src: &SingularSource,
    h: f64,
    mu: f64,
    opts: &SegmentMeshOptions,
) -> Result<Mesh> {
    let base = anisotropic_segment_mesh_with(dom, src, h, 1.0, DEFAULT_TAU, opts)?;
    if mu == 1.0 {
        return Ok(base);
    }
    let theta = opts.size_factor;
    let too_big = |s: &Simplex| {
        let r = if touches(s, src) {
            0.0
        } else {
            (0..s.nv())
                .map(|i| src.r(&s.vertex(i)))
                .fold(f64::INFINITY, f64::min)
        };
        s.diameter() > theta * prescribed_size(r, h, mu)
    };
    refine_to_size(
        &base,
        &too_big,
        RefineOptions {
            max_elements: opts.max_elements,
        },
    )
}
