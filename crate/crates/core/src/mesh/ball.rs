//! Balls and half-balls built from octahedral shells.
//!
//! Shell `s` has radius `r_s` and lattice resolution `k_s`; its vertices are
//! the integer points of `|i|+|j|+|l| = k_s` mapped to the sphere by an
//! equal-area octahedral map. Consecutive shells differ in resolution by at
//! most one and are joined by Kuhn tetrahedra (resolution step) or by
//! prisms split with the minimum-index rule (equal resolution).

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

use super::{Mesh, MAX_VERTICES};
use crate::error::{Error, Result};
use crate::geometry::Domain;

/// Angular resolution constant: shell resolution `k ≈ c r^μ / h`.
pub(crate) const SHELL_RESOLUTION: f64 = 2.0;

/// Signed lattice coordinates of a shell vertex.
pub(crate) type LatticeKey = (usize, i32, i32, i32);

#[derive(Clone, Debug)]
pub(crate) struct Shells {
    pub radii: Vec<f64>,
    pub res: Vec<usize>,
}

impl Shells {
    pub fn len(&self) -> usize {
        self.radii.len()
    }
}

/// Graded shell radii from the center to `radius`, resolution growing by at
/// most one per shell.
pub(crate) fn shell_schedule(h: f64, mu: f64, radius: f64) -> Result<Shells> {
    if !(mu > 0.0 && mu <= 1.0) || !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad grading h={h}, mu={mu}"
        )));
    }
    let c = SHELL_RESOLUTION;
    let r1 = h.powf(1.0 / mu).min(h);
    if !(r1 < radius) {
        return Err(Error::InvalidArgument(format!(
            "first shell {r1:.3e} exceeds radius {radius}"
        )));
    }
    let mut radii = vec![0.0, r1];
    let mut res = vec![0usize, 1];
    let mut count = 7usize;
    let target = |r: f64| (c * r.powf(mu) / h).round().max(1.0) as usize;
    loop {
        let r = *radii.last().unwrap();
        let k = *res.last().unwrap();
        if r >= radius {
            break;
        }
        let nominal = r + h * r.powf(1.0 - mu);
        // largest radius whose rounded resolution stays at most k+1
        let limit = ((k as f64 + 1.5) * h / c).powf(1.0 / mu);
        let next = nominal.min(limit.max(r * (1.0 + 1e-9)));
        let kn = target(next).clamp(k, k + 1);
        radii.push(next);
        res.push(kn);
        count += 4 * kn * kn + 2;
        if count > MAX_VERTICES {
            return Err(Error::ResourceLimit(format!(
                "more than {MAX_VERTICES} vertices"
            )));
        }
        if radii.len() > 1_000_000 {
            return Err(Error::InvalidArgument(
                "shell recurrence did not reach the boundary".into(),
            ));
        }
    }
    let n = radii.len();
    if n >= 4 {
        let nominal = radii[n - 1] - radii[n - 2];
        if radius - radii[n - 2] < 0.5 * nominal {
            radii.remove(n - 2);
            res.remove(n - 2);
            res[n - 2] = res[n - 2].min(res[n - 3] + 1);
        }
    }
    *radii.last_mut().unwrap() = radius;
    Ok(Shells { radii, res })
}

/// Equal-area map from the octahedron `|x|+|y|+|z| = 1` to the unit sphere.
pub(crate) fn octahedral_to_sphere(i: i32, j: i32, l: i32, k: usize) -> [f64; 3] {
    if k == 0 {
        return [0.0; 3];
    }
    let kf = k as f64;
    let (u, v) = (i.abs() as f64 / kf, j.abs() as f64 / kf);
    let rho = u + v;
    let z = (1.0 - rho * rho).max(0.0) * (l.signum() as f64);
    if rho == 0.0 {
        return [0.0, 0.0, if l < 0 { -1.0 } else { 1.0 }];
    }
    let phi = FRAC_PI_4 * ((v - u) / rho + 1.0);
    let s = rho * (2.0 - rho * rho).sqrt();
    [s * phi.cos() * sign(i), s * phi.sin() * sign(j), z]
}

fn sign(v: i32) -> f64 {
    if v < 0 {
        -1.0
    } else {
        1.0
    }
}

/// Lattice points of a shell of resolution `k`, optionally only `l ≥ 0`.
pub(crate) fn shell_points(k: usize, upper_only: bool) -> Vec<(i32, i32, i32)> {
    let k = k as i32;
    let mut pts = Vec::new();
    if k == 0 {
        pts.push((0, 0, 0));
        return pts;
    }
    for i in -k..=k {
        let ri = k - i.abs();
        for j in -ri..=ri {
            let rem = ri - j.abs();
            pts.push((i, j, rem));
            if rem != 0 && !upper_only {
                pts.push((i, j, -rem));
            }
        }
    }
    pts
}

fn octants(upper_only: bool) -> Vec<(i32, i32, i32)> {
    let mut o = Vec::new();
    for sz in [1, -1] {
        if upper_only && sz < 0 {
            continue;
        }
        for sy in [1, -1] {
            for sx in [1, -1] {
                o.push((sx, sy, sz));
            }
        }
    }
    o
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn in_region(y: [i32; 3]) -> bool {
    0 <= y[2] && y[2] <= y[1] && y[1] <= y[0]
}

fn lattice(y: [i32; 3], o: (i32, i32, i32)) -> (i32, i32, i32) {
    (o.0 * (y[0] - y[1]), o.1 * (y[1] - y[2]), o.2 * y[2])
}

/// Splits the prism `bottom (0,1,2)` / `top (3,4,5)` into three tetrahedra,
/// choosing every quad diagonal through the quad's smallest global index.
pub(crate) fn split_prism(p: [usize; 6]) -> [[usize; 4]; 3] {
    let m = (0..6).min_by_key(|&i| p[i]).unwrap();
    let (b, t) = if m < 3 { (0, 3) } else { (3, 0) };
    let r = m % 3;
    let v = [
        p[b + r],
        p[b + (r + 1) % 3],
        p[b + (r + 2) % 3],
        p[t + r],
        p[t + (r + 1) % 3],
        p[t + (r + 2) % 3],
    ];
    if v[1].min(v[5]) < v[2].min(v[4]) {
        [
            [v[0], v[1], v[2], v[5]],
            [v[0], v[1], v[5], v[4]],
            [v[0], v[4], v[5], v[3]],
        ]
    } else {
        [
            [v[0], v[1], v[2], v[4]],
            [v[0], v[4], v[2], v[5]],
            [v[0], v[4], v[5], v[3]],
        ]
    }
}

/// Tetrahedra of the shell complex in terms of lattice keys.
pub(crate) struct ShellComplex {
    pub keys: Vec<LatticeKey>,
    pub tets: Vec<[usize; 4]>,
}

/// Builds the combinatorial shell complex. Vertex numbering is shell by
/// shell in lattice order, starting at `first_id`; tets refer to these ids.
pub(crate) fn shell_complex(shells: &Shells, upper_only: bool) -> ShellComplex {
    let mut keys = Vec::new();
    let mut index = HashMap::new();
    for (s, &k) in shells.res.iter().enumerate() {
        for (i, j, l) in shell_points(k, upper_only) {
            index.insert((s, i, j, l), keys.len());
            keys.push((s, i, j, l));
        }
    }
    let mut tets = Vec::new();
    let id = |s: usize, q: (i32, i32, i32)| index[&(s, q.0, q.1, q.2)];
    for s in 0..shells.len() - 1 {
        let (k0, k1) = (shells.res[s], shells.res[s + 1]);
        let k = k0 as i32;
        for o in octants(upper_only) {
            if k1 == k0 + 1 {
                for y2 in 0..=k {
                    for y3 in 0..=y2 {
                        for p in PERMS {
                            let mut y = [k, y2, y3];
                            let mut vs = [y; 4];
                            for (step, &ax) in p.iter().enumerate() {
                                y[ax] += 1;
                                vs[step + 1] = y;
                            }
                            if !vs.iter().all(|&v| in_region(v)) {
                                continue;
                            }
                            let mut t = [0; 4];
                            for (q, v) in vs.iter().enumerate() {
                                let sh = if v[0] == k { s } else { s + 1 };
                                t[q] = id(sh, lattice(*v, o));
                            }
                            tets.push(t);
                        }
                    }
                }
            } else {
                for (a, b, c) in face_triangles(k0) {
                    let tri = [a, b, c].map(|y| lattice(y, o));
                    let p = [
                        id(s, tri[0]),
                        id(s, tri[1]),
                        id(s, tri[2]),
                        id(s + 1, tri[0]),
                        id(s + 1, tri[1]),
                        id(s + 1, tri[2]),
                    ];
                    tets.extend(split_prism(p));
                }
            }
        }
    }
    ShellComplex { keys, tets }
}

/// Triangles of one octant face at resolution `k`, in y-coordinates.
fn face_triangles(k: usize) -> Vec<([i32; 3], [i32; 3], [i32; 3])> {
    let k = k as i32;
    let mut out = Vec::new();
    for y2 in 0..k {
        for y3 in 0..=y2 {
            let a = [k, y2, y3];
            let b = [k, y2 + 1, y3];
            let c = [k, y2 + 1, y3 + 1];
            out.push((a, b, c));
            let d = [k, y2, y3 + 1];
            if in_region(d) {
                out.push((a, d, c));
            }
        }
    }
    out
}

/// Octahedral ball of the given radius, graded toward its center.
pub(crate) fn shell_ball(shells: &Shells) -> Mesh {
    let cx = shell_complex(shells, false);
    let verts: Vec<[f64; 3]> = cx
        .keys
        .iter()
        .map(|&(s, i, j, l)| {
            let u = octahedral_to_sphere(i, j, l, shells.res[s]);
            let r = shells.radii[s];
            [r * u[0], r * u[1], r * u[2]]
        })
        .collect();
    let last = shells.len() - 1;
    let bnd = cx.keys.iter().map(|k| k.0 == last).collect();
    let mut m = Mesh::from_parts(3, verts, cx.tets, bnd);
    m.orient();
    m
}

/// Quasi-uniform (`mu = 1`) or rescaling base mesh of a ball.
pub fn octahedral_ball(h: f64, radius: f64) -> Result<Mesh> {
    let shells = shell_schedule(h, 1.0, radius)?;
    let m = shell_ball(&shells);
    Ok(if radius == 1.0 {
        m.with_domain(Domain::UnitBall)
    } else {
        m
    })
}

pub fn graded_ball_by_construction(h: f64, mu: f64) -> Result<Mesh> {
    let shells = shell_schedule(h, mu, 1.0)?;
    Ok(shell_ball(&shells).with_domain(Domain::UnitBall))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_mesh;

    #[test]
    fn equal_area_map_on_sphere() {
        for (i, j, l) in shell_points(5, false) {
            let p = octahedral_to_sphere(i, j, l, 5);
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn shell_point_counts() {
        assert_eq!(shell_points(3, false).len(), 4 * 9 + 2);
        assert_eq!(shell_points(1, true).len(), 5);
    }

    #[test]
    fn prism_split_is_consistent() {
        let t = split_prism([5, 3, 9, 1, 7, 2]);
        let vol: usize = t.iter().map(|x| x.len()).sum();
        assert_eq!(vol, 12);
        for tet in t {
            assert!(tet.contains(&1));
        }
    }

    #[test]
    fn small_balls_are_valid() {
        for (h, mu) in [(0.5, 1.0), (0.3, 0.5), (0.25, 0.25)] {
            let m = graded_ball_by_construction(h, mu).unwrap();
            let rep = validate_mesh(&m);
            assert!(rep.ok(), "h={h} mu={mu}: {rep:?}");
        }
    }
}
