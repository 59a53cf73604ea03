//! Concentric-ring triangulations of the unit disk.

use std::f64::consts::PI;

use super::{Mesh, MAX_VERTICES};
use crate::error::{Error, Result};
use crate::geometry::Domain;

/// Spacing constant of constructed rings: radial step `κ h r^{1-μ}`.
pub(crate) const RING_SPACING: f64 = 2.0;

/// Triangulates the strip between two polylines by marching along both.
/// Closed polylines wrap around; open ones run from first to last point.
pub(crate) fn march_strip(a: &[usize], b: &[usize], closed: bool, out: &mut Vec<[usize; 4]>) {
    let segs = |p: &[usize]| {
        if closed && p.len() > 1 {
            p.len()
        } else {
            p.len() - 1
        }
    };
    let (na, nb) = (segs(a), segs(b));
    let at = |p: &[usize], k: usize| p[k % p.len()];
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_a = if i == na {
            false
        } else if j == nb {
            true
        } else {
            (i + 1) * nb <= (j + 1) * na
        };
        if advance_a {
            out.push([at(a, i), at(a, i + 1), at(b, j), usize::MAX]);
            i += 1;
        } else {
            out.push([at(a, i), at(b, j + 1), at(b, j), usize::MAX]);
            j += 1;
        }
    }
}

/// Disk with a center vertex and closed rings at the given radii; the last
/// ring is the boundary.
pub fn ring_disk(radii: &[f64], counts: &[usize]) -> Result<Mesh> {
    if radii.is_empty() || radii.len() != counts.len() {
        return Err(Error::InvalidArgument(
            "one point count per ring required".into(),
        ));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 || counts.iter().any(|&c| c < 3) {
        return Err(Error::InvalidArgument(
            "rings must grow and hold at least 3 points".into(),
        ));
    }
    let total: usize = 1 + counts.iter().sum::<usize>();
    if total > MAX_VERTICES {
        return Err(Error::ResourceLimit(format!("{total} vertices requested")));
    }
    let mut verts = vec![[0.0; 3]];
    let mut bnd = vec![false];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for (k, (&r, &n)) in radii.iter().zip(counts).enumerate() {
        let last = k + 1 == radii.len();
        let start = verts.len();
        for j in 0..n {
            let t = 2.0 * PI * j as f64 / n as f64;
            verts.push([r * t.cos(), r * t.sin(), 0.0]);
            bnd.push(last);
        }
        rings.push((start..start + n).collect());
    }
    let mut elems = Vec::new();
    for w in rings.windows(2) {
        march_strip(&w[0], &w[1], true, &mut elems);
    }
    let mut m = Mesh::from_parts(2, verts, elems, bnd);
    m.orient();
    Ok(m.with_domain(Domain::UnitDisk))
}

pub(crate) fn uniform_disk(h: f64) -> Result<Mesh> {
    let k = (1.0 / h).round().max(1.0) as usize;
    if k > 10_000 {
        return Err(Error::ResourceLimit(format!("{k} rings requested")));
    }
    let radii: Vec<f64> = (1..=k).map(|i| i as f64 / k as f64).collect();
    let counts: Vec<usize> = radii
        .iter()
        .map(|r| ((2.0 * PI * r / h).round() as usize).max(3))
        .collect();
    ring_disk(&radii, &counts)
}

/// Graded ring radii `r_1 = κ h^{1/μ}`, `r_{i+1} = r_i + κ h r_i^{1-μ}`, ending at `radius`.
pub(crate) fn graded_radii(h: f64, mu: f64, radius: f64, kappa: f64) -> Result<Vec<f64>> {
    let mut r = kappa * h.powf(1.0 / mu);
    if !(r < radius) {
        return Err(Error::InvalidArgument(format!(
            "first ring radius {r:.3e} does not fit inside radius {radius}"
        )));
    }
    let mut radii = vec![r];
    let cap = 10_000_000;
    while r < radius {
        r += kappa * h * r.powf(1.0 - mu);
        radii.push(r);
        if radii.len() > cap {
            return Err(Error::InvalidArgument(
                "ring recurrence did not reach the boundary".into(),
            ));
        }
    }
    let n = radii.len();
    if n >= 3 {
        let nominal = radii[n - 1] - radii[n - 2];
        if radius - radii[n - 2] < 0.5 * nominal {
            radii.remove(n - 2);
        }
    }
    *radii.last_mut().unwrap() = radius;
    Ok(radii)
}

pub fn graded_disk_by_construction(h: f64, mu: f64) -> Result<Mesh> {
    if !(mu > 0.0 && mu <= 1.0) || !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad grading h={h}, mu={mu}"
        )));
    }
    let radii = graded_radii(h, mu, 1.0, RING_SPACING)?;
    let counts: Vec<usize> = radii
        .iter()
        .map(|r| ((2.0 * PI * r.powf(mu) / (RING_SPACING * h)).round() as usize).max(4))
        .collect();
    ring_disk(&radii, &counts)
}
