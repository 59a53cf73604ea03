//! Nodal interpolant with coefficients zeroed near the singular set.

use rayon::prelude::*;

use super::exact::ExactSolution;
use crate::error::Result;
use crate::geometry::SingularSource;
use crate::mesh::{touches, Mesh};

/// Elements meeting the closed singular set.
pub fn touching_elements(mesh: &Mesh, src: &SingularSource) -> Vec<bool> {
    (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| touches(&mesh.simplex(e), src))
        .collect()
}

/// Vertices of elements whose vertex patch meets the singular set.
pub fn near_vertices(mesh: &Mesh, src: &SingularSource) -> Vec<bool> {
    let touching = touching_elements(mesh, src);
    let mut on_touching = vec![false; mesh.n_vertices()];
    for (e, &t) in touching.iter().enumerate() {
        if t {
            for &v in mesh.element(e) {
                on_touching[v] = true;
            }
        }
    }
    let mut near = vec![false; mesh.n_vertices()];
    for el in mesh.elements() {
        if el.iter().any(|&v| on_touching[v]) {
            for &v in el {
                near[v] = true;
            }
        }
    }
    near
}

/// Zero at near vertices, the exact value elsewhere.
pub fn truncated_interpolant(
    mesh: &Mesh,
    exact: &dyn ExactSolution,
    src: &SingularSource,
) -> Result<Vec<f64>> {
    let near = near_vertices(mesh, src);
    (0..mesh.n_vertices())
        .into_par_iter()
        .map(|i| {
            if near[i] {
                Ok(0.0)
            } else {
                exact.value(&mesh.vertex(i))
            }
        })
        .collect()
}
