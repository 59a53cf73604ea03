//! Conforming longest-edge bisection.

use std::collections::{HashMap, HashSet, VecDeque};

use super::simplex::Simplex;
use super::{facets_of, Mesh};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct RefineOptions {
    pub max_elements: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_elements: 50_000_000,
        }
    }
}

struct Refiner<'a> {
    dim: usize,
    verts: Vec<[f64; 3]>,
    bnd: Vec<bool>,
    elems: Vec<[usize; 4]>,
    vert_elems: Vec<Vec<usize>>,
    midpoints: HashMap<(usize, usize), usize>,
    bfacets: HashSet<[usize; 3]>,
    domain: Option<&'a crate::geometry::Domain>,
}

impl Refiner<'_> {
    fn simplex(&self, e: usize) -> Simplex {
        let el = &self.elems[e];
        let mut v = [[0.0; 3]; 4];
        for k in 0..=self.dim {
            v[k] = self.verts[el[k]];
        }
        Simplex { dim: self.dim, v }
    }

    fn edges(&self, e: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let el = self.elems[e];
        let n = self.dim + 1;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| ordered(el[i], el[j])))
    }

    /// Longest edge with a global tie-break on the vertex pair.
    fn longest(&self, e: usize) -> (usize, usize) {
        let mut best = (f64::NEG_INFINITY, (usize::MAX, usize::MAX));
        for (a, b) in self.edges(e) {
            let pa = self.verts[a];
            let pb = self.verts[b];
            let l = (pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2);
            if l > best.0 || (l == best.0 && (a, b) < best.1) {
                best = (l, (a, b));
            }
        }
        best.1
    }

    fn hanging(&self, e: usize) -> bool {
        self.edges(e).any(|k| self.midpoints.contains_key(&k))
    }

    fn sharing(&self, a: usize, b: usize) -> Vec<usize> {
        self.vert_elems[a]
            .iter()
            .copied()
            .filter(|e| self.vert_elems[b].contains(e))
            .collect()
    }

    fn midpoint(&mut self, a: usize, b: usize, around: &[usize]) -> Result<usize> {
        if let Some(&m) = self.midpoints.get(&(a, b)) {
            return Ok(m);
        }
        let (pa, pb) = (self.verts[a], self.verts[b]);
        let mut p = [
            0.5 * (pa[0] + pb[0]),
            0.5 * (pa[1] + pb[1]),
            0.5 * (pa[2] + pb[2]),
        ];
        let on_boundary = self.bnd[a]
            && self.bnd[b]
            && around.iter().any(|&e| {
                let el = self.elems[e];
                facets_of(&el[..=self.dim]).iter().any(|f| {
                    f[..self.dim].contains(&a)
                        && f[..self.dim].contains(&b)
                        && self.bfacets.contains(f)
                })
            });
        if on_boundary {
            if let Some(d) = self.domain {
                p = d
                    .boundary_project(&crate::geometry::Point::from_raw(self.dim, p))?
                    .c;
            }
        }
        let m = self.verts.len();
        self.verts.push(p);
        self.bnd.push(on_boundary);
        self.vert_elems.push(Vec::new());
        self.midpoints.insert((a, b), m);
        Ok(m)
    }

    /// Bisects element `t` at its longest edge; returns the new element id.
    fn bisect(&mut self, t: usize) -> Result<(usize, (usize, usize))> {
        let (a, b) = self.longest(t);
        let around = self.sharing(a, b);
        let m = self.midpoint(a, b, &around)?;
        let el = self.elems[t];
        let n = self.dim + 1;
        let mut c1 = el;
        let mut c2 = el;
        for k in 0..n {
            if el[k] == b {
                c1[k] = m;
            }
            if el[k] == a {
                c2[k] = m;
            }
        }
        for f in facets_of(&el[..n]) {
            let fs = &f[..self.dim];
            if fs.contains(&a) && fs.contains(&b) && self.bfacets.remove(&f) {
                for (from, to) in [(b, m), (a, m)] {
                    let mut g = f;
                    for x in g[..self.dim].iter_mut() {
                        if *x == from {
                            *x = to;
                        }
                    }
                    g[..self.dim].sort_unstable();
                    self.bfacets.insert(g);
                }
            }
        }
        let t2 = self.elems.len();
        self.elems[t] = c1;
        self.elems.push(c2);
        let vb = &mut self.vert_elems[b];
        if let Some(pos) = vb.iter().position(|&x| x == t) {
            vb[pos] = t2;
        }
        self.vert_elems[m].push(t);
        self.vert_elems[m].push(t2);
        for &v in &el[..n] {
            if v != a && v != b {
                self.vert_elems[v].push(t2);
            }
        }
        Ok((t2, (a, b)))
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Bisects elements until no element satisfies `too_big` and the mesh is
/// conforming again. New boundary midpoints are projected onto the domain.
pub fn refine_to_size(
    mesh: &Mesh,
    too_big: &(dyn Fn(&Simplex) -> bool + Sync),
    opts: RefineOptions,
) -> Result<Mesh> {
    let dim = mesh.dim();
    let elems: Vec<[usize; 4]> = (0..mesh.n_elements())
        .map(|e| {
            let mut a = [usize::MAX; 4];
            a[..=dim].copy_from_slice(mesh.element(e));
            a
        })
        .collect();
    let mut r = Refiner {
        dim,
        verts: mesh.raw_vertices().to_vec(),
        bnd: mesh.boundary_flags().to_vec(),
        vert_elems: mesh.vertex_elements(),
        elems,
        midpoints: HashMap::new(),
        bfacets: mesh.boundary_facets().into_iter().collect(),
        domain: mesh.domain(),
    };
    let mut queue: VecDeque<usize> = (0..r.elems.len()).collect();
    let mut queued = vec![true; r.elems.len()];
    while let Some(t) = queue.pop_front() {
        queued[t] = false;
        if !r.hanging(t) && !too_big(&r.simplex(t)) {
            continue;
        }
        let (t2, (a, b)) = r.bisect(t)?;
        if r.elems.len() > opts.max_elements {
            return Err(Error::ResourceLimit(format!(
                "refinement exceeded {} elements",
                opts.max_elements
            )));
        }
        queued.push(false);
        let mut push = |e: usize, q: &mut VecDeque<usize>| {
            if !queued[e] {
                queued[e] = true;
                q.push_back(e);
            }
        };
        push(t, &mut queue);
        push(t2, &mut queue);
        for e in r.sharing(a, b) {
            push(e, &mut queue);
        }
    }
    let mut out = Mesh::from_parts(dim, r.verts, r.elems, r.bnd);
    out.orient();
    Ok(match mesh.domain() {
        Some(d) => out.with_domain(d.clone()),
        None => out,
    })
}
