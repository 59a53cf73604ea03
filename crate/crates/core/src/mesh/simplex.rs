//! Affine simplex helpers shared by meshing, assembly and quadrature.

use crate::geometry::Point;

#[derive(Clone, Copy, Debug)]
pub struct Simplex {
    pub dim: usize,
    pub v: [[f64; 3]; 4],
}

impl Simplex {
    pub fn new(dim: usize, verts: &[[f64; 3]]) -> Self {
        let mut v = [[0.0; 3]; 4];
        v[..=dim].copy_from_slice(&verts[..=dim]);
        Simplex { dim, v }
    }

    pub fn nv(&self) -> usize {
        self.dim + 1
    }

    pub fn vertex(&self, i: usize) -> Point {
        Point::from_raw(self.dim, self.v[i])
    }

    /// Columns `v_i - v_0`.
    fn jacobian(&self) -> [[f64; 3]; 3] {
        let mut j = [[0.0; 3]; 3];
        for c in 0..self.dim {
            for r in 0..self.dim {
                j[r][c] = self.v[c + 1][r] - self.v[0][r];
            }
        }
        j
    }

    pub fn det(&self) -> f64 {
        let j = self.jacobian();
        if self.dim == 2 {
            j[0][0] * j[1][1] - j[0][1] * j[1][0]
        } else {
            det3(&j)
        }
    }

    pub fn signed_volume(&self) -> f64 {
        self.det() / if self.dim == 2 { 2.0 } else { 6.0 }
    }

    pub fn volume(&self) -> f64 {
        self.signed_volume().abs()
    }

    /// Inverse Jacobian, rows are gradients of barycentric coordinates 1..=dim.
    fn inverse(&self) -> [[f64; 3]; 3] {
        let j = self.jacobian();
        let mut inv = [[0.0; 3]; 3];
        if self.dim == 2 {
            let d = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            inv[0][0] = j[1][1] / d;
            inv[0][1] = -j[0][1] / d;
            inv[1][0] = -j[1][0] / d;
            inv[1][1] = j[0][0] / d;
        } else {
            let d = det3(&j);
            for r in 0..3 {
                for c in 0..3 {
                    let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                    let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                    inv[r][c] = (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / d;
                }
            }
        }
        inv
    }

    /// Gradients of the barycentric coordinates (the P1 basis).
    pub fn grads(&self) -> [[f64; 3]; 4] {
        let inv = self.inverse();
        let mut g = [[0.0; 3]; 4];
        for i in 0..self.dim {
            g[i + 1] = inv[i];
            for k in 0..3 {
                g[0][k] -= inv[i][k];
            }
        }
        g
    }

    pub fn barycentric(&self, x: &[f64; 3]) -> [f64; 4] {
        let inv = self.inverse();
        let d = [
            x[0] - self.v[0][0],
            x[1] - self.v[0][1],
            x[2] - self.v[0][2],
        ];
        let mut l = [0.0; 4];
        let mut s = 0.0;
        for i in 0..self.dim {
            l[i + 1] = (0..self.dim).map(|k| inv[i][k] * d[k]).sum();
            s += l[i + 1];
        }
        l[0] = 1.0 - s;
        l
    }

    pub fn point_at(&self, lambda: &[f64]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for i in 0..self.nv() {
            for k in 0..3 {
                x[k] += lambda[i] * self.v[i][k];
            }
        }
        x
    }

    pub fn centroid(&self) -> [f64; 3] {
        let w = 1.0 / self.nv() as f64;
        self.point_at(&[w; 4])
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.nv() {
            for j in i + 1..self.nv() {
                d = d.max(dist(&self.v[i], &self.v[j]));
            }
        }
        d
    }

    /// Whether `x` lies in the closed simplex, with tolerance relative to size.
    pub fn contains(&self, x: &[f64; 3], tol: f64) -> bool {
        let l = self.barycentric(x);
        l[..self.nv()].iter().all(|&v| v >= -tol)
    }

    /// Parameter interval of `a + t(b-a)`, `t ∈ [0,1]`, inside the closed simplex.
    pub fn clip(&self, a: &[f64; 3], b: &[f64; 3], tol: f64) -> Option<(f64, f64)> {
        let la = self.barycentric(a);
        let lb = self.barycentric(b);
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for i in 0..self.nv() {
            // λ(t) = la + t (lb - la) ≥ -tol
            let s = lb[i] - la[i];
            let c = la[i] + tol;
            if s.abs() < 1e-300 {
                if c < 0.0 {
                    return None;
                }
            } else if s > 0.0 {
                t0 = t0.max(-c / s);
            } else {
                t1 = t1.min(-c / s);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

fn det3(j: &[[f64; 3]; 3]) -> f64 {
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

pub fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
