//! Gauss–Legendre and symmetric simplex rules.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`, `n ≥ 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rules need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // Legendre recurrence: p1 = P_n(z), p0 = P_{n-1}(z)
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Barycentric nodes with weights summing to one (fractions of the volume).
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Rule of the given polynomial degree (at most 3), all nodes interior.
    pub fn of_degree(dim: usize, degree: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!(
                "no simplex rules in dimension {dim}"
            )));
        }
        let c = 1.0 / (dim + 1) as f64;
        let centroid = [c, c, c, if dim == 3 { c } else { 0.0 }];
        let (points, weights) = match degree {
            0 | 1 => (vec![centroid], vec![1.0]),
            2 if dim == 2 => (perms(dim, 2.0 / 3.0, 1.0 / 6.0), vec![1.0 / 3.0; 3]),
            2 => {
                let a = 0.585_410_196_624_968_5;
                let b = 0.138_196_601_125_010_5;
                (perms(dim, a, b), vec![0.25; 4])
            }
            3 if dim == 2 => {
                let mut p = vec![centroid];
                p.extend(perms(dim, 0.6, 0.2));
                (p, vec![-27.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0])
            }
            3 => {
                let mut p = vec![centroid];
                p.extend(perms(dim, 0.5, 1.0 / 6.0));
                (p, vec![-0.8, 0.45, 0.45, 0.45, 0.45])
            }
            d => {
                return Err(Error::InvalidArgument(format!(
                    "quadrature degree {d} not available"
                )))
            }
        };
        Ok(SimplexRule {
            dim,
            points,
            weights,
        })
    }
}

/// The `dim+1` points with one coordinate `a` and the others `b`.
fn perms(dim: usize, a: f64, b: f64) -> Vec<[f64; 4]> {
    (0..=dim)
        .map(|k| {
            let mut p = [0.0; 4];
            for (i, v) in p.iter_mut().enumerate().take(dim + 1) {
                *v = if i == k { a } else { b };
            }
            p
        })
        .collect()
}
