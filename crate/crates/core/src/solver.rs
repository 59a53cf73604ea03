//! Jacobi-preconditioned conjugate gradients and a dense Cholesky
//! cross-check.

use rayon::prelude::*;

use crate::assembly::SparseSystem;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Cg,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Diagonal,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveConfig {
    pub method: Method,
    pub rel_tolerance: f64,
    /// `None` selects `max(1000, 20 √n)`.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: Method::Cg,
            rel_tolerance: 1e-10,
            max_iterations: None,
            preconditioner: Preconditioner::Diagonal,
        }
    }
}

/// Largest system the dense path accepts.
pub const DENSE_LIMIT: usize = 6000;

impl SolveConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {} not in (0,1)",
                self.rel_tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidArgument(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn iteration_limit(&self, n: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| ((20.0 * (n as f64).sqrt()).ceil() as usize).max(1000))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    /// Final `‖b - A u‖ / ‖b‖`, recomputed from the returned iterate.
    pub residual: f64,
}

const CHUNK: usize = 4096;

/// Dot product with a reduction order fixed by the chunk size only.
fn pdot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    parts.iter().sum()
}

fn relative_residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.mul(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let nb = pdot(b, b).sqrt();
    if nb == 0.0 {
        pdot(&r, &r).sqrt()
    } else {
        pdot(&r, &r).sqrt() / nb
    }
}

/// Preconditioned CG on an SPD matrix.
pub fn cg(a: &CsrMatrix, b: &[f64], cfg: &SolveConfig) -> Result<(Vec<f64>, SolveReport)> {
    cfg.check()?;
    let n = a.n();
    if b.len() != n {
        return Err(Error::InvalidArgument(
            "right-hand side has the wrong length".into(),
        ));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "right-hand side is not finite".into(),
        ));
    }
    let mut x = vec![0.0; n];
    let nb = pdot(b, b).sqrt();
    if nb == 0.0 {
        return Ok((
            x,
            SolveReport {
                method: Method::Cg,
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = match cfg.preconditioner {
        Preconditioner::None => vec![1.0; n],
        Preconditioner::Diagonal => {
            let d = a.diagonal();
            if d.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::NotSpd);
            }
            d.iter().map(|v| 1.0 / v).collect()
        }
    };
    let limit = cfg.iteration_limit(n);
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(p, q)| p * q).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = pdot(&r, &z);
    for it in 1..=limit {
        a.matvec(&p, &mut ap);
        let pap = pdot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd);
        }
        let alpha = rz / pap;
        x.par_iter_mut()
            .zip(&p)
            .for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut()
            .zip(&ap)
            .for_each(|(ri, api)| *ri -= alpha * api);
        if pdot(&r, &r).sqrt() / nb <= cfg.rel_tolerance {
            let residual = relative_residual(a, b, &x);
            if residual <= cfg.rel_tolerance {
                return Ok((
                    x,
                    SolveReport {
                        method: Method::Cg,
                        iterations: it,
                        residual,
                    },
                ));
            }
            // continue from the true residual
            let ax = a.mul(&x);
            r.iter_mut()
                .zip(b.iter().zip(&ax))
                .for_each(|(ri, (bi, axi))| *ri = bi - axi);
        }
        z.par_iter_mut()
            .zip(r.par_iter().zip(&inv_diag))
            .for_each(|(zi, (ri, di))| *zi = ri * di);
        let rz_new = pdot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    let residual = relative_residual(a, b, &x);
    Err(Error::NotConverged {
        iterations: limit,
        residual,
        best: x,
    })
}

/// Dense Cholesky solve, for cross-checks on small systems.
pub fn dense_cholesky(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.n() > DENSE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "dense solve limited to {DENSE_LIMIT} unknowns"
        )));
    }
    let chol = nalgebra::Cholesky::new(a.to_dense()).ok_or(Error::NotSpd)?;
    let x = chol.solve(&nalgebra::DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}

pub fn solve_spd(sys: &SparseSystem, cfg: &SolveConfig) -> Result<(Vec<f64>, SolveReport)> {
    cfg.check()?;
    match cfg.method {
        Method::Cg => cg(&sys.matrix, &sys.rhs, cfg),
        Method::Direct => {
            let x = dense_cholesky(&sys.matrix, &sys.rhs)?;
            let residual = relative_residual(&sys.matrix, &sys.rhs, &x);
            Ok((
                x,
                SolveReport {
                    method: Method::Direct,
                    iterations: 0,
                    residual,
                },
            ))
        }
    }
}
