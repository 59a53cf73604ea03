//! Estimated orders of convergence from a sequence of study levels.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRecord {
    pub h: f64,
    pub n_vertices: usize,
    pub n_elements: usize,
    /// Norm name and error value, in reporting order.
    pub errors: Vec<(String, f64)>,
    pub seconds: f64,
}

impl StudyRecord {
    pub fn error(&self, norm: &str) -> Option<f64> {
        self.errors.iter().find(|(n, _)| n == norm).map(|(_, e)| *e)
    }
}

/// Slope of `log err` against `log x`, sign flipped so that decay is
/// positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderFit {
    /// From the coarsest and finest levels.
    pub value: f64,
    /// Least-squares slope over all levels.
    pub least_squares: f64,
    /// Root-mean-square residual of the least-squares line.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEoc {
    pub norm: String,
    /// Order measured against `N^{-1/n}`.
    pub by_nodes: OrderFit,
    /// Order measured against `h`.
    pub by_step: OrderFit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EocReport {
    pub dim: usize,
    pub norms: Vec<NormEoc>,
}

impl EocReport {
    pub fn get(&self, norm: &str) -> Option<&NormEoc> {
        self.norms.iter().find(|n| n.norm == norm)
    }
}

/// Order `p` in `err ~ x^p`, from paired samples.
pub fn fit_order(x: &[f64], err: &[f64]) -> Result<OrderFit> {
    if x.len() != err.len() || x.len() < 2 {
        return Err(Error::InvalidRecord(
            "at least two samples are needed".into(),
        ));
    }
    for (&a, &e) in x.iter().zip(err) {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidRecord(format!(
                "abscissa {a} is not positive"
            )));
        }
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidRecord(format!(
                "error value {e} is zero or not finite"
            )));
        }
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let le: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let k = lx.len();
    let dx = lx[k - 1] - lx[0];
    if dx == 0.0 {
        return Err(Error::InvalidRecord("abscissae do not vary".into()));
    }
    let value = (le[k - 1] - le[0]) / dx;
    let mx = lx.iter().sum::<f64>() / k as f64;
    let me = le.iter().sum::<f64>() / k as f64;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxe: f64 = lx.iter().zip(&le).map(|(a, b)| (a - mx) * (b - me)).sum();
    let slope = sxe / sxx;
    let ss: f64 = lx
        .iter()
        .zip(&le)
        .map(|(a, b)| (b - me - slope * (a - mx)).powi(2))
        .sum();
    Ok(OrderFit {
        value,
        least_squares: slope,
        residual: (ss / k as f64).sqrt(),
    })
}

/// Orders for every norm present in the first record.
pub fn estimate_eoc(records: &[StudyRecord], dim: usize) -> Result<EocReport> {
    if records.len() < 2 {
        return Err(Error::InvalidRecord(
            "at least two levels are needed".into(),
        ));
    }
    if records.windows(2).any(|w| !(w[1].h < w[0].h)) {
        return Err(Error::InvalidRecord(
            "mesh steps must strictly decrease".into(),
        ));
    }
    let hs: Vec<f64> = records.iter().map(|r| r.h).collect();
    let ns: Vec<f64> = records
        .iter()
        .map(|r| (r.n_vertices as f64).powf(-1.0 / dim as f64))
        .collect();
    let mut norms = Vec::new();
    for (name, _) in &records[0].errors {
        let errs = records
            .iter()
            .map(|r| {
                r.error(name)
                    .ok_or_else(|| Error::InvalidRecord(format!("level lacks norm {name}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        norms.push(NormEoc {
            norm: name.clone(),
            by_nodes: fit_order(&ns, &errs)?,
            by_step: fit_order(&hs, &errs)?,
        });
    }
    Ok(EocReport { dim, norms })
}
