//! Comparison of element sizes with the grading rules.

use super::segment::outer_factor;
use super::{ElementMeta, GradingSpec, GradingStrategy, Mesh};
use crate::geometry::{Point, SingularSource};

/// Default tolerance factor of the audit.
pub const AUDIT_FACTOR: f64 = 4.0;

/// Prescribed size at distance `r` from the singular set: `h^{1/μ}` on
/// touching elements, `h r^{1-μ}` up to distance one, `h` beyond.
pub fn prescribed_size(r: f64, h: f64, mu: f64) -> f64 {
    let floor = h.powf(1.0 / mu);
    if r <= 0.0 {
        floor
    } else if r <= 1.0 {
        (h * r.powf(1.0 - mu)).max(floor)
    } else {
        h
    }
}

#[derive(Clone, Debug)]
pub struct GradingAudit {
    /// Per element: measured over prescribed size, transverse then axial
    /// (both equal for isotropically audited elements).
    pub ratios: Vec<[f64; 2]>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub factor: f64,
    pub too_coarse: usize,
    pub too_fine: usize,
    /// Elements audited with separate transverse and axial rules.
    pub anisotropic_elements: usize,
}

impl GradingAudit {
    pub fn passes(&self) -> bool {
        self.too_coarse == 0 && self.too_fine == 0
    }

    /// Spread of the ratios, `max / min`.
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

pub fn grading_audit(mesh: &Mesh, spec: &GradingSpec, src: &SingularSource) -> GradingAudit {
    audit_with_factor(mesh, spec, src, AUDIT_FACTOR)
}

pub fn audit_with_factor(
    mesh: &Mesh,
    spec: &GradingSpec,
    src: &SingularSource,
    factor: f64,
) -> GradingAudit {
    let meta = mesh.metadata_for(src);
    let (h, mu) = match spec.strategy {
        GradingStrategy::Uniform => (spec.h, 1.0),
        _ => (spec.h, spec.mu),
    };
    let aniso = spec.strategy == GradingStrategy::AnisotropicTensor && src.is_segment();
    let tau = outer_factor(spec.tau);
    let rescaled = spec.strategy == GradingStrategy::RescaledIsotropic;
    let mut ratios = Vec::with_capacity(meta.len());
    let mut n_aniso = 0;
    for (e, m) in meta.iter().enumerate() {
        let in_core = aniso && m.r <= 1.0 && !near_endpoint(mesh, e, src, tau);
        if in_core {
            n_aniso += 1;
            ratios.push(anisotropic_ratio(m, h, mu));
        } else {
            let mut size = prescribed_size(m.r, h, mu);
            if rescaled && m.r > 0.0 && m.r <= 1.0 {
                size = size.max(h / mu * m.r.powf(1.0 - mu));
            }
            let q = m.diameter / size;
            ratios.push([q, q]);
        }
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let (mut too_coarse, mut too_fine) = (0, 0);
    for r in &ratios {
        let lo = r[0].min(r[1]);
        let hi = r[0].max(r[1]);
        min_ratio = min_ratio.min(lo);
        max_ratio = max_ratio.max(hi);
        if hi > factor {
            too_coarse += 1;
        } else if lo < 1.0 / factor {
            too_fine += 1;
        }
    }
    GradingAudit {
        ratios,
        min_ratio,
        max_ratio,
        factor,
        too_coarse,
        too_fine,
        anisotropic_elements: n_aniso,
    }
}

fn anisotropic_ratio(m: &ElementMeta, h: f64, mu: f64) -> [f64; 2] {
    let axial = m.sizes[2];
    [
        m.sizes[0] / prescribed_size(m.r, h, mu),
        axial / prescribed_size(m.r_e, h, mu),
    ]
}

/// Barycenter test for the endpoint neighbourhood `r_e < τ r`.
pub(crate) fn near_endpoint(mesh: &Mesh, e: usize, src: &SingularSource, tau: f64) -> bool {
    let c = Point::from_raw(mesh.dim(), mesh.simplex(e).centroid());
    src.r_e(&c) < tau * src.r(&c)
}
