//! Admissible weight exponents and grading bounds for each problem class.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Isotropic,
    Anisotropic,
}

/// Space dimension `n`, singular set dimension `m` and mesh family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemClass {
    pub n: usize,
    pub m: usize,
    pub mesh_kind: MeshKind,
}

impl ProblemClass {
    pub fn new(n: usize, m: usize, mesh_kind: MeshKind) -> Result<Self> {
        let pc = ProblemClass { n, m, mesh_kind };
        pc.check()?;
        Ok(pc)
    }

    pub fn point(n: usize) -> Self {
        ProblemClass {
            n,
            m: 0,
            mesh_kind: MeshKind::Isotropic,
        }
    }

    pub fn segment(n: usize, mesh_kind: MeshKind) -> Self {
        ProblemClass { n, m: 1, mesh_kind }
    }

    pub fn check(&self) -> Result<()> {
        if self.n != 2 && self.n != 3 {
            return Err(Error::InvalidArgument(format!(
                "dimension {} not supported",
                self.n
            )));
        }
        if self.m > 1 {
            return Err(Error::InvalidArgument(format!(
                "singular set dimension {} not supported",
                self.m
            )));
        }
        if self.m == 0 && self.mesh_kind == MeshKind::Anisotropic {
            return Err(Error::InvalidArgument(
                "anisotropic meshes require a segment source".into(),
            ));
        }
        Ok(())
    }

    fn codim(&self) -> f64 {
        (self.n - self.m) as f64
    }
}

/// `|σ| < (n-m)/2`, the range where `r^{2σ}` is an A₂ weight.
pub fn a2_admissible(sigma: f64, pc: &ProblemClass) -> bool {
    sigma.abs() < pc.codim() / 2.0
}

/// Open interval of weights for which the weighted energy formulation is
/// well posed.
pub fn wellposed_sigma_range(pc: &ProblemClass) -> (f64, f64) {
    let half = pc.codim() / 2.0;
    (half - 1.0, half)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetNorm {
    /// Weighted energy norm with exponent `σ`.
    Energy(f64),
    /// Weighted `L²` norm with exponent `β`.
    L2(f64),
}

impl fmt::Display for TargetNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetNorm::Energy(s) => write!(f, "energy norm, sigma = {s}"),
            TargetNorm::L2(b) => write!(f, "weighted L2 norm, beta = {b}"),
        }
    }
}

/// Strict upper bound on the grading exponent and the rule it comes from.
#[derive(Clone, Debug, PartialEq)]
pub struct MuBound {
    pub bound: f64,
    pub rule: String,
}

/// Lower limit of the regularity exponent `η` entering the energy estimate.
pub fn eta_lower_limit(pc: &ProblemClass) -> f64 {
    match (pc.m, pc.n) {
        (0, n) => n as f64 / 2.0 - 2.0,
        (_, 3) => -1.0,
        _ => -0.5,
    }
}

/// The energy bound before optimizing over `η`; meaningful for
/// `η > eta_lower_limit(pc)`.
pub fn parametric_energy_bound(pc: &ProblemClass, sigma: f64, eta: f64) -> f64 {
    if pc.m == 1 && pc.n == 2 {
        sigma - eta
    } else {
        sigma - 1.0 - eta
    }
}

pub fn mu_bound(pc: &ProblemClass, target: TargetNorm) -> Result<MuBound> {
    pc.check()?;
    let n = pc.n as f64;
    let aniso = pc.mesh_kind == MeshKind::Anisotropic;
    match target {
        TargetNorm::Energy(sigma) => {
            let (lo, hi) = wellposed_sigma_range(pc);
            if !(sigma > lo && sigma < hi) {
                return Err(Error::InvalidArgument(format!(
                    "sigma = {sigma} outside the well-posed range ({lo}, {hi})"
                )));
            }
            let bound = parametric_energy_bound(pc, sigma, eta_lower_limit(pc));
            let rule = match (pc.m, pc.n) {
                (0, _) => "point source, energy norm: mu < sigma + 1 - n/2",
                (_, 3) => "segment in 3D, energy norm: mu < sigma",
                _ => "segment in 2D, energy norm: mu < sigma + 1/2",
            };
            Ok(MuBound {
                bound,
                rule: rule.into(),
            })
        }
        TargetNorm::L2(beta) => {
            if !a2_admissible(beta, pc) {
                return Err(Error::InvalidArgument(format!(
                    "beta = {beta} is not an admissible weight exponent (|beta| < {})",
                    pc.codim() / 2.0
                )));
            }
            let (bound, rule) = match (pc.m, pc.n, aniso) {
                (0, _, _) => {
                    if beta < n / 4.0 - 1.0 {
                        return Err(Error::NoTheorem(format!(
                            "point-source L2 estimates need beta >= {}",
                            n / 4.0 - 1.0
                        )));
                    }
                    (
                        1.0 + beta / 2.0 - n / 4.0,
                        "point source, weighted L2: mu < 1 + beta/2 - n/4",
                    )
                }
                (_, 3, true) => {
                    if beta <= 0.0 {
                        return Err(Error::NoTheorem(
                            "the anisotropic analysis does not give estimates for the L2 norm; beta > 0 is required"
                                .into(),
                        ));
                    }
                    (beta, "segment in 3D, anisotropic, weighted L2: mu < beta")
                }
                (_, 3, false) => (
                    (1.0 + beta) / 2.0,
                    "segment in 3D, isotropic, weighted L2: mu < (1 + beta)/2",
                ),
                (_, _, aniso) => {
                    if beta <= 0.25 {
                        return Err(Error::NoTheorem(
                            "segment in 2D, weighted L2 estimates need beta > 1/4".into(),
                        ));
                    }
                    if aniso {
                        (
                            beta + 0.5,
                            "segment in 2D, anisotropic, weighted L2: mu < beta + 1/2",
                        )
                    } else {
                        (
                            0.75 + beta / 2.0,
                            "segment in 2D, isotropic, weighted L2: mu < 3/4 + beta/2",
                        )
                    }
                }
            };
            Ok(MuBound {
                bound,
                rule: rule.into(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuCheck {
    pub mu: f64,
    pub bound: MuBound,
    pub satisfied: bool,
}

impl fmt::Display for MuCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}; bound {:.6}; mu = {} {}",
            self.bound.rule,
            self.bound.bound,
            self.mu,
            if self.satisfied {
                "satisfies the bound"
            } else {
                "violates the bound"
            }
        )
    }
}

pub fn check_mu(pc: &ProblemClass, target: TargetNorm, mu: f64) -> Result<MuCheck> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grading exponent {mu} not in (0, 1]"
        )));
    }
    let bound = mu_bound(pc, target)?;
    Ok(MuCheck {
        mu,
        satisfied: mu < bound.bound,
        bound,
    })
}
