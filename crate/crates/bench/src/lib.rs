//! Fixed workloads shared by the benchmarks.

use graded_fem::mesh::generate;
use graded_fem::{GradingStrategy, Mesh, ProblemKind, Result, StudyConfig};

/// A named configuration at one mesh step.
pub struct Workload {
    pub name: &'static str,
    pub cfg: StudyConfig,
    pub h: f64,
}

impl Workload {
    pub fn mesh(&self) -> Result<Mesh> {
        let p = self.cfg.problem;
        generate(&p.domain(), &p.source(), &self.cfg.grading_spec(self.h)?)
    }
}

fn workload(
    name: &'static str,
    p: ProblemKind,
    s: GradingStrategy,
    mu: f64,
    beta: f64,
    h: f64,
) -> Workload {
    let mut cfg = StudyConfig::new(p, s, mu, vec![h]);
    cfg.beta = Some(beta);
    Workload { name, cfg, h }
}

pub fn workloads() -> Vec<Workload> {
    vec![
        workload(
            "point2d_rescaled",
            ProblemKind::Point2d,
            GradingStrategy::RescaledIsotropic,
            0.4,
            0.4,
            1.0 / 32.0,
        ),
        workload(
            "point3d_constructed",
            ProblemKind::Point3d,
            GradingStrategy::ConstructedIsotropic,
            0.25,
            0.7,
            0.125,
        ),
        workload(
            "segment3d_anisotropic",
            ProblemKind::Segment3d,
            GradingStrategy::AnisotropicTensor,
            0.4,
            0.4,
            0.2,
        ),
    ]
}
