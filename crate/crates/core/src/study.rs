//! Convergence studies: mesh, solve and measure errors over a level list.

use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::analysis::eoc::{estimate_eoc, EocReport, StudyRecord};
use crate::analysis::exact::{
    ExactSolution, PointSolution, SegmentLevelDomain, SegmentSolution2d, SegmentSolution3d,
};
use crate::analysis::interp::truncated_interpolant;
use crate::analysis::norms::{weighted_error, NormKind, WeightedNormSpec, DEFAULT_DEPTH};
use crate::assembly::{assemble_system, DEFAULT_QUAD_ORDER};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, SingularSource};
use crate::mesh::DEFAULT_TAU;
use crate::mesh::{generate, GradingSpec, GradingStrategy, Mesh};
use crate::solver::{solve_spd, SolveConfig, SolveReport};
use crate::theory::{check_mu, MeshKind, ProblemClass, TargetNorm};

pub const CSV_HEADER: &str = "level,h,N,NT,err_L2,err_L2beta,err_H1sigma,seconds";

/// Norm names used in records, in CSV column order.
pub const NORM_L2: &str = "L2";
pub const NORM_L2_BETA: &str = "L2beta";
pub const NORM_H1_SIGMA: &str = "H1sigma";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Point2d,
    Point3d,
    Segment3d,
    Segment2d,
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point2d" => Ok(ProblemKind::Point2d),
            "point3d" => Ok(ProblemKind::Point3d),
            "segment3d" => Ok(ProblemKind::Segment3d),
            "segment2d" => Ok(ProblemKind::Segment2d),
            _ => Err(Error::InvalidArgument(format!("unknown problem `{s}`"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Point2d => "point2d",
            ProblemKind::Point3d => "point3d",
            ProblemKind::Segment3d => "segment3d",
            ProblemKind::Segment2d => "segment2d",
        })
    }
}

impl ProblemKind {
    pub fn dim(self) -> usize {
        match self {
            ProblemKind::Point2d | ProblemKind::Segment2d => 2,
            ProblemKind::Point3d | ProblemKind::Segment3d => 3,
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            ProblemKind::Point2d => Domain::UnitDisk,
            ProblemKind::Point3d => Domain::UnitBall,
            ProblemKind::Segment3d => Domain::Ellipsoid,
            ProblemKind::Segment2d => SegmentLevelDomain::domain(),
        }
    }

    /// Line density of the segment problems.
    pub fn density(self) -> f64 {
        match self {
            ProblemKind::Segment3d => 1.0,
            _ => 0.5,
        }
    }

    pub fn source(self) -> SingularSource {
        match self {
            ProblemKind::Point2d | ProblemKind::Point3d => {
                SingularSource::point(Point::origin(self.dim()))
            }
            _ => SingularSource::axis_segment(self.dim(), self.density()),
        }
    }

    pub fn exact(self) -> Box<dyn ExactSolution> {
        match self {
            ProblemKind::Point2d => Box::new(PointSolution { dim: 2 }),
            ProblemKind::Point3d => Box::new(PointSolution { dim: 3 }),
            ProblemKind::Segment3d => Box::new(SegmentSolution3d {
                density: self.density(),
            }),
            ProblemKind::Segment2d => Box::new(SegmentSolution2d {
                density: self.density(),
            }),
        }
    }

    pub fn problem_class(self, strategy: GradingStrategy) -> ProblemClass {
        match self {
            ProblemKind::Point2d | ProblemKind::Point3d => ProblemClass::point(self.dim()),
            _ => {
                let kind = if strategy == GradingStrategy::AnisotropicTensor {
                    MeshKind::Anisotropic
                } else {
                    MeshKind::Isotropic
                };
                ProblemClass::segment(self.dim(), kind)
            }
        }
    }
}

/// What is compared against the exact solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    /// The finite element solution.
    Solution,
    /// The nodal interpolant with near-singular coefficients set to zero.
    TruncatedInterpolant,
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub strategy: GradingStrategy,
    pub mu: f64,
    pub tau: f64,
    /// Exponent of the weighted L² norm, if measured.
    pub beta: Option<f64>,
    /// Exponent of the weighted H¹ seminorm, if measured.
    pub sigma: Option<f64>,
    pub include_l2: bool,
    /// Mesh steps, strictly decreasing.
    pub levels: Vec<f64>,
    pub solver: SolveConfig,
    pub field: Field,
    pub depth: usize,
    /// See [`WeightedNormSpec::collapsed`].
    pub collapsed: bool,
    pub quad_order: usize,
    /// Recorded with the output; the pipeline itself is deterministic.
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(problem: ProblemKind, strategy: GradingStrategy, mu: f64, levels: Vec<f64>) -> Self {
        StudyConfig {
            problem,
            strategy,
            mu,
            tau: DEFAULT_TAU,
            beta: None,
            sigma: None,
            include_l2: true,
            levels,
            solver: SolveConfig::default(),
            field: Field::Solution,
            depth: DEFAULT_DEPTH,
            collapsed: true,
            quad_order: DEFAULT_QUAD_ORDER,
            seed: 0,
            out_dir: None,
        }
    }

    /// `count` steps `h0, h0/ratio, h0/ratio², ...`.
    pub fn geometric_levels(h0: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
        if !(h0 > 0.0 && ratio > 1.0 && count >= 1) {
            return Err(Error::InvalidArgument(
                "levels need h0 > 0, ratio > 1 and count >= 1".into(),
            ));
        }
        Ok((0..count).map(|k| h0 / ratio.powi(k as i32)).collect())
    }

    pub fn check(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidArgument("no levels given".into()));
        }
        for &h in &self.levels {
            self.grading_spec(h)?;
        }
        if self.levels.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidArgument(
                "mesh steps must strictly decrease".into(),
            ));
        }
        if !self.include_l2 && self.beta.is_none() && self.sigma.is_none() {
            return Err(Error::InvalidArgument("no norm selected".into()));
        }
        self.solver.check()?;
        for spec in self.norm_specs() {
            spec.1.check(self.problem.dim())?;
        }
        Ok(())
    }

    pub fn grading_spec(&self, h: f64) -> Result<GradingSpec> {
        let s = GradingSpec {
            mu: self.mu,
            h,
            strategy: self.strategy,
            tau: self.tau,
        };
        s.check()?;
        Ok(s)
    }

    pub fn norm_specs(&self) -> Vec<(&'static str, WeightedNormSpec)> {
        let src = self.problem.source();
        let mk = |kind, e| WeightedNormSpec {
            kind,
            exponent: e,
            source: src.clone(),
            quad_order: self.quad_order,
            depth: self.depth,
            collapsed: self.collapsed,
        };
        let mut out = Vec::new();
        if self.include_l2 {
            out.push((NORM_L2, mk(NormKind::L2Weighted, 0.0)));
        }
        if let Some(b) = self.beta {
            out.push((NORM_L2_BETA, mk(NormKind::L2Weighted, b)));
        }
        if let Some(s) = self.sigma {
            out.push((NORM_H1_SIGMA, mk(NormKind::H1SemiWeighted, s)));
        }
        out
    }

    /// Grading bound checks for each measured norm; uncovered cases are
    /// reported as text.
    pub fn mu_checks(&self) -> Vec<String> {
        let pc = self.problem.problem_class(self.strategy);
        let mut targets = Vec::new();
        if self.include_l2 {
            targets.push(TargetNorm::L2(0.0));
        }
        if let Some(b) = self.beta {
            targets.push(TargetNorm::L2(b));
        }
        if let Some(s) = self.sigma {
            targets.push(TargetNorm::Energy(s));
        }
        targets
            .into_iter()
            .map(|t| match check_mu(&pc, t, self.mu) {
                Ok(c) => format!("{t}: {c}"),
                Err(e) => format!("{t}: {e}"),
            })
            .collect()
    }
}

/// Everything produced at one level.
pub struct LevelOutcome {
    pub record: StudyRecord,
    pub mesh: Mesh,
    /// Field values at every vertex.
    pub field: Vec<f64>,
    pub solve: Option<SolveReport>,
}

pub fn solve_on_mesh(mesh: &Mesh, cfg: &StudyConfig) -> Result<(Vec<f64>, Option<SolveReport>)> {
    let src = cfg.problem.source();
    match cfg.field {
        Field::Solution => {
            let sys = assemble_system(mesh, &src, cfg.quad_order)?;
            let (x, rep) = solve_spd(&sys, &cfg.solver)?;
            Ok((sys.expand(&x), Some(rep)))
        }
        Field::TruncatedInterpolant => Ok((
            truncated_interpolant(mesh, cfg.problem.exact().as_ref(), &src)?,
            None,
        )),
    }
}

pub fn measure_errors(mesh: &Mesh, field: &[f64], cfg: &StudyConfig) -> Result<Vec<(String, f64)>> {
    let exact = cfg.problem.exact();
    cfg.norm_specs()
        .into_iter()
        .map(|(name, spec)| {
            Ok((
                name.to_string(),
                weighted_error(mesh, field, exact.as_ref(), &spec)?,
            ))
        })
        .collect()
}

pub fn run_on_mesh(mesh: Mesh, h: f64, cfg: &StudyConfig) -> Result<LevelOutcome> {
    let start = Instant::now();
    let (field, solve) = solve_on_mesh(&mesh, cfg)?;
    let errors = measure_errors(&mesh, &field, cfg)?;
    let record = StudyRecord {
        h,
        n_vertices: mesh.n_vertices(),
        n_elements: mesh.n_elements(),
        errors,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(LevelOutcome {
        record,
        mesh,
        field,
        solve,
    })
}

pub fn run_level(cfg: &StudyConfig, h: f64) -> Result<LevelOutcome> {
    let start = Instant::now();
    let spec = cfg.grading_spec(h)?;
    let mesh = generate(&cfg.problem.domain(), &cfg.problem.source(), &spec)?;
    let mut out = run_on_mesh(mesh, h, cfg)?;
    out.record.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

#[derive(Debug)]
pub struct StudyOutput {
    pub records: Vec<StudyRecord>,
    /// `None` for single-level studies.
    pub eoc: Option<EocReport>,
    pub mu_checks: Vec<String>,
    pub csv_path: Option<PathBuf>,
}

/// A level failed; earlier records are kept (and already written).
#[derive(Debug)]
pub struct StudyFailure {
    pub level: usize,
    pub error: Error,
    pub records: Vec<StudyRecord>,
}

impl fmt::Display for StudyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {} failed ({:?} stage): {}",
            self.level,
            self.error.stage(),
            self.error
        )
    }
}

impl std::error::Error for StudyFailure {}

impl From<Error> for StudyFailure {
    fn from(error: Error) -> Self {
        StudyFailure {
            level: 0,
            error,
            records: Vec::new(),
        }
    }
}

pub fn csv_row(level: usize, r: &StudyRecord) -> String {
    let col = |name: &str| {
        r.error(name)
            .map(|e| format!("{e:.11e}"))
            .unwrap_or_default()
    };
    format!(
        "{level},{:.11e},{},{},{},{},{},{:.3}",
        r.h,
        r.n_vertices,
        r.n_elements,
        col(NORM_L2),
        col(NORM_L2_BETA),
        col(NORM_H1_SIGMA),
        r.seconds
    )
}

pub fn csv_path(dir: &Path, cfg: &StudyConfig) -> PathBuf {
    dir.join(format!("{}_{}_mu{}.csv", cfg.problem, cfg.strategy, cfg.mu))
}

/// Runs every level in order, streaming CSV rows when an output directory
/// is set.
pub fn run_study(cfg: &StudyConfig) -> std::result::Result<StudyOutput, StudyFailure> {
    run_study_with(cfg, |_, _| {})
}

/// As [`run_study`], calling `progress` after each completed level.
pub fn run_study_with<F>(
    cfg: &StudyConfig,
    mut progress: F,
) -> std::result::Result<StudyOutput, StudyFailure>
where
    F: FnMut(usize, &LevelOutcome),
{
    cfg.check()?;
    let mut csv = None;
    let mut path = None;
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        let p = csv_path(dir, cfg);
        let mut w = BufWriter::new(File::create(&p).map_err(Error::from)?);
        writeln!(w, "{CSV_HEADER}")
            .and_then(|_| w.flush())
            .map_err(Error::from)?;
        csv = Some(w);
        path = Some(p);
    }
    let mut records = Vec::new();
    for (level, &h) in cfg.levels.iter().enumerate() {
        match run_level(cfg, h) {
            Ok(out) => {
                if let Some(w) = csv.as_mut() {
                    writeln!(w, "{}", csv_row(level, &out.record))
                        .and_then(|_| w.flush())
                        .map_err(|e| StudyFailure {
                            level,
                            error: e.into(),
                            records: records.clone(),
                        })?;
                }
                progress(level, &out);
                records.push(out.record);
            }
            Err(error) => {
                return Err(StudyFailure {
                    level,
                    error,
                    records,
                })
            }
        }
    }
    let eoc = if records.len() >= 2 {
        Some(
            estimate_eoc(&records, cfg.problem.dim()).map_err(|error| StudyFailure {
                level: records.len() - 1,
                error,
                records: records.clone(),
            })?,
        )
    } else {
        None
    };
    Ok(StudyOutput {
        records,
        eoc,
        mu_checks: cfg.mu_checks(),
        csv_path: path,
    })
}

/// Power of ten used to scale a column of errors.
fn column_exponent(values: &[f64]) -> i32 {
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if max > 0.0 {
        max.log10().floor() as i32
    } else {
        0
    }
}

/// Errors scaled by a per-column power of ten, followed by order rows.
pub fn format_table(records: &[StudyRecord], eoc: Option<&EocReport>) -> String {
    let mut s = String::new();
    if records.is_empty() {
        return s;
    }
    let names: Vec<&str> = records[0].errors.iter().map(|(n, _)| n.as_str()).collect();
    let exps: Vec<i32> = names
        .iter()
        .map(|n| {
            column_exponent(
                &records
                    .iter()
                    .filter_map(|r| r.error(n))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let _ = write!(s, "{:>12} {:>9} {:>9}", "h", "N", "NT");
    for n in &names {
        let _ = write!(s, " {n:>12}");
    }
    let _ = write!(s, "\n{:>12} {:>9} {:>9}", "", "", "");
    for e in &exps {
        let _ = write!(s, " {:>12}", format!("x10^{e}"));
    }
    s.push('\n');
    for r in records {
        let _ = write!(s, "{:>12.6} {:>9} {:>9}", r.h, r.n_vertices, r.n_elements);
        for (n, e) in names.iter().zip(&exps) {
            let v = r.error(n).map(|v| v / 10f64.powi(*e));
            let _ = write!(
                s,
                " {:>12}",
                v.map(|v| format!("{v:.3}")).unwrap_or_default()
            );
        }
        s.push('\n');
    }
    match eoc {
        Some(rep) => {
            for (label, pick) in [("e.o.c.(N)", 0), ("e.o.c.(h)", 1)] {
                let _ = write!(s, "{label:>32}");
                for n in &names {
                    let v = rep.get(n).map(|o| {
                        if pick == 0 {
                            o.by_nodes.value
                        } else {
                            o.by_step.value
                        }
                    });
                    let _ = write!(
                        s,
                        " {:>12}",
                        v.map(|v| format!("{v:.3}")).unwrap_or_default()
                    );
                }
                s.push('\n');
            }
        }
        None => s.push_str("e.o.c. undefined for a single level\n"),
    }
    s
}
