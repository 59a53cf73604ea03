//! Options shared by the subcommands, merged from flags, an optional
//! `key = value` file and the environment (in that order of precedence).

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use graded_fem::solver::{Method, Preconditioner};
use graded_fem::study::{Field, StudyConfig};
use graded_fem::{Error, GradingStrategy, ProblemKind, Result};

pub const OUT_DIR_ENV: &str = "GRADFEM_OUT_DIR";

#[derive(Args, Debug, Default, Clone)]
pub struct StudyArgs {
    /// File of `key = value` lines; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// point2d, point3d, segment3d or segment2d.
    #[arg(long)]
    pub problem: Option<String>,
    /// uniform, rescaled, constructed or anisotropic.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Grading exponent in (0, 1]; defaults to 1 for uniform meshes.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Endpoint-zone constant of anisotropic segment meshes.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Exponent of the weighted L2 norm.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Exponent of the weighted H1 seminorm.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Whether to report the unweighted L2 error.
    #[arg(long)]
    pub l2: Option<bool>,
    /// solution or interpolant.
    #[arg(long)]
    pub field: Option<String>,
    /// Refinement levels of the error quadrature near the singular set.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Use the base error quadrature rule everywhere.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub plain_quadrature: Option<bool>,
    /// Polynomial degree of the quadrature rules (at most 3).
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// cg or direct.
    #[arg(long)]
    pub solver: Option<String>,
    /// Relative residual tolerance of CG.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// jacobi or none.
    #[arg(long)]
    pub preconditioner: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (falls back to the GRADFEM_OUT_DIR variable).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Values from the configuration file, keyed by normalized flag name.
pub struct Resolver {
    file: HashMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_").to_lowercase()
}

pub fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
        map.insert(normalize(k), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("invalid value `{s}` for `{key}`")))
}

fn parse_method(s: &str) -> Result<Method> {
    match s {
        "cg" => Ok(Method::Cg),
        "direct" => Ok(Method::Direct),
        _ => Err(Error::InvalidArgument(format!("unknown solver `{s}`"))),
    }
}

fn parse_preconditioner(s: &str) -> Result<Preconditioner> {
    match s {
        "jacobi" | "diagonal" => Ok(Preconditioner::Diagonal),
        "none" => Ok(Preconditioner::None),
        _ => Err(Error::InvalidArgument(format!(
            "unknown preconditioner `{s}`"
        ))),
    }
}

fn parse_field(s: &str) -> Result<Field> {
    match s {
        "solution" => Ok(Field::Solution),
        "interpolant" => Ok(Field::TruncatedInterpolant),
        _ => Err(Error::InvalidArgument(format!("unknown field `{s}`"))),
    }
}

impl Resolver {
    pub fn load(args: &StudyArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => parse_config(&std::fs::read_to_string(p).map_err(|e| {
                Error::InvalidArgument(format!("cannot read config file {}: {e}", p.display()))
            })?)?,
            None => HashMap::new(),
        };
        Ok(Resolver { file })
    }

    #[cfg(test)]
    pub fn from_map(file: HashMap<String, String>) -> Self {
        Resolver { file }
    }

    /// The flag value, else the file value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key).map(|s| parse_value(key, s)).transpose(),
        }
    }

    pub fn required<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.pick(flag, key)?
            .ok_or_else(|| Error::InvalidArgument(format!("missing required option `{key}`")))
    }

    pub fn levels(
        &self,
        list: Option<String>,
        h0: Option<f64>,
        ratio: Option<f64>,
        count: Option<usize>,
    ) -> Result<Vec<f64>> {
        if let Some(l) = self.pick(list, "levels")? {
            return l
                .split(',')
                .map(|s| parse_value("levels", s.trim()))
                .collect();
        }
        let h0 = self.required(h0, "h0")?;
        let ratio = self.pick(ratio, "ratio")?.unwrap_or(2.0);
        let count = self.required(count, "count")?;
        StudyConfig::geometric_levels(h0, ratio, count)
    }

    pub fn study_config(&self, a: &StudyArgs, levels: Vec<f64>) -> Result<StudyConfig> {
        let problem: ProblemKind = self.required(a.problem.clone(), "problem")?.parse()?;
        let strategy: GradingStrategy = self.required(a.strategy.clone(), "strategy")?.parse()?;
        let mu = match self.pick(a.mu, "mu")? {
            Some(m) => m,
            None if strategy == GradingStrategy::Uniform => 1.0,
            None => {
                return Err(Error::InvalidArgument(
                    "missing required option `mu`".into(),
                ))
            }
        };
        let mut cfg = StudyConfig::new(problem, strategy, mu, levels);
        if let Some(t) = self.pick(a.tau, "tau")? {
            cfg.tau = t;
        }
        cfg.beta = self.pick(a.beta, "beta")?;
        cfg.sigma = self.pick(a.sigma, "sigma")?;
        if let Some(l) = self.pick(a.l2, "l2")? {
            cfg.include_l2 = l;
        }
        if let Some(f) = self.pick(a.field.clone(), "field")? {
            cfg.field = parse_field(&f)?;
        }
        if let Some(d) = self.pick(a.depth, "depth")? {
            cfg.depth = d;
        }
        if self.pick(a.plain_quadrature, "plain_quadrature")? == Some(true) {
            cfg.depth = 0;
            cfg.collapsed = false;
        }
        if let Some(q) = self.pick(a.quad_order, "quad_order")? {
            cfg.quad_order = q;
        }
        if let Some(s) = self.pick(a.solver.clone(), "solver")? {
            cfg.solver.method = parse_method(&s)?;
        }
        if let Some(t) = self.pick(a.tol, "tol")? {
            cfg.solver.rel_tolerance = t;
        }
        cfg.solver.max_iterations = self.pick(a.max_iter, "max_iter")?;
        if let Some(p) = self.pick(a.preconditioner.clone(), "preconditioner")? {
            cfg.solver.preconditioner = parse_preconditioner(&p)?;
        }
        if let Some(s) = self.pick(a.seed, "seed")? {
            cfg.seed = s;
        }
        cfg.out_dir = match self.pick(a.out_dir.clone(), "out_dir")? {
            Some(d) => Some(d),
            None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from),
        };
        cfg.check()?;
        Ok(cfg)
    }
}
