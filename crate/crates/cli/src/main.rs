//! Command-line front end: mesh generation, single solves, convergence
//! studies and grading-bound checks.

mod settings;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graded_fem::analysis::eoc::EocReport;
use graded_fem::mesh::{generate, grading_audit, read_mesh, validate_mesh, write_mesh, write_vtk};
use graded_fem::sparse::write_vector_market;
use graded_fem::study::{format_table, run_on_mesh, run_study_with, StudyConfig};
use graded_fem::theory::{check_mu, TargetNorm};
use graded_fem::{Error, Mesh, Stage};

use settings::{Resolver, StudyArgs};

#[derive(Parser, Debug)]
#[command(
    name = "graded-fem",
    version,
    about = "P1 finite elements for point and segment sources on graded meshes"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate, validate and audit one mesh.
    Mesh {
        #[command(flatten)]
        study: StudyArgs,
        /// Mesh step.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve on one mesh and report the requested errors.
    Solve {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long)]
        h: Option<f64>,
        /// Solve on a mesh read from this file instead of generating one.
        #[arg(long)]
        mesh_in: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a convergence study over a list of mesh steps.
    Study {
        #[command(flatten)]
        study: StudyArgs,
        /// Comma-separated mesh steps, coarsest first.
        #[arg(long)]
        levels: Option<String>,
        /// Coarsest step of a geometric level list.
        #[arg(long)]
        h0: Option<f64>,
        /// Ratio between consecutive steps of a geometric level list.
        #[arg(long)]
        ratio: Option<f64>,
        /// Number of levels of a geometric level list.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Print the grading bound for a configuration and whether `mu` meets it.
    CheckMu {
        #[command(flatten)]
        study: StudyArgs,
    },
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file for the mesh (mesh) or the nodal solution (solve).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a legacy VTK file.
    #[arg(long)]
    vtk: Option<PathBuf>,
}

fn exit_code(stage: Stage) -> u8 {
    match stage {
        Stage::Config => 2,
        Stage::Mesh => 3,
        Stage::Solver => 4,
        Stage::Quadrature => 5,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e.stage()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn run(cmd: Command) -> graded_fem::Result<()> {
    match cmd {
        Command::Mesh { study, h, out } => {
            let r = Resolver::load(&study)?;
            let h = r.required(h, "h")?;
            run_mesh(&r.study_config(&study, vec![h])?, h, &out)
        }
        Command::Solve {
            study,
            h,
            mesh_in,
            out,
        } => {
            let r = Resolver::load(&study)?;
            let mesh_in = r.pick(mesh_in, "mesh_in")?;
            let h = match &mesh_in {
                Some(_) => r.pick(h, "h")?,
                None => Some(r.required(h, "h")?),
            };
            let cfg = r.study_config(&study, vec![h.unwrap_or(1.0)])?;
            run_solve(&cfg, h, mesh_in.as_deref(), &out)
        }
        Command::Study {
            study,
            levels,
            h0,
            ratio,
            count,
        } => {
            let r = Resolver::load(&study)?;
            let levels = r.levels(levels, h0, ratio, count)?;
            let mut cfg = r.study_config(&study, levels)?;
            cfg.out_dir.get_or_insert_with(|| PathBuf::from("."));
            run_study_cmd(&cfg)
        }
        Command::CheckMu { study } => {
            let r = Resolver::load(&study)?;
            run_check_mu(&r.study_config(&study, vec![1.0])?)
        }
    }
}

fn out_path(
    cfg: &StudyConfig,
    explicit: &Option<PathBuf>,
    stem: &str,
) -> graded_fem::Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.clone());
    }
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir.join(format!(
        "{}_{}_mu{}_{stem}",
        cfg.problem, cfg.strategy, cfg.mu
    )))
}

fn write_vtk_file(mesh: &Mesh, fields: &[(&str, &[f64])], path: &Path) -> graded_fem::Result<()> {
    write_vtk(mesh, fields, BufWriter::new(File::create(path)?))?;
    println!("vtk: {}", path.display());
    Ok(())
}

fn run_mesh(cfg: &StudyConfig, h: f64, out: &OutputArgs) -> graded_fem::Result<()> {
    let spec = cfg.grading_spec(h)?;
    let src = cfg.problem.source();
    let mesh = generate(&cfg.problem.domain(), &src, &spec)?;
    println!("vertices: {}", mesh.n_vertices());
    println!("elements: {}", mesh.n_elements());
    let rep = validate_mesh(&mesh);
    println!(
        "validation: {} ({})",
        if rep.ok() { "ok" } else { "FAILED" },
        rep.summary()
    );
    let audit = grading_audit(&mesh, &spec, &src);
    println!(
        "grading audit: {} (ratios {:.3}..{:.3}, factor {}, too coarse {}, too fine {}, anisotropic {})",
        if audit.passes() { "pass" } else { "fail" },
        audit.min_ratio,
        audit.max_ratio,
        audit.factor,
        audit.too_coarse,
        audit.too_fine,
        audit.anisotropic_elements
    );
    let path = out_path(cfg, &out.output, &format!("h{h}.mesh"))?;
    write_mesh(&mesh, BufWriter::new(File::create(&path)?))?;
    println!("mesh: {}", path.display());
    if let Some(v) = &out.vtk {
        write_vtk_file(&mesh, &[], v)?;
    }
    if !rep.ok() {
        return Err(Error::InvalidMesh(rep.summary()));
    }
    Ok(())
}

fn run_solve(
    cfg: &StudyConfig,
    h: Option<f64>,
    mesh_in: Option<&Path>,
    out: &OutputArgs,
) -> graded_fem::Result<()> {
    let mesh = match mesh_in {
        Some(p) => {
            let m = read_mesh(BufReader::new(File::open(p)?)).map_err(|e| match e {
                Error::Parse(msg) => Error::InvalidMesh(format!("{}: {msg}", p.display())),
                e => e,
            })?;
            if m.dim() != cfg.problem.dim() {
                return Err(Error::InvalidArgument(
                    "mesh dimension does not match the problem".into(),
                ));
            }
            m
        }
        None => {
            let h = h.expect("step resolved for generated meshes");
            generate(
                &cfg.problem.domain(),
                &cfg.problem.source(),
                &cfg.grading_spec(h)?,
            )?
        }
    };
    let h = h.unwrap_or_else(|| mesh.max_diameter());
    let outcome = run_on_mesh(mesh, h, cfg)?;
    let rec = &outcome.record;
    println!("vertices: {}", rec.n_vertices);
    println!("elements: {}", rec.n_elements);
    if let Some(s) = &outcome.solve {
        println!(
            "solver: {:?}, {} iterations, relative residual {:.3e}",
            s.method, s.iterations, s.residual
        );
    }
    for (name, e) in &rec.errors {
        println!("error {name}: {e:.6e}");
    }
    println!("seconds: {:.3}", rec.seconds);
    let path = out_path(cfg, &out.output, &format!("h{h}_solution.mtx"))?;
    write_vector_market(BufWriter::new(File::create(&path)?), &outcome.field)?;
    println!("solution: {}", path.display());
    if let Some(v) = &out.vtk {
        write_vtk_file(&outcome.mesh, &[("u_h", &outcome.field)], v)?;
    }
    Ok(())
}

fn print_orders(eoc: &EocReport) {
    println!("orders (two-point / least squares / residual):");
    for n in &eoc.norms {
        println!(
            "  {:<8} by N: {:.3} / {:.3} / {:.1e}   by h: {:.3} / {:.3} / {:.1e}",
            n.norm,
            n.by_nodes.value,
            n.by_nodes.least_squares,
            n.by_nodes.residual,
            n.by_step.value,
            n.by_step.least_squares,
            n.by_step.residual
        );
    }
}

fn run_study_cmd(cfg: &StudyConfig) -> graded_fem::Result<()> {
    for c in cfg.mu_checks() {
        println!("grading check: {c}");
    }
    let result = run_study_with(cfg, |level, out| {
        eprintln!(
            "level {level}: h={} N={} NT={} {:.2}s",
            out.record.h, out.record.n_vertices, out.record.n_elements, out.record.seconds
        );
    });
    match result {
        Ok(out) => {
            print!("{}", format_table(&out.records, out.eoc.as_ref()));
            if let Some(e) = &out.eoc {
                print_orders(e);
            }
            if let Some(p) = &out.csv_path {
                println!("csv: {}", p.display());
            }
            Ok(())
        }
        Err(f) => {
            if !f.records.is_empty() {
                print!("{}", format_table(&f.records, None));
            }
            eprintln!("level {} failed", f.level);
            Err(f.error)
        }
    }
}

fn run_check_mu(cfg: &StudyConfig) -> graded_fem::Result<()> {
    let pc = cfg.problem.problem_class(cfg.strategy);
    let mut targets = Vec::new();
    if let Some(b) = cfg.beta {
        targets.push(TargetNorm::L2(b));
    }
    if let Some(s) = cfg.sigma {
        targets.push(TargetNorm::Energy(s));
    }
    if targets.is_empty() {
        targets.push(TargetNorm::L2(0.0));
    }
    for t in targets {
        let c = check_mu(&pc, t, cfg.mu)?;
        println!("{t}: {}", c.bound.rule);
        println!("  bound: mu < {:.6}", c.bound.bound);
        println!(
            "  mu = {}: {}",
            c.mu,
            if c.satisfied { "pass" } else { "fail" }
        );
    }
    Ok(())
}
