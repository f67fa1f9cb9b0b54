//! Command-line front end. Data goes to files or standard output,
//! diagnostics to standard error. Exit code 0 on success, 1 on a domain
//! error, 2 on a usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{bisecting_planes, concavity_check, plateau_angles, CONCAVITY_EPS};
use crate::candidates::{analytic_area, build, CandidateKind, CandidateSpec};
use crate::error::Error;
use crate::lattice::Lattice;
use crate::mesh::{export_fe, load_json, save_json, validate, Mesh};
use crate::metrics::{gradients_json, monte_carlo_volumes, pair_area, region_volumes, total_area};
use crate::phase::{export_csv, render_ternary, sweep, GridSpec};
use crate::relax::{relax, RelaxConfig, Stage, StageOp};

#[derive(Parser, Debug)]
#[command(name = "torus-bubbles", version, about = "Area-minimizing double bubbles in flat three-tori")]
pub struct Cli {
    /// Seed for every random draw (Monte Carlo volumes only).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Construct a candidate mesh.
    Build(BuildArgs),
    /// Run the relaxation schedule on a mesh.
    Relax(RelaxArgs),
    /// Report areas and volumes of a mesh.
    Area(AreaArgs),
    /// Check mesh invariants; exits 1 when any is violated.
    Validate(InputArgs),
    /// Dihedral angles along triple curves and at tetrahedral points.
    Angles(InputArgs),
    /// Plane pair halving both enclosed volumes.
    Bisect(InputArgs),
    /// Sweep volume triples and pick the least-area candidate per cell.
    Phase(PhaseArgs),
    /// Write a Surface Evolver datafile.
    ExportFe(ExportArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Mesh JSON file.
    #[arg(short, long)]
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Candidate code: sdb, dc, cl, cc, 2c, sl, cb, cs, sc, 2s, hh.
    #[arg(long)]
    pub kind: String,
    /// Lattice: cubic:L | rect:a,b,c | rhombic:s,h
    #[arg(long, default_value = "cubic:1")]
    pub lattice: String,
    #[arg(long)]
    pub v1: f64,
    #[arg(long)]
    pub v2: f64,
    /// Each step halves the initial edge length.
    #[arg(long, default_value_t = 0)]
    pub refinement: u32,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct RelaxArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Stage list, e.g. "300:refine,300:refine,300:equiangulate+average,1000".
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub area_tol: Option<f64>,
    #[arg(long)]
    pub volume_tol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write area and volume gradients of the relaxed mesh as JSON.
    #[arg(long)]
    pub dump_gradients: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AreaArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Also estimate volumes from this many uniform samples.
    #[arg(long)]
    pub monte_carlo: Option<usize>,
    /// Write area and volume gradients as JSON.
    #[arg(long)]
    pub dump_gradients: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[arg(long, default_value = "cubic:1")]
    pub lattice: String,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Finer step for a second pass around phase boundaries.
    #[arg(long)]
    pub refine_step: Option<f64>,
    /// Comma-separated candidate codes; all by default.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Option<Vec<String>>,
    /// Worker threads for the sweep.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Seed each cell from its neighbour's relaxed mesh.
    #[arg(long)]
    pub warm_start: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Write midpoint-concavity violations as JSON.
    #[arg(long)]
    pub concavity: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(e) => write!(f, "error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

const LATTICE_GRAMMAR: &str = "expected cubic:L | rect:a,b,c | rhombic:s,h with positive numbers";

pub fn parse_lattice(spec: &str) -> CliResult<Lattice> {
    let usage = |m: String| CliError::Usage(format!("lattice '{spec}': {m}; {LATTICE_GRAMMAR}"));
    let (name, rest) = spec.split_once(':').ok_or_else(|| usage("missing ':'".into()))?;
    let nums: Vec<f64> =
        rest.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| usage(e.to_string()))?;
    let made = match (name.trim(), nums.as_slice()) {
        ("cubic", [l]) => Lattice::cubic(*l),
        ("rect", [a, b, c]) => Lattice::rectangular(*a, *b, *c),
        ("rhombic", [s, h]) => Lattice::rhombic_prism(*s, *h),
        _ => return Err(usage("unknown kind or wrong parameter count".into())),
    };
    made.map_err(|e| usage(e.to_string()))
}

/// Parse "steps[:op+op...]" stages separated by commas.
pub fn parse_schedule(text: &str) -> CliResult<Vec<Stage>> {
    let usage = |m: String| CliError::Usage(format!("schedule '{text}': {m}"));
    text.split(',')
        .map(|stage| {
            let (steps, ops) = stage.trim().split_once(':').unwrap_or((stage.trim(), "none"));
            let steps: usize = steps.parse().map_err(|e| usage(format!("{steps:?}: {e}")))?;
            let ops = ops
                .split('+')
                .map(|op| match op.trim() {
                    "refine" => Ok(StageOp::Refine),
                    "equiangulate" => Ok(StageOp::Equiangulate),
                    "average" => Ok(StageOp::Average),
                    "none" => Ok(StageOp::None),
                    other => Err(usage(format!("unknown operation {other:?}"))),
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(Stage { descent_steps: steps, then: ops })
        })
        .collect()
}

fn parse_kind(code: &str) -> CliResult<CandidateKind> {
    code.parse().map_err(|e: Error| CliError::Usage(e.to_string()))
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::Domain(e.into())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dump_gradients(mesh: &Mesh, path: Option<&Path>) -> CliResult<()> {
    if let Some(p) = path {
        std::fs::write(p, gradients_json(mesh)).map_err(|e| CliError::Domain(e.into()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct AreaReport {
    total: f64,
    /// Wall areas between regions (0,1), (0,2) and (1,2).
    pairs: [f64; 3],
    volumes: [f64; 3],
    targets: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<crate::metrics::MonteCarloEstimate>,
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Build(a) => {
            let lattice = parse_lattice(&a.lattice)?;
            let spec = CandidateSpec::new(parse_kind(&a.kind)?, lattice, a.v1, a.v2).with_refinement(a.refinement);
            let mesh = build(&spec)?;
            save_json(&mesh, &a.output)?;
            let analytic = analytic_area(&spec)?;
            eprintln!(
                "{}: {} facets, area {:.9}, analytic {}",
                spec.kind,
                mesh.facet_count(),
                total_area(&mesh),
                analytic.value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.9}"))
            );
        }
        Command::Relax(a) => {
            let mut cfg = RelaxConfig::default();
            if let Some(s) = &a.schedule {
                cfg.schedule = parse_schedule(s)?;
            }
            cfg.area_tol = a.area_tol.unwrap_or(cfg.area_tol);
            cfg.volume_tol = a.volume_tol.or(cfg.volume_tol);
            cfg.max_step = a.max_step.or(cfg.max_step);
            cfg.check().map_err(|e| CliError::Usage(e.to_string()))?;
            let (out, report) = relax(&load_json(&a.input)?, &cfg)?;
            for (i, s) in report.stages.iter().enumerate() {
                eprintln!("stage {i}: {} steps, area {:.9}", s.steps_taken, s.areas.last().copied().unwrap_or(f64::NAN));
            }
            save_json(&out, &a.output)?;
            dump_gradients(&out, a.dump_gradients.as_deref())?;
            write_json(&report, a.report.as_deref())?;
        }
        Command::Area(a) => {
            let mesh = load_json(&a.input)?;
            let monte_carlo = a.monte_carlo.map(|n| monte_carlo_volumes(&mesh, n, cli.seed)).transpose()?;
            let report = AreaReport {
                total: total_area(&mesh),
                pairs: [pair_area(&mesh, 0, 1), pair_area(&mesh, 0, 2), pair_area(&mesh, 1, 2)],
                volumes: region_volumes(&mesh)?,
                targets: mesh.targets(),
                monte_carlo,
            };
            dump_gradients(&mesh, a.dump_gradients.as_deref())?;
            write_json(&report, None)?;
        }
        Command::Validate(a) => {
            let mesh = load_json(&a.input)?;
            let report = validate(&mesh);
            write_json(&report, None)?;
            if !report.is_valid() {
                return Err(Error::InvalidMesh(format!("{} violations", report.violations.len())).into());
            }
        }
        Command::Angles(a) => write_json(&plateau_angles(&load_json(&a.input)?), None)?,
        Command::Bisect(a) => write_json(&bisecting_planes(&load_json(&a.input)?)?, None)?,
        Command::Phase(a) => {
            let lattice = parse_lattice(&a.lattice)?;
            let mut spec = GridSpec::new(a.step);
            spec.boundary_refine_step = a.refine_step;
            spec.warm_start = a.warm_start;
            if let Some(codes) = &a.candidates {
                spec.candidates = codes.iter().map(|c| parse_kind(c)).collect::<CliResult<_>>()?;
            }
            spec.check().map_err(|e| CliError::Usage(e.to_string()))?;
            if a.jobs == 0 {
                return Err(CliError::Usage("--jobs must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(a.jobs)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            let table = pool.install(|| sweep(&spec, &lattice))?;
            eprintln!("phase: {} cells", table.rows.len());
            if let Some(p) = &a.csv {
                export_csv(&table, p)?;
            }
            if let Some(p) = &a.svg {
                render_ternary(&table, p)?;
            }
            let violations = concavity_check(&table, CONCAVITY_EPS);
            eprintln!("concavity: {} violations at eps {CONCAVITY_EPS}", violations.len());
            if let Some(p) = &a.concavity {
                write_json(&violations, Some(p))?;
            }
        }
        Command::ExportFe(a) => export_fe(&load_json(&a.input)?, &a.output)?,
    }
    Ok(())
}

/// Parse `argv` (program name first) and run; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_specs() {
        assert_eq!(parse_lattice("cubic:1").unwrap(), Lattice::cubic(1.0).unwrap());
        assert_eq!(parse_lattice("rhombic:1,0.8").unwrap(), Lattice::rhombic_prism(1.0, 0.8).unwrap());
        assert_eq!(parse_lattice("rect:1,2,3").unwrap(), Lattice::rectangular(1.0, 2.0, 3.0).unwrap());
        for bad in ["cubic:0", "cubic", "cube:1", "rect:1,2", "rhombic:1,x"] {
            assert!(matches!(parse_lattice(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn schedules() {
        let s = parse_schedule("300:refine,300:equiangulate+average,1000").unwrap();
        let want = vec![
            Stage::new(300, &[StageOp::Refine]),
            Stage::new(300, &[StageOp::Equiangulate, StageOp::Average]),
            Stage::new(1000, &[StageOp::None]),
        ];
        assert_eq!(s, want);
        assert!(parse_schedule("x:refine").is_err());
        assert!(parse_schedule("10:jump").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["tb", "build", "--kind", "zz", "--v1", "0.1", "--v2", "0.1", "-o", "/nonexistent/x"]), 2);
        assert_eq!(run(["tb", "build", "--kind", "hh", "--v1", "0.3", "--v2", "0.3", "-o", "/nonexistent/x"]), 1);
        assert_eq!(run(["tb", "frobnicate"]), 2);
        assert_eq!(run(["tb", "phase", "--lattice", "cubic:0"]), 2);
    }
}
