//! Command-line surface: `solve`, `trace`, `sweep` and `convergence` over a
//! TOML problem description.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 parse or usage error,
//! 3 invalid problem, 4 singular system, 5 unknown contour. Every failure
//! prints one line `error[<kind>]: <reason>` on stderr.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assembly::AssemblyError;
use crate::field::{FieldError, LineDirection};
use crate::kernels::Side;
use crate::layers::Region;
use crate::linsolve::SolveError;
use crate::model::{ContourId, ValidatedProblem};
use crate::verify::{self, SweepParameter, TraceSelector, VerifyError};
use config::{ConfigError, RunConfig};
use output::{write_atomic, ReportRow};

#[derive(Parser, Debug)]
#[command(name = "platepatch", version, about = "Stresses in a plate with holes reinforced by bonded patches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Problem description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated output formats (csv, svg); overrides `output.formats`.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum RegionArg {
    Plate,
    Patch,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum LineArg {
    /// Normal line on free holes (hoop stress), tangent line elsewhere.
    Auto,
    Tangent,
    Normal,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve and write densities.csv and report.csv.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Write the boundary stresses along one contour to trace.csv.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Contour name as given in the configuration.
        #[arg(long)]
        contour: String,
        /// Body whose stresses are sampled; defaults to the plate on holes and the patch on patch boundaries.
        #[arg(long, value_enum)]
        region: Option<RegionArg>,
        /// Side of the contour: plus is left of the direction of travel
        /// (holes run clockwise, patch boundaries counterclockwise).
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
        #[arg(long, value_enum, default_value = "auto")]
        line: LineArg,
    },
    /// Solve over a list of parameter values and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// patch_scale (circumscribed patch radius), alpha or beta.
        #[arg(long)]
        param: String,
        /// Comma-separated values or an inclusive range start:step:end.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Restrict the table to these contours.
        #[arg(long, value_delimiter = ',')]
        contour: Vec<String>,
    },
    /// Solve at several truncation degrees and write convergence.csv.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated increasing truncation degrees.
        #[arg(long = "N-list")]
        n_list: String,
        #[arg(long, value_delimiter = ',')]
        contour: Vec<String>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Singular(String),
    UnknownContour(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Singular(_) => 4,
            CliError::UnknownContour(_) => 5,
        }
    }

    fn parts(&self) -> (&'static str, &str) {
        match self {
            CliError::Runtime(m) => ("runtime", m),
            CliError::Parse(m) => ("parse", m),
            CliError::Validation(m) => ("validation", m),
            CliError::Singular(m) => ("singular", m),
            CliError::UnknownContour(m) => ("unknown_contour", m),
        }
    }

    /// `error[<kind>]: <reason>` on a single line.
    pub fn line(&self) -> String {
        let (kind, msg) = self.parts();
        let flat: Vec<&str> = msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        format!("error[{kind}]: {}", flat.join(" | "))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Parse(m) => CliError::Parse(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        let msg = e.to_string();
        match e {
            crate::Error::Model(_) | crate::Error::Assembly(AssemblyError::Nodes { .. }) => CliError::Validation(msg),
            crate::Error::Solve(SolveError::Singular { .. }) => CliError::Singular(msg),
            crate::Error::Field(FieldError::InvalidSide { .. }) => CliError::Parse(msg),
            _ => CliError::Runtime(msg),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Solver(inner) => inner.into(),
            VerifyError::Degrees => CliError::Parse(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

struct Run {
    cfg: RunConfig,
    dir: PathBuf,
    svg: bool,
}

impl Run {
    fn load(common: &Common) -> Result<Self, CliError> {
        let text = fs::read_to_string(&common.config).map_err(|e| CliError::Parse(format!("{}: {e}", common.config.display())))?;
        let cfg = RunConfig::parse(&text)?;
        let formats = common.format.clone().unwrap_or_else(|| cfg.output.formats.clone());
        for f in &formats {
            if f != "csv" && f != "svg" {
                return Err(CliError::Parse(format!("unknown format \"{f}\" (expected csv or svg)")));
            }
        }
        let dir = common.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Run {
            svg: formats.iter().any(|f| f == "svg"),
            cfg,
            dir,
        })
    }

    fn problem(&self) -> Result<ValidatedProblem, CliError> {
        Ok(crate::validate(&self.cfg.problem()?).map_err(crate::Error::from)?)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents).map_err(|e| io_error(&path, e))
    }
}

fn contour_id(problem: &ValidatedProblem, name: &str) -> Result<ContourId, CliError> {
    problem.find_contour(name).ok_or_else(|| {
        let known: Vec<&str> = problem.contour_ids().into_iter().map(|id| problem.contour_name(id)).collect();
        CliError::UnknownContour(format!("no contour named \"{name}\" (known: {})", known.join(", ")))
    })
}

/// Patch whose material lies on a hole: the bonded one, else one covering it.
fn filtered_selectors(problem: &ValidatedProblem, names: &[String]) -> Result<Vec<TraceSelector>, CliError> {
    let all = TraceSelector::defaults(problem);
    if names.is_empty() {
        return Ok(all);
    }
    let ids: Vec<ContourId> = names.iter().map(|n| contour_id(problem, n)).collect::<Result<_, _>>()?;
    Ok(all.into_iter().filter(|s| ids.contains(&s.contour)).collect())
}

fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Parse(m);
    let text = text.trim();
    if text.is_empty() {
        return Err(bad("empty value list".into()));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("not a number: \"{}\"", s.trim())));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (a, step, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || b < a {
            return Err(bad(format!("range {text} needs a positive step and start <= end")));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| a + step * i as f64).collect());
    }
    let values: Vec<f64> = text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(bad("empty value list".into()));
    }
    Ok(values)
}

fn parse_degrees(text: &str) -> Result<Vec<usize>, CliError> {
    let list: Vec<usize> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Parse(format!("not a degree: \"{}\"", s.trim()))))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(CliError::Parse("empty N list".into()));
    }
    Ok(list)
}

fn run_solve(common: &Common) -> Result<(), CliError> {
    let run = Run::load(common)?;
    let problem = run.problem()?;
    let degree = run.cfg.numerics.degree;
    let (solution, report) = crate::solve(&problem, degree, run.cfg.quadrature_nodes())?;
    run.write("densities.csv", &output::densities_csv(&problem, solution.densities()))?;

    let row = |q: &str, c: &str, v: f64| ReportRow {
        quantity: q.into(),
        contour: c.into(),
        value: v,
    };
    let mut rows = vec![
        row("system_order", "", report.order as f64),
        row("degree", "", degree as f64),
        row("residual_norm", "", report.residual_norm),
        row("condition_estimate", "", report.condition_estimate.unwrap_or(f64::NAN)),
        row("gauge_max", "", report.gauge_max),
    ];
    let loops = solution.loop_integrals();
    for (name, v) in loops.free_holes.iter().chain(&loops.patches) {
        rows.push(row("loop_integral", name, v.norm()));
    }
    let probes = (4 * (2 * degree + 1)).max(64);
    let residuals = solution.bc_residuals(Some(probes)).map_err(crate::Error::from)?;
    for e in &residuals.entries {
        rows.push(row(&format!("bc_{}", e.condition), &e.contour, e.max_abs));
    }
    run.write("report.csv", &output::report_csv(&rows))?;
    println!(
        "order {} residual {:.3e} loop {:.3e} bc {:.3e}",
        report.order,
        report.residual_norm,
        loops.max_abs(),
        residuals.max()
    );
    Ok(())
}

fn run_trace(common: &Common, contour: &str, region: Option<RegionArg>, side: SideArg, line: LineArg) -> Result<(), CliError> {
    let run = Run::load(common)?;
    let problem = run.problem()?;
    let id = contour_id(&problem, contour)?;
    let region = match (region, id) {
        (None | Some(RegionArg::Plate), ContourId::Hole(_)) | (Some(RegionArg::Plate), ContourId::Patch(_)) => Region::Plate,
        (None | Some(RegionArg::Patch), ContourId::Patch(k)) => Region::Patch(k),
        (Some(RegionArg::Patch), ContourId::Hole(j)) => match problem.covering_patch(j) {
            Some(k) => Region::Patch(k),
            None => return Err(CliError::Parse(format!("no patch covers hole {contour}"))),
        },
    };
    let side = match side {
        SideArg::Plus => Side::Plus,
        SideArg::Minus => Side::Minus,
    };
    let mut sel = TraceSelector::new(&problem, id, region, side);
    match line {
        LineArg::Auto => {}
        LineArg::Tangent => sel.line = LineDirection::Tangent,
        LineArg::Normal => sel.line = LineDirection::Normal,
    }
    let (solution, _) = crate::solve(&problem, run.cfg.numerics.degree, run.cfg.quadrature_nodes())?;
    let trace = sel.trace(&solution, run.cfg.output.trace_resolution)?;
    let csv = output::trace_csv(&trace);
    run.write("trace.csv", &csv)?;
    if run.svg {
        run.write("trace.svg", &output::trace_svg(&csv, contour))?;
    }
    let (ts, ms) = trace.max_sigma();
    let (tt, mt) = trace.max_tau();
    println!("max |sigma_n| = {ms:.6e} at theta = {ts:.6}; max |tau_n| = {mt:.6e} at theta = {tt:.6}");
    Ok(())
}

fn run_sweep(common: &Common, param: &str, values: &str, contours: &[String]) -> Result<(), CliError> {
    let run = Run::load(common)?;
    let param: SweepParameter = param.parse().map_err(CliError::Parse)?;
    let shown = parse_values(values)?;
    let problem = run.problem()?;
    let traces = filtered_selectors(&problem, contours)?;
    let radians: Vec<f64> = shown.iter().map(|&v| if param.is_angle() { run.cfg.angle(v) } else { v }).collect();
    let rows = verify::sweep(
        &run.cfg.problem()?,
        param,
        &radians,
        run.cfg.numerics.degree,
        run.cfg.quadrature_nodes(),
        &traces,
        run.cfg.output.trace_resolution,
    )?;
    let unit = |v: f64| if param.is_angle() && run.cfg.degrees { v.to_degrees() } else { v };
    // Round trip through degrees can perturb the last bit; report the values as given.
    let lookup = |v: f64| radians.iter().position(|&r| r == v).map_or(unit(v), |i| shown[i]);
    let csv = output::sweep_csv(&rows, lookup);
    run.write("sweep.csv", &csv)?;
    if run.svg {
        run.write("sweep.svg", &output::sweep_svg(&csv, param.name()))?;
    }
    println!("{} values, {} rows", shown.len(), rows.len());
    Ok(())
}

fn run_convergence(common: &Common, n_list: &str, contours: &[String]) -> Result<(), CliError> {
    let run = Run::load(common)?;
    let degrees = parse_degrees(n_list)?;
    let problem = run.problem()?;
    let traces = filtered_selectors(&problem, contours)?;
    let report = verify::convergence_study(&problem, &degrees, run.cfg.quadrature_nodes(), &traces, run.cfg.output.trace_resolution)?;
    run.write("convergence.csv", &output::convergence_csv(&report))?;
    for (n, d) in report.degrees.iter().zip(&report.trace_deltas) {
        println!("N = {n}: trace delta {d:.3e} ({:.3}% of max)", 100.0 * d / report.reference_max.max(f64::MIN_POSITIVE));
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { common } => run_solve(common),
        Command::Trace {
            common,
            contour,
            region,
            side,
            line,
        } => run_trace(common, contour, *region, *side, *line),
        Command::Sweep {
            common,
            param,
            values,
            contour,
        } => run_sweep(common, param, values, contour),
        Command::Convergence { common, n_list, contour } => run_convergence(common, n_list, contour),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}
