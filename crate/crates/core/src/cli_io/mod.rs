//! Command-line entry point: argument parsing, report printing and exit codes.
//!
//! Exit status is 0 on success, 1 on usage or configuration errors and 2 when
//! a bound is violated, a hypothesis is not met or a result fails its
//! precision guard.

pub mod config;
pub mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::eigensolver::{lowest_eigenvalues_fd, spectral_gap, Frame, ProblemSpec};
use crate::error::GapError;
use crate::gap_asymptotics::{
    check_upper_bound_short_range, check_upper_bound_symmetric, check_vanishing_rescaled, evaluate_vanishing_rescaled,
    fit_exponent, sweep, BoundReport, BoundStatus, FitWindow, GapCurve, LengthGrid, SweepSettings, VANISHING_RATIO,
};
use crate::hellmann_feynman::{psi_l, t_sweep};
use crate::potential::Potential;
use crate::step_delta::{delta_gap, StepMatchingState};
use config::{parse_list, parse_segments, FileConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gaplab",
    version,
    about = "Spectral gaps of Dirichlet Schrödinger operators on long intervals"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenvalues and the gap for one interval length.
    Solve,
    /// Gap over a geometric grid of lengths, written as CSV.
    Sweep,
    /// Decay exponent of a sweep CSV (top half of the grid unless --l-min/--l-max or --all).
    Fit {
        input: PathBuf,
        /// Fit every row.
        #[arg(long)]
        all: bool,
    },
    /// Sweep, then check every bound whose hypothesis the potential meets.
    Check,
    /// Exact step-potential frequencies and gaps from the matching equations.
    StepAnalytic,
    /// Gap of the free box with a centred point interaction of strength L.
    Delta,
    /// Gap and its coupling derivative along t·v, written as CSV.
    Hf,
}

#[derive(Debug, Args)]
struct Options {
    /// TOML file with flat keys (potential.family, run.L, sweep.l_min, ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// zero | step | inverse-square-tail | power-law | bump | piecewise
    #[arg(long, global = true)]
    potential: Option<String>,
    #[arg(long, global = true)]
    v0: Option<f64>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long = "C", global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Piecewise segments as left:right:value, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    segments: Option<String>,
    #[arg(long = "L", global = true)]
    length: Option<f64>,
    #[arg(long = "l-min", global = true)]
    l_min: Option<f64>,
    #[arg(long = "l-max", global = true)]
    l_max: Option<f64>,
    #[arg(long = "l-ratio", global = true)]
    l_ratio: Option<f64>,
    /// Coarse-grid points per unit length (default 40).
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// physical | scaled
    #[arg(long, global = true)]
    frame: Option<String>,
    /// Number of eigenvalues for `solve` (default 2).
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Comma-separated couplings for `hf`.
    #[arg(long = "t-grid", global = true)]
    t_grid: Option<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Options {
    fn as_keys(&self) -> Result<FileConfig, GapError> {
        let mut keys = FileConfig::default();
        keys.potential.family = self.potential.clone();
        keys.potential.v0 = self.v0;
        keys.potential.b = self.b;
        keys.potential.c = self.c;
        keys.potential.alpha = self.alpha;
        keys.potential.s = self.s;
        keys.potential.segments = self.segments.as_deref().map(parse_segments).transpose()?;
        keys.run.frame = self.frame.clone();
        keys.run.length = self.length;
        keys.run.resolution = self.resolution;
        keys.run.k = self.k;
        keys.run.workers = self.workers;
        keys.run.out = self.out.clone();
        keys.sweep.l_min = self.l_min;
        keys.sweep.l_max = self.l_max;
        keys.sweep.l_ratio = self.l_ratio;
        keys.hf.t_grid = self.t_grid.as_deref().map(parse_list).transpose()?;
        Ok(keys)
    }
}

/// Why a run stopped early.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<GapError> for Failure {
    fn from(e: GapError) -> Self {
        match e {
            GapError::Invalid(_) | GapError::Resolution { .. } | GapError::Bracket { .. } | GapError::Window { .. } => {
                Failure::Usage(e.to_string())
            }
            GapError::Hypothesis(_) | GapError::Precision { .. } | GapError::Convergence { .. } => {
                Failure::Check(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(stderr, "failed: {msg}");
            EXIT_FAILED_CHECK
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let file = match &cli.options.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::from_keys(file.overlay(cli.options.as_keys()?))?;
    let name = match cli.command {
        Command::Solve => "solve",
        Command::Sweep => "sweep",
        Command::Fit { .. } => "fit",
        Command::Check => "check",
        Command::StepAnalytic => "step-analytic",
        Command::Delta => "delta",
        Command::Hf => "hf",
    };
    // Commands whose table goes to stdout put the report header on stderr.
    let table_on_stdout = matches!(cli.command, Command::Sweep | Command::Hf) && cfg.out.is_none();
    let report: &mut dyn Write = if table_on_stdout { &mut *stderr } else { &mut *stdout };
    writeln!(report, "# gaplab {name}")?;
    write!(report, "{cfg}")?;
    match &cli.command {
        Command::Solve => solve(&cfg, report),
        Command::Sweep => run_sweep(&cfg, stdout, stderr),
        Command::Fit { input, all } => {
            let window = if *all {
                FitWindow::All
            } else if cli.options.l_min.is_some() || cli.options.l_max.is_some() {
                FitWindow::Range(
                    cli.options.l_min.unwrap_or(0.0),
                    cli.options.l_max.unwrap_or(f64::INFINITY),
                )
            } else {
                FitWindow::TopHalf
            };
            fit(input, window, report)
        }
        Command::Check => check(&cfg, report),
        Command::StepAnalytic => step_analytic(&cfg, report),
        Command::Delta => delta(&cfg, report),
        Command::Hf => hf(&cfg, stdout, stderr),
    }
}

fn solve(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let spec = ProblemSpec::new(cfg.potential.clone(), cfg.require_length()?, cfg.frame);
    let r = lowest_eigenvalues_fd(&spec, cfg.k, cfg.resolution)?;
    for (j, (value, err)) in r.eigenvalues.iter().zip(&r.error_estimates).enumerate() {
        writeln!(out, "eigenvalue[{j}] = {value} +- {err:e}")?;
    }
    if cfg.k >= 2 {
        let g = spectral_gap(&spec, cfg.resolution)?;
        writeln!(out, "gap = {} +- {:e}", g.gap, g.error)?;
        if cfg.frame == Frame::Physical {
            writeln!(out, "L^2 gap = {}", spec.length * spec.length * g.gap)?;
        }
    }
    Ok(EXIT_OK)
}

fn sweep_curve(cfg: &RunConfig) -> Result<GapCurve, Failure> {
    if cfg.frame != Frame::Physical {
        return Err(Failure::Usage(
            "sweeps run in the physical frame; drop --frame scaled".into(),
        ));
    }
    let grid = LengthGrid::geometric(cfg.l_min, cfg.l_max, cfg.l_ratio)?;
    let settings = SweepSettings {
        resolution: cfg.resolution,
        workers: cfg.workers,
    };
    Ok(sweep(&cfg.potential, &grid, settings)?)
}

fn report_exclusions(curve: &GapCurve, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "rows retained: {}, excluded: {}",
        curve.rows.len(),
        curve.excluded.len()
    )?;
    for e in &curve.excluded {
        writeln!(out, "excluded L = {}: {}", e.length, e.reason)?;
    }
    Ok(())
}

/// Writes to `--out` when given, otherwise to `stdout`.
fn write_output(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> Result<(), GapError>,
) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => write(stdout)?,
    }
    Ok(())
}

fn run_sweep(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let curve = sweep_curve(cfg)?;
    write_output(cfg, stdout, |w| table::write_sweep_csv(w, &curve.rows))?;
    let report: &mut dyn Write = if cfg.out.is_some() { stdout } else { stderr };
    report_exclusions(&curve, report)?;
    Ok(if curve.excluded.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILED_CHECK
    })
}

fn fit(input: &PathBuf, window: FitWindow, out: &mut dyn Write) -> Outcome {
    let file = File::open(input).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", input.display())))?;
    let rows = table::read_sweep_csv(file)?;
    let curve = GapCurve::from_rows(None, SweepSettings::default(), rows)?;
    writeln!(out, "# input = {}", input.display())?;
    report_exclusions(&curve, out)?;
    let f = fit_exponent(&curve, window)?;
    writeln!(out, "exponent fit: {f}")?;
    Ok(EXIT_OK)
}

fn print_bound(result: Result<BoundReport, GapError>, out: &mut dyn Write) -> Result<bool, Failure> {
    match result {
        Ok(report) => {
            writeln!(out, "{report}")?;
            Ok(report.status != BoundStatus::Violated)
        }
        Err(GapError::Hypothesis(why)) => {
            writeln!(out, "not applicable: {why}")?;
            Ok(true)
        }
        Err(e) => Err(e.into()),
    }
}

fn check(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let curve = sweep_curve(cfg)?;
    report_exclusions(&curve, out)?;
    let class = cfg.potential.classify();
    let mut ok = true;

    let ub1 = match class.short_range_c {
        Some(c) => check_upper_bound_short_range(&curve, c),
        None => Err(GapError::Hypothesis("upper bound I needs v(x) <= C/x^2".into())),
    };
    ok &= print_bound(ub1, out)?;
    ok &= print_bound(check_upper_bound_symmetric(&curve), out)?;

    let vanishing = match check_vanishing_rescaled(&curve) {
        Err(GapError::Hypothesis(why)) => {
            writeln!(
                out,
                "# vanishing L^2 gap: hypothesis not met ({why}); evaluated for comparison"
            )?;
            evaluate_vanishing_rescaled(&curve, VANISHING_RATIO)
        }
        other => other,
    };
    ok &= print_bound(vanishing, out)?;

    let window = if curve.top_half().len() >= crate::gap_asymptotics::MIN_FIT_ROWS {
        FitWindow::TopHalf
    } else {
        FitWindow::All
    };
    match fit_exponent(&curve, window) {
        Ok(f) => writeln!(out, "exponent fit: {f}")?,
        Err(e) => writeln!(out, "exponent fit: unavailable ({e})")?,
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED_CHECK })
}

fn step_analytic(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let Potential::Step { v0, b } = cfg.potential else {
        return Err(Failure::Usage(
            "step-analytic needs --potential step with --v0 and --b".into(),
        ));
    };
    let length = cfg.require_length()?;
    let state = StepMatchingState::solve(v0, b, length)?;
    let scaled = state.gap();
    writeln!(out, "omega0 = {}", state.omega[0])?;
    writeln!(out, "omega1 = {}", state.omega[1])?;
    writeln!(out, "scaled gap = {scaled}")?;
    writeln!(out, "physical gap = {}", scaled / (length * length))?;
    Ok(EXIT_OK)
}

fn delta(cfg: &RunConfig, out: &mut dyn Write) -> Outcome {
    let length = cfg.require_length()?;
    let d = delta_gap(length)?;
    writeln!(out, "k0 = {}", d.k0)?;
    writeln!(out, "gap = {}", d.gap)?;
    writeln!(out, "L*gap = {}", length * d.gap)?;
    Ok(EXIT_OK)
}

fn hf(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let spec = ProblemSpec::new(cfg.potential.clone(), cfg.require_length()?, cfg.frame);
    let rows = t_sweep(&spec, &cfg.t_grid, cfg.resolution)?;
    write_output(cfg, stdout, |w| table::write_hf_csv(w, &rows))?;
    let report: &mut dyn Write = if cfg.out.is_some() { stdout } else { stderr };
    writeln!(report, "rows: {}", rows.len())?;
    let density = psi_l(&spec, cfg.resolution)?;
    match density.x0 {
        Some(x0) => writeln!(report, "x0 (t = 1) = {x0}")?,
        None => writeln!(report, "x0 (t = 1) = absent")?,
    }
    writeln!(report, "integral of psi (t = 1) = {:e}", density.integral())?;
    Ok(EXIT_OK)
}
