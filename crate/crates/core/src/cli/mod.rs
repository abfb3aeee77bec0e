//! Command-line front end: `check`, `simulate`, `sweep` and `bounds`.
//!
//! Exit codes: 0 success or globally stable, 1 error, 2 inconclusive,
//! 3 integration event.

mod sweep;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

pub use sweep::{default_history_range, Axis, Cell, SweepRow, SweepSpec, DEFAULT_TAIL_FRACTION, DEFAULT_TOL};

use crate::bounds::{BoundTable, RationalBound};
use crate::criterion::assess;
use crate::error::{Error, Result};
use crate::integrator::{integrate, tail_metrics};
use crate::models::{HistorySpec, Model, ModelConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_EVENT: i32 = 3;

/// Largest step for default integrations.
pub const DEFAULT_MAX_STEP: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "dde-stability", version, about = "3/2 stability checks for scalar delay equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the stability verdict of a model config.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate a model config, write the trajectory CSV and print tail metrics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to 400 spans.
        #[arg(long, allow_negative_numbers = true)]
        t_end: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
        /// Overrides the seed of a random history.
        #[arg(long)]
        seed: Option<u64>,
        /// Trajectory CSV path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dense resampling to this many uniform points.
        #[arg(long)]
        resample: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_TAIL_FRACTION)]
        tail_fraction: f64,
    },
    /// Run a parameter sweep spec and write the convergence map CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate A, B, D, R; constants go to `<out>.json`.
    Bounds {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// The largest step `≤ 0.01` that divides the base delay and respects
/// `dt ≤ span/10`.
pub fn default_step(model: &Model) -> f64 {
    let base = model.base_delay.unwrap_or(model.span);
    let cap = DEFAULT_MAX_STEP.min(model.span / 10.0);
    base / (base / cap).ceil()
}

fn open_out<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

/// Prints the verdict JSON; exit 0 when globally stable, 2 otherwise.
pub fn cmd_check(config: &Path, out: &mut dyn Write) -> Result<i32> {
    let model = ModelConfig::from_path(config)?.build()?;
    let verdict = assess(&model)?;
    writeln!(out, "{}", verdict.to_json())?;
    Ok(if verdict.is_stable() { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub resample: Option<usize>,
    pub tol: f64,
    pub tail_fraction: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            t_end: None,
            dt: None,
            seed: None,
            out: None,
            resample: None,
            tol: DEFAULT_TOL,
            tail_fraction: DEFAULT_TAIL_FRACTION,
        }
    }
}

/// Writes the trajectory CSV and the tail-metrics JSON (to standard error
/// when the CSV goes to standard output). Exit 3 when an event stopped the
/// run.
pub fn cmd_simulate(config: &Path, opts: &SimulateOptions, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let mut cfg = ModelConfig::from_path(config)?;
    if let (Some(seed), Some(HistorySpec::Random { seed: s, .. })) = (opts.seed, cfg.history.as_mut()) {
        *s = seed;
    }
    let model = cfg.build()?;
    let pre = cfg.initial_history(&model)?;
    let dt = opts.dt.unwrap_or_else(|| default_step(&model));
    let t_end = opts.t_end.unwrap_or(sweep::DEFAULT_SPANS * model.span);
    let traj = integrate(&model, &pre, t_end, dt)?;

    let csv_to_stdout = opts.out.is_none();
    {
        let mut w = open_out(opts.out.as_deref(), stdout)?;
        traj.write_csv(&mut w, opts.resample)?;
        w.flush()?;
    }
    let report = match traj.events().first() {
        Some(e) => json!({ "event": e, "t_last": traj.t_last() }),
        None => {
            let tail = tail_metrics(&traj, model.equilibrium, opts.tail_fraction)?;
            json!({
                "equilibrium": model.equilibrium,
                "tail": tail,
                "converged": tail.sup_dev < opts.tol,
                "tol": opts.tol,
            })
        }
    };
    let sink: &mut dyn Write = if csv_to_stdout { stderr } else { stdout };
    writeln!(sink, "{report}")?;
    Ok(if traj.events().is_empty() { EXIT_OK } else { EXIT_EVENT })
}

pub fn cmd_sweep(spec: &SweepSpec, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    spec.validate()?;
    let rows = spec.run();
    let mut w = open_out(out, stdout)?;
    spec.write_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(EXIT_OK)
}

/// `<out>.json`, next to the CSV.
pub fn footer_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes the bound table CSV and its derived-constants footer. Without
/// `out` the CSV goes to standard output and the footer to standard error.
pub fn cmd_bounds(a: f64, b: f64, x_max: f64, n: usize, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let bound = RationalBound::new(a, b)?;
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "x_max",
            value: x_max,
            reason: "must be positive",
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "needs at least 2 points",
        });
    }
    let table = BoundTable::build(bound, BoundTable::default_grid(&bound, x_max, n));
    let footer = serde_json::to_string_pretty(&table.constants)?;
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write_csv(&mut w)?;
            w.flush()?;
            fs::write(footer_path(path), footer + "\n")?;
        }
        None => {
            table.write_csv(&mut *stdout)?;
            writeln!(stderr, "{footer}")?;
        }
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Check { config } => cmd_check(&config, stdout),
        Command::Simulate {
            config,
            t_end,
            dt,
            seed,
            out,
            resample,
            tol,
            tail_fraction,
        } => cmd_simulate(
            &config,
            &SimulateOptions {
                t_end,
                dt,
                seed,
                out,
                resample,
                tol,
                tail_fraction,
            },
            stdout,
            stderr,
        ),
        Command::Sweep {
            config,
            seed,
            t_end,
            dt,
            tol,
            out,
        } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let mut spec = SweepSpec::from_json(&text)?;
            spec.seed = seed.unwrap_or(spec.seed);
            spec.t_end = t_end.or(spec.t_end);
            spec.dt = dt.or(spec.dt);
            spec.convergence_tol = tol.unwrap_or(spec.convergence_tol);
            cmd_sweep(&spec, out.as_deref(), stdout)
        }
        Command::Bounds { a, b, x_max, n, out } => cmd_bounds(a, b, x_max, n, out.as_deref(), stdout, stderr),
    }
}

/// Runs a parsed command line and maps every outcome to an exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Parses `args` (program name first) and runs them.
pub fn run_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{e}");
            if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_OK
            }
        }
    }
}
