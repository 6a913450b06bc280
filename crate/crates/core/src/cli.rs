//! The `sohb` command line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::io::{
    parse_config, thread_count_from_env, with_threads, write_snapshot, DiagnosticsWriter, InitialKind, RunConfig,
};
use crate::lin_analysis::{hyperbolicity_report, Coefficients};
use crate::model::FluidState;
use crate::reduction::{check_invariance_propagation, compare_reduced, ReductionError};
use crate::solver::{relax_ode_exact, run, RunAbort};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sohb", version, about = "Body-orientation swarm hydrodynamics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Characteristic speeds and hyperbolicity verdicts over a θ sweep (CSV).
    Analyze(AnalyzeArgs),
    /// Run the configured scheme and write snapshots plus diagnostics.csv.
    Simulate {
        config: PathBuf,
    },
    /// Closed-form eigenvalues of MMᵀ under homogeneous relaxation (CSV).
    Relax(RelaxArgs),
    /// Dimension-reduction report for an embedded_reduction config (CSV).
    Reduce {
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    c1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c2: f64,
    #[arg(long, allow_negative_numbers = true)]
    c3: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c4: f64,
    #[arg(long, default_value_t = 181)]
    samples: usize,
}

#[derive(Debug, Args)]
struct RelaxArgs {
    /// Initial eigenvalues of MMᵀ, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_real)]
    d0: Vec<f64>,
    #[arg(long, value_parser = parse_real)]
    alpha: f64,
    /// Output times, comma separated; `ln2`-style tokens are accepted.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_real)]
    t: Vec<f64>,
}

/// A number, `lnX` or `k*lnX`.
fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (scale, rest) = match s.split_once('*') {
        Some((k, r)) => (k.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"))?, r.trim()),
        None => (1.0, s),
    };
    match rest.strip_prefix("ln") {
        Some(arg) => {
            let x: f64 = arg.parse().map_err(|e| format!("'{s}': {e}"))?;
            Ok(scale * x.ln())
        }
        None => Ok(scale * rest.parse::<f64>().map_err(|e| format!("'{s}': {e}"))?),
    }
}

/// Parses `argv` (including the program name) and runs the command. Exit
/// codes: 0 success, 1 invalid input, 2 runtime failure.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let threads = match thread_count_from_env() {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_VALIDATION;
        }
    };
    let result = with_threads(threads, || dispatch(cli.command));
    match result {
        Ok(Ok(report)) => {
            let _ = out.write_all(&report);
            EXIT_OK
        }
        Ok(Err(failure)) => {
            let _ = writeln!(err, "{}", failure.message);
            failure.code
        }
        Err(msg) => {
            let _ = writeln!(err, "error: cannot start thread pool: {msg}");
            EXIT_RUNTIME
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Self::runtime(format!("error: {}: {e}", path.display()))
    }

    fn abort(abort: &RunAbort, grid: &crate::grid::GridSpec) -> Self {
        let location = match abort.error.cell() {
            Some(cell) => format!(" in cell {cell} (index {:?})", grid.multi_index(cell).as_slice()),
            None => String::new(),
        };
        Self::runtime(format!("runtime error at t = {}{location}: {}", abort.time, abort.error))
    }
}

fn dispatch(command: Command) -> Result<Vec<u8>, Failure> {
    match command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate { config } => simulate(&config),
        Command::Relax(a) => relax(a),
        Command::Reduce { config } => reduce(&config),
    }
}

fn analyze(a: AnalyzeArgs) -> Result<Vec<u8>, Failure> {
    let c = Coefficients::new(a.c1, a.c2, a.c3, a.c4);
    let mut problems = c.violations();
    if a.n < 2 {
        problems.push(format!("n >= 2 required (n = {})", a.n));
    }
    if a.samples == 0 {
        problems.push("samples >= 1 required".into());
    }
    if !problems.is_empty() {
        return Err(Failure::validation(format!("invalid input:\n  {}", problems.join("\n  "))));
    }
    let report = hyperbolicity_report(&c, a.n, a.samples).map_err(|e| Failure::runtime(format!("error: {e}")))?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf).expect("write to memory");
    Ok(buf)
}

fn relax(a: RelaxArgs) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    writeln!(buf, "t,d0,d").expect("write to memory");
    for &t in &a.t {
        let d = relax_ode_exact(&a.d0, a.alpha, t).map_err(|e| Failure::validation(format!("error: {e}")))?;
        for (d0, d) in a.d0.iter().zip(d) {
            writeln!(buf, "{t:?},{d0:?},{d:?}").expect("write to memory");
        }
    }
    Ok(buf)
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("error: {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

enum SimError {
    Abort(RunAbort),
    Io(PathBuf, io::Error),
}

impl From<RunAbort> for SimError {
    fn from(a: RunAbort) -> Self {
        SimError::Abort(a)
    }
}

fn simulate(path: &Path) -> Result<Vec<u8>, Failure> {
    let cfg = load_config(path)?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let diag_path = dir.join("diagnostics.csv");
    let diag_file = File::create(&diag_path).map_err(|e| Failure::io(&diag_path, e))?;
    let mut diagnostics = DiagnosticsWriter::new(BufWriter::new(diag_file)).map_err(|e| Failure::io(&diag_path, e))?;
    let initial = cfg.initial.build(&cfg.grid, cfg.seed);
    let grid = initial.grid.clone();
    let mut count = 0usize;
    let result = run(initial, &cfg.coefficients, &cfg.scheme, |t, state: &FluidState| {
        let file = dir.join(format!("snapshot_{count:05}.{}", cfg.output_format.extension()));
        write_snapshot(state, cfg.output_format, &file).map_err(|e| SimError::Io(file.clone(), e))?;
        diagnostics.row(t, count, state).map_err(|e| SimError::Io(diag_path.clone(), e))?;
        count += 1;
        Ok(())
    });
    match result {
        Ok(state) => {
            let mut buf = Vec::new();
            writeln!(
                buf,
                "wrote {count} snapshots to {}; final mass {:?}, min rho {:?}",
                dir.display(),
                state.total_mass(),
                state.min_rho()
            )
            .expect("write to memory");
            Ok(buf)
        }
        Err(SimError::Abort(a)) => Err(Failure::abort(&a, &grid)),
        Err(SimError::Io(p, e)) => Err(Failure::io(&p, e)),
    }
}

fn reduce(path: &Path) -> Result<Vec<u8>, Failure> {
    let cfg = load_config(path)?;
    if cfg.initial.kind != InitialKind::EmbeddedReduction {
        return Err(Failure::validation(format!(
            "{}: reduce needs [initial] kind = embedded_reduction (found {})",
            path.display(),
            cfg.initial.kind
        )));
    }
    let (reduced, setup) = cfg.initial.reduced(&cfg.grid);
    let report = if setup.p() == 2 && setup.n() == 3 {
        compare_reduced(&reduced, &setup, &cfg.coefficients, &cfg.scheme)
    } else {
        let full = cfg.initial.build(&cfg.grid, cfg.seed);
        check_invariance_propagation(&full, &setup, &cfg.coefficients, &cfg.scheme)
    };
    let report = match report {
        Ok(r) => r,
        Err(ReductionError::Run(a)) => return Err(Failure::abort(&a, &cfg.grid)),
        Err(e) => return Err(Failure::validation(format!("error: {e}"))),
    };
    let mut buf = Vec::new();
    report.write_csv(&mut buf).expect("write to memory");
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let file = dir.join("reduction.csv");
    fs::write(&file, &buf).map_err(|e| Failure::io(&file, e))?;
    Ok(buf)
}
