//! `arclp` command-line front end.

mod pathdata;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arclp::{
    compare, parse_mps_file, solve, to_standard_form, DepRows, MpsError, RuleSet, SolveResult,
    SolverConfig,
};
use arclp::{StandardFormLP, TerminationStatus};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, error, warn};
use rayon::prelude::*;

use report::{Format, Row};

const EXIT_NOT_OPTIMAL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "arclp",
    version,
    about = "Arc-search and Mehrotra interior-point LP solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one MPS file.
    Solve {
        path: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Solve every `.mps` file in a directory with both methods and tabulate.
    Compare {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Central path, iterates and arcs of the two-variable example, for plotting.
    Pathdata {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Arc,
    Mehrotra,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DepRowsArg {
    Auto,
    Always,
    Never,
}

#[derive(Debug, Args)]
struct Opts {
    /// Defaults to `arc` for solve and `both` for compare.
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps_x: f64,
    /// Comma-separated rule numbers 1-10, `all`, or `none`.
    #[arg(long, default_value = "1,3,5,7,9", value_parser = parse_rules)]
    presolve: RuleSet,
    #[arg(long, value_enum, default_value_t = DepRowsArg::Auto)]
    dep_rows: DepRowsArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Accepted for reproducible scripts; every run is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_rules(s: &str) -> Result<RuleSet, String> {
    s.parse()
}

impl Opts {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            eps_x: self.eps_x,
            presolve: self.presolve.clone(),
            dep_rows: match self.dep_rows {
                DepRowsArg::Auto => DepRows::Auto,
                DepRowsArg::Always => DepRows::Always,
                DepRowsArg::Never => DepRows::Never,
            },
            ..SolverConfig::default()
        }
    }

    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

enum Failure {
    Input(String),
    Unsupported(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Unsupported(_) => EXIT_UNSUPPORTED,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Unsupported(m) => m,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            Failure::Input(_) => "input-error",
            Failure::Unsupported(_) => "unsupported",
        }
    }
}

fn load(path: &Path) -> Result<StandardFormLP, Failure> {
    let raw = parse_mps_file(path).map_err(|e| match e {
        MpsError::Unsupported { .. } => Failure::Unsupported(format!("{}: {e}", path.display())),
        _ => Failure::Input(format!("{}: {e}", path.display())),
    })?;
    to_standard_form(&raw).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn finish(written: io::Result<()>) -> Result<(), Failure> {
    match written {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Input(e.to_string())),
        _ => Ok(()),
    }
}

fn problem_name(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

/// Run the requested methods; `None` for a method not asked for.
fn run(
    lp: &StandardFormLP,
    cfg: &SolverConfig,
    method: Method,
) -> (Option<SolveResult>, Option<SolveResult>) {
    let single = |name: &str| {
        solve(lp, &cfg.clone().with_method(name)).expect("built-in method with validated config")
    };
    match method {
        Method::Arc => (Some(single("arc")), None),
        Method::Mehrotra => (None, Some(single("mehrotra"))),
        Method::Both => {
            let (a, m) = compare(lp, cfg).expect("built-in methods with validated config");
            (Some(a), Some(m))
        }
    }
}

fn cmd_solve(path: &Path, opts: &Opts) -> Result<u8, Failure> {
    let cfg = opts.config();
    let lp = load(path)?;
    let (arc, meh) = run(&lp, &cfg, opts.method.unwrap_or(Method::Arc));
    let name = problem_name(path);
    let results: Vec<&SolveResult> = arc.iter().chain(meh.iter()).collect();
    let mut out = opts.sink().map_err(|e| Failure::Input(e.to_string()))?;
    let written = match opts.format {
        Format::Text => report::write_solve_text(&mut out, &name, &results),
        f => report::write_rows(
            &mut out,
            &[Row::from_results(name, arc.as_ref(), meh.as_ref())],
            f,
        ),
    };
    finish(written.and_then(|_| out.flush()))?;
    let optimal = results
        .iter()
        .all(|r| r.status == TerminationStatus::Optimal);
    Ok(if optimal { 0 } else { EXIT_NOT_OPTIMAL })
}

fn mps_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("mps")))
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_compare(dir: &Path, opts: &Opts) -> Result<u8, Failure> {
    let cfg = opts.config();
    let files = mps_files(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    if files.is_empty() {
        warn!("no .mps files in {}", dir.display());
    }
    let method = opts.method.unwrap_or(Method::Both);
    let rows: Vec<Row> = files
        .par_iter()
        .map(|path| {
            let name = problem_name(path);
            match load(path) {
                Ok(lp) => {
                    let (arc, meh) = run(&lp, &cfg, method);
                    Row::from_results(name, arc.as_ref(), meh.as_ref())
                }
                Err(f) => {
                    error!("{}", f.message());
                    Row::failed(name, f.status())
                }
            }
        })
        .collect();
    let mut out = opts.sink().map_err(|e| Failure::Input(e.to_string()))?;
    finish(report::write_rows(&mut out, &rows, opts.format).and_then(|_| out.flush()))?;
    Ok(0)
}

fn cmd_pathdata(opts: &Opts) -> Result<u8, Failure> {
    let points = pathdata::collect(&opts.config());
    let mut out = opts.sink().map_err(|e| Failure::Input(e.to_string()))?;
    finish(pathdata::write_points(&mut out, &points, opts.format).and_then(|_| out.flush()))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let opts = match &cli.command {
        Command::Solve { opts, .. }
        | Command::Compare { opts, .. }
        | Command::Pathdata { opts } => opts,
    };
    if let Some(seed) = opts.seed {
        debug!("seed {seed} ignored");
    }
    if let Err(msg) = opts.config().validate() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_INPUT);
    }
    let outcome = match &cli.command {
        Command::Solve { path, opts } => cmd_solve(path, opts),
        Command::Compare { dir, opts } => cmd_compare(dir, opts),
        Command::Pathdata { opts } => cmd_pathdata(opts),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
