//! `gso-bench`: tables of median iteration counts, the `c` sweep, and
//! standalone solves from MatrixMarket files.
//!
//! Exit status: 0 on success or convergence, 1 on usage/parse errors, 2 when
//! a solve hits its iteration cap.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gso_core::bench::{self, BenchConfig, SolveFileOptions, SweepConfig, TableSpec};
use gso_core::solvers::{ObliqueConfig, SkipMode, StopMode, StopRule, DEFAULT_THRESHOLD};
use gso_core::{Error, Method};

#[derive(Parser, Debug)]
#[command(name = "gso-bench", version, about = "Coordinate-descent and GSO least-squares benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Median IT / CPU over repeats for every (rows, cols, c) combination.
    Table(TableArgs),
    /// Median kappa_F^2 and iteration counts across a grid of c.
    SweepC(SweepArgs),
    /// Solve A x ~ b read from files and write the iterate.
    Solve(SolveArgs),
}

#[derive(Args, Debug)]
struct StopArgs {
    /// Stop metric: rre, solution or gradient.
    #[arg(long)]
    stop_mode: Option<StopMode>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = gso_core::solvers::DEFAULT_MAX_ITERS)]
    max_iters: u64,
    /// Steps between stop checks (default: 1, or n for the gradient rule).
    #[arg(long)]
    check_every: Option<u64>,
    /// Oblique-step skip threshold, relative to the squared column norm.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Interpret --epsilon as an absolute threshold on g.
    #[arg(long)]
    absolute_epsilon: bool,
}

impl StopArgs {
    fn stop(&self, default_mode: StopMode, n: usize) -> StopRule {
        let base = match self.stop_mode.unwrap_or(default_mode) {
            StopMode::ResidualRelativeError => StopRule::rre(self.threshold),
            StopMode::SolutionError => StopRule::solution_error(self.threshold),
            StopMode::GradientRelative => StopRule::gradient(self.threshold, n),
        };
        let stop = base.with_max_iters(self.max_iters);
        match self.check_every {
            Some(c) => stop.with_check_every(c),
            None => stop,
        }
    }

    fn oblique(&self) -> ObliqueConfig {
        let mut cfg = ObliqueConfig::default();
        if let Some(eps) = self.epsilon {
            cfg.epsilon = eps;
        }
        if self.absolute_epsilon {
            cfg.skip_mode = SkipMode::Absolute;
        }
        cfg
    }
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Row counts (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    rows: Vec<usize>,
    /// Column counts (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    cols: Vec<usize>,
    /// Lower ends of the entry interval [c, 1) (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    c: Vec<f64>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    consistent: bool,
    #[arg(long, value_delimiter = ',', default_value = "cd,gso,rcd,rgso")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 50)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    stop: StopArgs,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 3000)]
    rows: usize,
    #[arg(long, default_value_t = 50)]
    cols: usize,
    /// Strictly increasing grid in [0, 1) (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    c: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "cd,rcd")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 800_000)]
    max_iters: u64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// MatrixMarket `array real general` file.
    #[arg(long)]
    matrix: PathBuf,
    /// Right-hand side, whitespace-separated decimals.
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, default_value = "gso")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    stop: StopArgs,
    /// Where to write the iterate, one value per line.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Table(args) => {
            let mut specs = Vec::new();
            for &m in &args.rows {
                for &n in &args.cols {
                    for &c in &args.c {
                        specs.push(TableSpec {
                            m,
                            n,
                            c,
                            consistent: args.consistent,
                        });
                    }
                }
            }
            let n = args.cols.iter().copied().max().unwrap_or(1);
            let mut cfg = BenchConfig::new(args.methods.clone(), args.repeats, args.seed);
            cfg.stop = args.stop.stop(StopMode::ResidualRelativeError, n);
            cfg.oblique = args.stop.oblique();
            let report = bench::run_table(&specs, &cfg)?;
            emit(&args.out, &report.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepC(args) => {
            let mut cfg = SweepConfig::new(args.rows, args.cols, args.c, args.repeats, args.seed);
            cfg.methods = args.methods;
            cfg.it_cap = args.max_iters;
            cfg.threshold = args.threshold;
            let report = bench::run_sweep_c(&cfg)?;
            emit(&args.out, &report.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => {
            // The gradient rule checks once per sweep, so read `n` first.
            let a = gso_core::io::read_matrix_market(&args.matrix)?;
            let opts = SolveFileOptions {
                method: args.method,
                stop: args.stop.stop(StopMode::GradientRelative, a.cols()),
                oblique: args.stop.oblique(),
                seed: args.seed,
                out: args.out,
            };
            let report = bench::solve_file(&args.matrix, &args.rhs, &opts)?;
            println!(
                "method={} iterations={} updates={} skips={} final_metric={:.6e} status={}",
                args.method,
                report.iterations,
                report.updates_applied,
                report.skips,
                report.final_metric,
                if report.converged() { "converged" } else { "max-iters" }
            );
            if opts.out.is_none() {
                print!("{}", gso_core::io::format_vector(&report.x));
            }
            Ok(if report.converged() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
