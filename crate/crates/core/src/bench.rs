//! Experiment harness: median iteration counts and wall times over seeded
//! repeats, speed-ups, the `[c, 1)` condition sweep, and standalone solves
//! from files.
//!
//! Every repeat draws a fresh problem from a child seed derived from
//! `(master_seed, spec_index, repeat_index)`, and all requested methods run on
//! that same instance. Repeats run on the rayon pool; results are collected
//! in `(spec, repeat)` order, so iteration columns do not depend on the
//! number of threads.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io;
use crate::metrics::rate_bounds;
use crate::oracle::spectral_summary;
use crate::problems::{plant_consistent, gen_uniform_matrix, GeneratorSpec};
use crate::solvers::{self, Method, ObliqueConfig, Reference, SolveReport, StopRule};

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repeat `repeat` of spec `spec_index`.
pub fn child_seed(master_seed: u64, spec_index: u64, repeat: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ spec_index) ^ repeat)
}

fn method_seed(child: u64, method: Method) -> u64 {
    let tag = match method {
        Method::Cd => 1,
        Method::Gso => 2,
        Method::Rcd => 3,
        Method::Rgso => 4,
    };
    mix64(child ^ tag)
}

/// A value or "did not finish".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<T> {
    Done(T),
    Dnf,
}

impl<T: Copy> Outcome<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Outcome::Done(v) => Some(v),
            Outcome::Dnf => None,
        }
    }

    pub fn is_dnf(self) -> bool {
        matches!(self, Outcome::Dnf)
    }
}

impl fmt::Display for Outcome<u64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Done(v) => write!(f, "{v}"),
            Outcome::Dnf => f.write_str("DNF"),
        }
    }
}

impl fmt::Display for Outcome<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Done(v) => write!(f, "{v:.6}"),
            Outcome::Dnf => f.write_str("DNF"),
        }
    }
}

/// Median where DNF entries sort above every finished one. With an even
/// count the two middle entries are averaged (rounded half up for integers);
/// if either of them is DNF the median is DNF.
pub fn median_it(values: &[Outcome<u64>]) -> Outcome<u64> {
    let mut v: Vec<Option<u64>> = values.iter().map(|o| o.value()).collect();
    v.sort_by_key(|o| o.unwrap_or(u64::MAX));
    match middle(&v) {
        (Some(Some(a)), Some(Some(b))) => Outcome::Done((a + b).div_ceil(2)),
        (Some(Some(a)), None) => Outcome::Done(a),
        _ => Outcome::Dnf,
    }
}

pub fn median_f64(values: &[Outcome<f64>]) -> Outcome<f64> {
    let mut v: Vec<f64> = values
        .iter()
        .map(|o| o.value().unwrap_or(f64::INFINITY))
        .collect();
    v.sort_by(f64::total_cmp);
    match middle(&v) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => Outcome::Done((a + b) / 2.0),
        (Some(a), None) if a.is_finite() => Outcome::Done(a),
        _ => Outcome::Dnf,
    }
}

/// Middle element, or the two middle elements for even lengths.
fn middle<T: Copy>(v: &[T]) -> (Option<T>, Option<T>) {
    let n = v.len();
    if n == 0 {
        (None, None)
    } else if n % 2 == 1 {
        (Some(v[n / 2]), None)
    } else {
        (Some(v[n / 2 - 1]), Some(v[n / 2]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub repeats: usize,
    pub master_seed: u64,
    pub stop: StopRule,
    pub oblique: ObliqueConfig,
}

impl BenchConfig {
    pub fn new(methods: Vec<Method>, repeats: usize, master_seed: u64) -> Self {
        Self {
            methods,
            repeats,
            master_seed,
            stop: StopRule::default(),
            oblique: ObliqueConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::BadConfig("repeats must be at least 1".into()));
        }
        self.stop.validate()?;
        self.oblique.validate()
    }
}

/// One solver run inside a repeat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub iterations: u64,
    pub converged: bool,
    pub cpu_seconds: f64,
}

impl RunRecord {
    fn from_report(rep: &SolveReport) -> Self {
        Self {
            iterations: rep.iterations,
            converged: rep.converged(),
            cpu_seconds: rep.elapsed_seconds,
        }
    }

    fn it(&self) -> Outcome<u64> {
        if self.converged {
            Outcome::Done(self.iterations)
        } else {
            Outcome::Dnf
        }
    }

    fn cpu(&self) -> Outcome<f64> {
        if self.converged {
            Outcome::Done(self.cpu_seconds)
        } else {
            Outcome::Dnf
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub spec: TableSpec,
    pub method: Method,
    pub repeats: usize,
    pub median_it: Outcome<u64>,
    pub median_cpu_seconds: Outcome<f64>,
    /// Per-repeat records in repeat order.
    pub runs: Vec<RunRecord>,
}

/// `speedup1 = CPU(CD)/CPU(GSO)`, `speedup2 = CPU(RCD)/CPU(RGSO)`; `None`
/// when one of the two methods was not run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub spec: TableSpec,
    pub speedup1: Option<Outcome<f64>>,
    pub speedup2: Option<Outcome<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub rows: Vec<BenchRow>,
    pub speedups: Vec<SpeedupRow>,
}

pub const TABLE_HEADER: &str = "m,n,c,consistent,row,repeats,median_it,median_cpu_seconds,speedup";

impl TableReport {
    pub fn row(&self, spec_index: usize, method: Method) -> Option<&BenchRow> {
        let spec = self.speedups.get(spec_index)?.spec;
        self.rows
            .iter()
            .find(|r| r.spec == spec && r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{TABLE_HEADER}");
        for sp in &self.speedups {
            let t = sp.spec;
            for r in self.rows.iter().filter(|r| r.spec == t) {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},",
                    t.m, t.n, t.c, t.consistent, r.method, r.repeats, r.median_it, r.median_cpu_seconds
                );
            }
            for (name, v) in [("speedup1", sp.speedup1), ("speedup2", sp.speedup2)] {
                if let Some(v) = v {
                    let _ = writeln!(s, "{},{},{},{},{name},,,,{v}", t.m, t.n, t.c, t.consistent);
                }
            }
        }
        s
    }

    /// The deterministic part of the CSV: spec, method and median IT.
    pub fn it_column(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let t = r.spec;
            let _ = writeln!(s, "{},{},{},{},{},{}", t.m, t.n, t.c, t.consistent, r.method, r.median_it);
        }
        s
    }
}

fn speedup(num: Option<&BenchRow>, den: Option<&BenchRow>) -> Option<Outcome<f64>> {
    let (num, den) = (num?, den?);
    Some(match (num.median_cpu_seconds, den.median_cpu_seconds) {
        (Outcome::Done(a), Outcome::Done(b)) if b > 0.0 => Outcome::Done(a / b),
        _ => Outcome::Dnf,
    })
}

/// Runs every method on `repeats` fresh problems per spec.
pub fn run_table(specs: &[TableSpec], cfg: &BenchConfig) -> Result<TableReport> {
    cfg.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::BadConfig("no methods selected".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..cfg.repeats).map(move |r| (s, r)))
        .collect();

    let results: Vec<Vec<RunRecord>> = jobs
        .par_iter()
        .map(|&(si, rep)| {
            let spec = specs[si];
            let child = child_seed(cfg.master_seed, si as u64, rep as u64);
            let problem = GeneratorSpec {
                m: spec.m,
                n: spec.n,
                c: spec.c,
                consistent: spec.consistent,
                seed: child,
            }
            .generate()?;
            let reference = problem.reference();
            cfg.methods
                .iter()
                .map(|&method| {
                    let rep = solvers::solve(
                        method,
                        &problem.a,
                        &problem.b,
                        None,
                        &cfg.stop,
                        &cfg.oblique,
                        &reference,
                        method_seed(child, method),
                    )?;
                    Ok(RunRecord::from_report(&rep))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut speedups = Vec::new();
    for (si, &spec) in specs.iter().enumerate() {
        let first = rows.len();
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let runs: Vec<RunRecord> = (0..cfg.repeats)
                .map(|rep| results[si * cfg.repeats + rep][mi])
                .collect();
            let its: Vec<_> = runs.iter().map(RunRecord::it).collect();
            let cpus: Vec<_> = runs.iter().map(RunRecord::cpu).collect();
            rows.push(BenchRow {
                spec,
                method,
                repeats: cfg.repeats,
                median_it: median_it(&its),
                median_cpu_seconds: median_f64(&cpus),
                runs,
            });
        }
        let find = |m: Method| rows[first..].iter().find(|r| r.method == m);
        speedups.push(SpeedupRow {
            spec,
            speedup1: speedup(find(Method::Cd), find(Method::Gso)),
            speedup2: speedup(find(Method::Rcd), find(Method::Rgso)),
        });
    }
    Ok(TableReport { rows, speedups })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c: f64,
    pub median_kappa_f_sq: f64,
    pub kappa_f_sq: Vec<f64>,
    pub median_its: Vec<(Method, Outcome<u64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub methods: Vec<Method>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("c,median_kappa_f_sq");
        for m in &self.methods {
            let _ = write!(s, ",median_it_{m}");
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{:.6e}", r.c, r.median_kappa_f_sq);
            for (_, it) in &r.median_its {
                let _ = write!(s, ",{it}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub c_grid: Vec<f64>,
    pub repeats: usize,
    pub master_seed: u64,
    pub it_cap: u64,
    /// Methods to time at each `c`; `kappa_F^2` is always computed.
    pub methods: Vec<Method>,
    pub threshold: f64,
}

impl SweepConfig {
    pub fn new(m: usize, n: usize, c_grid: Vec<f64>, repeats: usize, master_seed: u64) -> Self {
        Self {
            m,
            n,
            c_grid,
            repeats,
            master_seed,
            it_cap: 800_000,
            methods: vec![Method::Cd, Method::Rcd],
            threshold: solvers::DEFAULT_THRESHOLD,
        }
    }
}

/// `kappa_F^2` and iteration counts of consistent problems on `[c, 1)`
/// matrices across a grid of `c`.
pub fn run_sweep_c(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.repeats == 0 {
        return Err(Error::BadConfig("repeats must be at least 1".into()));
    }
    if cfg.c_grid.is_empty() {
        return Err(Error::BadConfig("empty c grid".into()));
    }
    if cfg.c_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::BadConfig("c grid must be strictly increasing".into()));
    }
    if let Some(&c) = cfg.c_grid.iter().find(|c| !(0.0..1.0).contains(*c)) {
        return Err(Error::BadInterval(c));
    }
    let stop = StopRule::rre(cfg.threshold).with_max_iters(cfg.it_cap);
    stop.validate()?;
    let oblique = ObliqueConfig::default();

    let jobs: Vec<(usize, usize)> = (0..cfg.c_grid.len())
        .flat_map(|s| (0..cfg.repeats).map(move |r| (s, r)))
        .collect();
    let results: Vec<(f64, Vec<Outcome<u64>>)> = jobs
        .par_iter()
        .map(|&(ci, rep)| {
            let child = child_seed(cfg.master_seed, ci as u64, rep as u64);
            let mut rng = solvers::solver_rng(child);
            let a = gen_uniform_matrix(cfg.m, cfg.n, cfg.c_grid[ci], &mut rng)?;
            let kappa = rate_bounds(&a, &spectral_summary(&a)?)?.kappa_f_sq;
            let problem = plant_consistent(a, &mut rng)?;
            let reference = problem.reference();
            let its = cfg
                .methods
                .iter()
                .map(|&method| {
                    let rep = solvers::solve(
                        method,
                        &problem.a,
                        &problem.b,
                        None,
                        &stop,
                        &oblique,
                        &reference,
                        method_seed(child, method),
                    )?;
                    Ok(RunRecord::from_report(&rep).it())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((kappa, its))
        })
        .collect::<Result<_>>()?;

    let rows = cfg
        .c_grid
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let chunk = &results[ci * cfg.repeats..(ci + 1) * cfg.repeats];
            let kappa_f_sq: Vec<f64> = chunk.iter().map(|(k, _)| *k).collect();
            let kappas: Vec<_> = kappa_f_sq.iter().map(|&k| Outcome::Done(k)).collect();
            let median_kappa_f_sq = median_f64(&kappas).value().unwrap_or(f64::NAN);
            let median_its = cfg
                .methods
                .iter()
                .enumerate()
                .map(|(mi, &m)| {
                    let its: Vec<_> = chunk.iter().map(|(_, v)| v[mi]).collect();
                    (m, median_it(&its))
                })
                .collect();
            SweepRow {
                c,
                median_kappa_f_sq,
                kappa_f_sq,
                median_its,
            }
        })
        .collect();
    Ok(SweepReport {
        methods: cfg.methods.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveFileOptions {
    pub method: Method,
    pub stop: StopRule,
    pub oblique: ObliqueConfig,
    pub seed: u64,
    /// Where to write the iterate; nothing is written when `None`.
    pub out: Option<PathBuf>,
}

/// Reads `A` (MatrixMarket array) and `b`, solves, and writes the iterate.
///
/// External data carries no planted structure, so only the gradient stop
/// mode is usable here.
pub fn solve_file(matrix_path: &Path, rhs_path: &Path, opts: &SolveFileOptions) -> Result<SolveReport> {
    let a = io::read_matrix_market(matrix_path)?;
    let b = io::read_vector(rhs_path, Some(a.rows()))?;
    let report = solvers::solve(
        opts.method,
        &a,
        &b,
        None,
        &opts.stop,
        &opts.oblique,
        &Reference::default(),
        opts.seed,
    )?;
    if let Some(out) = &opts.out {
        io::write_vector(out, &report.x)?;
    }
    Ok(report)
}
