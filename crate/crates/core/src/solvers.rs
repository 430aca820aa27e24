//! Cyclic and randomized coordinate descent (CD, RCD) and the Gauss-Seidel
//! method with oblique direction in its cyclic and randomized forms
//! (GSO, RGSO).
//!
//! All four methods keep the residual `r = b - A x` up to date by recurrence
//! and touch at most two columns of `A` per step. The oblique step moves
//! along `d = e_next - (<A_next, A_prev>/||A_prev||^2) e_prev`, which keeps
//! the residual orthogonal to both `A_prev` and `A_next` afterwards, provided
//! it was orthogonal to `A_prev` before. That is why GSO and RGSO open with a
//! plain coordinate step.
//!
//! Randomized drivers take any [`rand::Rng`]. The benchmark harness and the
//! [`solve`] convenience entry use [`SolverRng`] (ChaCha8 seeded through
//! `seed_from_u64`), whose output stream is fixed across platforms. Column
//! indices are drawn with `gen_range` on `u64`, which is rejection-sampled and
//! therefore free of modulo bias.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::la::{self, check_finite, check_len, DenseMatrix};

/// Random stream used by the randomized methods in the harness.
pub type SolverRng = ChaCha8Rng;

pub fn solver_rng(seed: u64) -> SolverRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const DEFAULT_THRESHOLD: f64 = 0.5e-6;
pub const DEFAULT_MAX_ITERS: u64 = 500_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopMode {
    /// `||b_null - r||^2 / ||b||^2 < threshold`; needs the null-space part of `b`.
    ResidualRelativeError,
    /// `||A^T r|| <= threshold * ||A^T b||`; needs no metadata.
    GradientRelative,
    /// `||x - x*||^2 / ||x*||^2 <= threshold`; needs the reference solution.
    SolutionError,
}

impl FromStr for StopMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rre" | "residual" => Ok(StopMode::ResidualRelativeError),
            "gradient" | "grad" => Ok(StopMode::GradientRelative),
            "solution" | "solution-error" => Ok(StopMode::SolutionError),
            _ => Err(Error::InvalidStopRule("unknown stop mode")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub mode: StopMode,
    pub threshold: f64,
    pub max_iters: u64,
    pub check_every: u64,
    /// Record `(iteration, metric)` at every check.
    pub record_trace: bool,
}

impl Default for StopRule {
    fn default() -> Self {
        Self::rre(DEFAULT_THRESHOLD)
    }
}

impl StopRule {
    pub fn rre(threshold: f64) -> Self {
        Self {
            mode: StopMode::ResidualRelativeError,
            threshold,
            max_iters: DEFAULT_MAX_ITERS,
            check_every: 1,
            record_trace: false,
        }
    }

    pub fn solution_error(threshold: f64) -> Self {
        Self {
            mode: StopMode::SolutionError,
            ..Self::rre(threshold)
        }
    }

    /// Gradient rule checked once per sweep of `n` columns.
    pub fn gradient(threshold: f64, n: usize) -> Self {
        Self {
            mode: StopMode::GradientRelative,
            check_every: n.max(1) as u64,
            ..Self::rre(threshold)
        }
    }

    pub fn with_max_iters(mut self, max_iters: u64) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_check_every(mut self, check_every: u64) -> Self {
        self.check_every = check_every;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold >= 0.0) {
            return Err(Error::InvalidStopRule("threshold must be nonnegative"));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidStopRule("max_iters must be at least 1"));
        }
        if self.check_every == 0 {
            return Err(Error::InvalidStopRule("check_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipMode {
    /// Skip when `g <= epsilon`.
    Absolute,
    /// Skip when `g <= epsilon * ||A_next||^2`.
    RelativeToNormSq,
}

/// Guard against (near-)parallel column pairs in the oblique step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObliqueConfig {
    pub skip_mode: SkipMode,
    pub epsilon: f64,
}

impl Default for ObliqueConfig {
    fn default() -> Self {
        Self {
            skip_mode: SkipMode::RelativeToNormSq,
            epsilon: 1e-12,
        }
    }
}

impl ObliqueConfig {
    pub fn absolute(epsilon: f64) -> Self {
        Self {
            skip_mode: SkipMode::Absolute,
            epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_finite() && self.epsilon >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidEpsilon)
        }
    }

    #[inline]
    fn threshold(&self, norm_sq_next: f64) -> f64 {
        match self.skip_mode {
            SkipMode::Absolute => self.epsilon,
            SkipMode::RelativeToNormSq => self.epsilon * norm_sq_next,
        }
    }
}

/// Known structure of the problem that some stop modes need.
#[derive(Debug, Clone, Copy, Default)]
pub struct Reference<'a> {
    /// Component of `b` in `null(A^T)`.
    pub b_null: Option<&'a [f64]>,
    /// A least-squares solution to measure the iterate against.
    pub x_star: Option<&'a [f64]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: Vec<f64>,
    /// Residual `b - A x`, maintained by recurrence.
    pub r: Vec<f64>,
    /// Steps taken, skipped ones included.
    pub k: u64,
    /// Column touched last (`i_k`).
    pub i_prev: Option<usize>,
    /// Column touched before that (`i_{k-1}`).
    pub i_prev2: Option<usize>,
    pub updates_applied: u64,
    pub skips: u64,
}

impl SolverState {
    pub fn new(a: &DenseMatrix, b: &[f64], x0: &[f64]) -> Result<Self> {
        check_len("right-hand side", a.rows(), b.len())?;
        check_len("initial guess", a.cols(), x0.len())?;
        check_finite("right-hand side", b)?;
        check_finite("initial guess", x0)?;
        Ok(Self {
            x: x0.to_vec(),
            r: a.residual(b, x0)?,
            k: 0,
            i_prev: None,
            i_prev2: None,
            updates_applied: 0,
            skips: 0,
        })
    }

    fn check_conforms(&self, a: &DenseMatrix) -> Result<()> {
        check_len("state iterate", a.cols(), self.x.len())?;
        check_len("state residual", a.rows(), self.r.len())
    }

    #[inline]
    fn advance(&mut self, i: usize) {
        self.k += 1;
        self.i_prev2 = self.i_prev;
        self.i_prev = Some(i);
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub applied: bool,
    /// Coefficient on the newly selected column.
    pub alpha: f64,
    /// Coefficient on the previous column (zero for coordinate steps).
    pub beta: f64,
    /// Predicted drop of `||A(x - x~)||^2`: `<A_next, r>^2 / denominator`.
    pub decrease: f64,
}

impl StepOutcome {
    const SKIPPED: Self = Self {
        applied: false,
        alpha: 0.0,
        beta: 0.0,
        decrease: 0.0,
    };
}

/// Exact line search along `e_i`.
pub fn cd_step(state: &mut SolverState, a: &DenseMatrix, i: usize) -> Result<StepOutcome> {
    state.check_conforms(a)?;
    a.check_index(i)?;
    if a.column_norm_sq(i) == 0.0 {
        return Err(Error::ZeroColumn(i));
    }
    Ok(cd_update(state, a, i))
}

/// Exact line search along the oblique direction built from `i_prev` and
/// `i_next`, or a skip when the pair is numerically parallel.
///
/// Assumes `<A_prev, r> = 0`, which the previous step establishes.
pub fn oblique_step(
    state: &mut SolverState,
    a: &DenseMatrix,
    i_prev: usize,
    i_next: usize,
    cfg: &ObliqueConfig,
) -> Result<StepOutcome> {
    state.check_conforms(a)?;
    a.check_index(i_prev)?;
    a.check_index(i_next)?;
    if i_prev == i_next {
        return Err(Error::SameIndex(i_next));
    }
    for j in [i_prev, i_next] {
        if a.column_norm_sq(j) == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
    }
    Ok(oblique_update(state, a, i_prev, i_next, cfg))
}

#[inline]
fn cd_update(state: &mut SolverState, a: &DenseMatrix, i: usize) -> StepOutcome {
    let col = a.column(i);
    let nrm = a.column_norm_sq(i);
    let num = la::dot(col, &state.r);
    let alpha = num / nrm;
    state.x[i] += alpha;
    la::axpy(-alpha, col, &mut state.r);
    state.updates_applied += 1;
    state.advance(i);
    StepOutcome {
        applied: true,
        alpha,
        beta: 0.0,
        decrease: num * num / nrm,
    }
}

/// `a*b - c*d` with one rounding error (Kahan's fma scheme). `g` is a
/// difference of nearly equal products when the two columns are close to
/// parallel, which is exactly where the oblique step is most useful.
#[inline]
fn diff_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = (-c).mul_add(d, cd);
    a.mul_add(b, -cd) + err
}

#[inline]
fn oblique_update(
    state: &mut SolverState,
    a: &DenseMatrix,
    i_prev: usize,
    i_next: usize,
    cfg: &ObliqueConfig,
) -> StepOutcome {
    let prev = a.column(i_prev);
    let next = a.column(i_next);
    let n_prev = a.column_norm_sq(i_prev);
    let n_next = a.column_norm_sq(i_next);
    let gram = la::dot(prev, next);
    let g = diff_of_products(n_next, n_prev, gram, gram) / n_prev;

    let outcome = if g > cfg.threshold(n_next) {
        let num = la::dot(next, &state.r);
        let alpha = num / g;
        let beta = -gram / n_prev * alpha;
        state.x[i_next] += alpha;
        state.x[i_prev] += beta;
        for ((ri, an), ap) in state.r.iter_mut().zip(next).zip(prev) {
            *ri -= alpha * an + beta * ap;
        }
        state.updates_applied += 1;
        StepOutcome {
            applied: true,
            alpha,
            beta,
            decrease: num * num / g,
        }
    } else {
        state.skips += 1;
        StepOutcome::SKIPPED
    };
    state.advance(i_next);
    outcome
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCheck {
    pub decision: StopDecision,
    pub metric: f64,
}

/// Evaluates the stop rule on `state` from scratch.
pub fn evaluate_stop(
    state: &SolverState,
    stop: &StopRule,
    a: &DenseMatrix,
    b: &[f64],
    reference: &Reference<'_>,
) -> Result<StopCheck> {
    check_len("right-hand side", a.rows(), b.len())?;
    state.check_conforms(a)?;
    let monitor = Monitor::new(stop, a, b, reference)?;
    let metric = monitor.metric(state, a);
    Ok(StopCheck {
        decision: if monitor.converged(metric) {
            StopDecision::Converged
        } else {
            StopDecision::Continue
        },
        metric,
    })
}

/// Precomputed denominators for the stop metric.
struct Monitor<'a> {
    mode: StopMode,
    threshold: f64,
    target: &'a [f64],
    scale: f64,
}

impl<'a> Monitor<'a> {
    fn new(
        stop: &StopRule,
        a: &DenseMatrix,
        b: &[f64],
        reference: &Reference<'a>,
    ) -> Result<Self> {
        let (target, scale) = match stop.mode {
            StopMode::ResidualRelativeError => {
                let b_null = reference
                    .b_null
                    .ok_or(Error::MissingMetadata("the null-space component of b"))?;
                check_len("null-space component", a.rows(), b_null.len())?;
                let bb = la::norm_sq(b);
                if bb == 0.0 {
                    return Err(Error::ZeroRhs);
                }
                (b_null, bb)
            }
            StopMode::SolutionError => {
                let x_star = reference
                    .x_star
                    .ok_or(Error::MissingMetadata("a reference solution"))?;
                check_len("reference solution", a.cols(), x_star.len())?;
                let xx = la::norm_sq(x_star);
                if xx == 0.0 {
                    return Err(Error::ZeroReference);
                }
                (x_star, xx)
            }
            StopMode::GradientRelative => (&[][..], la::norm(&a.matvec_transpose(b)?)),
        };
        Ok(Self {
            mode: stop.mode,
            threshold: stop.threshold,
            target,
            scale,
        })
    }

    #[inline]
    fn metric(&self, state: &SolverState, a: &DenseMatrix) -> f64 {
        match self.mode {
            StopMode::ResidualRelativeError => la::dist_sq(self.target, &state.r) / self.scale,
            StopMode::SolutionError => la::dist_sq(&state.x, self.target) / self.scale,
            StopMode::GradientRelative => {
                let g: f64 = (0..a.cols())
                    .map(|j| {
                        let v = a.col_dot(j, &state.r);
                        v * v
                    })
                    .sum();
                g.sqrt()
            }
        }
    }

    #[inline]
    fn converged(&self, metric: f64) -> bool {
        match self.mode {
            StopMode::ResidualRelativeError => metric < self.threshold,
            StopMode::SolutionError => metric <= self.threshold,
            StopMode::GradientRelative => metric <= self.threshold * self.scale,
        }
    }

    /// Metric as reported: the gradient mode reports the relative gradient.
    fn reported(&self, metric: f64) -> f64 {
        match self.mode {
            StopMode::GradientRelative if self.scale > 0.0 => metric / self.scale,
            _ => metric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    /// Steps taken at exit, skipped oblique steps and the initial
    /// coordinate step of GSO/RGSO included.
    pub iterations: u64,
    pub updates_applied: u64,
    pub skips: u64,
    pub termination: Termination,
    /// Stop metric at the last check (relative gradient in gradient mode).
    pub final_metric: f64,
    pub elapsed_seconds: f64,
    pub trace: Option<Vec<(u64, f64)>>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// The report with wall-clock time zeroed, for comparing runs.
    pub fn without_timing(mut self) -> Self {
        self.elapsed_seconds = 0.0;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Cd,
    Rcd,
    Gso,
    Rgso,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Cd, Method::Gso, Method::Rcd, Method::Rgso];

    pub fn is_randomized(self) -> bool {
        matches!(self, Method::Rcd | Method::Rgso)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Cd => "CD",
            Method::Rcd => "RCD",
            Method::Gso => "GSO",
            Method::Rgso => "RGSO",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cd" => Ok(Method::Cd),
            "rcd" => Ok(Method::Rcd),
            "gso" => Ok(Method::Gso),
            "rgso" => Ok(Method::Rgso),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Runs `method` from `x0` (zeros when `None`), seeding the random stream of
/// the randomized methods with `seed`.
#[allow(clippy::too_many_arguments)]
pub fn solve(
    method: Method,
    a: &DenseMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    stop: &StopRule,
    cfg: &ObliqueConfig,
    reference: &Reference<'_>,
    seed: u64,
) -> Result<SolveReport> {
    let zeros;
    let x0 = match x0 {
        Some(x0) => x0,
        None => {
            zeros = vec![0.0; a.cols()];
            &zeros
        }
    };
    match method {
        Method::Cd => solve_cd(a, b, x0, stop, reference),
        Method::Gso => solve_gso(a, b, x0, stop, cfg, reference),
        Method::Rcd => solve_rcd(a, b, x0, stop, reference, &mut solver_rng(seed)),
        Method::Rgso => solve_rgso(a, b, x0, stop, cfg, reference, &mut solver_rng(seed)),
    }
}

/// Cyclic coordinate descent: column `k mod n` at step `k`.
pub fn solve_cd(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    stop: &StopRule,
    reference: &Reference<'_>,
) -> Result<SolveReport> {
    a.column_norms_sq()?;
    let n = a.cols() as u64;
    drive(a, b, x0, stop, reference, |s| {
        let i = (s.k % n) as usize;
        cd_update(s, a, i);
    })
}

/// Coordinate descent with columns drawn uniformly from all `n`.
pub fn solve_rcd<R: Rng + ?Sized>(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    stop: &StopRule,
    reference: &Reference<'_>,
    rng: &mut R,
) -> Result<SolveReport> {
    a.column_norms_sq()?;
    let n = a.cols() as u64;
    drive(a, b, x0, stop, reference, |s| {
        let i = rng.gen_range(0..n) as usize;
        cd_update(s, a, i);
    })
}

/// Cyclic oblique Gauss-Seidel: a coordinate step on column 0, then oblique
/// steps on the pairs `(k-1 mod n, k mod n)`.
pub fn solve_gso(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    stop: &StopRule,
    cfg: &ObliqueConfig,
    reference: &Reference<'_>,
) -> Result<SolveReport> {
    a.column_norms_sq()?;
    cfg.validate()?;
    let n = a.cols();
    if n < 2 {
        return Err(Error::TooFewColumns { needed: 2, cols: n });
    }
    drive(a, b, x0, stop, reference, |s| match s.i_prev {
        None => {
            cd_update(s, a, 0);
        }
        Some(prev) => {
            let next = (s.k % n as u64) as usize;
            oblique_update(s, a, prev, next, cfg);
        }
    })
}

/// Randomized oblique Gauss-Seidel.
///
/// The first step is a coordinate step on a uniform column, the second an
/// oblique step onto a uniform different column. Afterwards the next column
/// is uniform over all columns except the last two touched. With two columns
/// only the last one is excluded; with a single column every step is a
/// coordinate step.
pub fn solve_rgso<R: Rng + ?Sized>(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    stop: &StopRule,
    cfg: &ObliqueConfig,
    reference: &Reference<'_>,
    rng: &mut R,
) -> Result<SolveReport> {
    a.column_norms_sq()?;
    cfg.validate()?;
    let n = a.cols();
    drive(a, b, x0, stop, reference, |s| match (s.i_prev, s.i_prev2) {
        _ if n == 1 => {
            cd_update(s, a, 0);
        }
        (None, _) => {
            let i = rng.gen_range(0..n as u64) as usize;
            cd_update(s, a, i);
        }
        (Some(prev), prev2) => {
            let exclude2 = prev2.filter(|&p| p != prev && n > 2);
            let next = draw_excluding(rng, n, prev, exclude2);
            oblique_update(s, a, prev, next, cfg);
        }
    })
}

/// Uniform draw from `0..n` minus `{e1, e2}`.
fn draw_excluding<R: Rng + ?Sized>(rng: &mut R, n: usize, e1: usize, e2: Option<usize>) -> usize {
    let (lo, hi) = match e2 {
        Some(e2) => (e1.min(e2), Some(e1.max(e2))),
        None => (e1, None),
    };
    let excluded = 1 + hi.is_some() as usize;
    let mut j = rng.gen_range(0..(n - excluded) as u64) as usize;
    if j >= lo {
        j += 1;
    }
    if let Some(hi) = hi {
        if j >= hi {
            j += 1;
        }
    }
    j
}

fn drive<F>(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    stop: &StopRule,
    reference: &Reference<'_>,
    mut step: F,
) -> Result<SolveReport>
where
    F: FnMut(&mut SolverState),
{
    stop.validate()?;
    let start = Instant::now();
    let mut state = SolverState::new(a, b, x0)?;
    let monitor = Monitor::new(stop, a, b, reference)?;
    let mut trace = stop.record_trace.then(Vec::new);

    let mut metric = monitor.metric(&state, a);
    if let Some(t) = trace.as_mut() {
        t.push((0, monitor.reported(metric)));
    }
    let mut termination = if monitor.converged(metric) {
        Termination::Converged
    } else {
        Termination::MaxIters
    };

    while termination != Termination::Converged && state.k < stop.max_iters {
        step(&mut state);
        if state.k % stop.check_every == 0 || state.k == stop.max_iters {
            metric = monitor.metric(&state, a);
            if let Some(t) = trace.as_mut() {
                t.push((state.k, monitor.reported(metric)));
            }
            if monitor.converged(metric) {
                termination = Termination::Converged;
            }
        }
    }

    let elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        iterations: state.k,
        updates_applied: state.updates_applied,
        skips: state.skips,
        termination,
        final_metric: monitor.reported(metric),
        elapsed_seconds,
        trace,
        x: state.x,
        r: state.r,
    })
}
