//! Shared test helpers: nalgebra-based least-squares and singular-value
//! oracles that are independent of the crate's own QR, and a step-by-step walker that replays
//! each method's index schedule through the public step functions.
#![allow(dead_code)]

use gso_core::solvers::{cd_step, oblique_step, ObliqueConfig, SolverState, StepOutcome};
use gso_core::{DenseMatrix, LeastSquaresProblem, Method};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.data())
}

/// Least-squares solution of a full-column-rank system from nalgebra's
/// Householder QR, with one step of iterative refinement.
pub fn reference_lsq(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let m = to_na(a);
    assert!(a.rows() >= a.cols(), "oracle needs a tall matrix");
    let qr = m.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let solve = |rhs: &DVector<f64>| -> DVector<f64> {
        r.solve_upper_triangular(&(q.transpose() * rhs))
            .expect("full column rank")
    };
    let bv = DVector::from_column_slice(b);
    let mut x = solve(&bv);
    // refine on the normal equations: x += (R^T R)^{-1} A^T (b - A x)
    let g = m.transpose() * (&bv - &m * &x);
    let y = r.transpose().solve_lower_triangular(&g).expect("full column rank");
    x += r.solve_upper_triangular(&y).expect("full column rank");
    x.as_slice().to_vec()
}

/// Minimum-norm least-squares solution via nalgebra's SVD; handles wide
/// and rank-deficient matrices, at somewhat lower accuracy than the QR path.
pub fn svd_min_norm(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let svd = to_na(a).svd(true, true);
    let tol = svd.singular_values.max() * (a.rows().max(a.cols()) as f64) * f64::EPSILON;
    svd.solve(&DVector::from_column_slice(b), tol)
        .expect("svd has both factors")
        .as_slice()
        .to_vec()
}

/// Smallest and largest singular values via the SVD of `A` itself.
pub fn svd_extremes(a: &DenseMatrix) -> (f64, f64) {
    let s = to_na(a).singular_values();
    (s.min(), s.max())
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `A (x - x_ref)`.
pub fn error_image(a: &DenseMatrix, x: &[f64], x_ref: &[f64]) -> Vec<f64> {
    a.matvec(&sub(x, x_ref)).unwrap()
}

pub fn delta(a: &DenseMatrix, x: &[f64], x_ref: &[f64]) -> f64 {
    let e = error_image(a, x, x_ref);
    dot(&e, &e)
}

/// One step of a trajectory: the state before it, which rule was applied
/// and what it reported.
pub struct Step {
    pub before: SolverState,
    pub kind: StepKind,
    pub outcome: StepOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepKind {
    Cd(usize),
    Oblique { prev: usize, next: usize },
}

/// Next step of `method` from `state`, using `rng` for the randomized ones.
pub fn next_kind<R: Rng>(method: Method, state: &SolverState, n: usize, rng: &mut R) -> StepKind {
    let k = state.k as usize;
    match method {
        Method::Cd => StepKind::Cd(k % n),
        Method::Rcd => StepKind::Cd(rng.gen_range(0..n)),
        Method::Gso => match state.i_prev {
            None => StepKind::Cd(0),
            Some(_) if n == 1 => StepKind::Cd(0),
            Some(prev) => StepKind::Oblique { prev, next: k % n },
        },
        Method::Rgso => match state.i_prev {
            None => StepKind::Cd(rng.gen_range(0..n)),
            Some(p) if n == 1 => StepKind::Cd(p),
            Some(prev) => {
                let excluded = |j: usize| j == prev || (n > 2 && state.i_prev2 == Some(j));
                let next = loop {
                    let j = rng.gen_range(0..n);
                    if !excluded(j) {
                        break j;
                    }
                };
                StepKind::Oblique { prev, next }
            }
        },
    }
}

pub fn apply(state: &mut SolverState, a: &DenseMatrix, kind: StepKind, cfg: &ObliqueConfig) -> StepOutcome {
    match kind {
        StepKind::Cd(i) => cd_step(state, a, i).unwrap(),
        StepKind::Oblique { prev, next } => oblique_step(state, a, prev, next, cfg).unwrap(),
    }
}

/// Walks `steps` steps of `method` from `x0`.
pub fn walk<R: Rng>(
    method: Method,
    p: &LeastSquaresProblem,
    x0: &[f64],
    steps: usize,
    rng: &mut R,
) -> Vec<Step> {
    let cfg = ObliqueConfig::default();
    let n = p.cols();
    let mut state = SolverState::new(&p.a, &p.b, x0).unwrap();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let kind = next_kind(method, &state, n, rng);
        let before = state.clone();
        let outcome = apply(&mut state, &p.a, kind, &cfg);
        out.push(Step { before, kind, outcome });
    }
    out
}

/// Random problem for the invariant suite: `m <= 50`, `n <= 10`, entries
/// uniform on `[c, 1)`, consistent or not.
pub fn random_problem<R: Rng>(rng: &mut R) -> LeastSquaresProblem {
    use gso_core::problems::{gen_uniform_matrix, plant_consistent, plant_inconsistent};
    let n = rng.gen_range(1..=10);
    let consistent = rng.gen_bool(0.5);
    let min_m = if consistent { n } else { n + 1 };
    let m = rng.gen_range(min_m..=50);
    let c = [0.0, 0.0, 0.5, 0.9][rng.gen_range(0..4)];
    let a = gen_uniform_matrix(m, n, c, rng).unwrap();
    if consistent {
        plant_consistent(a, rng).unwrap()
    } else {
        plant_inconsistent(a, rng).unwrap()
    }
}

/// Checks every per-step invariant along a walk of `method`. The reference
/// solution comes from the SVD oracle, not from the planted one.
pub fn check_trajectory<R: Rng>(
    method: Method,
    p: &LeastSquaresProblem,
    x0: &[f64],
    steps: usize,
    rng: &mut R,
) -> Result<(), String> {
    let a = &p.a;
    let cfg = ObliqueConfig::default();
    let x_ref = reference_lsq(a, &p.b);
    let r0 = norm(&SolverState::new(a, &p.b, x0).unwrap().r);
    let col_norm = |j: usize| a.column_norm_sq(j).sqrt();
    let max_col = (0..a.cols()).map(col_norm).fold(0.0, f64::max);
    let frob = a.frobenius_norm_sq().sqrt();
    let b_norm = norm(&p.b);
    let delta0 = delta(a, x0, &x_ref);
    // Forming A(x - x~) costs about eps * ||A|| * ||x|| in every entry, so a
    // decrease far below the starting error cannot be measured to eight
    // relative digits. Steps below 1e-6 * delta0 are held to an absolute
    // 1e-14 * delta0 instead.
    let floor = 1e-6 * delta0;

    let walk = walk(method, p, x0, steps, rng);
    for (t, step) in walk.iter().enumerate() {
        let mut after = step.before.clone();
        apply(&mut after, a, step.kind, &cfg);
        let ctx = |what: &str| format!("{method} step {t} {:?}: {what}", step.kind);

        // residual recurrence
        let true_r = a.residual(&p.b, &after.x).unwrap();
        let drift = norm(&sub(&after.r, &true_r));
        if drift > 1e-10 * (b_norm + frob * norm(&after.x)) {
            return Err(ctx(&format!("residual drift {drift:e}")));
        }

        let d_before = delta(a, &step.before.x, &x_ref);
        let d_after = delta(a, &after.x, &x_ref);
        // monotone non-increase
        if d_after > d_before + 1e-12 * delta0 {
            return Err(ctx(&format!("delta grew {d_before:e} -> {d_after:e}")));
        }
        if !step.outcome.applied {
            continue;
        }
        // exact decrease, computed without cancellation as
        // <A(x_b - x_a), A(x_b - x~) + A(x_a - x~)>
        let e_b = error_image(a, &step.before.x, &x_ref);
        let e_a = error_image(a, &after.x, &x_ref);
        let dx = a.matvec(&sub(&step.before.x, &after.x)).unwrap();
        let sum: Vec<f64> = e_b.iter().zip(&e_a).map(|(p, q)| p + q).collect();
        let lhs = dot(&dx, &sum);

        let (j, predicted) = match step.kind {
            StepKind::Cd(i) => {
                let num = dot(a.column(i), &step.before.r);
                (i, num * num / a.column_norm_sq(i))
            }
            StepKind::Oblique { prev, next } => {
                let np = a.column_norm_sq(prev);
                let gram = dot(a.column(prev), a.column(next));
                // squared norm of A_next with its A_prev component removed
                let ratio = gram / np;
                let proj: Vec<f64> = a
                    .column(next)
                    .iter()
                    .zip(a.column(prev))
                    .map(|(q, p)| q - ratio * p)
                    .collect();
                let g = dot(&proj, &proj);
                let num = dot(a.column(next), &step.before.r);
                // two-index orthogonality
                let ortho_prev = dot(a.column(prev), &after.r).abs();
                if ortho_prev > 1e-10 * max_col * r0 {
                    return Err(ctx(&format!("<A_prev, r> = {ortho_prev:e}")));
                }
                let ortho_next = dot(a.column(next), &after.r).abs();
                if ortho_next > 1e-10 * max_col * r0 {
                    return Err(ctx(&format!("<A_next, r> = {ortho_next:e}")));
                }
                // dominance over the coordinate step on the same state
                let mut cd_state = step.before.clone();
                cd_step(&mut cd_state, a, next).unwrap();
                let d_cd = delta(a, &cd_state.x, &x_ref);
                if d_after > d_cd + 1e-12 * delta0 {
                    return Err(ctx(&format!("oblique {d_after:e} worse than cd {d_cd:e}")));
                }
                (next, num * num / g)
            }
        };
        let ortho = dot(a.column(j), &after.r).abs();
        if ortho > 1e-10 * col_norm(j) * r0 {
            return Err(ctx(&format!("<A_j, r> = {ortho:e}")));
        }
        if (lhs - predicted).abs() > 1e-8 * predicted.max(floor) {
            return Err(ctx(&format!("decrease {lhs:e} vs predicted {predicted:e}")));
        }
    }
    Ok(())
}
