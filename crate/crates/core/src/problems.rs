//! Test problems with known least-squares structure: uniform random
//! matrices on `[c, 1)`, consistent and inconsistent right-hand sides with a
//! planted solution, and three small hand-built systems with nearly parallel
//! columns.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::la::{self, check_len, DenseMatrix};
use crate::oracle;
use crate::solvers::Reference;

/// Largest `f64` strictly below one.
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

const MAX_NULL_DRAWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Consistent,
    Inconsistent,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresProblem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    /// A known least-squares solution.
    pub x_planted: Option<Vec<f64>>,
    /// Component of `b` in `null(A^T)`; zero for consistent problems.
    pub b_null: Option<Vec<f64>>,
    pub kind: ProblemKind,
}

impl LeastSquaresProblem {
    /// A problem with unknown structure, e.g. read from files.
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        check_len("right-hand side", a.rows(), b.len())?;
        Ok(Self {
            a,
            b,
            x_planted: None,
            b_null: None,
            kind: ProblemKind::Unknown,
        })
    }

    /// `b = A x + b_null`. The caller asserts that `b_null` lies in
    /// `null(A^T)`; a zero `b_null` marks the problem consistent.
    pub fn with_planted(a: DenseMatrix, x: Vec<f64>, b_null: Vec<f64>) -> Result<Self> {
        check_len("planted solution", a.cols(), x.len())?;
        check_len("null-space component", a.rows(), b_null.len())?;
        let mut b = a.matvec(&x)?;
        la::axpy(1.0, &b_null, &mut b);
        let kind = if b_null.iter().all(|&v| v == 0.0) {
            ProblemKind::Consistent
        } else {
            ProblemKind::Inconsistent
        };
        Ok(Self {
            a,
            b,
            x_planted: Some(x),
            b_null: Some(b_null),
            kind,
        })
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn reference(&self) -> Reference<'_> {
        Reference {
            b_null: self.b_null.as_deref(),
            x_star: self.x_planted.as_deref(),
        }
    }
}

/// Entries i.i.d. uniform on `[c, 1)`, drawn in column-major order.
pub fn gen_uniform_matrix<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    c: f64,
    rng: &mut R,
) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::BadInterval(c));
    }
    let width = 1.0 - c;
    let data = (0..m * n)
        .map(|_| (c + width * rng.gen::<f64>()).min(ONE_MINUS_ULP))
        .collect();
    DenseMatrix::from_col_major(m, n, data)
}

/// Plants `x ~ U[0,1)^n` and sets `b = A x`.
pub fn plant_consistent<R: Rng + ?Sized>(a: DenseMatrix, rng: &mut R) -> Result<LeastSquaresProblem> {
    let x: Vec<f64> = (0..a.cols()).map(|_| rng.gen()).collect();
    let zeros = vec![0.0; a.rows()];
    LeastSquaresProblem::with_planted(a, x, zeros)
}

/// Plants `x ~ U[0,1)^n` and adds the `null(A^T)` projection of a uniform
/// draw `z ~ U[0,1)^m`.
pub fn plant_inconsistent<R: Rng + ?Sized>(
    a: DenseMatrix,
    rng: &mut R,
) -> Result<LeastSquaresProblem> {
    plant_inconsistent_scaled(a, rng, 1.0)
}

/// As [`plant_inconsistent`], with the null-space component multiplied by
/// `scale`.
pub fn plant_inconsistent_scaled<R: Rng + ?Sized>(
    a: DenseMatrix,
    rng: &mut R,
    scale: f64,
) -> Result<LeastSquaresProblem> {
    let x: Vec<f64> = (0..a.cols()).map(|_| rng.gen()).collect();
    let qr = oracle::PivotedQr::new(&a);
    for _ in 0..MAX_NULL_DRAWS {
        let z: Vec<f64> = (0..a.rows()).map(|_| rng.gen()).collect();
        let w = qr.solve_min_norm(&z);
        let az = a.matvec(&w)?;
        let b_null: Vec<f64> = z.iter().zip(&az).map(|(zi, pi)| scale * (zi - pi)).collect();
        if la::norm(&b_null) > 1e-10 * scale.abs() * la::norm(&z) {
            return LeastSquaresProblem::with_planted(a, x, b_null);
        }
    }
    Err(Error::NullSpaceEmpty)
}

/// Recipe for a seeded random problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub consistent: bool,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<LeastSquaresProblem> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let a = gen_uniform_matrix(self.m, self.n, self.c, &mut rng)?;
        if self.consistent {
            plant_consistent(a, &mut rng)
        } else {
            plant_inconsistent(a, &mut rng)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Square, consistent: `5x1 + 45x2 = 50`, `9x1 + 80x2 = 89`.
    Square,
    /// Overdetermined, consistent.
    Overdetermined,
    /// Overdetermined, inconsistent; `(1, 1)` is the least-squares solution.
    Inconsistent,
}

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::Square, Fixture::Overdetermined, Fixture::Inconsistent];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Square => "square",
            Fixture::Overdetermined => "overdetermined",
            Fixture::Inconsistent => "inconsistent",
        }
    }

    pub fn problem(self) -> LeastSquaresProblem {
        let (rows, b_null): (&[[f64; 2]], Vec<f64>) = match self {
            Fixture::Square => (&[[5.0, 45.0], [9.0, 80.0]], vec![0.0; 2]),
            Fixture::Overdetermined => (&[[1.0, 11.0], [-2.0, -21.0], [3.0, 32.0]], vec![0.0; 3]),
            Fixture::Inconsistent => (
                &[[1.0, 9.0], [4.0, 36.0], [13.0, 118.0]],
                vec![-10.0, 2.5, 0.0],
            ),
        };
        let a = DenseMatrix::from_rows(rows).expect("fixture matrix is valid");
        LeastSquaresProblem::with_planted(a, vec![1.0, 1.0], b_null)
            .expect("fixture dimensions agree")
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFixture(s.to_string()))
    }
}

pub fn fixture(name: &str) -> Result<LeastSquaresProblem> {
    Ok(name.parse::<Fixture>()?.problem())
}
