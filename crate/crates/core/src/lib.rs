//! Dense least-squares solvers built on column updates: cyclic and
//! randomized coordinate descent, and their Gauss-Seidel variants that
//! step along an oblique direction combining two columns.
//!
//! ```
//! use gso_core::{fixture, solve, Method, ObliqueConfig, StopRule};
//!
//! let p = fixture("square").unwrap();
//! let report = solve(
//!     Method::Gso,
//!     &p.a,
//!     &p.b,
//!     None,
//!     &StopRule::solution_error(1e-20),
//!     &ObliqueConfig::default(),
//!     &p.reference(),
//!     0,
//! )
//! .unwrap();
//! assert!(report.converged());
//! assert!((report.x[0] - 1.0).abs() < 1e-10);
//! ```

pub mod bench;
pub mod error;
pub mod io;
pub mod la;
pub mod metrics;
pub mod oracle;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use la::DenseMatrix;
pub use metrics::{rate_bounds, rgso_step_factor, rre, RateBounds};
pub use oracle::{direct_lsq, spectral_summary, PivotedQr, SpectralSummary};
pub use problems::{fixture, Fixture, GeneratorSpec, LeastSquaresProblem};
pub use solvers::{
    cd_step, oblique_step, solve, Method, ObliqueConfig, Reference, SkipMode, SolveReport,
    SolverState, StopMode, StopRule, Termination,
};
