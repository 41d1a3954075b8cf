//! Non-negative matrix factorization with explicit sparseness constraints.
//!
//! Factorizes a non-negative `N x T` matrix `V` as `V ≈ W H` with
//! non-negative `W` (`N x M`) and `H` (`M x T`), optionally holding every
//! column of `W` and/or every row of `H` at a chosen sparseness level.
//! Sparseness is the normalized L1/L2 ratio in [`sparseness::sparseness`];
//! constraints are enforced exactly by [`projection::project_nonneg`].
//!
//! ```
//! use ndarray::array;
//! use sparse_nmf::{fit, ConstraintSpec, DataMatrix, SolverConfig};
//!
//! let v = DataMatrix::new(array![[1.0, 0.0, 2.0], [0.5, 1.0, 1.0]]).unwrap();
//! let (model, report) = fit(&v, &ConstraintSpec::unconstrained(1), &SolverConfig::default()).unwrap();
//! assert_eq!(model.components(), 1);
//! assert!(report.final_objective() <= report.initial_objective);
//! ```

pub mod bench;
pub mod cli;
pub mod error;
pub mod io;
pub mod projection;
pub mod solver;
pub mod sparseness;
mod types;

pub use error::{Error, Result};
pub use projection::{project_nonneg, project_signed, ProjectionTarget, ProjectionTrace};
pub use solver::{fit, fit_with_observer, Solver, SolverState};
pub use sparseness::{l1_for_sparseness, sparseness};
pub use types::{
    objective, reconstruct, ConstraintSpec, DataMatrix, FactorModel, FitReport, SolverConfig,
};

// The guide's code listings compile and run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sparseness.md")]
    mod sparseness {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/data-io.md")]
    mod data_io {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
}
