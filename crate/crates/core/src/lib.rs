//! Primal-dual infeasible interior-point solver for linear programs in
//! standard form, with an ellipsoidal arc-search step and Mehrotra's
//! predictor-corrector line step sharing one kernel.

pub mod arc_search;
pub mod driver;
pub mod ipm_kernel;
pub mod mehrotra_search;
pub mod model;
pub mod mps;
pub mod normal_eq;
pub mod presolve;
pub mod sparse;
pub mod strategy;
pub(crate) mod vecops;

pub use arc_search::ArcSearch;
pub use driver::{compare, solve, DriverError, SolveResult};
pub use ipm_kernel::{DepRows, SolverConfig, TerminationStatus};
pub use mehrotra_search::MehrotraSearch;
pub use model::{
    duality_measure, objective_value, residuals, Direction, DirectionOrder, Iterate, ModelError,
    Residuals, StandardFormLP,
};
pub use mps::{parse_mps, parse_mps_file, to_standard_form, MpsError, RawLP};
pub use presolve::{
    postsolve, presolve, PostsolveStack, PresolveError, PresolveRule, Reduction, RuleSet,
};
pub use sparse::CscMatrix;
pub use strategy::{SearchStrategy, StrategyRegistry};
