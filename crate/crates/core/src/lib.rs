//! Exact solver for the series-parallel redundancy allocation problem with
//! mixed components.
//!
//! Subsystem configurations are enumerated with an upper-bound
//! binary-addition-tree, then combined stage by stage while pruning with a
//! reliability lower bound, Pareto dominance on (weight, cost, reliability),
//! and suffix-minimum weight/cost bounds.
//!
//! ```
//! use rap_core::benchmark::fyffe_instance;
//! use rap_core::solver::{solve, SolverOptions};
//!
//! let report = solve(&fyffe_instance(1).unwrap(), &SolverOptions::default()).unwrap();
//! let best = report.optimal_aggregates.unwrap();
//! assert_eq!((best.weight, best.cost), (159, 110));
//! ```

pub mod benchmark;
pub mod cli;
pub mod enumeration;
pub mod model;
pub mod oracle;
pub mod pruning;
pub mod solver;

pub use model::{Aggregates, ComponentOption, CountVector, RapInstance, SolutionVector, SubsystemSpec};
pub use solver::{solve, SolveReport, SolverOptions};
