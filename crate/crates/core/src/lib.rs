//! Exact solvers for the Flying Sidekick TSP restricted to a given
//! Hamiltonian cycle (h-FSTSP): one truck and one drone, each drone sortie
//! serving a single customer between two truck stops.
//!
//! * [`model`]: instances, cost tables, operations, solutions and their costs.
//! * [`instancegen`]: seeded uniform / one-center / two-center generators and
//!   the instance file format.
//! * [`tour`]: nearest-neighbor, 2-opt and MST double-tree initial cycles.
//! * [`split`]: the full split solver and the lazy solver that skips triples
//!   dominated by a fast drone operation.
//! * [`oracle`]: exhaustive reference solvers for small `n`.
//! * [`bench`]: experiment harness, CSV rows and summary statistics.

pub mod bench;
pub mod formats;
pub mod instancegen;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod split;
pub mod tour;

pub use model::{
    approx_eq, build_cost_model, operation_time, solution_time, truck_path_time, validate_respects, CostModel,
    Cycle, GeneratorKind, Instance, InstanceMeta, ModelError, Operation, Point, RespectReport, Solution, Sortie,
};
pub use solver::{SolveError, SolverKind};
pub use split::{split_algorithm, split_lazy, OpArc, OpGraph, Repr, RunStats, SplitError};
pub use tour::TourMethod;
