//! CNF conversion, a SAT solver, DIMACS text, and analyses of models.

mod analysis;
mod cnf;
mod dimacs;
mod solver;

pub use analysis::{
    core_features, dead_features, implication_graph, model_sat, solve, to_dot, transitive_reduction, Analysis,
    AnalysisError, SatResult, SatStatus,
};
pub use cnf::{exprs_to_cnf, to_cnf, Cnf, Lit};
pub use dimacs::{export_dimacs, parse_dimacs, DimacsError};
pub use solver::Solver;
