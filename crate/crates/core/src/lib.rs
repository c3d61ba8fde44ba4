//! Semantics of CDL configuration models: parsing, the full and
//! propositional semantics, and SAT-based analyses.

pub mod expr;
pub mod model;
pub mod parser;
pub mod prop;
pub mod sat;
pub mod semantics;
pub mod value;

pub use expr::{GoalExpr, ListExpr};
pub use model::{check_well_formed, FeatureId, Flavor, Kind, Model, Node, Parent, Rule, Violation};
pub use parser::{load_model, parse_model, LoadError, ParseDiagnostic};
pub use prop::{build_formula, project, validate_prop, BoolExpr, PropConfig, PropFormula, Translation};
pub use sat::{Cnf, SatResult, SatStatus};
pub use semantics::{validate_configuration, Configuration, ValidationReport, Valuation};
pub use value::DataValue;
