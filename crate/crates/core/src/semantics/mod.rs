//! Full semantics: configurations as (state, value, data) triples.

mod config;
mod denote;
mod enumerate;
mod eval;

pub use crate::value::to_bool;
pub use config::{ConfigError, Configuration, Valuation};
pub use denote::{
    calculated_holds, flavor_holds, impls, interface_holds, legal_values_holds, node_holds, validate_configuration,
    validate_with_policy, Failure, Family, ValidationError, ValidationReport, Verdict,
};
pub use enumerate::{
    candidate_count, default_budget, enumerate_configurations, enumerate_with_budget, OracleError, BUDGET_ENV,
    DEFAULT_BUDGET,
};
pub use eval::{
    access, arith, eval, satisfies_legal, version_cmp, BuiltinPolicy, DefaultBuiltins, EvalError, Evaluator,
};
