//! Propositional semantics: Boolean configurations and the translation of
//! models into propositional formulas.

mod bexpr;
mod bounds;
mod formula;
mod rewrite;

pub use bexpr::{
    choose, eval_p, parse_prop_config, prop_config_to_tsv, BinOp, BoolExpr, ChooseError, PropConfig, PropEvalError,
};
pub use bounds::{bounds, Bounds};
pub use formula::{
    build_formula, build_formula_with, enumerate_prop, project, validate_prop, validate_prop_with, Constraint,
    FormulaError, PropFormula, Translation,
};
pub use rewrite::{impls_syntactic, rewrite};
