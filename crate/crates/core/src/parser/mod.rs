//! Concrete syntax: a Tcl-command subset of CDL, plus standalone goal and
//! list expression parsers.

mod cdl;
mod diag;
mod expr;
mod tcl;

use thiserror::Error;

pub use cdl::{parse_model, parse_model_named, ParseOutput, MAX_BODY_DEPTH};
pub use diag::{ParseDiagnostic, Severity, SourceSpan};
pub use expr::MAX_EXPR_DEPTH;

use crate::expr::{GoalExpr, ListExpr};
use crate::model::{normalize_model, Model, NormalizationError};

fn expr_diagnostic(text: &str, e: expr::ExprError) -> ParseDiagnostic {
    diag::SourceMap::new("<expr>", text).diagnostic(Severity::Error, e.message, e.start, e.end)
}

/// Parses one goal expression.
pub fn parse_goal_expr(text: &str) -> Result<GoalExpr, ParseDiagnostic> {
    expr::parse_goal(text).map_err(|e| expr_diagnostic(text, e))
}

/// Parses a whitespace separated list of goal expressions, as found in a
/// `requires` or `active_if` property.
pub fn parse_goal_sequence(text: &str) -> Result<Vec<GoalExpr>, ParseDiagnostic> {
    expr::parse_goal_sequence(text).map_err(|e| expr_diagnostic(text, e))
}

/// Parses a `legal_values` list.
pub fn parse_list_expr(text: &str) -> Result<ListExpr, ParseDiagnostic> {
    expr::parse_list(text).map_err(|e| expr_diagnostic(text, e))
}

#[derive(Debug, Clone, Error)]
pub enum LoadError {
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Parse(Vec<ParseDiagnostic>),
    #[error("{file}: {error}")]
    Normalize { file: String, error: NormalizationError },
}

/// Parses and normalizes a model. On success also returns the warnings.
pub fn load_model(text: &str, file: &str) -> Result<(Model, Vec<ParseDiagnostic>), LoadError> {
    let out = parse_model_named(text, file);
    if out.has_errors() {
        return Err(LoadError::Parse(out.diagnostics));
    }
    let model = normalize_model(out.nodes).map_err(|error| LoadError::Normalize {
        file: file.to_string(),
        error,
    })?;
    Ok((model, out.diagnostics))
}
