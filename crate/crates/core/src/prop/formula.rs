//! Whole-model propositional formulas and validation of Boolean
//! configurations against them.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::bexpr::{eval_p, BinOp, BoolExpr, PropConfig};
use super::bounds::{bounds, state_upper, state_upper_self};
use super::rewrite::rewrite;
use crate::expr::{GoalExpr, ListItem};
use crate::model::{check_well_formed, FeatureId, Flavor, Model, Node, Parent, Violation};
use crate::semantics::{Configuration, Failure, Family, OracleError, ValidationError, ValidationReport};
use crate::value::{parse_number, to_bool, Number};

/// How goal expressions are turned into propositional constraints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Translation {
    /// Every configuration accepted by the full semantics projects onto a
    /// model of the formula.
    #[default]
    Sound,
    /// The rule-by-rule rewriting, dropping constraints it cannot handle.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub node: FeatureId,
    pub family: Family,
    pub expr: BoolExpr,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}] {}", self.family, self.node, self.expr)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("model is not well-formed ({} violations)", .0.len())]
    IllFormed(Vec<Violation>),
}

/// The conjunction of per-node constraints over one variable per feature
/// of the universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropFormula {
    constraints: Vec<Constraint>,
    vars: BTreeMap<FeatureId, usize>,
    translation: Translation,
}

impl PropFormula {
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Variables with their 1-based indices, in name order.
    pub fn variables(&self) -> impl Iterator<Item = (&FeatureId, usize)> {
        self.vars.iter().map(|(k, &v)| (k, v))
    }

    pub fn var_index(&self, id: &FeatureId) -> Option<usize> {
        self.vars.get(id).copied()
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn translation(&self) -> Translation {
        self.translation
    }

    pub fn conjunction(&self) -> BoolExpr {
        BoolExpr::all(self.constraints.iter().map(|c| c.expr.clone()))
    }

    /// Checks a Boolean configuration, reporting each false constraint.
    pub fn check(&self, cp: &PropConfig) -> Result<ValidationReport, ValidationError> {
        let missing: Vec<FeatureId> = self.vars.keys().filter(|v| !cp.contains_key(*v)).cloned().collect();
        if !missing.is_empty() {
            return Err(ValidationError::Incomplete(missing));
        }
        let failures = self
            .constraints
            .iter()
            .filter(|c| !eval_p(&c.expr, cp).expect("all variables are assigned"))
            .map(|c| Failure {
                node: c.node.clone(),
                family: c.family,
                explanation: format!("{} is false", c.expr),
            })
            .collect();
        Ok(ValidationReport { failures })
    }

    pub fn pretty(&self) -> String {
        self.constraints.iter().map(|c| format!("{c}\n")).collect()
    }
}

pub fn build_formula(m: &Model) -> Result<PropFormula, FormulaError> {
    build_formula_with(m, Translation::Sound)
}

pub fn build_formula_with(m: &Model, t: Translation) -> Result<PropFormula, FormulaError> {
    let violations = check_well_formed(m);
    if !violations.is_empty() {
        return Err(FormulaError::IllFormed(violations));
    }
    let mut constraints = Vec::new();
    for n in m.nodes() {
        let mut push = |family, expr| {
            constraints.push(Constraint {
                node: n.name.clone(),
                family,
                expr,
            })
        };
        match t {
            Translation::Sound => sound_node(n, m, &mut push),
            Translation::Literal => literal_node(n, m, &mut push),
        }
    }
    for x in m.unloaded() {
        constraints.push(Constraint {
            expr: BoolExpr::Not(Box::new(BoolExpr::var(&x))),
            node: x,
            family: Family::Unloaded,
        });
    }
    let vars = m
        .universe()
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id, i + 1))
        .collect();
    Ok(PropFormula {
        constraints,
        vars,
        translation: t,
    })
}

fn parent_var(p: &Parent) -> BoolExpr {
    match p {
        Parent::Root => BoolExpr::TRUE,
        Parent::Node(id) => BoolExpr::var(id),
    }
}

fn implies(a: BoolExpr, b: BoolExpr) -> BoolExpr {
    BoolExpr::binary(BinOp::Implies, a, b)
}

fn literal_node(n: &Node, m: &Model, push: &mut impl FnMut(Family, BoolExpr)) {
    let x = BoolExpr::var(&n.name);
    let ctc = BoolExpr::all(n.constraints().filter_map(|e| rewrite(e, m)));
    let guard = BoolExpr::and(parent_var(&n.parent), ctc);
    push(Family::Node, implies(x.clone(), guard.clone()));
    if n.flavor.is_mandatory() {
        push(Family::Flavor, implies(guard.clone(), x.clone()));
    }
    if let Some(r) = n.calculated.as_ref().and_then(|cl| rewrite(cl, m)) {
        push(Family::Calculated, implies(guard.clone(), BoolExpr::eqv(x.clone(), r)));
    }
    if n.is_interface() {
        let any = BoolExpr::any(m.implementors(&n.name).iter().map(BoolExpr::var));
        push(Family::Interface, implies(guard, BoolExpr::eqv(x, any)));
    }
}

/// True when the legal values of `n` rule out every falsy data value.
fn legal_values_exclude_falsy(n: &Node) -> bool {
    let Some(lv) = &n.legal_values else {
        return false;
    };
    let num = |e: &GoalExpr| match e {
        GoalExpr::Const(v) => parse_number(v.as_str()).map(|k| match k {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }),
        _ => None,
    };
    lv.items().iter().all(|item| match item {
        ListItem::Single(GoalExpr::Const(v)) => to_bool(v),
        ListItem::Single(_) => false,
        ListItem::Range(lo, hi) => match (num(lo), num(hi)) {
            (Some(lo), Some(hi)) => lo > 0.0 || hi < 0.0,
            _ => false,
        },
    })
}

fn sound_node(n: &Node, m: &Model, push: &mut impl FnMut(Family, BoolExpr)) {
    let x = BoolExpr::var(&n.name);
    let parts: Vec<_> = n.constraints().map(|e| bounds(e, m)).collect();
    let upper = BoolExpr::all(parts.iter().map(|b| b.upper.clone()));
    let lower = BoolExpr::all(parts.into_iter().map(|b| b.lower));
    push(
        Family::Node,
        implies(x.clone(), BoolExpr::and(state_upper(&n.parent, m), upper)),
    );
    let guard = BoolExpr::and(parent_var(&n.parent), lower);
    let forced = match n.flavor {
        Flavor::None => true,
        Flavor::Data => legal_values_exclude_falsy(n),
        Flavor::Bool | Flavor::BoolData => false,
    };
    if forced {
        push(Family::Flavor, implies(guard.clone(), x.clone()));
    }
    if n.flavor == Flavor::None {
        return;
    }
    if let Some(cl) = &n.calculated {
        let b = bounds(cl, m);
        let inner = BoolExpr::and(
            BoolExpr::implies(x.clone(), b.upper),
            BoolExpr::implies(b.lower, x.clone()),
        );
        push(Family::Calculated, implies(guard.clone(), inner));
    }
    if n.is_interface() {
        let impls = m.implementors(&n.name);
        let up = BoolExpr::any(impls.iter().map(|i| state_upper_self(i, m)));
        let any = BoolExpr::any(impls.iter().map(BoolExpr::var));
        let inner = BoolExpr::and(BoolExpr::implies(x.clone(), up), BoolExpr::implies(any, x));
        push(Family::Interface, implies(guard, inner));
    }
}

/// Every Boolean configuration satisfying `f`, by exhaustive search, in
/// the order of [`PropConfig`].
pub fn enumerate_prop(f: &PropFormula, budget: u64) -> Result<Vec<PropConfig>, OracleError> {
    let names: Vec<&FeatureId> = f.vars.keys().collect();
    let n = names.len() as u32;
    let candidates = 1u128.checked_shl(n).unwrap_or(u128::MAX);
    if candidates > u128::from(budget) {
        return Err(OracleError::TooLarge { candidates, budget });
    }
    let mut found: Vec<PropConfig> = (0..candidates as u64)
        .into_par_iter()
        .filter_map(|bits| {
            let cp: PropConfig = names
                .iter()
                .enumerate()
                .map(|(i, &id)| (id.clone(), bits >> i & 1 == 1))
                .collect();
            f.constraints
                .iter()
                .all(|c| eval_p(&c.expr, &cp).expect("all variables are assigned"))
                .then_some(cp)
        })
        .collect();
    found.sort();
    Ok(found)
}

/// The Boolean view of a configuration: a feature is true when it is
/// enabled and, unless its data is fixed, its data is truthy.
pub fn project(c: &Configuration, m: &Model) -> PropConfig {
    m.universe()
        .into_iter()
        .map(|id| {
            let on = match (m.get(&id), c.get(&id)) {
                (Some(n), Some(v)) => v.state && (n.flavor.has_fixed_data() || to_bool(&v.data)),
                _ => false,
            };
            (id, on)
        })
        .collect()
}

pub fn validate_prop(m: &Model, cp: &PropConfig) -> Result<ValidationReport, ValidationError> {
    validate_prop_with(m, cp, Translation::Sound)
}

pub fn validate_prop_with(m: &Model, cp: &PropConfig, t: Translation) -> Result<ValidationReport, ValidationError> {
    let f = build_formula_with(m, t).map_err(|FormulaError::IllFormed(v)| ValidationError::IllFormed(v))?;
    f.check(cp)
}
