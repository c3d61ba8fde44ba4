//! The partial rewriting of goal expressions into propositional formulas,
//! applied rule by rule with no further soundness reasoning.

use std::collections::BTreeSet;

use super::bexpr::{BinOp, BoolExpr};
use crate::expr::{Builtin, CmpOp, GoalExpr, LogicalOp};
use crate::model::{FeatureId, Model};
use crate::value::{parse_number, to_bool, DataValue, Number};

/// Names of the nodes of `m` that list `i` as implemented, regardless of
/// any configuration.
pub fn impls_syntactic(i: &FeatureId, m: &Model) -> BTreeSet<FeatureId> {
    m.implementors(i)
}

fn is_interface(x: &FeatureId, m: &Model) -> bool {
    m.get(x).is_some_and(|n| n.is_interface())
}

fn ident_var(x: &FeatureId, m: &Model) -> BoolExpr {
    if m.contains(x) {
        BoolExpr::var(x)
    } else {
        BoolExpr::FALSE
    }
}

/// A constant as a non-negative integer, if it is one.
pub(crate) fn non_negative_int(v: &DataValue) -> Option<usize> {
    match parse_number(v.as_str())? {
        Number::Int(i) if i >= 0 => usize::try_from(i).ok(),
        _ => None,
    }
}

fn is_numeric_zero(v: &DataValue) -> bool {
    parse_number(v.as_str()).is_some_and(Number::is_zero)
}

/// Puts an identifier compared with a constant on the left.
pub(crate) fn ident_const_comparison(e: &GoalExpr) -> Option<(CmpOp, &FeatureId, &DataValue)> {
    match e {
        GoalExpr::Compare(op, a, b) => match (a.as_ref(), b.as_ref()) {
            (GoalExpr::Ident(x), GoalExpr::Const(k)) => Some((*op, x, k)),
            (GoalExpr::Const(k), GoalExpr::Ident(x)) => Some((op.flipped(), x, k)),
            _ => None,
        },
        _ => None,
    }
}

/// Translates `e` into a propositional formula, or `None` when no rule
/// applies to `e` or to a subterm it needs.
pub fn rewrite(e: &GoalExpr, m: &Model) -> Option<BoolExpr> {
    match e {
        GoalExpr::Ident(x) => Some(ident_var(x, m)),
        GoalExpr::Const(v) => Some(BoolExpr::Const(to_bool(v))),
        GoalExpr::Not(inner) => match inner.as_ref() {
            GoalExpr::Ident(x) => Some(BoolExpr::not(ident_var(x, m))),
            _ => None,
        },
        GoalExpr::Logical(op, a, b) => {
            let op = match op {
                LogicalOp::Or => BinOp::Or,
                LogicalOp::And => BinOp::And,
                LogicalOp::Implies => BinOp::Implies,
                LogicalOp::Eqv => BinOp::Eqv,
                LogicalOp::Xor => return None,
            };
            let ra = rewrite(a, m)?;
            let rb = rewrite(b, m)?;
            Some(match op {
                BinOp::Or => BoolExpr::or(ra, rb),
                BinOp::And => BoolExpr::and(ra, rb),
                BinOp::Implies => BoolExpr::implies(ra, rb),
                BinOp::Eqv => BoolExpr::eqv(ra, rb),
            })
        }
        GoalExpr::Cond(g, t, f) => {
            let rg = rewrite(g, m)?;
            let rt = rewrite(t, m)?;
            let rf = rewrite(f, m)?;
            Some(BoolExpr::and(
                BoolExpr::implies(rg.clone(), rt),
                BoolExpr::implies(BoolExpr::not(rg), rf),
            ))
        }
        GoalExpr::Compare(..) => {
            let (op, x, k) = ident_const_comparison(e)?;
            if is_interface(x, m) {
                rewrite_interface_comparison(op, x, k, m)
            } else {
                rewrite_comparison(op, x, k, m)
            }
        }
        GoalExpr::Call(Builtin::IsSubstr, args) => match (&args[0], &args[1]) {
            (GoalExpr::Ident(x), GoalExpr::Const(_)) => Some(ident_var(x, m)),
            _ => None,
        },
        GoalExpr::Call(..) | GoalExpr::Arith(..) | GoalExpr::BitNot(_) | GoalExpr::Neg(_) => None,
    }
}

fn rewrite_comparison(op: CmpOp, x: &FeatureId, k: &DataValue, m: &Model) -> Option<BoolExpr> {
    let v = ident_var(x, m);
    match op {
        CmpOp::Eq if to_bool(k) => Some(v),
        CmpOp::Eq => Some(BoolExpr::not(v)),
        CmpOp::Ne if is_numeric_zero(k) => Some(v),
        CmpOp::Gt => Some(if non_negative_int(k).is_some() {
            v
        } else {
            BoolExpr::TRUE
        }),
        _ => None,
    }
}

fn rewrite_interface_comparison(op: CmpOp, x: &FeatureId, k: &DataValue, m: &Model) -> Option<BoolExpr> {
    let impls: Vec<BoolExpr> = impls_syntactic(x, m).iter().map(BoolExpr::var).collect();
    let n = impls.len();
    let v = BoolExpr::var(x);
    let int = non_negative_int(k);
    let with = |rest: BoolExpr| Some(BoolExpr::and(v.clone(), rest));
    match (op, int) {
        (CmpOp::Eq, Some(0)) => Some(BoolExpr::all(
            std::iter::once(BoolExpr::not(v.clone())).chain(impls.into_iter().map(BoolExpr::not)),
        )),
        (CmpOp::Gt | CmpOp::Ne, Some(0)) => with(BoolExpr::any(impls)),
        (CmpOp::Eq, Some(1)) => with(BoolExpr::card(impls, 1, 1)),
        (CmpOp::Ge, Some(c)) => with(BoolExpr::card(impls, c, n)),
        (CmpOp::Gt, Some(c)) => with(BoolExpr::card(impls, c + 1, n)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_model;
    use crate::parser::{parse_goal_expr, parse_model};

    fn model(src: &str) -> Model {
        normalize_model(parse_model(src).nodes).unwrap()
    }

    fn rw(src: &str, m: &Model) -> Option<String> {
        rewrite(&parse_goal_expr(src).unwrap(), m).map(|b| b.to_string())
    }

    #[test]
    fn examples() {
        let m =
            model("cdl_option x {}\ncdl_interface I {}\ncdl_option A { implements I }\ncdl_option B { implements I }");
        assert_eq!(rw("y", &m).as_deref(), Some("0"));
        assert_eq!(rw("x == 1", &m).as_deref(), Some("x"));
        assert_eq!(rw("1 == x", &m).as_deref(), Some("x"));
        assert_eq!(rw("x == 0", &m).as_deref(), Some("!x"));
        assert_eq!(rw("x != 0", &m).as_deref(), Some("x"));
        assert_eq!(rw("x > 3", &m).as_deref(), Some("x"));
        assert_eq!(rw("x > \"abc\"", &m).as_deref(), Some("1"));
        assert_eq!(rw("I > 0", &m).as_deref(), Some("I && (A || B)"));
        assert_eq!(rw("I == 0", &m).as_deref(), Some("!I && !A && !B"));
        assert_eq!(rw("x + 1", &m), None);
        assert_eq!(rw("!(x && x)", &m), None);
        assert_eq!(rw("x xor x", &m), None);
        assert_eq!(rw("x < 3", &m), None);
        assert_eq!(rw("is_substr(x, \"a\")", &m).as_deref(), Some("x"));
        assert_eq!(rw("x ? 1 : y", &m).as_deref(), Some("x"));
    }

    #[test]
    fn impls_syntactic_lists_declared_implementors() {
        let m = model("cdl_interface I {}\ncdl_interface J { implements I }\ncdl_option A { implements I }");
        let i = FeatureId::new("I").unwrap();
        let names: Vec<String> = impls_syntactic(&i, &m).iter().map(|x| x.to_string()).collect();
        assert_eq!(names, vec!["A", "J"]);
        assert!(impls_syntactic(&FeatureId::new("A").unwrap(), &m).is_empty());
    }
}
