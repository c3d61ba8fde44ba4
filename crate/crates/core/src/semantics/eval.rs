//! Goal expression evaluation over a full configuration.

use std::cmp::Ordering;

use thiserror::Error;

use super::config::{Configuration, Valuation};
use crate::expr::{ArithOp, Builtin, GoalExpr, ListExpr, ListItem};
use crate::model::{FeatureId, Model};
use crate::value::{compare_values, parse_number, to_bool, values_equal, DataValue, Number};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown feature {0}")]
    UnknownId(FeatureId),
    #[error("division by zero")]
    DivZero,
    #[error("operand {operand:?} of {op} is not a number")]
    NotNumeric { op: &'static str, operand: String },
    #[error("{op} needs integer operands")]
    IntegerRequired { op: &'static str },
    #[error("{op} overflows")]
    Overflow { op: &'static str },
    #[error("{builtin}: {message}")]
    BadArgument { builtin: &'static str, message: String },
}

/// Value of `x` with its enabled state taken into account: `"0"` when the
/// state is off, the data value otherwise.
pub fn access(x: &FeatureId, c: &Configuration) -> Result<DataValue, EvalError> {
    let v = c.get(x).ok_or_else(|| EvalError::UnknownId(x.clone()))?;
    Ok(if v.state { v.data.clone() } else { DataValue::zero() })
}

/// Evaluates `e` with the default builtin functions.
pub fn eval(e: &GoalExpr, c: &Configuration, m: &Model) -> Result<DataValue, EvalError> {
    Evaluator::new(m, c).eval(e)
}

/// `(d, c) ⊨ l`: `d` equals one of the single items or lies in one of the
/// ranges.
pub fn satisfies_legal(d: &DataValue, c: &Configuration, l: &ListExpr, m: &Model) -> Result<bool, EvalError> {
    Evaluator::new(m, c).satisfies_legal(d, l)
}

/// Interpretation of the builtin functions.
pub trait BuiltinPolicy: Send + Sync {
    fn call(&self, builtin: Builtin, args: &[GoalExpr], ev: &Evaluator<'_>) -> Result<DataValue, EvalError>;
}

/// `get_data` ignores the enabled state, `is_substr` is case-insensitive,
/// `is_xsubstr` is exact, and `version_cmp` compares dotted components.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultBuiltins;

static DEFAULT_BUILTINS: DefaultBuiltins = DefaultBuiltins;

impl BuiltinPolicy for DefaultBuiltins {
    fn call(&self, builtin: Builtin, args: &[GoalExpr], ev: &Evaluator<'_>) -> Result<DataValue, EvalError> {
        match builtin {
            Builtin::GetData => {
                let x = ev.feature_arg(builtin, &args[0])?;
                ev.data_of(&x)
            }
            Builtin::IsActive => {
                let x = ev.feature_arg(builtin, &args[0])?;
                Ok(DataValue::from_bool(ev.valuation(&x)?.state))
            }
            Builtin::IsEnabled => {
                let x = ev.feature_arg(builtin, &args[0])?;
                Ok(DataValue::from_bool(ev.valuation(&x)?.value))
            }
            Builtin::IsLoaded => {
                let x = ev.feature_arg(builtin, &args[0])?;
                Ok(DataValue::from_bool(ev.model().contains(&x)))
            }
            Builtin::IsSubstr => {
                let hay = ev.eval(&args[0])?.as_str().to_lowercase();
                let needle = ev.eval(&args[1])?.as_str().to_lowercase();
                Ok(DataValue::from_bool(hay.contains(&needle)))
            }
            Builtin::IsXsubstr => {
                let hay = ev.eval(&args[0])?;
                let needle = ev.eval(&args[1])?;
                Ok(DataValue::from_bool(hay.as_str().contains(needle.as_str())))
            }
            Builtin::VersionCmp => {
                let a = ev.eval(&args[0])?;
                let b = ev.eval(&args[1])?;
                Ok(DataValue::from(match version_cmp(a.as_str(), b.as_str()) {
                    Ordering::Less => -1,
                    Ordering::Equal => 0,
                    Ordering::Greater => 1,
                }))
            }
        }
    }
}

/// Compares dot-separated versions component by component; missing
/// components count as `0`.
pub fn version_cmp(a: &str, b: &str) -> Ordering {
    let pa: Vec<&str> = a.split('.').collect();
    let pb: Vec<&str> = b.split('.').collect();
    for i in 0..pa.len().max(pb.len()) {
        let x = DataValue::from(pa.get(i).copied().unwrap_or("0"));
        let y = DataValue::from(pb.get(i).copied().unwrap_or("0"));
        let ord = compare_values(&x, &y);
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Evaluation context: a model, a configuration and a builtin policy.
///
/// Features of flavor bool or none carry no data of their own; in
/// expressions they read as `"1"` when enabled and `"0"` otherwise.
pub struct Evaluator<'a> {
    model: &'a Model,
    config: &'a Configuration,
    policy: &'a dyn BuiltinPolicy,
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a Model, config: &'a Configuration) -> Self {
        Evaluator {
            model,
            config,
            policy: &DEFAULT_BUILTINS,
        }
    }

    pub fn with_policy(mut self, policy: &'a dyn BuiltinPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn config(&self) -> &Configuration {
        self.config
    }

    pub fn valuation(&self, x: &FeatureId) -> Result<&'a Valuation, EvalError> {
        self.config.get(x).ok_or_else(|| EvalError::UnknownId(x.clone()))
    }

    fn has_fixed_data(&self, x: &FeatureId) -> bool {
        self.model.get(x).is_some_and(|n| n.flavor.has_fixed_data())
    }

    /// The data value of `x`, regardless of its enabled state.
    pub fn data_of(&self, x: &FeatureId) -> Result<DataValue, EvalError> {
        let v = self.valuation(x)?;
        Ok(if self.has_fixed_data(x) {
            DataValue::one()
        } else {
            v.data.clone()
        })
    }

    /// Value of an identifier occurring in an expression.
    pub fn access(&self, x: &FeatureId) -> Result<DataValue, EvalError> {
        let v = self.valuation(x)?;
        if !v.state {
            Ok(DataValue::zero())
        } else if self.has_fixed_data(x) {
            Ok(DataValue::one())
        } else {
            Ok(v.data.clone())
        }
    }

    /// Reads a builtin argument naming a feature: a bare identifier, or any
    /// expression evaluating to a feature name.
    pub fn feature_arg(&self, builtin: Builtin, e: &GoalExpr) -> Result<FeatureId, EvalError> {
        if let GoalExpr::Ident(x) = e {
            return Ok(x.clone());
        }
        let v = self.eval(e)?;
        FeatureId::new(v.as_str()).map_err(|err| EvalError::BadArgument {
            builtin: builtin.name(),
            message: err.to_string(),
        })
    }

    pub fn truth(&self, e: &GoalExpr) -> Result<bool, EvalError> {
        self.eval(e).map(|v| to_bool(&v))
    }

    pub fn eval(&self, e: &GoalExpr) -> Result<DataValue, EvalError> {
        match e {
            GoalExpr::Ident(x) => self.access(x),
            GoalExpr::Const(v) => Ok(v.clone()),
            GoalExpr::Logical(op, a, b) => {
                let x = self.truth(a)?;
                let y = self.truth(b)?;
                Ok(DataValue::from_bool(op.apply(x, y)))
            }
            GoalExpr::Not(a) => Ok(DataValue::from_bool(!self.truth(a)?)),
            GoalExpr::BitNot(a) => {
                let v = self.eval(a)?;
                match numeric("~", &v)? {
                    Number::Int(i) => Ok(DataValue::from(!i)),
                    Number::Float(_) => Err(EvalError::IntegerRequired { op: "~" }),
                }
            }
            GoalExpr::Neg(a) => {
                let v = self.eval(a)?;
                match numeric("-", &v)? {
                    Number::Int(i) => i
                        .checked_neg()
                        .map(DataValue::from)
                        .ok_or(EvalError::Overflow { op: "-" }),
                    Number::Float(x) => Ok(DataValue::from(Number::Float(-x))),
                }
            }
            GoalExpr::Arith(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                arith(*op, &x, &y)
            }
            GoalExpr::Compare(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                Ok(DataValue::from_bool(op.holds(compare_values(&x, &y))))
            }
            GoalExpr::Call(b, args) => self.policy.call(*b, args, self),
            GoalExpr::Cond(g, t, f) => {
                if self.truth(g)? {
                    self.eval(t)
                } else {
                    self.eval(f)
                }
            }
        }
    }

    pub fn satisfies_legal(&self, d: &DataValue, l: &ListExpr) -> Result<bool, EvalError> {
        for item in l.items() {
            let hit = match item {
                ListItem::Single(e) => values_equal(d, &self.eval(e)?),
                ListItem::Range(lo, hi) => {
                    let lo = self.eval(lo)?;
                    let hi = self.eval(hi)?;
                    compare_values(&lo, d) != Ordering::Greater && compare_values(d, &hi) != Ordering::Greater
                }
            };
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn numeric(op: &'static str, v: &DataValue) -> Result<Number, EvalError> {
    parse_number(v.as_str()).ok_or_else(|| EvalError::NotNumeric {
        op,
        operand: v.as_str().to_string(),
    })
}

fn float_result(op: &'static str, x: f64) -> Result<DataValue, EvalError> {
    if x.is_finite() {
        Ok(DataValue::from(Number::Float(x)))
    } else {
        Err(EvalError::Overflow { op })
    }
}

/// Binary arithmetic in the style of Tcl's `expr`: integer arithmetic when
/// both operands are integers, floating point otherwise; integer division
/// rounds towards negative infinity and `%` takes the sign of the divisor.
pub fn arith(op: ArithOp, a: &DataValue, b: &DataValue) -> Result<DataValue, EvalError> {
    let sym = op.symbol();
    let x = numeric(sym, a)?;
    let y = numeric(sym, b)?;
    let overflow = EvalError::Overflow { op: sym };
    match (x, y) {
        (Number::Int(i), Number::Int(j)) => {
            let r = match op {
                ArithOp::Add => i.checked_add(j),
                ArithOp::Sub => i.checked_sub(j),
                ArithOp::Mul => i.checked_mul(j),
                ArithOp::Div => {
                    if j == 0 {
                        return Err(EvalError::DivZero);
                    }
                    i.checked_div(j).map(|_| floor_div(i, j))
                }
                ArithOp::Mod => {
                    if j == 0 {
                        return Err(EvalError::DivZero);
                    }
                    i.checked_rem(j)
                        .map(|r| if r != 0 && (r < 0) != (j < 0) { r + j } else { r })
                }
                ArithOp::Shl => {
                    if j < 0 {
                        return Err(EvalError::BadArgument {
                            builtin: "<<",
                            message: "negative shift count".into(),
                        });
                    }
                    if i == 0 {
                        Some(0)
                    } else if j >= 64 {
                        None
                    } else {
                        let r = i.wrapping_shl(j as u32);
                        (r >> j == i).then_some(r)
                    }
                }
                ArithOp::Shr => {
                    if j < 0 {
                        return Err(EvalError::BadArgument {
                            builtin: ">>",
                            message: "negative shift count".into(),
                        });
                    }
                    Some(i >> j.min(63))
                }
                ArithOp::BitAnd => Some(i & j),
                ArithOp::BitOr => Some(i | j),
                ArithOp::BitXor => Some(i ^ j),
            };
            r.map(DataValue::from).ok_or(overflow)
        }
        (x, y) => {
            let (p, q) = (x.as_f64(), y.as_f64());
            match op {
                ArithOp::Add => float_result(sym, p + q),
                ArithOp::Sub => float_result(sym, p - q),
                ArithOp::Mul => float_result(sym, p * q),
                ArithOp::Div => {
                    if q == 0.0 {
                        Err(EvalError::DivZero)
                    } else {
                        float_result(sym, p / q)
                    }
                }
                _ => Err(EvalError::IntegerRequired { op: sym }),
            }
        }
    }
}

fn floor_div(i: i64, j: i64) -> i64 {
    let q = i / j;
    if (i % j != 0) && ((i < 0) != (j < 0)) {
        q - 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_model;
    use crate::parser::{parse_goal_expr, parse_model};

    fn id(s: &str) -> FeatureId {
        FeatureId::new(s).unwrap()
    }

    fn ev(src: &str, c: &Configuration) -> Result<String, EvalError> {
        let m = Model::empty();
        eval(&parse_goal_expr(src).unwrap(), c, &m).map(|v| v.to_string())
    }

    #[test]
    fn access_respects_state() {
        let c = Configuration::new()
            .with("X", false, true, "99")
            .with("Y", true, true, "42")
            .with("Z", true, false, "");
        assert_eq!(access(&id("X"), &c).unwrap().as_str(), "0");
        assert_eq!(access(&id("Y"), &c).unwrap().as_str(), "42");
        assert_eq!(access(&id("Z"), &c).unwrap().as_str(), "");
        assert_eq!(access(&id("W"), &c), Err(EvalError::UnknownId(id("W"))));
    }

    #[test]
    fn basic_examples() {
        let c = Configuration::new()
            .with("A", true, true, "1")
            .with("B", false, false, "1");
        assert_eq!(ev("1 + 2", &c).unwrap(), "3");
        assert_eq!(ev("A && B", &c).unwrap(), "0");
        assert_eq!(ev("0 ? X : 7", &c).unwrap(), "7");
        assert_eq!(ev("5 % 0", &c), Err(EvalError::DivZero));
        assert_eq!(ev("1 ? 2 : 5 / 0", &c).unwrap(), "2");
    }

    #[test]
    fn tcl_arithmetic() {
        let c = Configuration::new();
        let cases = [
            ("7 / 2", "3"),
            ("-7 / 2", "-4"),
            ("7 / -2", "-4"),
            ("-7 % 2", "1"),
            ("7 % -2", "-1"),
            ("7.0 / 2", "3.5"),
            ("1 + 2.0", "3.0"),
            ("0x10 + 1", "17"),
            ("1 << 4", "16"),
            ("-16 >> 2", "-4"),
            ("6 & 3", "2"),
            ("6 | 3", "7"),
            ("6 ^ 3", "5"),
            ("~0", "-1"),
            ("-(3)", "-3"),
            ("10 > 9", "1"),
            ("\"10\" > \"9a\"", "0"),
            ("\"abc\" < \"abd\"", "1"),
            ("\"05\" == 5", "1"),
            ("1 xor 1", "0"),
            ("0 implies 0", "1"),
            ("2 eqv 3", "1"),
            ("!\"\"", "1"),
        ];
        for (src, want) in cases {
            assert_eq!(ev(src, &c).unwrap(), want, "{src}");
        }
        assert!(matches!(ev("1.5 % 1", &c), Err(EvalError::IntegerRequired { .. })));
        assert!(matches!(ev("\"a\" + 1", &c), Err(EvalError::NotNumeric { .. })));
        assert!(matches!(
            ev("9223372036854775807 + 1", &c),
            Err(EvalError::Overflow { .. })
        ));
        assert!(matches!(ev("1 << 64", &c), Err(EvalError::Overflow { .. })));
        assert_eq!(ev("1.0 / 0", &c), Err(EvalError::DivZero));
    }

    #[test]
    fn builtins() {
        let out = parse_model("cdl_option B {}\ncdl_option D { flavor data }\ncdl_package P {}");
        let m = normalize_model(out.nodes).unwrap();
        let c = Configuration::new()
            .with("B", true, false, "0")
            .with("D", false, true, "Hello")
            .with("P", true, true, "3.1.4");
        let run = |s: &str| eval(&parse_goal_expr(s).unwrap(), &c, &m).unwrap().to_string();
        assert_eq!(run("get_data(D)"), "Hello");
        assert_eq!(run("get_data(B)"), "1");
        assert_eq!(run("B"), "1");
        assert_eq!(run("is_active(D)"), "0");
        assert_eq!(run("is_enabled(B)"), "0");
        assert_eq!(run("is_loaded(P)"), "1");
        assert_eq!(run("is_loaded(Q)"), "0");
        assert_eq!(run("is_substr(get_data(D), \"ELL\")"), "1");
        assert_eq!(run("is_xsubstr(get_data(D), \"ELL\")"), "0");
        assert_eq!(run("is_xsubstr(get_data(D), \"ell\")"), "1");
        assert_eq!(run("version_cmp(P, \"3.1\")"), "1");
        assert_eq!(run("version_cmp(\"1.2\", \"1.10\")"), "-1");
        assert_eq!(run("version_cmp(\"2.0\", \"2\")"), "0");
    }

    #[test]
    fn legal_values() {
        let m = Model::empty();
        let c = Configuration::new();
        let l = |s: &str| crate::parser::parse_list_expr(s).unwrap();
        let d = |s: &str| DataValue::from(s);
        assert!(satisfies_legal(&d("5"), &c, &l("1 to 10"), &m).unwrap());
        assert!(satisfies_legal(&d("x"), &c, &l("\"x\""), &m).unwrap());
        assert!(!satisfies_legal(&d("0"), &c, &l("1 2"), &m).unwrap());
        assert!(satisfies_legal(&d("05"), &c, &l("5"), &m).unwrap());
        assert!(satisfies_legal(&d("b"), &c, &l("\"a\" to \"c\""), &m).unwrap());
    }
}
