//! Propositional upper and lower bounds for the truth of goal expressions.
//!
//! For every configuration accepted by the full semantics, with `c_p` its
//! projection: `lower(c_p)` implies the expression is true, and the
//! expression being true implies `upper(c_p)`. Bounds flip under negation,
//! so they can be used in any polarity.

use std::collections::BTreeSet;

use super::bexpr::BoolExpr;
use super::rewrite::ident_const_comparison;
use crate::expr::{Builtin, CmpOp, GoalExpr, LogicalOp};
use crate::model::{FeatureId, Model, Parent};
use crate::semantics::{Configuration, Evaluator, Valuation};
use crate::value::{compare_values, parse_number, to_bool, DataValue};

/// Largest variable count for which sub-expressions are tabulated.
const MAX_TABLE_VARS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub upper: BoolExpr,
    pub lower: BoolExpr,
}

impl Bounds {
    pub fn exact(e: BoolExpr) -> Bounds {
        Bounds {
            upper: e.clone(),
            lower: e,
        }
    }

    pub fn unknown() -> Bounds {
        Bounds {
            upper: BoolExpr::TRUE,
            lower: BoolExpr::FALSE,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.upper == self.lower
    }

    fn negate(self) -> Bounds {
        Bounds {
            upper: BoolExpr::not(self.lower),
            lower: BoolExpr::not(self.upper),
        }
    }
}

/// How an identifier's value relates to its propositional variable.
enum IdentKind {
    /// The value is `"1"` or `"0"` according to the formula.
    Boolean(BoolExpr),
    /// Only the truth of the value is known: it equals the variable.
    DataLike,
    /// An interface whose implementors are all Boolean: the value is the
    /// number of enabled implementors when the variable holds, else 0.
    Count(Vec<FeatureId>),
}

fn ident_kind(x: &FeatureId, m: &Model) -> IdentKind {
    let Some(n) = m.get(x) else {
        return IdentKind::Boolean(BoolExpr::FALSE);
    };
    if n.flavor.has_fixed_data() {
        return IdentKind::Boolean(BoolExpr::var(x));
    }
    if n.is_interface() {
        let impls = m.implementors(x);
        if impls
            .iter()
            .all(|i| m.get(i).is_some_and(|n| n.flavor.has_fixed_data()))
        {
            return IdentKind::Count(impls.into_iter().collect());
        }
    }
    IdentKind::DataLike
}

/// Upper bound on the enabled state of `x`: enabled features have enabled
/// ancestors, and the nearest one with a fixed data value has its state as
/// its variable.
pub(crate) fn state_upper_self(x: &FeatureId, m: &Model) -> BoolExpr {
    let mut cur = x;
    loop {
        let Some(n) = m.get(cur) else {
            return BoolExpr::FALSE;
        };
        if n.flavor.has_fixed_data() {
            return BoolExpr::var(cur);
        }
        match &n.parent {
            Parent::Root => return BoolExpr::TRUE,
            Parent::Node(p) => cur = p,
        }
    }
}

pub(crate) fn state_upper(p: &Parent, m: &Model) -> BoolExpr {
    match p {
        Parent::Root => BoolExpr::TRUE,
        Parent::Node(id) => state_upper_self(id, m),
    }
}

pub fn bounds(e: &GoalExpr, m: &Model) -> Bounds {
    if !matches!(e, GoalExpr::Ident(_) | GoalExpr::Const(_)) {
        if let Some(b) = tabulate(e, m) {
            return b;
        }
    }
    match e {
        GoalExpr::Ident(x) => match ident_kind(x, m) {
            IdentKind::Boolean(b) => Bounds::exact(b),
            IdentKind::DataLike | IdentKind::Count(_) => Bounds::exact(BoolExpr::var(x)),
        },
        GoalExpr::Const(v) => Bounds::exact(BoolExpr::Const(to_bool(v))),
        GoalExpr::Not(a) => bounds(a, m).negate(),
        GoalExpr::Logical(op, a, b) => logical(*op, bounds(a, m), bounds(b, m)),
        GoalExpr::Cond(g, t, f) => {
            let g = bounds(g, m);
            let t = bounds(t, m);
            let f = bounds(f, m);
            Bounds {
                upper: BoolExpr::or(
                    BoolExpr::and(g.upper.clone(), t.upper),
                    BoolExpr::and(BoolExpr::not(g.lower.clone()), f.upper),
                ),
                lower: BoolExpr::or(
                    BoolExpr::and(g.lower, t.lower),
                    BoolExpr::and(BoolExpr::not(g.upper), f.lower),
                ),
            }
        }
        GoalExpr::Compare(..) => compare(e, m),
        GoalExpr::Call(b, args) => call(*b, args, m),
        GoalExpr::Arith(..) | GoalExpr::BitNot(_) | GoalExpr::Neg(_) => Bounds::unknown(),
    }
}

fn logical(op: LogicalOp, a: Bounds, b: Bounds) -> Bounds {
    use BoolExpr as B;
    match op {
        LogicalOp::And => Bounds {
            upper: B::and(a.upper, b.upper),
            lower: B::and(a.lower, b.lower),
        },
        LogicalOp::Or => Bounds {
            upper: B::or(a.upper, b.upper),
            lower: B::or(a.lower, b.lower),
        },
        LogicalOp::Implies => Bounds {
            upper: B::or(B::not(a.lower), b.upper),
            lower: B::or(B::not(a.upper), b.lower),
        },
        LogicalOp::Eqv if a.is_exact() && b.is_exact() => Bounds::exact(B::eqv(a.upper, b.upper)),
        LogicalOp::Eqv => Bounds {
            upper: B::or(
                B::and(a.upper.clone(), b.upper.clone()),
                B::and(B::not(a.lower.clone()), B::not(b.lower.clone())),
            ),
            lower: B::or(B::and(a.lower, b.lower), B::and(B::not(a.upper), B::not(b.upper))),
        },
        LogicalOp::Xor => Bounds {
            upper: B::or(
                B::and(a.upper.clone(), B::not(b.lower.clone())),
                B::and(B::not(a.lower.clone()), b.upper.clone()),
            ),
            lower: B::or(B::and(a.lower, B::not(b.upper)), B::and(B::not(a.upper), b.lower)),
        },
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    fn of(outcomes: impl IntoIterator<Item = bool>) -> Tri {
        let (mut t, mut f) = (false, false);
        for o in outcomes {
            if o {
                t = true;
            } else {
                f = true;
            }
        }
        match (t, f) {
            (true, false) => Tri::True,
            (false, true) => Tri::False,
            _ => Tri::Unknown,
        }
    }

    fn upper(self) -> BoolExpr {
        BoolExpr::Const(self != Tri::False)
    }

    fn lower(self) -> BoolExpr {
        BoolExpr::Const(self == Tri::True)
    }
}

fn compare(e: &GoalExpr, m: &Model) -> Bounds {
    let Some((op, x, k)) = ident_const_comparison(e) else {
        return Bounds::unknown();
    };
    let numeric = parse_number(k.as_str()).is_some();
    let holds = |v: &DataValue| op.holds(compare_values(v, k));
    match ident_kind(x, m) {
        IdentKind::Boolean(b) => {
            let on = holds(&DataValue::one());
            let off = holds(&DataValue::zero());
            Bounds::exact(BoolExpr::ite(b, BoolExpr::Const(on), BoolExpr::Const(off)))
        }
        IdentKind::Count(impls) if numeric => {
            let n = impls.len();
            let p: Vec<bool> = (0..=n).map(|j| holds(&DataValue::from(j as i64))).collect();
            let vars: Vec<BoolExpr> = impls.iter().map(BoolExpr::var).collect();
            let mut runs = Vec::new();
            let mut j = 1;
            while j <= n {
                if p[j] {
                    let lo = j;
                    while j < n && p[j + 1] {
                        j += 1;
                    }
                    runs.push(BoolExpr::card(vars.clone(), lo, j));
                }
                j += 1;
            }
            let x = BoolExpr::var(x);
            Bounds::exact(BoolExpr::ite(x, BoolExpr::any(runs), BoolExpr::Const(p[0])))
        }
        IdentKind::DataLike | IdentKind::Count(_) => {
            let ordering = !matches!(op, CmpOp::Eq | CmpOp::Ne);
            // Falsy values are "" or spellings of zero; "0" and "" stand for
            // all of them except under a lexicographic ordering.
            let falsy = if ordering && !numeric {
                Tri::Unknown
            } else {
                Tri::of(["0", ""].map(|r| holds(&DataValue::from(r))))
            };
            let truthy = match op {
                CmpOp::Eq if !to_bool(k) => Tri::False,
                CmpOp::Ne if !to_bool(k) => Tri::True,
                _ => Tri::Unknown,
            };
            let x = BoolExpr::var(x);
            Bounds {
                upper: BoolExpr::ite(x.clone(), truthy.upper(), falsy.upper()),
                lower: BoolExpr::ite(x, truthy.lower(), falsy.lower()),
            }
        }
    }
}

/// True when no spelling of zero contains `k`, ignoring case.
fn excludes_falsy(k: &DataValue) -> bool {
    k.as_str()
        .to_lowercase()
        .chars()
        .any(|c| !(c.is_ascii_digit() || "+-.xe".contains(c)))
}

fn call(b: Builtin, args: &[GoalExpr], m: &Model) -> Bounds {
    match (b, args) {
        (Builtin::IsActive, [GoalExpr::Ident(x)]) => Bounds {
            upper: state_upper_self(x, m),
            lower: if m.contains(x) {
                BoolExpr::var(x)
            } else {
                BoolExpr::FALSE
            },
        },
        (Builtin::IsEnabled, [GoalExpr::Ident(x)]) => match m.get(x) {
            Some(n) if n.flavor.is_mandatory() => Bounds::exact(BoolExpr::TRUE),
            Some(_) => Bounds {
                upper: BoolExpr::TRUE,
                lower: BoolExpr::var(x),
            },
            None => Bounds::unknown(),
        },
        (Builtin::IsLoaded, [GoalExpr::Ident(x)]) => Bounds::exact(BoolExpr::Const(m.contains(x))),
        (Builtin::IsSubstr | Builtin::IsXsubstr, [GoalExpr::Ident(x), GoalExpr::Const(k)]) if excludes_falsy(k) => {
            Bounds {
                upper: bounds(&args[0], m).upper,
                lower: BoolExpr::FALSE,
            }
        }
        _ => Bounds::unknown(),
    }
}

/// Collects the variables of an expression whose value is a function of
/// Boolean variables alone; `None` if it is not.
fn closed_vars(e: &GoalExpr, m: &Model, out: &mut BTreeSet<FeatureId>) -> bool {
    match e {
        GoalExpr::Ident(x) => match ident_kind(x, m) {
            IdentKind::Boolean(b) => {
                b.collect_vars(out);
                true
            }
            _ => false,
        },
        GoalExpr::Const(_) => true,
        GoalExpr::Not(a) | GoalExpr::BitNot(a) | GoalExpr::Neg(a) => closed_vars(a, m, out),
        GoalExpr::Logical(_, a, b) | GoalExpr::Arith(_, a, b) | GoalExpr::Compare(_, a, b) => {
            closed_vars(a, m, out) && closed_vars(b, m, out)
        }
        GoalExpr::Cond(g, t, f) => closed_vars(g, m, out) && closed_vars(t, m, out) && closed_vars(f, m, out),
        GoalExpr::Call(b, args) => match (b, args.as_slice()) {
            (Builtin::IsLoaded, [GoalExpr::Ident(_)]) => true,
            (Builtin::IsActive, [GoalExpr::Ident(x)]) => closed_vars(&args[0], m, out) || !m.contains(x),
            (Builtin::GetData, [GoalExpr::Ident(x)]) => m.get(x).is_some_and(|n| n.flavor.has_fixed_data()),
            (Builtin::IsSubstr | Builtin::IsXsubstr | Builtin::VersionCmp, _) => {
                args.iter().all(|a| closed_vars(a, m, out))
            }
            _ => false,
        },
    }
}

/// Exact bounds by evaluating every assignment of the variables involved.
/// Assignments under which evaluation fails are left open.
fn tabulate(e: &GoalExpr, m: &Model) -> Option<Bounds> {
    let mut vars = BTreeSet::new();
    if !closed_vars(e, m, &mut vars) || vars.len() > MAX_TABLE_VARS {
        return None;
    }
    let vars: Vec<FeatureId> = vars.into_iter().collect();
    let mut base = Configuration::new();
    for x in e.identifiers() {
        base.set(x, Valuation::off());
    }
    let rows = 1usize << vars.len();
    let mut upper = Vec::with_capacity(rows);
    let mut lower = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut c = base.clone();
        for (j, x) in vars.iter().enumerate() {
            let on = r >> j & 1 == 1;
            c.set(x.clone(), Valuation::new(on, on, "1"));
        }
        match Evaluator::new(m, &c).truth(e) {
            Ok(t) => {
                upper.push(t);
                lower.push(t);
            }
            Err(_) => {
                upper.push(true);
                lower.push(false);
            }
        }
    }
    Some(Bounds {
        upper: shannon(&vars, &upper),
        lower: shannon(&vars, &lower),
    })
}

/// Builds a formula from a truth table whose row `r` assigns bit `j` of `r`
/// to `vars[j]`.
fn shannon(vars: &[FeatureId], table: &[bool]) -> BoolExpr {
    if table.iter().all(|&t| t) {
        return BoolExpr::TRUE;
    }
    if table.iter().all(|&t| !t) {
        return BoolExpr::FALSE;
    }
    let (first, rest) = vars.split_first().expect("a non-constant table has variables");
    let off: Vec<bool> = table.iter().step_by(2).copied().collect();
    let on: Vec<bool> = table.iter().skip(1).step_by(2).copied().collect();
    BoolExpr::ite(BoolExpr::var(first), shannon(rest, &on), shannon(rest, &off))
}
