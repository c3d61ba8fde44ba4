//! Goal and list expression trees, and their concrete-syntax printer.
//!
//! The printer emits the minimum parentheses needed under the precedence
//! ladder used by [`crate::parser::parse_goal_expr`], so printing and
//! re-parsing reproduces the same tree.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::FeatureId;
use crate::value::DataValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicalOp {
    Or,
    And,
    Implies,
    Eqv,
    Xor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
    BitXor,
    BitAnd,
    BitOr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    GetData,
    IsActive,
    IsEnabled,
    IsLoaded,
    IsSubstr,
    IsXsubstr,
    VersionCmp,
}

impl LogicalOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicalOp::Or => "||",
            LogicalOp::And => "&&",
            LogicalOp::Implies => "implies",
            LogicalOp::Eqv => "eqv",
            LogicalOp::Xor => "xor",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            LogicalOp::Implies | LogicalOp::Eqv => 2,
            LogicalOp::Or => 3,
            LogicalOp::And => 4,
            LogicalOp::Xor => 5,
        }
    }

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            LogicalOp::Or => a || b,
            LogicalOp::And => a && b,
            LogicalOp::Implies => !a || b,
            LogicalOp::Eqv => a == b,
            LogicalOp::Xor => a != b,
        }
    }
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "%",
            ArithOp::Shl => "<<",
            ArithOp::Shr => ">>",
            ArithOp::BitXor => "^",
            ArithOp::BitAnd => "&",
            ArithOp::BitOr => "|",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            ArithOp::BitOr => 6,
            ArithOp::BitXor => 7,
            ArithOp::BitAnd => 8,
            ArithOp::Shl | ArithOp::Shr => 11,
            ArithOp::Add | ArithOp::Sub => 12,
            ArithOp::Mul | ArithOp::Div | ArithOp::Mod => 13,
        }
    }
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            CmpOp::Eq | CmpOp::Ne => 9,
            _ => 10,
        }
    }

    /// The operator with its operands swapped: `a < b` iff `b > a`.
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Gt => ord == Greater,
            CmpOp::Le => ord != Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

impl Builtin {
    pub const ALL: [Builtin; 7] = [
        Builtin::GetData,
        Builtin::IsActive,
        Builtin::IsEnabled,
        Builtin::IsLoaded,
        Builtin::IsSubstr,
        Builtin::IsXsubstr,
        Builtin::VersionCmp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::GetData => "get_data",
            Builtin::IsActive => "is_active",
            Builtin::IsEnabled => "is_enabled",
            Builtin::IsLoaded => "is_loaded",
            Builtin::IsSubstr => "is_substr",
            Builtin::IsXsubstr => "is_xsubstr",
            Builtin::VersionCmp => "version_cmp",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::GetData | Builtin::IsActive | Builtin::IsEnabled | Builtin::IsLoaded => 1,
            Builtin::IsSubstr | Builtin::IsXsubstr | Builtin::VersionCmp => 2,
        }
    }
}

/// A goal expression, as used by `requires`, `active_if` and `calculated`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GoalExpr {
    Ident(FeatureId),
    Const(DataValue),
    Logical(LogicalOp, Box<GoalExpr>, Box<GoalExpr>),
    Not(Box<GoalExpr>),
    BitNot(Box<GoalExpr>),
    /// Unary minus on a non-literal operand. Negative literals are constants.
    Neg(Box<GoalExpr>),
    Arith(ArithOp, Box<GoalExpr>, Box<GoalExpr>),
    Compare(CmpOp, Box<GoalExpr>, Box<GoalExpr>),
    Call(Builtin, Vec<GoalExpr>),
    Cond(Box<GoalExpr>, Box<GoalExpr>, Box<GoalExpr>),
}

const PREC_COND: u8 = 1;
const PREC_UNARY: u8 = 14;
const PREC_ATOM: u8 = 15;

impl GoalExpr {
    pub fn ident(name: &str) -> GoalExpr {
        GoalExpr::Ident(FeatureId::new(name).expect("valid feature name"))
    }

    pub fn constant(v: impl Into<DataValue>) -> GoalExpr {
        GoalExpr::Const(v.into())
    }

    pub fn logical(op: LogicalOp, a: GoalExpr, b: GoalExpr) -> GoalExpr {
        GoalExpr::Logical(op, Box::new(a), Box::new(b))
    }

    pub fn arith(op: ArithOp, a: GoalExpr, b: GoalExpr) -> GoalExpr {
        GoalExpr::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn compare(op: CmpOp, a: GoalExpr, b: GoalExpr) -> GoalExpr {
        GoalExpr::Compare(op, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: GoalExpr) -> GoalExpr {
        GoalExpr::Not(Box::new(e))
    }

    pub fn cond(g: GoalExpr, t: GoalExpr, e: GoalExpr) -> GoalExpr {
        GoalExpr::Cond(Box::new(g), Box::new(t), Box::new(e))
    }

    pub fn precedence(&self) -> u8 {
        match self {
            GoalExpr::Ident(_) | GoalExpr::Call(..) => PREC_ATOM,
            GoalExpr::Const(v) => {
                if v.as_str().starts_with('-') {
                    PREC_UNARY
                } else {
                    PREC_ATOM
                }
            }
            GoalExpr::Logical(op, ..) => op.precedence(),
            GoalExpr::Arith(op, ..) => op.precedence(),
            GoalExpr::Compare(op, ..) => op.precedence(),
            GoalExpr::Not(_) | GoalExpr::BitNot(_) | GoalExpr::Neg(_) => PREC_UNARY,
            GoalExpr::Cond(..) => PREC_COND,
        }
    }

    /// Every feature name mentioned anywhere in the expression.
    pub fn identifiers(&self) -> BTreeSet<FeatureId> {
        let mut out = BTreeSet::new();
        self.collect_identifiers(&mut out);
        out
    }

    pub fn collect_identifiers(&self, out: &mut BTreeSet<FeatureId>) {
        match self {
            GoalExpr::Ident(id) => {
                out.insert(id.clone());
            }
            GoalExpr::Const(_) => {}
            GoalExpr::Not(e) | GoalExpr::BitNot(e) | GoalExpr::Neg(e) => e.collect_identifiers(out),
            GoalExpr::Logical(_, a, b) | GoalExpr::Arith(_, a, b) | GoalExpr::Compare(_, a, b) => {
                a.collect_identifiers(out);
                b.collect_identifiers(out);
            }
            GoalExpr::Call(_, args) => args.iter().for_each(|a| a.collect_identifiers(out)),
            GoalExpr::Cond(g, t, e) => {
                g.collect_identifiers(out);
                t.collect_identifiers(out);
                e.collect_identifiers(out);
            }
        }
    }

    /// Folds a whitespace enumeration of expressions into one disjunction.
    pub fn disjunction(mut exprs: Vec<GoalExpr>) -> Option<GoalExpr> {
        if exprs.is_empty() {
            return None;
        }
        let first = exprs.remove(0);
        Some(
            exprs
                .into_iter()
                .fold(first, |acc, e| GoalExpr::logical(LogicalOp::Or, acc, e)),
        )
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_bare(f)?;
            return f.write_str(")");
        }
        self.fmt_bare(f)
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalExpr::Ident(id) => write!(f, "{id}"),
            GoalExpr::Const(v) => fmt_constant(v, f),
            GoalExpr::Logical(op, a, b) => fmt_binary(f, op.symbol(), op.precedence(), a, b),
            GoalExpr::Arith(op, a, b) => fmt_binary(f, op.symbol(), op.precedence(), a, b),
            GoalExpr::Compare(op, a, b) => fmt_binary(f, op.symbol(), op.precedence(), a, b),
            GoalExpr::Not(e) => {
                f.write_str("!")?;
                e.fmt_prec(f, PREC_UNARY)
            }
            GoalExpr::BitNot(e) => {
                f.write_str("~")?;
                e.fmt_prec(f, PREC_UNARY)
            }
            GoalExpr::Neg(e) => {
                f.write_str("-")?;
                // `-5` would re-read as a literal and `--x` is ambiguous.
                let needs_parens = match e.as_ref() {
                    GoalExpr::Const(v) => is_bare_number(v.as_str()),
                    GoalExpr::Neg(_) => true,
                    _ => false,
                };
                if needs_parens {
                    f.write_str("(")?;
                    e.fmt_bare(f)?;
                    f.write_str(")")
                } else {
                    e.fmt_prec(f, PREC_UNARY)
                }
            }
            GoalExpr::Call(b, args) => {
                write!(f, "{}(", b.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                f.write_str(")")
            }
            GoalExpr::Cond(g, t, e) => {
                g.fmt_prec(f, PREC_COND + 1)?;
                f.write_str(" ? ")?;
                t.fmt_prec(f, PREC_COND)?;
                f.write_str(" : ")?;
                e.fmt_prec(f, PREC_COND)
            }
        }
    }
}

fn fmt_binary(f: &mut fmt::Formatter<'_>, symbol: &str, prec: u8, a: &GoalExpr, b: &GoalExpr) -> fmt::Result {
    a.fmt_prec(f, prec)?;
    write!(f, " {symbol} ")?;
    b.fmt_prec(f, prec + 1)
}

impl fmt::Display for GoalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// True when `s` is an optional `-` followed by a literal the expression
/// lexer reads as a number token.
pub(crate) fn is_bare_number(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let b = body.as_bytes();
    if b.is_empty() {
        return false;
    }
    if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        return !hex.is_empty() && hex.bytes().all(|c| c.is_ascii_hexdigit());
    }
    if !(b[0].is_ascii_digit() || (b[0] == b'.' && b.len() > 1 && b[1].is_ascii_digit())) {
        return false;
    }
    crate::value::parse_number(body).is_some()
}

fn fmt_constant(v: &DataValue, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let s = v.as_str();
    if is_bare_number(s) {
        return f.write_str(s);
    }
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

/// One entry of a `legal_values` list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ListItem {
    Single(GoalExpr),
    Range(GoalExpr, GoalExpr),
}

/// A non-empty list of values and ranges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ListExpr {
    items: Vec<ListItem>,
}

impl ListExpr {
    /// Returns `None` for an empty item list.
    pub fn new(items: Vec<ListItem>) -> Option<ListExpr> {
        if items.is_empty() {
            None
        } else {
            Some(ListExpr { items })
        }
    }

    pub fn items(&self) -> &[ListItem] {
        &self.items
    }

    pub fn concat(&self, other: &ListExpr) -> ListExpr {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        ListExpr { items }
    }

    pub fn collect_identifiers(&self, out: &mut BTreeSet<FeatureId>) {
        for item in &self.items {
            match item {
                ListItem::Single(e) => e.collect_identifiers(out),
                ListItem::Range(lo, hi) => {
                    lo.collect_identifiers(out);
                    hi.collect_identifiers(out);
                }
            }
        }
    }
}

/// List items are whitespace separated, so an item that starts with `-`
/// would be read as a binary minus continuing the previous one.
fn fmt_list_part(e: &GoalExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let text = e.to_string();
    if text.starts_with('-') {
        write!(f, "({text})")
    } else {
        f.write_str(&text)
    }
}

impl fmt::Display for ListExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match item {
                ListItem::Single(e) => fmt_list_part(e, f)?,
                ListItem::Range(lo, hi) => {
                    fmt_list_part(lo, f)?;
                    f.write_str(" to ")?;
                    fmt_list_part(hi, f)?;
                }
            }
        }
        Ok(())
    }
}
