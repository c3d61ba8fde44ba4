use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::model::FeatureId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Or,
    And,
    Implies,
    Eqv,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Implies => "implies",
            BinOp::Eqv => "eqv",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Implies | BinOp::Eqv => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
        }
    }

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::Or => a || b,
            BinOp::And => a && b,
            BinOp::Implies => !a || b,
            BinOp::Eqv => a == b,
        }
    }
}

/// Propositional formula over feature variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolExpr {
    Const(bool),
    Var(FeatureId),
    Not(Box<BoolExpr>),
    Binary(BinOp, Box<BoolExpr>, Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
    /// Between `min` and `max` of the operands hold.
    Card {
        operands: Vec<BoolExpr>,
        min: usize,
        max: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChooseError {
    #[error("choose: min {min} exceeds max {max}")]
    MinAboveMax { min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropEvalError {
    #[error("unknown feature {0}")]
    UnknownId(FeatureId),
}

/// Valuation of feature variables; the root is implicitly true.
pub type PropConfig = BTreeMap<FeatureId, bool>;

impl BoolExpr {
    pub const TRUE: BoolExpr = BoolExpr::Const(true);
    pub const FALSE: BoolExpr = BoolExpr::Const(false);

    pub fn var(id: &FeatureId) -> BoolExpr {
        BoolExpr::Var(id.clone())
    }

    pub fn binary(op: BinOp, a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn as_const(&self) -> Option<bool> {
        match self {
            BoolExpr::Const(b) => Some(*b),
            _ => None,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> BoolExpr {
        match e {
            BoolExpr::Const(b) => BoolExpr::Const(!b),
            BoolExpr::Not(inner) => *inner,
            e => BoolExpr::Not(Box::new(e)),
        }
    }

    /// Conjunction, flattening nested conjunctions and folding constants.
    pub fn all(items: impl IntoIterator<Item = BoolExpr>) -> BoolExpr {
        let mut out = Vec::new();
        for e in items {
            match e {
                BoolExpr::Const(true) => {}
                BoolExpr::Const(false) => return BoolExpr::FALSE,
                BoolExpr::And(inner) => out.extend(inner),
                e => out.push(e),
            }
        }
        dedup(&mut out);
        match out.len() {
            0 => BoolExpr::TRUE,
            1 => out.pop().expect("one item"),
            _ => BoolExpr::And(out),
        }
    }

    /// Disjunction, flattening nested disjunctions and folding constants.
    pub fn any(items: impl IntoIterator<Item = BoolExpr>) -> BoolExpr {
        let mut out = Vec::new();
        for e in items {
            match e {
                BoolExpr::Const(false) => {}
                BoolExpr::Const(true) => return BoolExpr::TRUE,
                BoolExpr::Or(inner) => out.extend(inner),
                e => out.push(e),
            }
        }
        dedup(&mut out);
        match out.len() {
            0 => BoolExpr::FALSE,
            1 => out.pop().expect("one item"),
            _ => BoolExpr::Or(out),
        }
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::all([a, b])
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::any([a, b])
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        match (a.as_const(), b.as_const()) {
            (Some(false), _) | (_, Some(true)) => BoolExpr::TRUE,
            (Some(true), _) => b,
            (_, Some(false)) => BoolExpr::not(a),
            _ if a == b => BoolExpr::TRUE,
            _ => BoolExpr::binary(BinOp::Implies, a, b),
        }
    }

    pub fn eqv(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        match (a.as_const(), b.as_const()) {
            (Some(true), _) => b,
            (Some(false), _) => BoolExpr::not(b),
            (_, Some(true)) => a,
            (_, Some(false)) => BoolExpr::not(a),
            _ if a == b => BoolExpr::TRUE,
            _ => BoolExpr::binary(BinOp::Eqv, a, b),
        }
    }

    /// `(g ∧ t) ∨ (¬g ∧ e)`, simplified.
    pub fn ite(g: BoolExpr, t: BoolExpr, e: BoolExpr) -> BoolExpr {
        match (g.as_const(), t.as_const(), e.as_const()) {
            (Some(true), _, _) => t,
            (Some(false), _, _) => e,
            _ if t == e => t,
            (_, Some(true), Some(false)) => g,
            (_, Some(false), Some(true)) => BoolExpr::not(g),
            (_, Some(true), _) => BoolExpr::or(g, e),
            (_, Some(false), _) => BoolExpr::and(BoolExpr::not(g), e),
            (_, _, Some(true)) => BoolExpr::or(BoolExpr::not(g), t),
            (_, _, Some(false)) => BoolExpr::and(g, t),
            _ => BoolExpr::or(BoolExpr::and(g.clone(), t), BoolExpr::and(BoolExpr::not(g), e)),
        }
    }

    /// Between `min` and `max` of `operands` hold. Trivial bounds fold to
    /// constants or plain connectives.
    pub fn card(operands: Vec<BoolExpr>, min: usize, max: usize) -> BoolExpr {
        let n = operands.len();
        let max = max.min(n);
        if min > max {
            return BoolExpr::FALSE;
        }
        if min == 0 && max == n {
            return BoolExpr::TRUE;
        }
        if min == n {
            return BoolExpr::all(operands);
        }
        if max == 0 {
            return BoolExpr::all(operands.into_iter().map(BoolExpr::not));
        }
        if min == 1 && max == n {
            return BoolExpr::any(operands);
        }
        BoolExpr::Card { operands, min, max }
    }

    pub fn vars(&self) -> BTreeSet<FeatureId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<FeatureId>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(id) => {
                out.insert(id.clone());
            }
            BoolExpr::Not(e) => e.collect_vars(out),
            BoolExpr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BoolExpr::And(items) | BoolExpr::Or(items) | BoolExpr::Card { operands: items, .. } => {
                items.iter().for_each(|e| e.collect_vars(out))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Binary(op, ..) => op.precedence(),
            BoolExpr::Or(_) => BinOp::Or.precedence(),
            BoolExpr::And(_) => BinOp::And.precedence(),
            BoolExpr::Not(_) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_char('(')?;
            self.fmt_bare(f)?;
            f.write_char(')')
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Const(b) => f.write_str(if *b { "1" } else { "0" }),
            BoolExpr::Var(id) => write!(f, "{id}"),
            BoolExpr::Not(e) => {
                f.write_char('!')?;
                e.fmt_prec(f, 4)
            }
            BoolExpr::Binary(op, a, b) => {
                let p = op.precedence();
                a.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, p + 1)
            }
            BoolExpr::And(items) | BoolExpr::Or(items) => {
                let op = if matches!(self, BoolExpr::And(_)) {
                    BinOp::And
                } else {
                    BinOp::Or
                };
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " {} ", op.symbol())?;
                    }
                    e.fmt_prec(f, op.precedence() + 1)?;
                }
                Ok(())
            }
            BoolExpr::Card { operands, min, max } => {
                f.write_str("choose({")?;
                for (i, e) in operands.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    e.fmt_prec(f, 0)?;
                }
                write!(f, "}}, {min}, {max})")
            }
        }
    }
}

fn dedup(items: &mut Vec<BoolExpr>) {
    let mut seen = BTreeSet::new();
    items.retain(|e| seen.insert(e.clone()));
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Formula satisfied exactly when between `min` and `max` of `ids` are true.
pub fn choose(ids: &BTreeSet<FeatureId>, min: usize, max: usize) -> Result<BoolExpr, ChooseError> {
    if min > max {
        return Err(ChooseError::MinAboveMax { min, max });
    }
    Ok(BoolExpr::card(ids.iter().map(BoolExpr::var).collect(), min, max))
}

/// Evaluates `e` under `cp`. Every variable must be assigned.
pub fn eval_p(e: &BoolExpr, cp: &PropConfig) -> Result<bool, PropEvalError> {
    Ok(match e {
        BoolExpr::Const(b) => *b,
        BoolExpr::Var(id) => *cp.get(id).ok_or_else(|| PropEvalError::UnknownId(id.clone()))?,
        BoolExpr::Not(e) => !eval_p(e, cp)?,
        BoolExpr::Binary(op, a, b) => {
            let x = eval_p(a, cp)?;
            let y = eval_p(b, cp)?;
            op.apply(x, y)
        }
        BoolExpr::And(items) => {
            let mut all = true;
            for e in items {
                all &= eval_p(e, cp)?;
            }
            all
        }
        BoolExpr::Or(items) => {
            let mut any = false;
            for e in items {
                any |= eval_p(e, cp)?;
            }
            any
        }
        BoolExpr::Card { operands, min, max } => {
            let mut k = 0;
            for e in operands {
                k += usize::from(eval_p(e, cp)?);
            }
            *min <= k && k <= *max
        }
    })
}

/// Reads `id<TAB>bit` lines; `#` comments and blank lines are skipped.
pub fn parse_prop_config(text: &str) -> Result<PropConfig, crate::semantics::ConfigError> {
    use crate::semantics::ConfigError;
    let mut out = PropConfig::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.strip_suffix('\r').unwrap_or(raw);
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax { line, message };
        let Some((id, bit)) = l.split_once('\t') else {
            return Err(syntax(format!("expected id and bit separated by a tab, got {l:?}")));
        };
        let id = FeatureId::new(id.trim()).map_err(|e| syntax(e.to_string()))?;
        let b = match bit.trim() {
            "0" => false,
            "1" => true,
            other => return Err(syntax(format!("bit must be 0 or 1, got {other:?}"))),
        };
        if out.insert(id.clone(), b).is_some() {
            return Err(ConfigError::Duplicate { line, id });
        }
    }
    Ok(out)
}

pub fn prop_config_to_tsv(cp: &PropConfig) -> String {
    let mut out = String::new();
    for (id, b) in cp {
        let _ = writeln!(out, "{id}\t{}", u8::from(*b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> FeatureId {
        FeatureId::new(s).unwrap()
    }

    fn cfg(pairs: &[(&str, bool)]) -> PropConfig {
        pairs.iter().map(|(n, b)| (id(n), *b)).collect()
    }

    fn all_valuations(names: &[&str]) -> Vec<PropConfig> {
        (0..1u32 << names.len())
            .map(|bits| {
                names
                    .iter()
                    .enumerate()
                    .map(|(i, n)| (id(n), bits >> i & 1 == 1))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn eval_examples() {
        let empty = PropConfig::new();
        assert!(eval_p(&BoolExpr::TRUE, &empty).unwrap());
        let x = BoolExpr::var(&id("x"));
        let imp = BoolExpr::binary(BinOp::Implies, BoolExpr::FALSE, x.clone());
        for v in [false, true] {
            assert!(eval_p(&imp, &cfg(&[("x", v)])).unwrap());
        }
        let eq = BoolExpr::binary(BinOp::Eqv, BoolExpr::var(&id("a")), BoolExpr::var(&id("b")));
        assert!(!eval_p(&eq, &cfg(&[("a", true), ("b", false)])).unwrap());
        assert_eq!(eval_p(&x, &empty), Err(PropEvalError::UnknownId(id("x"))));
    }

    #[test]
    fn choose_examples() {
        let ab: BTreeSet<FeatureId> = [id("a"), id("b")].into();
        let one = choose(&ab, 1, 1).unwrap();
        let sat: Vec<PropConfig> = all_valuations(&["a", "b"])
            .into_iter()
            .filter(|c| eval_p(&one, c).unwrap())
            .collect();
        assert_eq!(
            sat,
            vec![cfg(&[("a", true), ("b", false)]), cfg(&[("a", false), ("b", true)])]
        );
        assert_eq!(choose(&ab, 0, 2).unwrap(), BoolExpr::TRUE);
        let a: BTreeSet<FeatureId> = [id("a")].into();
        assert_eq!(choose(&a, 2, 2).unwrap(), BoolExpr::FALSE);
        assert!(choose(&ab, 2, 1).is_err());
    }

    #[test]
    fn choose_counts_match_binomials() {
        let names = ["a", "b", "c", "d", "e", "f"];
        let ids: BTreeSet<FeatureId> = names.iter().map(|n| id(n)).collect();
        let vals = all_valuations(&names);
        let binom = |n: usize, k: usize| -> usize { (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1)) };
        for min in 0..=6 {
            for max in min..=6 {
                let f = choose(&ids, min, max).unwrap();
                let count = vals.iter().filter(|c| eval_p(&f, c).unwrap()).count();
                let want: usize = (min..=max).map(|k| binom(6, k)).sum();
                assert_eq!(count, want, "choose({min},{max})");
            }
        }
    }

    #[test]
    fn display() {
        let a = BoolExpr::var(&id("A"));
        let b = BoolExpr::var(&id("B"));
        let c = BoolExpr::var(&id("C"));
        let e = BoolExpr::implies(
            BoolExpr::or(a.clone(), b.clone()),
            BoolExpr::and(c.clone(), BoolExpr::not(a.clone())),
        );
        assert_eq!(e.to_string(), "A || B implies C && !A");
        let e = BoolExpr::and(BoolExpr::or(a.clone(), b.clone()), c.clone());
        assert_eq!(e.to_string(), "(A || B) && C");
        let e = BoolExpr::card(vec![a, b, c], 1, 2);
        assert_eq!(e.to_string(), "choose({A, B, C}, 1, 2)");
    }

    #[test]
    fn prop_tsv() {
        let cp = cfg(&[("A", true), ("B", false)]);
        let text = prop_config_to_tsv(&cp);
        assert_eq!(text, "A\t1\nB\t0\n");
        assert_eq!(parse_prop_config(&text).unwrap(), cp);
        assert!(parse_prop_config("A\t2").is_err());
    }
}
