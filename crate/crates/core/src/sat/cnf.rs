//! Clause sets and the Tseitin-style encoding of propositional formulas.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::model::FeatureId;
use crate::prop::{BinOp, BoolExpr, PropFormula};

/// A literal in DIMACS convention: a non-zero signed variable index.
pub type Lit = i32;

/// Conjunctive normal form over variables `1..=num_vars`. The first
/// variables are features, in name order; the rest are auxiliaries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    features: Vec<FeatureId>,
}

impl Cnf {
    /// An empty clause set over `num_vars` anonymous variables.
    pub fn new(num_vars: usize) -> Cnf {
        Cnf {
            num_vars,
            clauses: Vec::new(),
            features: Vec::new(),
        }
    }

    /// An empty clause set whose first variables are the given features.
    pub fn with_features(features: Vec<FeatureId>) -> Cnf {
        Cnf {
            num_vars: features.len(),
            clauses: Vec::new(),
            features,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn features(&self) -> &[FeatureId] {
        &self.features
    }

    pub fn var_of(&self, id: &FeatureId) -> Option<Lit> {
        self.features.binary_search(id).ok().map(|i| i as Lit + 1)
    }

    /// The name of variable `v`: a feature, or `aux<v>`.
    pub fn var_name(&self, v: usize) -> String {
        match self.features.get(v.wrapping_sub(1)) {
            Some(id) => id.to_string(),
            None => format!("aux{v}"),
        }
    }

    pub fn fresh_var(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    /// Adds a clause, sorted by variable and without repeated literals.
    /// Tautologies are dropped. Returns whether the clause was kept.
    ///
    /// # Panics
    /// On a literal 0 or one beyond `num_vars`.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) -> bool {
        let mut c: Vec<Lit> = lits.into_iter().collect();
        for &l in &c {
            assert!(
                l != 0 && l.unsigned_abs() as usize <= self.num_vars,
                "literal {l} out of range"
            );
        }
        c.sort_by_key(|l| (l.abs(), *l));
        c.dedup();
        if c.windows(2).any(|w| w[0] == -w[1]) {
            return false;
        }
        self.clauses.push(c);
        true
    }

    /// Truth of every clause under `assignment`, indexed by variable - 1.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }
}

/// Encodes a formula; its satisfying assignments, restricted to feature
/// variables, are exactly the models of the formula.
pub fn to_cnf(f: &PropFormula) -> Cnf {
    let features: Vec<FeatureId> = f.variables().map(|(id, _)| id.clone()).collect();
    let exprs: Vec<&BoolExpr> = f.constraints().iter().map(|c| &c.expr).collect();
    exprs_to_cnf(features, exprs)
}

/// Encodes the conjunction of `exprs` over the given feature variables.
///
/// # Panics
/// If an expression mentions a variable that is not listed.
pub fn exprs_to_cnf<'a>(mut features: Vec<FeatureId>, exprs: impl IntoIterator<Item = &'a BoolExpr>) -> Cnf {
    features.sort();
    features.dedup();
    let mut enc = Encoder {
        vars: features
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as Lit + 1))
            .collect(),
        cnf: Cnf::with_features(features),
        cache: HashMap::new(),
        seen: HashSet::new(),
    };
    for e in exprs {
        let clauses = enc.clauses(e, true);
        for c in clauses {
            enc.emit(c);
        }
    }
    enc.cnf
}

/// Largest clause count produced by distributing a disjunction over its
/// parts before they are replaced by definitions.
const DISTRIBUTE_LIMIT: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Enc {
    Const(bool),
    Lit(Lit),
}

impl Enc {
    fn negate(self) -> Enc {
        match self {
            Enc::Const(b) => Enc::Const(!b),
            Enc::Lit(l) => Enc::Lit(-l),
        }
    }
}

struct Encoder {
    vars: BTreeMap<FeatureId, Lit>,
    cnf: Cnf,
    cache: HashMap<BoolExpr, Enc>,
    seen: HashSet<Vec<Lit>>,
}

type Clauses = Vec<Vec<Lit>>;

impl Encoder {
    fn emit(&mut self, c: Vec<Lit>) {
        let mut c = c;
        c.sort_by_key(|l| (l.abs(), *l));
        c.dedup();
        if self.seen.insert(c.clone()) {
            self.cnf.add_clause(c);
        }
    }

    fn define(&mut self, clauses: Clauses) {
        for c in clauses {
            self.emit(c);
        }
    }

    /// A clause set equivalent to `e` (or its negation) over the feature
    /// variables plus definitions.
    fn clauses(&mut self, e: &BoolExpr, pos: bool) -> Clauses {
        match e {
            BoolExpr::Const(b) => {
                if *b == pos {
                    vec![]
                } else {
                    vec![vec![]]
                }
            }
            BoolExpr::Var(_) => self.unit(e, pos),
            BoolExpr::Not(a) => self.clauses(a, !pos),
            BoolExpr::And(items) if pos => items.iter().flat_map(|i| self.clauses(i, true)).collect(),
            BoolExpr::Or(items) if !pos => items.iter().flat_map(|i| self.clauses(i, false)).collect(),
            BoolExpr::And(items) | BoolExpr::Or(items) => {
                let parts: Vec<(&BoolExpr, bool)> = items.iter().map(|i| (i, pos)).collect();
                self.disjunction(&parts)
            }
            BoolExpr::Binary(op, a, b) => match (op, pos) {
                (BinOp::And, true) | (BinOp::Or, false) => {
                    let mut out = self.clauses(a, pos);
                    out.extend(self.clauses(b, pos));
                    out
                }
                (BinOp::And, false) | (BinOp::Or, true) => self.disjunction(&[(a, pos), (b, pos)]),
                (BinOp::Implies, true) => self.disjunction(&[(a, false), (b, true)]),
                (BinOp::Implies, false) => {
                    let mut out = self.clauses(a, true);
                    out.extend(self.clauses(b, false));
                    out
                }
                (BinOp::Eqv, _) => {
                    // a ⟺ b is (¬a ∨ b) ∧ (a ∨ ¬b); its negation is a ⟺ ¬b.
                    let la = self.encode(a);
                    let lb = self.encode(b);
                    let lb = if pos { lb } else { lb.negate() };
                    let mut out = Vec::new();
                    out.extend(or_clause(&[la.negate(), lb]));
                    out.extend(or_clause(&[la, lb.negate()]));
                    out
                }
            },
            BoolExpr::Card { operands, min, max } if pos && *min == 1 && *max == 1 => {
                let lits: Vec<Enc> = operands.iter().map(|o| self.encode(o)).collect();
                let mut out: Clauses = or_clause(&lits).into_iter().collect();
                for i in 0..lits.len() {
                    for j in i + 1..lits.len() {
                        out.extend(or_clause(&[lits[i].negate(), lits[j].negate()]));
                    }
                }
                out
            }
            BoolExpr::Card { .. } => self.unit(e, pos),
        }
        .into_iter()
        .filter_map(simplify_clause)
        .collect()
    }

    fn disjunction(&mut self, parts: &[(&BoolExpr, bool)]) -> Clauses {
        let mut sets: Vec<Clauses> = parts.iter().map(|(e, p)| self.clauses(e, *p)).collect();
        if sets.iter().any(Vec::is_empty) {
            return vec![];
        }
        let size = sets.iter().fold(1usize, |acc, s| acc.saturating_mul(s.len()));
        if size > DISTRIBUTE_LIMIT {
            for (set, (e, p)) in sets.iter_mut().zip(parts) {
                if set.len() > 1 {
                    let l = self.encode(e);
                    let l = if *p { l } else { l.negate() };
                    *set = or_clause(&[l]).into_iter().collect();
                    if set.is_empty() {
                        return vec![];
                    }
                }
            }
        }
        let mut acc: Clauses = vec![vec![]];
        for set in sets {
            let mut next = Vec::with_capacity(acc.len() * set.len());
            for a in &acc {
                for s in &set {
                    let mut c = a.clone();
                    c.extend_from_slice(s);
                    next.push(c);
                }
            }
            acc = next;
        }
        acc
    }

    fn unit(&mut self, e: &BoolExpr, pos: bool) -> Clauses {
        let l = self.encode(e);
        let l = if pos { l } else { l.negate() };
        or_clause(&[l]).into_iter().collect()
    }

    /// A literal equivalent to `e`, defined by fresh clauses as needed.
    fn encode(&mut self, e: &BoolExpr) -> Enc {
        if let Some(&hit) = self.cache.get(e) {
            return hit;
        }
        let out = match e {
            BoolExpr::Const(b) => Enc::Const(*b),
            BoolExpr::Var(x) => Enc::Lit(*self.vars.get(x).unwrap_or_else(|| panic!("unknown variable {x}"))),
            BoolExpr::Not(a) => self.encode(a).negate(),
            BoolExpr::And(items) => {
                let lits: Vec<Enc> = items.iter().map(|i| self.encode(i)).collect();
                self.and_gate(lits)
            }
            BoolExpr::Or(items) => {
                let lits: Vec<Enc> = items.iter().map(|i| self.encode(i).negate()).collect();
                self.and_gate(lits).negate()
            }
            BoolExpr::Binary(op, a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                match op {
                    BinOp::And => self.and_gate(vec![la, lb]),
                    BinOp::Or => self.and_gate(vec![la.negate(), lb.negate()]).negate(),
                    BinOp::Implies => self.and_gate(vec![la, lb.negate()]).negate(),
                    BinOp::Eqv => self.eqv_gate(la, lb),
                }
            }
            BoolExpr::Card { operands, min, max } => {
                let lits: Vec<Enc> = operands.iter().map(|o| self.encode(o)).collect();
                self.card_gate(lits, *min, *max)
            }
        };
        self.cache.insert(e.clone(), out);
        out
    }

    fn and_gate(&mut self, inputs: Vec<Enc>) -> Enc {
        let mut lits = Vec::new();
        for i in inputs {
            match i {
                Enc::Const(false) => return Enc::Const(false),
                Enc::Const(true) => {}
                Enc::Lit(l) => lits.push(l),
            }
        }
        lits.sort_by_key(|l| (l.abs(), *l));
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == -w[1]) {
            return Enc::Const(false);
        }
        match lits.as_slice() {
            [] => return Enc::Const(true),
            [l] => return Enc::Lit(*l),
            _ => {}
        }
        let g = self.cnf.fresh_var();
        let mut defs: Clauses = lits.iter().map(|&l| vec![-g, l]).collect();
        defs.push(std::iter::once(g).chain(lits.iter().map(|&l| -l)).collect());
        self.define(defs);
        Enc::Lit(g)
    }

    fn eqv_gate(&mut self, a: Enc, b: Enc) -> Enc {
        match (a, b) {
            (Enc::Const(x), o) | (o, Enc::Const(x)) => {
                if x {
                    o
                } else {
                    o.negate()
                }
            }
            (Enc::Lit(x), Enc::Lit(y)) if x == y => Enc::Const(true),
            (Enc::Lit(x), Enc::Lit(y)) if x == -y => Enc::Const(false),
            (Enc::Lit(x), Enc::Lit(y)) => {
                let g = self.cnf.fresh_var();
                self.define(vec![vec![-g, -x, y], vec![-g, x, -y], vec![g, x, y], vec![g, -x, -y]]);
                Enc::Lit(g)
            }
        }
    }

    /// Sequential counter: `s[j]` after input `i` holds iff at least `j + 1`
    /// of the first `i` inputs hold.
    fn card_gate(&mut self, inputs: Vec<Enc>, min: usize, max: usize) -> Enc {
        let mut lits = Vec::new();
        let (mut min, mut max) = (min, max);
        for i in inputs {
            match i {
                Enc::Const(true) => {
                    if max == 0 {
                        return Enc::Const(false);
                    }
                    min = min.saturating_sub(1);
                    max -= 1;
                }
                Enc::Const(false) => {}
                Enc::Lit(l) => lits.push(l),
            }
        }
        let n = lits.len();
        let max = max.min(n);
        if min > max {
            return Enc::Const(false);
        }
        if min == 0 && max == n {
            return Enc::Const(true);
        }
        let width = (max + 1).min(n);
        let mut s: Vec<Enc> = vec![Enc::Const(false); width];
        for &x in &lits {
            let mut next = Vec::with_capacity(width);
            for j in 0..width {
                let carry = if j == 0 { Enc::Const(true) } else { s[j - 1] };
                let with_x = self.and_gate(vec![Enc::Lit(x), carry]);
                next.push(self.and_gate(vec![s[j].negate(), with_x.negate()]).negate());
            }
            s = next;
        }
        let at_least = |k: usize| if k == 0 { Enc::Const(true) } else { s[k - 1] };
        let upper = if max >= n {
            Enc::Const(true)
        } else {
            at_least(max + 1).negate()
        };
        self.and_gate(vec![at_least(min), upper])
    }
}

fn or_clause(lits: &[Enc]) -> Option<Vec<Lit>> {
    let mut out = Vec::new();
    for l in lits {
        match l {
            Enc::Const(true) => return None,
            Enc::Const(false) => {}
            Enc::Lit(l) => out.push(*l),
        }
    }
    Some(out)
}

fn simplify_clause(mut c: Vec<Lit>) -> Option<Vec<Lit>> {
    c.sort_by_key(|l| (l.abs(), *l));
    c.dedup();
    if c.windows(2).any(|w| w[0] == -w[1]) {
        None
    } else {
        Some(c)
    }
}
