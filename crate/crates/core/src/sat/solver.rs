//! A conflict-driven clause-learning SAT solver with assumptions.
//!
//! Two watched literals, first-UIP learning, activity-based branching with
//! phase saving, and Luby restarts. Learned clauses are kept, so one solver
//! can answer many assumption queries over the same clause set.

use super::cnf::{Cnf, Lit};

/// Internal literal: `2 * var + sign`, with variables from 0.
type L = u32;

fn to_internal(l: Lit) -> L {
    let v = l.unsigned_abs() - 1;
    2 * v + u32::from(l < 0)
}

fn var(l: L) -> usize {
    (l >> 1) as usize
}

fn neg(l: L) -> L {
    l ^ 1
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Val {
    True,
    False,
    Unset,
}

#[derive(Debug, Clone)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<L>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<Val>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<L>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    /// The clause set is unsatisfiable regardless of assumptions.
    inconsistent: bool,
}

impl Solver {
    pub fn new(cnf: &Cnf) -> Solver {
        let n = cnf.num_vars();
        let mut s = Solver {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assign: vec![Val::Unset; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            phase: vec![false; n],
            seen: vec![false; n],
            inconsistent: false,
        };
        let mut units = Vec::new();
        for c in cnf.clauses() {
            s.add_clause(c, &mut units);
        }
        for l in units {
            match s.value(l) {
                Val::True => {}
                Val::False => s.inconsistent = true,
                Val::Unset => s.enqueue(l, None),
            }
        }
        if !s.inconsistent && s.propagate().is_some() {
            s.inconsistent = true;
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn add_clause(&mut self, c: &[Lit], units: &mut Vec<L>) {
        let mut lits: Vec<L> = c.iter().map(|&l| to_internal(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == neg(w[1])) {
            return;
        }
        match lits.len() {
            0 => self.inconsistent = true,
            1 => units.push(lits[0]),
            _ => {
                let ci = self.clauses.len();
                self.watches[lits[0] as usize].push(ci);
                self.watches[lits[1] as usize].push(ci);
                self.clauses.push(lits);
            }
        }
    }

    fn value(&self, l: L) -> Val {
        match self.assign[var(l)] {
            Val::Unset => Val::Unset,
            Val::True if l & 1 == 0 => Val::True,
            Val::False if l & 1 == 1 => Val::True,
            _ => Val::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: L, reason: Option<usize>) {
        let v = var(l);
        self.assign[v] = if l & 1 == 0 { Val::True } else { Val::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause if one arises.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = neg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                if value_of(&self.assign, first) == Val::True {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if value_of(&self.assign, c[k]) != Val::False {
                        c.swap(1, k);
                        self.watches[c[1] as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                if value_of(&self.assign, first) == Val::False {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis: the learned clause, asserting literal
    /// first, and the level to backjump to.
    fn analyze(&mut self, conflict: usize) -> (Vec<L>, u32) {
        let dl = self.decision_level();
        let mut learnt: Vec<L> = vec![0];
        let mut pending = 0usize;
        let mut clause = conflict;
        let mut skip: Option<L> = None;
        let mut idx = self.trail.len();
        let p = loop {
            let lits = self.clauses[clause].clone();
            for &q in &lits {
                if Some(q) == skip {
                    continue;
                }
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] == dl {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let p = self.trail[idx];
            self.seen[var(p)] = false;
            pending -= 1;
            if pending == 0 {
                break p;
            }
            clause = self.reason[var(p)].expect("implied literal has a reason");
            skip = Some(p);
        };
        learnt[0] = neg(p);
        for &q in &learnt[1..] {
            self.seen[var(q)] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[var(learnt[k])] > self.level[var(learnt[best])] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            bt = self.level[var(learnt[1])];
        }
        (learnt, bt)
    }

    fn backtrack(&mut self, to: u32) {
        if self.decision_level() <= to {
            return;
        }
        let start = self.trail_lim[to as usize];
        for &l in &self.trail[start..] {
            let v = var(l);
            self.phase[v] = l & 1 == 0;
            self.assign[v] = Val::Unset;
            self.reason[v] = None;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(to as usize);
        self.qhead = start;
    }

    fn pick_branch(&self) -> Option<L> {
        let mut best: Option<usize> = None;
        for v in 0..self.num_vars {
            if self.assign[v] == Val::Unset && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best.map(|v| 2 * v as u32 + u32::from(!self.phase[v]))
    }

    /// Decides satisfiability with `assumptions` as temporary unit clauses.
    /// Returns a model, indexed by variable - 1, if there is one.
    ///
    /// # Panics
    /// On an assumption literal 0 or beyond the variable count.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        for &a in assumptions {
            assert!(
                a != 0 && a.unsigned_abs() as usize <= self.num_vars,
                "assumption {a} out of range"
            );
        }
        self.backtrack(0);
        if self.inconsistent {
            return None;
        }
        let assumptions: Vec<L> = assumptions.iter().map(|&a| to_internal(a)).collect();
        let mut restart = 1u64;
        let mut budget = luby(restart) * 100;
        loop {
            if let Some(conflict) = self.propagate() {
                if self.decision_level() == 0 {
                    self.inconsistent = true;
                    return None;
                }
                let (learnt, bt) = self.analyze(conflict);
                self.backtrack(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let ci = self.clauses.len();
                    self.watches[learnt[0] as usize].push(ci);
                    self.watches[learnt[1] as usize].push(ci);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(first, Some(ci));
                }
                self.var_inc /= 0.95;
                budget = budget.saturating_sub(1);
                continue;
            }
            if budget == 0 {
                restart += 1;
                budget = luby(restart) * 100;
                self.backtrack(0);
                continue;
            }
            let dl = self.decision_level() as usize;
            if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.value(a) {
                    Val::True => self.trail_lim.push(self.trail.len()),
                    Val::False => {
                        self.backtrack(0);
                        return None;
                    }
                    Val::Unset => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            match self.pick_branch() {
                None => {
                    let model = self.assign.iter().map(|&v| v == Val::True).collect();
                    self.backtrack(0);
                    return Some(model);
                }
                Some(l) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, None);
                }
            }
        }
    }
}

fn value_of(assign: &[Val], l: L) -> Val {
    match assign[var(l)] {
        Val::Unset => Val::Unset,
        Val::True if l & 1 == 0 => Val::True,
        Val::False if l & 1 == 1 => Val::True,
        _ => Val::False,
    }
}

/// The Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ...
fn luby(i: u64) -> u64 {
    let mut k = 1u32;
    while (1u64 << k) - 1 < i {
        k += 1;
    }
    let mut i = i;
    loop {
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
        k = 1;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
    }
}
