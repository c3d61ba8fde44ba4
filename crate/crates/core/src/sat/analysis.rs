//! Satisfiability, dead and core features, and feature implications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::cnf::{to_cnf, Cnf, Lit};
use super::solver::Solver;
use crate::model::{FeatureId, Model};
use crate::prop::{build_formula_with, FormulaError, PropConfig, PropFormula, Translation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SatStatus {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatResult {
    pub status: SatStatus,
    /// On sat, the values of the feature variables.
    pub witness: Option<PropConfig>,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        self.status == SatStatus::Sat
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("void model: the formula has no satisfying assignment")]
    VoidModel,
}

fn witness(cnf: &Cnf, model: &[bool]) -> PropConfig {
    cnf.features().iter().cloned().zip(model.iter().copied()).collect()
}

/// Decides `cnf` under `assumptions`, temporary unit clauses.
pub fn solve(cnf: &Cnf, assumptions: &[Lit]) -> SatResult {
    match Solver::new(cnf).solve(assumptions) {
        Some(m) => SatResult {
            status: SatStatus::Sat,
            witness: Some(witness(cnf, &m)),
        },
        None => SatResult {
            status: SatStatus::Unsat,
            witness: None,
        },
    }
}

/// A model's formula and clause set, shared by the analyses.
#[derive(Debug, Clone)]
pub struct Analysis {
    formula: PropFormula,
    cnf: Cnf,
    /// Feature variables of the model's own nodes, as (name, index).
    nodes: Vec<(FeatureId, Lit)>,
}

impl Analysis {
    pub fn new(m: &Model) -> Result<Analysis, FormulaError> {
        Analysis::with_translation(m, Translation::default())
    }

    pub fn with_translation(m: &Model, t: Translation) -> Result<Analysis, FormulaError> {
        let formula = build_formula_with(m, t)?;
        let cnf = to_cnf(&formula);
        let nodes = m
            .ids()
            .into_iter()
            .map(|id| {
                let v = cnf.var_of(&id).expect("every node has a variable");
                (id, v)
            })
            .collect();
        Ok(Analysis { formula, cnf, nodes })
    }

    pub fn formula(&self) -> &PropFormula {
        &self.formula
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    pub fn sat(&self) -> SatResult {
        solve(&self.cnf, &[])
    }

    fn base_model(&self, solver: &mut Solver) -> Result<Vec<bool>, AnalysisError> {
        solver.solve(&[]).ok_or(AnalysisError::VoidModel)
    }

    /// Nodes that are false in every model, or every node value forced
    /// to `polarity`'s opposite.
    fn forced(&self, polarity: bool) -> Result<BTreeSet<FeatureId>, AnalysisError> {
        let mut solver = Solver::new(&self.cnf);
        let first = self.base_model(&mut solver)?;
        let mut open: Vec<(FeatureId, Lit)> = self
            .nodes
            .iter()
            .filter(|(_, v)| first[*v as usize - 1] != polarity)
            .cloned()
            .collect();
        let mut out = BTreeSet::new();
        while let Some((id, v)) = open.pop() {
            let lit = if polarity { v } else { -v };
            match solver.solve(&[lit]) {
                None => {
                    out.insert(id);
                }
                Some(model) => open.retain(|(_, w)| model[*w as usize - 1] != polarity),
            }
        }
        Ok(out)
    }

    /// Nodes false in every satisfying assignment.
    pub fn dead(&self) -> Result<BTreeSet<FeatureId>, AnalysisError> {
        self.forced(true)
    }

    /// Nodes true in every satisfying assignment.
    pub fn core(&self) -> Result<BTreeSet<FeatureId>, AnalysisError> {
        self.forced(false)
    }

    /// Pairs `(a, b)` of distinct non-dead nodes such that every
    /// satisfying assignment with `a` also has `b`.
    pub fn implications(&self) -> Result<BTreeSet<(FeatureId, FeatureId)>, AnalysisError> {
        let dead = self.dead()?;
        let live: Vec<(FeatureId, Lit)> = self
            .nodes
            .iter()
            .filter(|(id, _)| !dead.contains(id))
            .cloned()
            .collect();
        let edges = live
            .par_iter()
            .map_init(
                || Solver::new(&self.cnf),
                |solver, (a, va)| {
                    let model = solver.solve(&[*va]).expect("a live feature has a model");
                    let mut open: Vec<&(FeatureId, Lit)> = live
                        .iter()
                        .filter(|(b, vb)| b != a && model[*vb as usize - 1])
                        .collect();
                    let mut found = Vec::new();
                    while let Some((b, vb)) = open.pop() {
                        match solver.solve(&[*va, -vb]) {
                            None => found.push((a.clone(), b.clone())),
                            Some(m) => open.retain(|(_, w)| m[*w as usize - 1]),
                        }
                    }
                    found
                },
            )
            .flatten()
            .collect();
        Ok(edges)
    }
}

pub fn model_sat(m: &Model) -> Result<SatResult, FormulaError> {
    Ok(Analysis::new(m)?.sat())
}

pub fn dead_features(m: &Model) -> Result<BTreeSet<FeatureId>, AnalysisError> {
    Analysis::new(m)?.dead()
}

pub fn core_features(m: &Model) -> Result<BTreeSet<FeatureId>, AnalysisError> {
    Analysis::new(m)?.core()
}

pub fn implication_graph(m: &Model) -> Result<BTreeSet<(FeatureId, FeatureId)>, AnalysisError> {
    Analysis::new(m)?.implications()
}

type Edges = BTreeSet<(FeatureId, FeatureId)>;

/// The smallest relation with the same transitive closure, made canonical
/// for cycles: each set of mutually implying features becomes a cycle in
/// name order, and classes are linked through their least member.
pub fn transitive_reduction(edges: &Edges) -> Edges {
    let mut succ: BTreeMap<&FeatureId, BTreeSet<&FeatureId>> = BTreeMap::new();
    for (a, b) in edges {
        succ.entry(a).or_default().insert(b);
        succ.entry(b).or_default();
    }
    let reach: BTreeMap<&FeatureId, BTreeSet<&FeatureId>> = succ
        .keys()
        .map(|&start| {
            let mut seen = BTreeSet::new();
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &y in &succ[x] {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            (start, seen)
        })
        .collect();
    let reaches = |a: &FeatureId, b: &FeatureId| reach[a].contains(b);
    // Equivalence classes, keyed by their least member.
    let mut class: BTreeMap<&FeatureId, Vec<&FeatureId>> = BTreeMap::new();
    let mut rep: BTreeMap<&FeatureId, &FeatureId> = BTreeMap::new();
    for &x in succ.keys() {
        let r = succ
            .keys()
            .copied()
            .find(|&y| y == x || (reaches(x, y) && reaches(y, x)))
            .expect("x itself qualifies");
        rep.insert(x, r);
        class.entry(r).or_default().push(x);
    }
    let mut out = Edges::new();
    for members in class.values() {
        if members.len() > 1 {
            for (i, &a) in members.iter().enumerate() {
                let b = members[(i + 1) % members.len()];
                out.insert((a.clone(), b.clone()));
            }
        }
    }
    let reps: Vec<&FeatureId> = class.keys().copied().collect();
    for &x in &reps {
        for &y in &reps {
            if x == y || !reaches(x, y) {
                continue;
            }
            let via = reps.iter().any(|&z| z != x && z != y && reaches(x, z) && reaches(z, y));
            if !via {
                out.insert((x.clone(), y.clone()));
            }
        }
    }
    debug_assert!(rep.len() == succ.len());
    out
}

/// The edges as a DOT digraph.
pub fn to_dot(edges: &Edges) -> String {
    let mut out = String::from("digraph implications {\n");
    for (a, b) in edges {
        let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
    }
    out.push_str("}\n");
    out
}
