//! DIMACS CNF text, with `c var <index> <name>` comments naming features.

use std::fmt::Write;

use thiserror::Error;

use super::cnf::{Cnf, Lit};
use crate::model::FeatureId;

pub fn export_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    for (i, id) in cnf.features().iter().enumerate() {
        let _ = writeln!(out, "c var {} {}", i + 1, id);
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.clauses().len());
    for c in cnf.clauses() {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
}

/// Parses DIMACS CNF. Feature names are recovered from `c var` comments,
/// which must number features consecutively from 1.
pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let syntax = |line: usize, message: String| DimacsError::Syntax { line, message };
    let mut features: Vec<FeatureId> = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() || line == "%" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if let ["var", index, name] = words.as_slice() {
                let index: usize = index
                    .parse()
                    .map_err(|_| syntax(line_no, format!("bad index {index}")))?;
                if index != features.len() + 1 {
                    return Err(syntax(line_no, format!("variable {index} is out of sequence")));
                }
                let id = FeatureId::new(name).map_err(|e| syntax(line_no, e.to_string()))?;
                features.push(id);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            let ["cnf", v, c] = words.as_slice() else {
                return Err(syntax(line_no, "expected `p cnf <vars> <clauses>`".into()));
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| syntax(line_no, format!("bad count {s}")))
            };
            if header.is_some() {
                return Err(syntax(line_no, "duplicate header".into()));
            }
            header = Some((parse(v)?, parse(c)?));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(DimacsError::MissingHeader);
        };
        for word in line.split_whitespace() {
            let l: Lit = word
                .parse()
                .map_err(|_| syntax(line_no, format!("bad literal {word}")))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if l.unsigned_abs() as usize > vars {
                return Err(syntax(line_no, format!("literal {l} exceeds {vars} variables")));
            } else {
                current.push(l);
            }
        }
    }
    let Some((vars, declared)) = header else {
        return Err(DimacsError::MissingHeader);
    };
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    if features.len() > vars {
        return Err(syntax(
            0,
            format!("{} named variables but only {vars} declared", features.len()),
        ));
    }
    let mut cnf = Cnf::with_features(features);
    while cnf.num_vars() < vars {
        cnf.fresh_var();
    }
    for c in clauses {
        cnf.add_clause(c);
    }
    Ok(cnf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = FeatureId::new("a").unwrap();
        let b = FeatureId::new("b").unwrap();
        let cnf = Cnf::with_features(vec![a.clone()]);
        assert_eq!(export_dimacs(&cnf), "c var 1 a\np cnf 1 0\n");
        let mut cnf = Cnf::with_features(vec![a.clone()]);
        cnf.add_clause([1]);
        assert_eq!(export_dimacs(&cnf), "c var 1 a\np cnf 1 1\n1 0\n");
        let mut cnf = Cnf::with_features(vec![a, b]);
        cnf.add_clause([-2, 1]);
        assert!(export_dimacs(&cnf).ends_with("\n1 -2 0\n"));
        assert_eq!(export_dimacs(&Cnf::new(0)), "p cnf 0 0\n");
    }

    #[test]
    fn round_trip() {
        let mut cnf = Cnf::with_features(vec![FeatureId::new("x").unwrap()]);
        cnf.fresh_var();
        cnf.add_clause([1, -2]);
        cnf.add_clause([2]);
        cnf.add_clause([]);
        let text = export_dimacs(&cnf);
        assert_eq!(parse_dimacs(&text).unwrap(), cnf);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_dimacs("1 0\n"), Err(DimacsError::MissingHeader));
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n2 0\n"),
            Err(DimacsError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 1 2\n1 0\n"),
            Err(DimacsError::ClauseCount { .. })
        ));
        let multi = parse_dimacs("p cnf 3 1\n1 2\n3 0\n").unwrap();
        assert_eq!(multi.clauses(), &[vec![1, 2, 3]]);
    }
}
