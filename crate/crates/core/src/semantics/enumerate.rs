//! Brute-force enumeration of accepted configurations over a finite data
//! domain, used as a reference oracle.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use super::config::{Configuration, Valuation};
use super::denote::accepts;
use super::eval::Evaluator;
use crate::model::{FeatureId, Model};
use crate::value::DataValue;

pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "CDLSEM_BUDGET";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{candidates} candidate configurations exceed the budget of {budget}")]
    TooLarge { candidates: u128, budget: u64 },
}

/// The budget from `CDLSEM_BUDGET`, or [`DEFAULT_BUDGET`] when unset or
/// unparsable.
pub fn default_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

/// Candidate valuations for each feature of the universe.
///
/// Choices that fail a check local to the feature are left out, since no
/// accepted configuration contains them: unloaded features are disabled
/// with data `"0"`, flavors none and data have enabled value 1, and flavors
/// bool and none carry the fixed data value `"1"`.
fn choices(m: &Model, domain: &BTreeSet<DataValue>) -> Vec<(FeatureId, Vec<Valuation>)> {
    m.universe()
        .into_iter()
        .map(|id| {
            let mut out = Vec::new();
            match m.get(&id) {
                None => {
                    for value in [false, true] {
                        out.push(Valuation::new(false, value, "0"));
                    }
                }
                Some(n) => {
                    let values: &[bool] = if n.flavor.is_mandatory() {
                        &[true]
                    } else {
                        &[false, true]
                    };
                    let data: Vec<DataValue> = if n.flavor.has_fixed_data() {
                        vec![DataValue::one()]
                    } else {
                        domain.iter().cloned().collect()
                    };
                    for state in [false, true] {
                        for &value in values {
                            for d in &data {
                                out.push(Valuation::new(state, value, d.clone()));
                            }
                        }
                    }
                }
            }
            (id, out)
        })
        .collect()
}

/// Size of the candidate space searched for `m` over `domain`.
pub fn candidate_count(m: &Model, domain: &[DataValue]) -> u128 {
    let domain: BTreeSet<DataValue> = domain.iter().cloned().collect();
    choices(m, &domain)
        .iter()
        .fold(1u128, |acc, (_, c)| acc.saturating_mul(c.len() as u128))
}

/// Every accepted configuration whose data values come from `domain`,
/// sorted. Uses [`default_budget`].
pub fn enumerate_configurations(m: &Model, domain: &[DataValue]) -> Result<Vec<Configuration>, OracleError> {
    enumerate_with_budget(m, domain, default_budget())
}

pub fn enumerate_with_budget(m: &Model, domain: &[DataValue], budget: u64) -> Result<Vec<Configuration>, OracleError> {
    let domain: BTreeSet<DataValue> = domain.iter().cloned().collect();
    let table = choices(m, &domain);
    let candidates = table
        .iter()
        .fold(1u128, |acc, (_, c)| acc.saturating_mul(c.len() as u128));
    if candidates > u128::from(budget) {
        return Err(OracleError::TooLarge { candidates, budget });
    }
    let unloaded: Vec<FeatureId> = m.unloaded().into_iter().collect();
    let total = candidates as u64;
    let mut found: Vec<Configuration> = (0..total)
        .into_par_iter()
        .filter_map(|index| {
            let c = decode(&table, index);
            accepts(&Evaluator::new(m, &c), &unloaded).then_some(c)
        })
        .collect();
    found.sort();
    Ok(found)
}

fn decode(table: &[(FeatureId, Vec<Valuation>)], mut index: u64) -> Configuration {
    table
        .iter()
        .map(|(id, options)| {
            let n = options.len() as u64;
            let pick = &options[(index % n) as usize];
            index /= n;
            (id.clone(), pick.clone())
        })
        .collect()
}
