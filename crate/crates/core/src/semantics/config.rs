use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::model::{FeatureId, Parent};
use crate::value::DataValue;

/// The triple assigned to one feature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Valuation {
    /// Whether the feature is effectively part of the build.
    pub state: bool,
    /// The user's on/off choice.
    pub value: bool,
    pub data: DataValue,
}

impl Valuation {
    pub fn new(state: bool, value: bool, data: impl Into<DataValue>) -> Self {
        Valuation {
            state,
            value,
            data: data.into(),
        }
    }

    /// `(0, 0, "0")`, used for features a configuration file leaves out.
    pub fn off() -> Self {
        Valuation::new(false, false, "0")
    }

    /// The root's fixed valuation `(1, 1, "1")`.
    pub fn root() -> Self {
        Valuation::new(true, true, "1")
    }
}

/// A full configuration. The root is implicit and always `(1, 1, "1")`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    entries: BTreeMap<FeatureId, Valuation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: feature {id} assigned twice")]
    Duplicate { line: usize, id: FeatureId },
}

fn parse_bit(s: &str) -> Option<bool> {
    match s.trim() {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

impl Configuration {
    pub fn new() -> Self {
        Configuration::default()
    }

    pub fn set(&mut self, id: FeatureId, v: Valuation) {
        self.entries.insert(id, v);
    }

    pub fn with(mut self, name: &str, state: bool, value: bool, data: &str) -> Self {
        let id = FeatureId::new(name).expect("valid feature name");
        self.set(id, Valuation::new(state, value, data));
        self
    }

    pub fn get(&self, id: &FeatureId) -> Option<&Valuation> {
        self.entries.get(id)
    }

    pub fn parent_state(&self, p: &Parent) -> Option<bool> {
        match p {
            Parent::Root => Some(true),
            Parent::Node(id) => self.get(id).map(|v| v.state),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeatureId, &Valuation)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ids of `universe` without an entry.
    pub fn missing(&self, universe: &BTreeSet<FeatureId>) -> Vec<FeatureId> {
        universe
            .iter()
            .filter(|id| !self.entries.contains_key(*id))
            .cloned()
            .collect()
    }

    /// Gives every missing id of `universe` the valuation `(0, 0, "0")` and
    /// returns the ids filled in.
    pub fn fill_defaults(&mut self, universe: &BTreeSet<FeatureId>) -> Vec<FeatureId> {
        let missing = self.missing(universe);
        for id in &missing {
            self.entries.insert(id.clone(), Valuation::off());
        }
        missing
    }

    /// Reads `id<TAB>state<TAB>value<TAB>data` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_tsv(text: &str) -> Result<Configuration, ConfigError> {
        let mut c = Configuration::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.strip_suffix('\r').unwrap_or(raw);
            if l.trim().is_empty() || l.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = l.splitn(4, '\t').collect();
            let syntax = |message: String| ConfigError::Syntax { line, message };
            if fields.len() < 3 {
                return Err(syntax(format!(
                    "expected id, state, value and data separated by tabs, got {:?}",
                    l
                )));
            }
            let id = FeatureId::new(fields[0].trim()).map_err(|e| syntax(e.to_string()))?;
            let state =
                parse_bit(fields[1]).ok_or_else(|| syntax(format!("state must be 0 or 1, got {:?}", fields[1])))?;
            let value =
                parse_bit(fields[2]).ok_or_else(|| syntax(format!("value must be 0 or 1, got {:?}", fields[2])))?;
            let data = fields.get(3).copied().unwrap_or("");
            if c.entries.contains_key(&id) {
                return Err(ConfigError::Duplicate { line, id });
            }
            c.set(id, Valuation::new(state, value, data));
        }
        Ok(c)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, v) in &self.entries {
            let _ = writeln!(out, "{id}\t{}\t{}\t{}", u8::from(v.state), u8::from(v.value), v.data);
        }
        out
    }
}

impl FromIterator<(FeatureId, Valuation)> for Configuration {
    fn from_iter<T: IntoIterator<Item = (FeatureId, Valuation)>>(iter: T) -> Self {
        Configuration {
            entries: iter.into_iter().collect(),
        }
    }
}
