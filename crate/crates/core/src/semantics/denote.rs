//! Node denotations and configuration validation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::config::Configuration;
use super::eval::{BuiltinPolicy, Evaluator};
use crate::model::{FeatureId, Flavor, Model, Node, Violation};
use crate::value::{to_bool, values_equal, DataValue};

/// Which part of a node's meaning a failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Node,
    Flavor,
    Calculated,
    LegalValues,
    Interface,
    Unloaded,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Node => "node",
            Family::Flavor => "flavor",
            Family::Calculated => "calculated",
            Family::LegalValues => "legal_values",
            Family::Interface => "interface",
            Family::Unloaded => "unloaded",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub node: FeatureId,
    pub family: Family,
    pub explanation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<Failure>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn verdict(&self) -> Verdict {
        if self.accepted() {
            Verdict::Accepted
        } else {
            Verdict::Rejected
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("configuration lacks {}", list_ids(.0))]
    Incomplete(Vec<FeatureId>),
    #[error("model is not well-formed: {}", .0.iter().map(|v| format!("{} ({})", v.node, v.rule)).collect::<Vec<_>>().join(", "))]
    IllFormed(Vec<Violation>),
}

fn list_ids(ids: &[FeatureId]) -> String {
    ids.iter().map(FeatureId::as_str).collect::<Vec<_>>().join(", ")
}

type Check = Result<(), String>;

fn bit(b: bool) -> u8 {
    u8::from(b)
}

fn check_node(ev: &Evaluator<'_>, n: &Node) -> Check {
    let c = ev.config();
    let Some(v) = c.get(&n.name) else {
        return Err(format!("{} is not assigned", n.name));
    };
    let Some(parent) = c.parent_state(&n.parent) else {
        return Err(format!("parent {} is not assigned", n.parent));
    };
    let mut false_constraint = None;
    for e in n.constraints() {
        match ev.truth(e) {
            Ok(true) => {}
            Ok(false) => {
                false_constraint.get_or_insert_with(|| e.to_string());
            }
            Err(err) => return Err(format!("evaluating {e}: {err}")),
        }
    }
    let expected = parent && v.value && false_constraint.is_none();
    if v.state == expected {
        return Ok(());
    }
    if v.state {
        let reason = if !parent {
            format!("its parent {} is disabled", n.parent)
        } else if !v.value {
            "its enabled value is 0".to_string()
        } else {
            format!("constraint {} is false", false_constraint.unwrap_or_default())
        };
        Err(format!("enabled state is 1 but {reason}"))
    } else {
        Err(
            "enabled state is 0 although the parent is enabled, the enabled value is 1 and every constraint holds"
                .into(),
        )
    }
}

fn check_flavor(ev: &Evaluator<'_>, n: &Node) -> Check {
    let Some(v) = ev.config().get(&n.name) else {
        return Ok(());
    };
    if n.flavor.is_mandatory() && !v.value {
        Err(format!("flavor {} requires enabled value 1", n.flavor))
    } else {
        Ok(())
    }
}

fn check_calculated(ev: &Evaluator<'_>, n: &Node) -> Check {
    let (Some(cl), Some(v)) = (&n.calculated, ev.config().get(&n.name)) else {
        return Ok(());
    };
    let r = ev.eval(cl).map_err(|err| format!("evaluating {cl}: {err}"))?;
    match n.flavor {
        Flavor::None => Ok(()),
        Flavor::Bool => {
            if v.value == to_bool(&r) {
                Ok(())
            } else {
                Err(format!("enabled value is {} but {cl} evaluates to {r:?}", bit(v.value)))
            }
        }
        Flavor::BoolData | Flavor::Data => {
            if !values_equal(&v.data, &r) {
                Err(format!(
                    "data value is {:?} but {cl} evaluates to {r:?}",
                    v.data.as_str()
                ))
            } else if n.flavor == Flavor::BoolData && v.value != to_bool(&v.data) {
                Err(format!(
                    "enabled value is {} but the calculated data is {r:?}",
                    bit(v.value)
                ))
            } else {
                Ok(())
            }
        }
    }
}

fn check_legal_values(ev: &Evaluator<'_>, n: &Node) -> Check {
    let (Some(lv), Some(v)) = (&n.legal_values, ev.config().get(&n.name)) else {
        return Ok(());
    };
    if !matches!(n.flavor, Flavor::BoolData | Flavor::Data) {
        return Ok(());
    }
    match ev.satisfies_legal(&v.data, lv) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("data value {:?} is not in {lv}", v.data.as_str())),
        Err(err) => Err(format!("evaluating {lv}: {err}")),
    }
}

fn check_interface(ev: &Evaluator<'_>, n: &Node) -> Check {
    let Some(v) = ev.config().get(&n.name) else {
        return Ok(());
    };
    if !n.is_interface() {
        return Ok(());
    }
    let k = impls(&n.name, ev.config(), ev.model()).len();
    let count = DataValue::from(k as i64);
    match n.flavor {
        Flavor::None => Ok(()),
        Flavor::Bool => {
            if v.value == (k > 0) {
                Ok(())
            } else {
                Err(format!(
                    "enabled value is {} but {k} implementors are enabled",
                    bit(v.value)
                ))
            }
        }
        Flavor::BoolData | Flavor::Data => {
            if !values_equal(&v.data, &count) {
                Err(format!(
                    "data value is {:?} but {k} implementors are enabled",
                    v.data.as_str()
                ))
            } else if n.flavor == Flavor::BoolData && v.value != to_bool(&v.data) {
                Err(format!(
                    "enabled value is {} but the data value is {:?}",
                    bit(v.value),
                    v.data.as_str()
                ))
            } else {
                Ok(())
            }
        }
    }
}

/// Enabled nodes of `m` that list `n` as implemented.
pub fn impls(n: &FeatureId, c: &Configuration, m: &Model) -> BTreeSet<FeatureId> {
    m.nodes()
        .filter(|x| x.implements.contains(n) && c.get(&x.name).is_some_and(|v| v.state))
        .map(|x| x.name.clone())
        .collect()
}

pub fn node_holds(n: &Node, c: &Configuration, m: &Model) -> bool {
    check_node(&Evaluator::new(m, c), n).is_ok()
}

pub fn flavor_holds(n: &Node, c: &Configuration) -> bool {
    check_flavor(&Evaluator::new(&Model::empty(), c), n).is_ok()
}

pub fn calculated_holds(n: &Node, c: &Configuration, m: &Model) -> bool {
    check_calculated(&Evaluator::new(m, c), n).is_ok()
}

pub fn legal_values_holds(n: &Node, c: &Configuration, m: &Model) -> bool {
    check_legal_values(&Evaluator::new(m, c), n).is_ok()
}

pub fn interface_holds(n: &Node, c: &Configuration, m: &Model) -> bool {
    check_interface(&Evaluator::new(m, c), n).is_ok()
}

/// Checks every node denotation and that unloaded features are disabled.
pub fn validate_configuration(m: &Model, c: &Configuration) -> Result<ValidationReport, ValidationError> {
    validate_with(Evaluator::new(m, c))
}

/// [`validate_configuration`] with a custom builtin policy.
pub fn validate_with_policy(
    m: &Model,
    c: &Configuration,
    policy: &dyn BuiltinPolicy,
) -> Result<ValidationReport, ValidationError> {
    validate_with(Evaluator::new(m, c).with_policy(policy))
}

fn validate_with(ev: Evaluator<'_>) -> Result<ValidationReport, ValidationError> {
    let m = ev.model();
    let c = ev.config();
    let universe = m.universe();
    let missing = c.missing(&universe);
    if !missing.is_empty() {
        return Err(ValidationError::Incomplete(missing));
    }
    Ok(report(&ev, &universe))
}

type NodeCheck = fn(&Evaluator<'_>, &Node) -> Check;

/// Validation without the completeness check; used by the enumerator,
/// whose candidates are total by construction.
pub(crate) fn report(ev: &Evaluator<'_>, universe: &BTreeSet<FeatureId>) -> ValidationReport {
    let m = ev.model();
    let c = ev.config();
    let mut failures = Vec::new();
    let checks: [(Family, NodeCheck); 5] = [
        (Family::Node, check_node),
        (Family::Flavor, check_flavor),
        (Family::Calculated, check_calculated),
        (Family::LegalValues, check_legal_values),
        (Family::Interface, check_interface),
    ];
    for n in m.nodes() {
        for (family, check) in checks {
            if let Err(explanation) = check(ev, n) {
                failures.push(Failure {
                    node: n.name.clone(),
                    family,
                    explanation,
                });
            }
        }
    }
    for x in universe.iter().filter(|x| !m.contains(x)) {
        if c.get(x).is_some_and(|v| v.state) {
            failures.push(Failure {
                node: x.clone(),
                family: Family::Unloaded,
                explanation: "feature is not loaded but its enabled state is 1".into(),
            });
        }
    }
    ValidationReport { failures }
}

/// Fast acceptance test used by the enumerator: stops at the first failure.
pub(crate) fn accepts(ev: &Evaluator<'_>, unloaded: &[FeatureId]) -> bool {
    let c = ev.config();
    if unloaded.iter().any(|x| c.get(x).is_some_and(|v| v.state)) {
        return false;
    }
    ev.model().nodes().all(|n| {
        check_flavor(ev, n).is_ok()
            && check_node(ev, n).is_ok()
            && check_calculated(ev, n).is_ok()
            && check_legal_values(ev, n).is_ok()
            && check_interface(ev, n).is_ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_model;
    use crate::parser::parse_model;

    fn model(src: &str) -> Model {
        let out = parse_model(src);
        assert!(!out.has_errors(), "{:?}", out.diagnostics);
        normalize_model(out.nodes).unwrap()
    }

    fn node<'m>(m: &'m Model, name: &str) -> &'m Node {
        m.get(&FeatureId::new(name).unwrap()).unwrap()
    }

    #[test]
    fn node_denotation() {
        let m = model("cdl_component P { cdl_option A {} }\ncdl_option R { requires 0 }");
        let a = node(&m, "A");
        let off = Configuration::new()
            .with("P", false, false, "1")
            .with("A", false, true, "1");
        assert!(node_holds(a, &off, &m));
        let on = Configuration::new()
            .with("P", true, true, "1")
            .with("A", true, true, "1");
        assert!(node_holds(a, &on, &m));
        let r = node(&m, "R");
        let c = Configuration::new().with("R", true, true, "1");
        assert!(!node_holds(r, &c, &m));
    }

    #[test]
    fn flavor_denotation() {
        let m = model("cdl_option D { flavor data }\ncdl_option B {}\ncdl_option N { flavor none }");
        let c = Configuration::new()
            .with("D", true, false, "1")
            .with("B", false, false, "0")
            .with("N", true, true, "1");
        assert!(!flavor_holds(node(&m, "D"), &c));
        assert!(flavor_holds(node(&m, "B"), &c));
        assert!(flavor_holds(node(&m, "N"), &c));
    }

    #[test]
    fn calculated_denotation() {
        let m = model(
            "cdl_option B { calculated 1 }\ncdl_option BD { flavor booldata\n calculated 5 }\ncdl_option D { flavor data\n calculated 5 }",
        );
        let c = Configuration::new()
            .with("B", true, true, "1")
            .with("BD", true, true, "5")
            .with("D", true, true, "7");
        assert!(calculated_holds(node(&m, "B"), &c, &m));
        assert!(calculated_holds(node(&m, "BD"), &c, &m));
        assert!(!calculated_holds(node(&m, "D"), &c, &m));
    }

    #[test]
    fn legal_values_denotation() {
        let m = model(
            "cdl_option D { flavor data\n legal_values 1 to 10 }\ncdl_option N { flavor none\n legal_values 1 }\ncdl_option BD { flavor booldata\n legal_values 1 }",
        );
        let c = Configuration::new()
            .with("D", true, true, "3")
            .with("N", true, true, "9")
            .with("BD", true, true, "2");
        assert!(legal_values_holds(node(&m, "D"), &c, &m));
        assert!(legal_values_holds(node(&m, "N"), &c, &m));
        assert!(!legal_values_holds(node(&m, "BD"), &c, &m));
    }

    #[test]
    fn interfaces() {
        let m = model(
            "cdl_interface I {}\ncdl_interface J { implements I }\ncdl_option A { implements I }\ncdl_option B { implements I }",
        );
        let c = Configuration::new()
            .with("I", true, true, "2")
            .with("J", true, true, "0")
            .with("A", true, true, "1")
            .with("B", false, false, "1");
        let i = FeatureId::new("I").unwrap();
        let names: Vec<String> = impls(&i, &c, &m).iter().map(|x| x.to_string()).collect();
        assert_eq!(names, vec!["A", "J"]);
        assert!(interface_holds(node(&m, "I"), &c, &m));
        assert!(impls(&FeatureId::new("A").unwrap(), &c, &m).is_empty());

        let m = model(
            "cdl_interface I { flavor bool }\ncdl_interface K { flavor booldata }\ncdl_option A { implements K }",
        );
        let c = Configuration::new()
            .with("I", false, false, "1")
            .with("K", true, true, "1")
            .with("A", true, true, "1");
        assert!(interface_holds(node(&m, "I"), &c, &m));
        assert!(interface_holds(node(&m, "K"), &c, &m));
    }

    #[test]
    fn validation() {
        assert!(validate_configuration(&Model::empty(), &Configuration::new())
            .unwrap()
            .accepted());

        let m = model("cdl_option A { requires X }");
        let c = Configuration::new()
            .with("A", false, false, "1")
            .with("X", true, true, "1");
        let r = validate_configuration(&m, &c).unwrap();
        assert_eq!(r.verdict(), Verdict::Rejected);
        assert_eq!(r.failures[0].family, Family::Unloaded);

        let m = model("cdl_option A {}");
        let c = Configuration::new().with("A", true, true, "1");
        assert!(validate_configuration(&m, &c).unwrap().accepted());
        assert!(matches!(
            validate_configuration(&m, &Configuration::new()),
            Err(ValidationError::Incomplete(_))
        ));
    }

    #[test]
    fn evaluation_errors_reject() {
        let m = model("cdl_option A { requires 1 / 0 }");
        for state in [false, true] {
            let c = Configuration::new().with("A", state, state, "1");
            let r = validate_configuration(&m, &c).unwrap();
            assert!(!r.accepted());
            assert!(r.failures[0].explanation.contains("division by zero"));
        }
    }
}
