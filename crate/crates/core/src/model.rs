//! Abstract syntax of CDL models: nodes, kinds, flavors, and the
//! normalization and well-formedness passes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{GoalExpr, ListExpr};
use crate::parser::SourceSpan;

const RESERVED_WORDS: [&str; 4] = ["implies", "eqv", "xor", "to"];

/// Name of a feature. Letters, digits and underscores; never the synthetic
/// root, which has no spelling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FeatureId(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid feature name {0:?}")]
pub struct InvalidFeatureId(pub String);

impl FeatureId {
    pub fn new(name: &str) -> Result<FeatureId, InvalidFeatureId> {
        let valid = !name.is_empty()
            && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
            && !name.as_bytes()[0].is_ascii_digit()
            && !RESERVED_WORDS.contains(&name);
        if valid {
            Ok(FeatureId(name.to_string()))
        } else {
            Err(InvalidFeatureId(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for FeatureId {
    type Error = InvalidFeatureId;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        FeatureId::new(&s)
    }
}

impl From<FeatureId> for String {
    fn from(id: FeatureId) -> String {
        id.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Package,
    Component,
    Option,
    Interface,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Package => "package",
            Kind::Component => "component",
            Kind::Option => "option",
            Kind::Interface => "interface",
        }
    }

    /// Flavor assumed when a node does not declare one.
    pub fn default_flavor(self) -> Flavor {
        match self {
            Kind::Package => Flavor::BoolData,
            Kind::Component | Kind::Option => Flavor::Bool,
            Kind::Interface => Flavor::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    None,
    Bool,
    #[serde(rename = "booldata")]
    BoolData,
    Data,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::None => "none",
            Flavor::Bool => "bool",
            Flavor::BoolData => "booldata",
            Flavor::Data => "data",
        }
    }

    pub fn from_name(s: &str) -> Option<Flavor> {
        match s {
            "none" => Some(Flavor::None),
            "bool" => Some(Flavor::Bool),
            "booldata" => Some(Flavor::BoolData),
            "data" => Some(Flavor::Data),
            _ => None,
        }
    }

    /// Flavors without a user-settable data value. Their value in
    /// expressions is `1` when enabled and `0` otherwise.
    pub fn has_fixed_data(self) -> bool {
        matches!(self, Flavor::None | Flavor::Bool)
    }

    /// Flavors whose enabled value is forced to 1.
    pub fn is_mandatory(self) -> bool {
        matches!(self, Flavor::None | Flavor::Data)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A node's parent: the synthetic root or another node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parent {
    Root,
    Node(FeatureId),
}

impl Parent {
    pub fn node(&self) -> Option<&FeatureId> {
        match self {
            Parent::Root => None,
            Parent::Node(id) => Some(id),
        }
    }
}

impl fmt::Display for Parent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parent::Root => f.write_str("⊤"),
            Parent::Node(id) => write!(f, "{id}"),
        }
    }
}

/// A normalized node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: FeatureId,
    pub parent: Parent,
    pub flavor: Flavor,
    pub active_if: BTreeSet<GoalExpr>,
    pub requires: BTreeSet<GoalExpr>,
    pub calculated: Option<GoalExpr>,
    pub legal_values: Option<ListExpr>,
    pub kind: Kind,
    pub implements: BTreeSet<FeatureId>,
    /// Properties outside the semantic core, kept verbatim.
    pub annotations: Vec<(String, String)>,
}

impl Node {
    pub fn new(name: FeatureId, kind: Kind) -> Node {
        Node {
            name,
            parent: Parent::Root,
            flavor: kind.default_flavor(),
            active_if: BTreeSet::new(),
            requires: BTreeSet::new(),
            calculated: None,
            legal_values: None,
            kind,
            implements: BTreeSet::new(),
            annotations: Vec::new(),
        }
    }

    /// `active_if ∪ requires`, the node's cross-tree constraints.
    pub fn constraints(&self) -> impl Iterator<Item = &GoalExpr> {
        self.active_if.iter().chain(self.requires.iter())
    }

    pub fn is_interface(&self) -> bool {
        self.kind == Kind::Interface
    }

    fn collect_identifiers(&self, out: &mut BTreeSet<FeatureId>) {
        for e in self.constraints() {
            e.collect_identifiers(out);
        }
        if let Some(cl) = &self.calculated {
            cl.collect_identifiers(out);
        }
        if let Some(lv) = &self.legal_values {
            lv.collect_identifiers(out);
        }
        out.extend(self.implements.iter().cloned());
    }
}

/// A node as read from source, before normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawNode {
    pub name: FeatureId,
    pub kind: Kind,
    pub flavor: Option<Flavor>,
    /// `None` for top-level nodes.
    pub parent: Option<FeatureId>,
    /// One entry per property occurrence; each holds the whitespace
    /// separated expressions of that occurrence.
    pub active_if: Vec<Vec<GoalExpr>>,
    pub requires: Vec<Vec<GoalExpr>>,
    pub calculated: Option<Vec<GoalExpr>>,
    pub legal_values: Option<ListExpr>,
    pub implements: Vec<FeatureId>,
    pub annotations: Vec<(String, String)>,
    pub span: Option<SourceSpan>,
}

impl RawNode {
    pub fn new(name: FeatureId, kind: Kind) -> RawNode {
        RawNode {
            name,
            kind,
            flavor: None,
            parent: None,
            active_if: Vec::new(),
            requires: Vec::new(),
            calculated: None,
            legal_values: None,
            implements: Vec::new(),
            annotations: Vec::new(),
            span: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizationError {
    #[error("duplicate node name {0}")]
    Duplicate(FeatureId),
    #[error("node {node} names unknown parent {parent}")]
    UnresolvedParent { node: FeatureId, parent: FeatureId },
    #[error("parent cycle through {}", join_ids(.0))]
    Cycle(Vec<FeatureId>),
}

fn join_ids(ids: &[FeatureId]) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" -> ")
}

/// A set of nodes forming a tree under the synthetic root.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    nodes: BTreeMap<FeatureId, Node>,
}

impl Model {
    /// Builds a model, checking that names are unique and that the parent
    /// relation is a tree rooted at the synthetic root.
    pub fn from_nodes(nodes: impl IntoIterator<Item = Node>) -> Result<Model, NormalizationError> {
        let mut map = BTreeMap::new();
        for node in nodes {
            let name = node.name.clone();
            if map.insert(name.clone(), node).is_some() {
                return Err(NormalizationError::Duplicate(name));
            }
        }
        for node in map.values() {
            if let Parent::Node(p) = &node.parent {
                if !map.contains_key(p) {
                    return Err(NormalizationError::UnresolvedParent {
                        node: node.name.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }
        check_acyclic(&map)?;
        Ok(Model { nodes: map })
    }

    pub fn empty() -> Model {
        Model::default()
    }

    pub fn get(&self, id: &FeatureId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &FeatureId) -> bool {
        self.nodes.contains_key(id)
    }

    /// Nodes in name order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<FeatureId> {
        ids_of(self)
    }

    /// Loaded names plus every name referenced from an expression or an
    /// `implements` list.
    pub fn universe(&self) -> BTreeSet<FeatureId> {
        let mut out = self.ids();
        for node in self.nodes.values() {
            node.collect_identifiers(&mut out);
        }
        out
    }

    /// Referenced names that no node declares.
    pub fn unloaded(&self) -> BTreeSet<FeatureId> {
        self.universe().into_iter().filter(|id| !self.contains(id)).collect()
    }

    pub fn children<'a>(&'a self, parent: &'a Parent) -> impl Iterator<Item = &'a Node> + 'a {
        self.nodes.values().filter(move |n| &n.parent == parent)
    }

    /// Names of nodes listing `interface` in their `implements` property.
    pub fn implementors(&self, interface: &FeatureId) -> BTreeSet<FeatureId> {
        self.nodes
            .values()
            .filter(|n| n.implements.contains(interface))
            .map(|n| n.name.clone())
            .collect()
    }

    /// Inverse of [`normalize_model`]: raw nodes with explicit flavors and
    /// single-expression property occurrences.
    pub fn to_raw(&self) -> Vec<RawNode> {
        self.nodes
            .values()
            .map(|n| RawNode {
                name: n.name.clone(),
                kind: n.kind,
                flavor: Some(n.flavor),
                parent: n.parent.node().cloned(),
                active_if: n.active_if.iter().map(|e| vec![e.clone()]).collect(),
                requires: n.requires.iter().map(|e| vec![e.clone()]).collect(),
                calculated: n.calculated.clone().map(|e| vec![e]),
                legal_values: n.legal_values.clone(),
                implements: n.implements.iter().cloned().collect(),
                annotations: n.annotations.clone(),
                span: None,
            })
            .collect()
    }
}

fn check_acyclic(nodes: &BTreeMap<FeatureId, Node>) -> Result<(), NormalizationError> {
    // 0 = unvisited, 1 = on the current path, 2 = reaches the root.
    let mut state: BTreeMap<&FeatureId, u8> = BTreeMap::new();
    for start in nodes.keys() {
        let mut path: Vec<&FeatureId> = Vec::new();
        let mut cur = start;
        loop {
            match state.get(cur).copied().unwrap_or(0) {
                2 => break,
                1 => {
                    let pos = path.iter().position(|p| *p == cur).unwrap_or(0);
                    let mut cycle: Vec<FeatureId> = path[pos..].iter().map(|p| (*p).clone()).collect();
                    cycle.push(cur.clone());
                    return Err(NormalizationError::Cycle(cycle));
                }
                _ => {}
            }
            state.insert(cur, 1);
            path.push(cur);
            match &nodes[cur].parent {
                Parent::Root => break,
                Parent::Node(p) => cur = p,
            }
        }
        for p in path {
            state.insert(p, 2);
        }
    }
    Ok(())
}

/// Names of the nodes in `m`.
pub fn ids_of(m: &Model) -> BTreeSet<FeatureId> {
    m.nodes.keys().cloned().collect()
}

/// Turns parsed nodes into a model: resolves parents (top-level nodes hang
/// off the root), fills in default flavors, and folds each whitespace
/// enumeration in `requires`, `active_if` and `calculated` into a
/// disjunction.
pub fn normalize_model(raw: Vec<RawNode>) -> Result<Model, NormalizationError> {
    let nodes = raw.into_iter().map(|r| {
        let fold_all = |occurrences: Vec<Vec<GoalExpr>>| -> BTreeSet<GoalExpr> {
            occurrences.into_iter().filter_map(GoalExpr::disjunction).collect()
        };
        Node {
            flavor: r.flavor.unwrap_or_else(|| r.kind.default_flavor()),
            parent: r.parent.map_or(Parent::Root, Parent::Node),
            active_if: fold_all(r.active_if),
            requires: fold_all(r.requires),
            calculated: r.calculated.and_then(GoalExpr::disjunction),
            legal_values: r.legal_values,
            implements: r.implements.into_iter().collect(),
            annotations: r.annotations,
            name: r.name,
            kind: r.kind,
        }
    });
    Model::from_nodes(nodes)
}

/// The five well-formedness rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    /// flavor none ⇒ no `calculated`
    #[serde(rename = "a")]
    A,
    /// `calculated` ⇒ no `legal_values`
    #[serde(rename = "b")]
    B,
    /// flavor bool ⇒ no `legal_values`
    #[serde(rename = "c")]
    C,
    /// interfaces have a flavor other than none and no `calculated`
    #[serde(rename = "d")]
    D,
    /// the parent relation is a tree and options are leaves
    #[serde(rename = "e")]
    E,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::A => "a",
            Rule::B => "b",
            Rule::C => "c",
            Rule::D => "d",
            Rule::E => "e",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: FeatureId,
    pub rule: Rule,
    pub message: String,
}

/// Lists every breached well-formedness rule, in node-name order.
pub fn check_well_formed(m: &Model) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |node: &Node, rule: Rule, message: String| {
        out.push(Violation {
            node: node.name.clone(),
            rule,
            message,
        })
    };
    for n in m.nodes() {
        if n.flavor == Flavor::None && n.calculated.is_some() {
            push(n, Rule::A, "calculated has no effect on a node of flavor none".into());
        }
        if n.calculated.is_some() && n.legal_values.is_some() {
            push(n, Rule::B, "calculated and legal_values exclude each other".into());
        }
        if n.flavor == Flavor::Bool && n.legal_values.is_some() {
            push(
                n,
                Rule::C,
                "legal_values is not allowed on a node of flavor bool".into(),
            );
        }
        if n.is_interface() {
            if n.flavor == Flavor::None {
                push(n, Rule::D, "an interface cannot have flavor none".into());
            }
            if n.calculated.is_some() {
                push(n, Rule::D, "an interface cannot be calculated".into());
            }
        }
        match &n.parent {
            Parent::Root => {}
            Parent::Node(p) => match m.get(p) {
                None => push(n, Rule::E, format!("parent {p} is not in the model")),
                Some(parent) if parent.kind == Kind::Option => {
                    push(n, Rule::E, format!("parent {p} is an option and cannot have children"))
                }
                Some(_) => {}
            },
        }
    }
    if let Err(NormalizationError::Cycle(ids)) = check_acyclic(&m.nodes) {
        if let Some(first) = ids.first().and_then(|id| m.get(id)) {
            push(first, Rule::E, format!("parent cycle through {}", join_ids(&ids)));
        }
    }
    out
}

/// JSON view of one node, with expressions in concrete syntax.
#[derive(Debug, Clone, Serialize)]
pub struct NodeDump {
    pub name: String,
    pub parent: Option<String>,
    pub flavor: Flavor,
    pub active_if: Vec<String>,
    pub requires: Vec<String>,
    pub calculated: Option<String>,
    pub legal_values: Option<String>,
    pub kind: Kind,
    pub implements: Vec<String>,
}

impl From<&Node> for NodeDump {
    fn from(n: &Node) -> NodeDump {
        NodeDump {
            name: n.name.to_string(),
            parent: n.parent.node().map(|p| p.to_string()),
            flavor: n.flavor,
            active_if: n.active_if.iter().map(|e| e.to_string()).collect(),
            requires: n.requires.iter().map(|e| e.to_string()).collect(),
            calculated: n.calculated.as_ref().map(|e| e.to_string()),
            legal_values: n.legal_values.as_ref().map(|l| l.to_string()),
            kind: n.kind,
            implements: n.implements.iter().map(|i| i.to_string()).collect(),
        }
    }
}

/// Canonical JSON dump: an array of node objects in name order.
pub fn dump_json(m: &Model) -> String {
    let nodes: Vec<NodeDump> = m.nodes().map(NodeDump::from).collect();
    serde_json::to_string_pretty(&nodes).expect("node dump serializes")
}

/// Prints the model back as CDL source, children nested in their parents.
pub fn pretty_print(m: &Model) -> String {
    let mut out = String::new();
    for node in m.children(&Parent::Root) {
        print_node(m, node, 0, &mut out);
    }
    out
}

fn print_node(m: &Model, n: &Node, depth: usize, out: &mut String) {
    use std::fmt::Write;
    let pad = "    ".repeat(depth);
    let _ = writeln!(out, "{pad}cdl_{} {} {{", n.kind, n.name);
    let inner = "    ".repeat(depth + 1);
    let _ = writeln!(out, "{inner}flavor {}", n.flavor);
    for e in &n.active_if {
        let _ = writeln!(out, "{inner}active_if {{{e}}}");
    }
    for e in &n.requires {
        let _ = writeln!(out, "{inner}requires {{{e}}}");
    }
    if let Some(cl) = &n.calculated {
        let _ = writeln!(out, "{inner}calculated {{{cl}}}");
    }
    if let Some(lv) = &n.legal_values {
        let _ = writeln!(out, "{inner}legal_values {{{lv}}}");
    }
    for i in &n.implements {
        let _ = writeln!(out, "{inner}implements {i}");
    }
    for (k, v) in &n.annotations {
        let _ = writeln!(out, "{inner}{k} {{{v}}}");
    }
    let parent = Parent::Node(n.name.clone());
    for child in m.children(&parent) {
        print_node(m, child, depth + 1, out);
    }
    let _ = writeln!(out, "{pad}}}");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> FeatureId {
        FeatureId::new(s).unwrap()
    }

    #[test]
    fn feature_names() {
        assert!(FeatureId::new("CYGPKG_HAL").is_ok());
        assert!(FeatureId::new("_x1").is_ok());
        for bad in ["", "1A", "A-B", "a b", "implies", "to", "⊤"] {
            assert!(FeatureId::new(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn default_flavors() {
        let raw = vec![
            RawNode::new(id("P"), Kind::Package),
            RawNode::new(id("C"), Kind::Component),
            RawNode::new(id("O"), Kind::Option),
            RawNode::new(id("I"), Kind::Interface),
        ];
        let m = normalize_model(raw).unwrap();
        assert_eq!(m.get(&id("P")).unwrap().flavor, Flavor::BoolData);
        assert_eq!(m.get(&id("C")).unwrap().flavor, Flavor::Bool);
        assert_eq!(m.get(&id("O")).unwrap().flavor, Flavor::Bool);
        assert_eq!(m.get(&id("I")).unwrap().flavor, Flavor::Data);
        assert!(m.nodes().all(|n| n.parent == Parent::Root));
    }

    #[test]
    fn enumerations_become_disjunctions() {
        let mut r = RawNode::new(id("X"), Kind::Option);
        r.requires.push(vec![GoalExpr::ident("A"), GoalExpr::ident("B")]);
        let m = normalize_model(vec![r]).unwrap();
        let req: Vec<String> = m
            .get(&id("X"))
            .unwrap()
            .requires
            .iter()
            .map(|e| e.to_string())
            .collect();
        assert_eq!(req, vec!["A || B"]);
    }

    #[test]
    fn normalization_errors() {
        let a = RawNode::new(id("A"), Kind::Option);
        assert_eq!(
            normalize_model(vec![a.clone(), a.clone()]),
            Err(NormalizationError::Duplicate(id("A")))
        );
        let mut b = RawNode::new(id("B"), Kind::Option);
        b.parent = Some(id("Z"));
        assert!(matches!(
            normalize_model(vec![b]),
            Err(NormalizationError::UnresolvedParent { .. })
        ));
        let mut c = RawNode::new(id("C"), Kind::Component);
        let mut d = RawNode::new(id("D"), Kind::Component);
        c.parent = Some(id("D"));
        d.parent = Some(id("C"));
        assert!(matches!(normalize_model(vec![c, d]), Err(NormalizationError::Cycle(_))));
    }

    #[test]
    fn empty_input_gives_empty_model() {
        let m = normalize_model(Vec::new()).unwrap();
        assert!(m.is_empty());
        assert!(ids_of(&m).is_empty());
        assert!(check_well_formed(&m).is_empty());
    }

    #[test]
    fn universe_includes_references() {
        let mut r = RawNode::new(id("X"), Kind::Option);
        r.requires.push(vec![GoalExpr::ident("Y")]);
        r.implements.push(id("I"));
        let m = normalize_model(vec![r]).unwrap();
        let names: Vec<String> = m.universe().iter().map(|i| i.to_string()).collect();
        assert_eq!(names, vec!["I", "X", "Y"]);
        assert_eq!(m.unloaded().len(), 2);
    }
}
