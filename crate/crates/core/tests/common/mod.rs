#![allow(dead_code)]

use proptest::prelude::*;

use cdlsem_core::model::{check_well_formed, normalize_model, Model};
use cdlsem_core::parser::parse_model;
use cdlsem_core::semantics::candidate_count;
use cdlsem_core::value::DataValue;

pub const NAMES: [&str; 5] = ["A", "B", "C", "D", "E"];

pub fn domain() -> Vec<DataValue> {
    ["0", "1", "2"].iter().map(|s| DataValue::from(*s)).collect()
}

pub fn model(src: &str) -> Model {
    let out = parse_model(src);
    assert!(!out.has_errors(), "{:?}", out.diagnostics);
    normalize_model(out.nodes).unwrap()
}

fn ident(n: usize) -> impl Strategy<Value = String> + Clone {
    let mut pool: Vec<String> = NAMES[..n].iter().map(|s| s.to_string()).collect();
    pool.push("U".into());
    proptest::sample::select(pool)
}

pub fn goal(n: usize) -> impl Strategy<Value = String> {
    let id = ident(n);
    let leaf = prop_oneof![
        4 => id.clone(),
        2 => proptest::sample::select(vec!["0", "1", "2", "\"a\"", "\"\""]).prop_map(String::from),
    ];
    let id2 = id.clone();
    leaf.prop_recursive(3, 16, 3, move |inner| {
        let id = id2.clone();
        prop_oneof![
            3 => (inner.clone(), proptest::sample::select(vec![
                "&&", "||", "implies", "eqv", "xor", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%",
            ]), inner.clone()).prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            1 => inner.clone().prop_map(|a| format!("!{a}")),
            1 => (inner.clone(), inner.clone(), inner.clone()).prop_map(|(g, t, f)| format!("({g} ? {t} : {f})")),
            2 => (id.clone(), proptest::sample::select(vec!["is_active", "is_enabled", "is_loaded", "get_data"]))
                .prop_map(|(x, f)| format!("{f}({x})")),
            1 => (id.clone(), proptest::sample::select(vec!["\"1\"", "\"a\"", "2"]))
                .prop_map(|(x, k)| format!("is_substr({x}, {k})")),
            1 => id.prop_map(|x| format!("version_cmp({x}, \"1.0\")")),
        ]
    })
}

#[derive(Debug, Clone)]
struct NodeSpec {
    kind: &'static str,
    parent: Option<usize>,
    flavor: Option<&'static str>,
    active_if: Option<String>,
    requires: Option<String>,
    calculated: Option<String>,
    legal: Option<&'static str>,
    implements: Vec<usize>,
}

fn node_spec(n: usize, i: usize) -> impl Strategy<Value = NodeSpec> {
    (
        proptest::sample::select(vec![
            "cdl_package",
            "cdl_component",
            "cdl_option",
            "cdl_option",
            "cdl_interface",
        ]),
        proptest::option::weighted(0.5, 0..i.max(1)),
        proptest::option::weighted(0.6, proptest::sample::select(vec!["none", "bool", "data", "booldata"])),
        proptest::option::weighted(0.3, goal(n)),
        proptest::option::weighted(0.5, goal(n)),
        proptest::option::weighted(0.2, goal(n)),
        proptest::option::weighted(
            0.2,
            proptest::sample::select(vec!["0 to 1", "1 2", "\"a\" 2", "1 to 2", "0"]),
        ),
        proptest::collection::vec(0..n, 0..2),
    )
        .prop_map(
            move |(kind, parent, flavor, active_if, requires, calculated, legal, implements)| NodeSpec {
                kind,
                parent: parent.filter(|&p| p < i),
                flavor,
                active_if,
                requires,
                calculated,
                legal,
                implements,
            },
        )
}

/// Property lines of node `i`, without the closing brace.
fn node_lines(specs: &[NodeSpec], i: usize) -> Vec<String> {
    let s = &specs[i];
    let mut out = vec![format!("{} {} {{", s.kind, NAMES[i])];
    if let Some(f) = s.flavor {
        out.push(format!("    flavor {f}"));
    }
    for (key, v) in [
        ("active_if", &s.active_if),
        ("requires", &s.requires),
        ("calculated", &s.calculated),
    ] {
        if let Some(v) = v {
            out.push(format!("    {key} {{{v}}}"));
        }
    }
    if let Some(l) = s.legal {
        out.push(format!("    legal_values {l}"));
    }
    let impls: Vec<&str> = s
        .implements
        .iter()
        .filter(|&&j| j != i && specs[j].kind == "cdl_interface")
        .map(|&j| NAMES[j])
        .collect();
    if !impls.is_empty() {
        out.push(format!("    implements {{{}}}", impls.join(" ")));
    }
    out
}

fn has_parent(specs: &[NodeSpec], i: usize) -> Option<usize> {
    specs[i].parent.filter(|&p| specs[p].kind != "cdl_option")
}

/// Nests each node inside its chosen parent when that parent can have
/// children.
fn render(specs: &[NodeSpec]) -> String {
    fn emit(specs: &[NodeSpec], i: usize, depth: usize, out: &mut String) {
        let pad = "    ".repeat(depth);
        for l in node_lines(specs, i) {
            out.push_str(&format!("{pad}{l}\n"));
        }
        for j in 0..specs.len() {
            if has_parent(specs, j) == Some(i) {
                emit(specs, j, depth + 1, out);
            }
        }
        out.push_str(&format!("{pad}}}\n"));
    }
    let mut out = String::new();
    for i in 0..specs.len() {
        if has_parent(specs, i).is_none() {
            emit(specs, i, 0, &mut out);
        }
    }
    out
}

/// Source text of a random well-formed model with at most `max` nodes and a
/// bounded candidate space.
pub fn model_source(max: usize) -> impl Strategy<Value = String> {
    (1..=max)
        .prop_flat_map(|n| (0..n).map(|i| node_spec(n, i)).collect::<Vec<_>>())
        .prop_map(|specs| render(&specs))
        .prop_filter("well-formed and small", |src| {
            let out = parse_model(src);
            if out.has_errors() {
                return false;
            }
            let Ok(m) = normalize_model(out.nodes) else {
                return false;
            };
            check_well_formed(&m).is_empty() && candidate_count(&m, &domain()) <= 150_000
        })
}
