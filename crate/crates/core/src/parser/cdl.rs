use super::diag::{ParseDiagnostic, Severity, SourceMap};
use super::expr::{parse_goal_sequence, parse_list, ExprError};
use super::tcl::{split_script, Command, RawDiag, Word, WordKind};
use crate::model::{FeatureId, Flavor, Kind, RawNode};

/// Deepest nesting of node bodies accepted.
/// Properties about documentation and the build, kept as annotations
/// without a warning.
const DESCRIPTIVE: &[&str] = &[
    "compile",
    "default_value",
    "define",
    "define_format",
    "define_header",
    "define_proc",
    "description",
    "dialog",
    "display",
    "doc",
    "hardware",
    "if_define",
    "include_dir",
    "include_files",
    "library",
    "make",
    "make_object",
    "no_define",
    "script",
    "wizard",
];

pub const MAX_BODY_DEPTH: usize = 64;

/// Result of reading a model file: the nodes found, in source order, and
/// every diagnostic raised. Any error-severity diagnostic means the node
/// list must not be used.
#[derive(Debug, Clone, Default)]
pub struct ParseOutput {
    pub nodes: Vec<RawNode>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseOutput {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(ParseDiagnostic::is_error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

/// Parses CDL source text. Never panics; problems become diagnostics.
pub fn parse_model(text: &str) -> ParseOutput {
    parse_model_named(text, "<input>")
}

/// Like [`parse_model`], attributing diagnostics to `file`.
pub fn parse_model_named(text: &str, file: &str) -> ParseOutput {
    let map = SourceMap::new(file, text);
    let mut reader = Reader {
        src: text,
        map: &map,
        diags: Vec::new(),
        nodes: Vec::new(),
    };
    let commands = split_script(text, 0, text.len(), &mut reader.diags);
    for cmd in &commands {
        let head = &cmd.words[0];
        match node_kind(&head.text) {
            Some(kind) if head.kind == WordKind::Bare => reader.node(cmd, kind, None, 1),
            _ => reader.error(
                format!("unknown top-level command {:?}", head.text),
                head.start,
                head.end,
            ),
        }
    }
    let diagnostics = reader
        .diags
        .into_iter()
        .map(|d| map.diagnostic(d.severity, d.message, d.start, d.end))
        .collect();
    ParseOutput {
        nodes: reader.nodes,
        diagnostics,
    }
}

fn node_kind(word: &str) -> Option<Kind> {
    match word {
        "cdl_package" => Some(Kind::Package),
        "cdl_component" => Some(Kind::Component),
        "cdl_option" => Some(Kind::Option),
        "cdl_interface" => Some(Kind::Interface),
        _ => None,
    }
}

struct Reader<'a> {
    src: &'a str,
    map: &'a SourceMap<'a>,
    diags: Vec<RawDiag>,
    nodes: Vec<RawNode>,
}

impl<'a> Reader<'a> {
    fn error(&mut self, message: impl Into<String>, start: usize, end: usize) {
        self.diags.push(RawDiag::error(message, start, end));
    }

    fn warning(&mut self, message: impl Into<String>, start: usize, end: usize) {
        self.diags.push(RawDiag::warning(message, start, end));
    }

    fn node(&mut self, cmd: &Command, kind: Kind, parent: Option<&FeatureId>, depth: usize) {
        let head = &cmd.words[0];
        let Some(name_word) = cmd.words.get(1) else {
            self.error(format!("{} needs a name", head.text), head.start, head.end);
            return;
        };
        let name = match FeatureId::new(&name_word.text) {
            Ok(id) => id,
            Err(e) => {
                self.error(e.to_string(), name_word.start, name_word.end);
                return;
            }
        };
        if let Some(extra) = cmd.words.get(3) {
            self.error(
                format!("{} {name} takes a name and one body", head.text),
                extra.start,
                extra.end,
            );
            return;
        }
        let mut raw = RawNode::new(name.clone(), kind);
        raw.parent = parent.cloned();
        let end = cmd.words.last().map_or(head.end, |w| w.end);
        raw.span = Some(self.map.span(head.start, end));
        let index = self.nodes.len();
        self.nodes.push(raw);

        let Some(body) = cmd.words.get(2) else {
            return;
        };
        if depth > MAX_BODY_DEPTH {
            self.error("node bodies nested too deeply", body.start, body.end);
            return;
        }
        let (start, stop) = match body.kind {
            WordKind::Braced => (body.content_start, body.end - 1),
            _ => (body.start, body.end),
        };
        if body.kind != WordKind::Braced && !body.text.trim().is_empty() {
            self.error("node body must be enclosed in braces", body.start, body.end);
            return;
        }
        let commands = split_script(self.src, start, stop, &mut self.diags);
        for c in &commands {
            self.property(c, index, &name, depth);
        }
    }

    fn property(&mut self, cmd: &Command, index: usize, owner: &FeatureId, depth: usize) {
        let head = &cmd.words[0];
        let args = &cmd.words[1..];
        if head.kind == WordKind::Bare {
            if let Some(kind) = node_kind(&head.text) {
                self.node(cmd, kind, Some(owner), depth + 1);
                return;
            }
        }
        let key = head.text.as_str();
        let semantic = matches!(
            key,
            "flavor" | "active_if" | "requires" | "calculated" | "legal_values" | "implements" | "parent"
        );
        if semantic && args.is_empty() {
            self.error(format!("{key} expects an argument"), head.start, head.end);
            return;
        }
        match key {
            "flavor" => {
                let [w] = args else {
                    self.error("flavor takes exactly one argument", head.start, head.end);
                    return;
                };
                match Flavor::from_name(w.text.trim()) {
                    Some(f) => {
                        if self.nodes[index].flavor.is_some() {
                            self.error(format!("flavor of {owner} given twice"), head.start, w.end);
                        }
                        self.nodes[index].flavor = Some(f);
                    }
                    None => self.error(format!("unknown flavor {:?}", w.text), w.start, w.end),
                }
            }
            "active_if" | "requires" | "calculated" => {
                let Some(exprs) = self.goal_sequence(args) else {
                    return;
                };
                let node = &mut self.nodes[index];
                match key {
                    "active_if" => node.active_if.push(exprs),
                    "requires" => node.requires.push(exprs),
                    _ => {
                        if node.calculated.is_some() {
                            self.error(format!("calculated of {owner} given twice"), head.start, head.end);
                        } else {
                            node.calculated = Some(exprs);
                        }
                    }
                }
            }
            "legal_values" => {
                let text = join_words(args);
                match parse_list(&text) {
                    Ok(list) => {
                        let node = &mut self.nodes[index];
                        node.legal_values = Some(match &node.legal_values {
                            Some(prev) => prev.concat(&list),
                            None => list,
                        });
                    }
                    Err(e) => self.expr_error(args, e),
                }
            }
            "implements" => {
                for w in args {
                    for name in w.text.split_whitespace() {
                        match FeatureId::new(name) {
                            Ok(id) => self.nodes[index].implements.push(id),
                            Err(e) => self.error(e.to_string(), w.start, w.end),
                        }
                    }
                }
            }
            "parent" => self.error("the parent property is not supported", head.start, head.end),
            _ => {
                if !DESCRIPTIVE.contains(&key) {
                    self.warning(
                        format!("property {key:?} is kept as an annotation and ignored"),
                        head.start,
                        head.end,
                    );
                }
                let value = join_words(args);
                self.nodes[index].annotations.push((key.to_string(), value));
            }
        }
    }

    fn goal_sequence(&mut self, args: &[Word]) -> Option<Vec<crate::expr::GoalExpr>> {
        match parse_goal_sequence(&join_words(args)) {
            Ok(v) => Some(v),
            Err(e) => {
                self.expr_error(args, e);
                None
            }
        }
    }

    fn expr_error(&mut self, args: &[Word], e: ExprError) {
        let (start, end) = match args {
            [w] if w.kind != WordKind::Quoted => (w.content_start + e.start, w.content_start + e.end),
            _ => (args.first().map_or(0, |w| w.start), args.last().map_or(0, |w| w.end)),
        };
        self.diags.push(RawDiag {
            severity: Severity::Error,
            message: e.message,
            start,
            end,
        });
    }
}

fn join_words(words: &[Word]) -> String {
    words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::GoalExpr;

    fn id(s: &str) -> FeatureId {
        FeatureId::new(s).unwrap()
    }

    #[test]
    fn single_option() {
        let out = parse_model("cdl_option A { flavor bool }");
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.nodes.len(), 1);
        let a = &out.nodes[0];
        assert_eq!(a.name, id("A"));
        assert_eq!(a.kind, Kind::Option);
        assert_eq!(a.flavor, Some(Flavor::Bool));
        assert_eq!(a.parent, None);
    }

    #[test]
    fn nesting_sets_parent() {
        let out = parse_model("cdl_component C { cdl_option A {} }");
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.nodes[1].name, id("A"));
        assert_eq!(out.nodes[1].parent, Some(id("C")));
        assert_eq!(out.nodes[0].parent, None);
    }

    #[test]
    fn empty_text() {
        let out = parse_model("");
        assert!(out.nodes.is_empty());
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn properties() {
        let src = r#"
cdl_package P {
    display "Package"
    requires {A B} C
    requires "X == \"y\""
    active_if !D
    cdl_option O {
        flavor data
        legal_values 1 2 4 to 16
        implements I J
    }
}
"#;
        let out = parse_model(src);
        assert!(!out.has_errors(), "{:?}", out.diagnostics);
        assert!(out.diagnostics.is_empty());
        let p = &out.nodes[0];
        assert_eq!(p.annotations, vec![("display".to_string(), "Package".to_string())]);
        assert_eq!(p.requires.len(), 2);
        assert_eq!(
            p.requires[0],
            vec![GoalExpr::ident("A"), GoalExpr::ident("B"), GoalExpr::ident("C")]
        );
        assert_eq!(p.requires[1][0].to_string(), "X == \"y\"");
        assert_eq!(p.active_if[0][0].to_string(), "!D");
        let o = &out.nodes[1];
        assert_eq!(o.legal_values.as_ref().unwrap().to_string(), "1 2 4 to 16");
        assert_eq!(o.implements, vec![id("I"), id("J")]);
    }

    #[test]
    fn errors_are_reported_with_positions() {
        let out = parse_model_named("cdl_option A {\n  requires {B &&}\n}", "m.cdl");
        assert!(out.has_errors());
        let d = out.errors().next().unwrap();
        assert_eq!(d.span.file, "m.cdl");
        assert_eq!(d.span.start_line, 2);
        assert!(d.to_string().starts_with("m.cdl:2:"));

        for bad in [
            "cdl_option A {",
            "foo A {}",
            "cdl_option A { parent B }",
            "cdl_option A { flavor maybe }",
            "cdl_option A { requires nosuch(B) }",
            "cdl_option 9A {}",
            "cdl_option A { legal_values 1 to }",
            "cdl_option A { requires }",
            "cdl_option A {} extra",
            "cdl_option A { requires $x }",
        ] {
            assert!(parse_model(bad).has_errors(), "{bad:?}");
        }
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let mut src = String::new();
        for i in 0..100 {
            src.push_str(&format!("cdl_component C{i} {{ "));
        }
        src.push_str(&"}".repeat(100));
        let out = parse_model(&src);
        assert!(out.has_errors());
    }
}
