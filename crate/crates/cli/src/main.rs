use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cdlsem_core::model::{check_well_formed, dump_json, pretty_print, Model};
use cdlsem_core::parser::{load_model, LoadError};
use cdlsem_core::prop::{
    build_formula_with, enumerate_prop, parse_prop_config, prop_config_to_tsv, PropConfig, PropFormula, Translation,
};
use cdlsem_core::sat::{export_dimacs, to_cnf, to_dot, transitive_reduction, Analysis, AnalysisError};
use cdlsem_core::semantics::{
    enumerate_with_budget, validate_configuration, Configuration, OracleError, ValidationReport, BUDGET_ENV,
    DEFAULT_BUDGET,
};
use cdlsem_core::value::DataValue;
use cdlsem_core::FeatureId;

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const INPUT: u8 = 2;
const IO: u8 = 3;
const BUDGET: u8 = 4;

/// Semantics and analyses of eCos CDL configuration models.
#[derive(Parser, Debug)]
#[command(name = "cdlsem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a model and print it as JSON or CDL.
    Parse {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Ast)]
        emit: Emit,
        #[command(flatten)]
        out: Output,
    },
    /// Check the well-formedness rules.
    Check {
        model: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Validate a configuration against a model.
    Validate {
        model: PathBuf,
        config: PathBuf,
        /// Read a Boolean configuration and check it against the formula.
        #[arg(long)]
        prop: bool,
        /// Reject configurations that leave features unassigned.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        tr: Tr,
        #[command(flatten)]
        out: Output,
    },
    /// Translate a model to a propositional formula or DIMACS CNF.
    Translate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = TranslateFormat::Prop)]
        format: TranslateFormat,
        #[command(flatten)]
        tr: Tr,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a SAT-based analysis of a model.
    Analyze {
        model: PathBuf,
        #[command(flatten)]
        which: Which,
        /// Print the implication graph as DOT.
        #[arg(long, requires = "implications")]
        dot: bool,
        /// Transitively reduce the implication graph.
        #[arg(long, requires = "implications")]
        reduce: bool,
        #[command(flatten)]
        tr: Tr,
        #[command(flatten)]
        out: Output,
    },
    /// List every accepted configuration over a finite data domain.
    Enumerate {
        model: PathBuf,
        /// Comma-separated data values.
        #[arg(long, default_value = "0,1")]
        domain: String,
        /// Largest candidate space to search.
        #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        /// Enumerate models of the propositional formula instead.
        #[arg(long)]
        prop: bool,
        #[command(flatten)]
        tr: Tr,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Which {
    #[arg(long)]
    dead: bool,
    #[arg(long)]
    core: bool,
    #[arg(long)]
    implications: bool,
    #[arg(long)]
    sat: bool,
}

#[derive(Args, Debug)]
struct Tr {
    /// Use the rule-by-rule translation instead of the sound one.
    #[arg(long)]
    literal: bool,
}

impl Tr {
    fn translation(&self) -> Translation {
        if self.literal {
            Translation::Literal
        } else {
            Translation::Sound
        }
    }
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Emit {
    Ast,
    Pretty,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TranslateFormat {
    Prop,
    Dimacs,
    Json,
}

/// A failed command: its exit code and an optional message for stderr.
struct Fail(u8, Option<String>);

type Outcome = Result<u8, Fail>;

fn fail(code: u8, msg: impl Into<String>) -> Fail {
    Fail(code, Some(msg.into()))
}

fn warn(msg: &str) {
    eprintln!("cdlsem: warning: {msg}");
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| fail(IO, format!("cannot read {}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| fail(IO, format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| fail(IO, format!("cannot write output: {e}")))
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<Model, Fail> {
    let text = read(path)?;
    match load_model(&text, &path.display().to_string()) {
        Ok((m, warnings)) => {
            for w in warnings {
                eprintln!("{w}");
            }
            Ok(m)
        }
        Err(LoadError::Parse(diags)) => {
            for d in diags {
                eprintln!("{d}");
            }
            Err(Fail(INPUT, None))
        }
        Err(e @ LoadError::Normalize { .. }) => Err(fail(INPUT, e.to_string())),
    }
}

/// Loads a model and insists on well-formedness.
fn load_well_formed(path: &Path) -> Result<Model, Fail> {
    let m = load(path)?;
    let violations = check_well_formed(&m);
    if violations.is_empty() {
        return Ok(m);
    }
    for v in &violations {
        eprintln!("{}\t{}\t{}", v.rule, v.node, v.message);
    }
    Err(fail(NEGATIVE, "model is not well-formed"))
}

fn formula(m: &Model, t: Translation) -> Result<PropFormula, Fail> {
    build_formula_with(m, t).map_err(|e| fail(NEGATIVE, e.to_string()))
}

fn names<'a>(ids: impl IntoIterator<Item = &'a FeatureId>) -> Vec<String> {
    ids.into_iter().map(|id| id.to_string()).collect()
}

fn config_json(c: &Configuration) -> Value {
    let map: BTreeMap<String, Value> = c
        .iter()
        .map(|(id, v)| {
            (
                id.to_string(),
                json!({"state": v.state, "value": v.value, "data": v.data}),
            )
        })
        .collect();
    json!(map)
}

fn prop_json(cp: &PropConfig) -> Value {
    let map: BTreeMap<String, bool> = cp.iter().map(|(id, b)| (id.to_string(), *b)).collect();
    json!(map)
}

fn cmd_parse(model: &Path, emit: Emit, out: &Output) -> Outcome {
    let m = load(model)?;
    let text = match (emit, out.format) {
        (Emit::Pretty, Format::Text) => pretty_print(&m),
        (Emit::Pretty, Format::Json) => json_text(&json!({ "pretty": pretty_print(&m) })),
        (Emit::Ast, _) => dump_json(&m) + "\n",
    };
    write(out.output.as_deref(), &text)?;
    Ok(OK)
}

fn cmd_check(model: &Path, out: &Output) -> Outcome {
    let m = load(model)?;
    let violations = check_well_formed(&m);
    let text = match out.format {
        Format::Text => violations
            .iter()
            .map(|v| format!("{}\t{}\t{}\n", v.rule, v.node, v.message))
            .collect(),
        Format::Json => json_text(&json!({
            "well_formed": violations.is_empty(),
            "violations": violations,
        })),
    };
    write(out.output.as_deref(), &text)?;
    Ok(if violations.is_empty() { OK } else { NEGATIVE })
}

fn report_text(report: &ValidationReport) -> String {
    let mut text = String::from(if report.accepted() { "accepted\n" } else { "rejected\n" });
    for f in &report.failures {
        text.push_str(&format!("{}\t{}\t{}\n", f.family, f.node, f.explanation));
    }
    text
}

fn missing_ids(missing: &[FeatureId], strict: bool, default: &str) -> Result<(), Fail> {
    if missing.is_empty() {
        return Ok(());
    }
    let list = names(missing).join(", ");
    if strict {
        return Err(fail(INPUT, format!("configuration lacks {list}")));
    }
    warn(&format!("unassigned {list}; defaulting to {default}"));
    Ok(())
}

fn cmd_validate(model: &Path, config: &Path, prop: bool, strict: bool, t: Translation, out: &Output) -> Outcome {
    let m = load_well_formed(model)?;
    let text = read(config)?;
    let cfg_err = |e: cdlsem_core::semantics::ConfigError| fail(INPUT, format!("{}: {e}", config.display()));
    let (report, defaulted) = if prop {
        let mut cp = parse_prop_config(&text).map_err(cfg_err)?;
        let f = formula(&m, t)?;
        let missing: Vec<FeatureId> = f
            .variables()
            .map(|(id, _)| id)
            .filter(|id| !cp.contains_key(*id))
            .cloned()
            .collect();
        missing_ids(&missing, strict, "0")?;
        for id in &missing {
            cp.insert(id.clone(), false);
        }
        (f.check(&cp).expect("configuration is complete"), missing)
    } else {
        let mut c = Configuration::from_tsv(&text).map_err(cfg_err)?;
        let missing = c.missing(&m.universe());
        missing_ids(&missing, strict, "(0, 0, \"0\")")?;
        c.fill_defaults(&m.universe());
        (
            validate_configuration(&m, &c).expect("configuration is complete"),
            missing,
        )
    };
    let text = match out.format {
        Format::Text => report_text(&report),
        Format::Json => json_text(&json!({
            "semantics": if prop { "prop" } else { "full" },
            "verdict": report.verdict(),
            "failures": report.failures,
            "defaulted": names(&defaulted),
        })),
    };
    write(out.output.as_deref(), &text)?;
    Ok(if report.accepted() { OK } else { NEGATIVE })
}

fn cmd_translate(model: &Path, format: TranslateFormat, t: Translation, output: Option<&Path>) -> Outcome {
    let m = load_well_formed(model)?;
    let f = formula(&m, t)?;
    let text = match format {
        TranslateFormat::Prop => f.pretty(),
        TranslateFormat::Dimacs => export_dimacs(&to_cnf(&f)),
        TranslateFormat::Json => {
            let cnf = to_cnf(&f);
            json_text(&json!({
                "translation": f.translation(),
                "variables": f.variables().map(|(id, i)| json!({"index": i, "name": id})).collect::<Vec<_>>(),
                "constraints": f.constraints().iter().map(|c| json!({
                    "node": c.node,
                    "family": c.family,
                    "expr": c.expr.to_string(),
                })).collect::<Vec<_>>(),
                "cnf": {"variables": cnf.num_vars(), "clauses": cnf.clauses()},
            }))
        }
    };
    write(output, &text)?;
    Ok(OK)
}

fn cmd_analyze(model: &Path, which: &Which, dot: bool, reduce: bool, t: Translation, out: &Output) -> Outcome {
    let m = load_well_formed(model)?;
    let a = Analysis::with_translation(&m, t).map_err(|e| fail(NEGATIVE, e.to_string()))?;
    let void = |e: AnalysisError| fail(NEGATIVE, e.to_string());
    let (text, code) = if which.sat {
        let r = a.sat();
        let text = match out.format {
            Format::Text => if r.is_sat() { "SAT\n" } else { "UNSAT\n" }.to_string(),
            Format::Json => json_text(&json!({
                "status": r.status,
                "witness": r.witness.as_ref().map(prop_json),
            })),
        };
        (text, if r.is_sat() { OK } else { NEGATIVE })
    } else if which.implications {
        let mut edges = a.implications().map_err(void)?;
        if reduce {
            edges = transitive_reduction(&edges);
        }
        let text = match (out.format, dot) {
            (Format::Json, _) => json_text(&json!({
                "edges": edges.iter().map(|(x, y)| [x, y]).collect::<Vec<_>>(),
            })),
            (Format::Text, true) => to_dot(&edges),
            (Format::Text, false) => edges.iter().map(|(x, y)| format!("{x}\t{y}\n")).collect(),
        };
        (text, OK)
    } else {
        let (kind, set) = if which.dead {
            ("dead", a.dead().map_err(void)?)
        } else {
            ("core", a.core().map_err(void)?)
        };
        let text = match out.format {
            Format::Text => set.iter().map(|id| format!("{id}\n")).collect(),
            Format::Json => json_text(&json!({ kind: names(&set) })),
        };
        (text, OK)
    };
    write(out.output.as_deref(), &text)?;
    Ok(code)
}

fn cmd_enumerate(model: &Path, domain: &str, budget: u64, prop: bool, t: Translation, out: &Output) -> Outcome {
    let m = load_well_formed(model)?;
    let too_large = |e: OracleError| fail(BUDGET, e.to_string());
    let (records, values): (Vec<String>, Vec<Value>) = if prop {
        let f = formula(&m, t)?;
        let all = enumerate_prop(&f, budget).map_err(too_large)?;
        all.iter().map(|cp| (prop_config_to_tsv(cp), prop_json(cp))).unzip()
    } else {
        let domain: Vec<DataValue> = domain.split(',').map(|v| DataValue::from(v.trim())).collect();
        let all = enumerate_with_budget(&m, &domain, budget).map_err(too_large)?;
        all.iter().map(|c| (c.to_tsv(), config_json(c))).unzip()
    };
    let text = match out.format {
        Format::Text => {
            let mut s: String = records.iter().map(|r| format!("{r}\n")).collect();
            s.push_str(&format!("# {} configurations\n", records.len()));
            s
        }
        Format::Json => json_text(&json!({ "count": values.len(), "configurations": values })),
    };
    write(out.output.as_deref(), &text)?;
    Ok(OK)
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Parse { model, emit, out } => cmd_parse(model, *emit, out),
        Command::Check { model, out } => cmd_check(model, out),
        Command::Validate {
            model,
            config,
            prop,
            strict,
            tr,
            out,
        } => cmd_validate(model, config, *prop, *strict, tr.translation(), out),
        Command::Translate {
            model,
            format,
            tr,
            output,
        } => cmd_translate(model, *format, tr.translation(), output.as_deref()),
        Command::Analyze {
            model,
            which,
            dot,
            reduce,
            tr,
            out,
        } => cmd_analyze(model, which, *dot, *reduce, tr.translation(), out),
        Command::Enumerate {
            model,
            domain,
            budget,
            prop,
            tr,
            out,
        } => cmd_enumerate(model, domain, *budget, *prop, tr.translation(), out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            if let Some(msg) = msg {
                eprintln!("cdlsem: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
