//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

use cdlsem_core::model::Rule;
use cdlsem_core::parser::{load_model, parse_goal_expr, parse_model};
use cdlsem_core::prop::{build_formula, eval_p, project, rewrite, validate_prop, BoolExpr, PropConfig};
use cdlsem_core::sat::{Analysis, AnalysisError, Cnf, Lit, Solver};
use cdlsem_core::semantics::{enumerate_configurations, eval, Configuration};
use cdlsem_core::{check_well_formed, DataValue, FeatureId, Model};

type Check = Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn cdl_files(dir: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(fixtures().join(dir))
        .unwrap_or_else(|e| panic!("{dir}: {e}"))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cdl"))
        .collect();
    out.sort();
    out
}

fn load(path: &Path) -> Model {
    let text = std::fs::read_to_string(path).unwrap();
    match load_model(&text, &path.display().to_string()) {
        Ok((m, _)) => m,
        Err(e) => panic!("{e}"),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap().to_string_lossy().into_owned()
}

fn domain() -> Vec<DataValue> {
    ["0", "1", "2"].into_iter().map(DataValue::from).collect()
}

fn id(s: &str) -> FeatureId {
    FeatureId::new(s).unwrap()
}

fn within(start: Instant, limit: Duration, summary: String) -> Check {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{summary} in {:.2}s", took.as_secs_f64()))
    } else {
        Err(format!(
            "{summary} but took {:.2}s, limit {}s",
            took.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

// ---------------------------------------------------------------------------
// 1. Well-formedness

fn well_formedness() -> Check {
    let start = Instant::now();
    let rules = [
        ("a", Rule::A),
        ("b", Rule::B),
        ("c", Rule::C),
        ("d", Rule::D),
        ("e", Rule::E),
    ];
    for (name, rule) in rules {
        let bad = load(&fixtures().join(format!("wf/{name}_violating.cdl")));
        let flagged: BTreeSet<Rule> = check_well_formed(&bad).iter().map(|v| v.rule).collect();
        if flagged != BTreeSet::from([rule]) {
            return Err(format!("{name}_violating flags {flagged:?}"));
        }
        let good = load(&fixtures().join(format!("wf/{name}_conforming.cdl")));
        let v = check_well_formed(&good);
        if !v.is_empty() {
            return Err(format!("{name}_conforming flags {v:?}"));
        }
    }
    within(start, Duration::from_secs(1), "5 rules, 10 fixtures".into())
}

// ---------------------------------------------------------------------------
// 2. Expression evaluation against a separate interpreter

#[derive(Debug, Clone)]
enum E {
    Id(&'static str),
    K(&'static str),
    Not(Box<E>),
    BitNot(Box<E>),
    Neg(Box<E>),
    Bin(&'static str, Box<E>, Box<E>),
    Call(&'static str, Vec<E>),
    Cond(Box<E>, Box<E>, Box<E>),
}

const LOGICAL: [&str; 5] = ["||", "&&", "implies", "eqv", "xor"];
const ARITH: [&str; 10] = ["+", "-", "*", "/", "%", "<<", ">>", "^", "&", "|"];
const CMP: [&str; 6] = ["==", "!=", "<", ">", "<=", ">="];
const FEATURES: [&str; 4] = ["A", "B", "C", "D"];
const CONSTS: [&str; 11] = ["0", "1", "2", "3", "7", "-1", "2.5", "abc", "", "1.2.3", "ABC"];
const DATA: [&str; 9] = ["0", "1", "2", "7", "-1", "2.5", "abc", "", "1.2"];

/// A bool option, a none option, a data option and a booldata option.
const EVAL_MODEL: &str = "cdl_option A {}\n\
cdl_option B { flavor none }\n\
cdl_option C { flavor data }\n\
cdl_option D { flavor booldata }\n";

fn render(e: &E) -> String {
    match e {
        E::Id(x) => x.to_string(),
        E::K(k) if !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) => k.to_string(),
        E::K(k) => format!("\"{k}\""),
        E::Not(a) => format!("!({})", render(a)),
        E::BitNot(a) => format!("~({})", render(a)),
        E::Neg(a) => format!("-({})", render(a)),
        E::Bin(op, a, b) => format!("({} {op} {})", render(a), render(b)),
        E::Call(f, args) => {
            let args: Vec<String> = args.iter().map(render).collect();
            format!("{f}({})", args.join(", "))
        }
        E::Cond(g, t, f) => format!("({} ? {} : {})", render(g), render(t), render(f)),
    }
}

fn gen(rng: &mut StdRng, depth: u32) -> E {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.5) {
            E::Id(FEATURES.choose(rng).unwrap())
        } else {
            E::K(CONSTS.choose(rng).unwrap())
        };
    }
    let d = depth - 1;
    let sub = |rng: &mut StdRng| Box::new(gen(rng, d));
    match rng.random_range(0..9) {
        0 => E::Not(sub(rng)),
        1 => {
            if rng.random_bool(0.5) {
                E::BitNot(sub(rng))
            } else {
                E::Neg(sub(rng))
            }
        }
        2 => E::Bin(LOGICAL.choose(rng).unwrap(), sub(rng), sub(rng)),
        3 | 4 => E::Bin(ARITH.choose(rng).unwrap(), sub(rng), sub(rng)),
        5 => E::Bin(CMP.choose(rng).unwrap(), sub(rng), sub(rng)),
        6 => E::Cond(sub(rng), sub(rng), sub(rng)),
        7 => {
            let f = ["get_data", "is_active", "is_enabled", "is_loaded"]
                .choose(rng)
                .unwrap();
            let pool: &[&'static str] = if *f == "is_loaded" {
                &["A", "B", "C", "D", "E"]
            } else {
                &FEATURES
            };
            E::Call(f, vec![E::Id(pool.choose(rng).unwrap())])
        }
        _ => {
            let f = ["is_substr", "is_xsubstr", "version_cmp"].choose(rng).unwrap();
            E::Call(f, vec![gen(rng, d), gen(rng, d)])
        }
    }
}

/// One feature's (state, enabled value, data).
type Triple = (bool, bool, String);

#[derive(Debug, Clone, Copy)]
enum N {
    I(i64),
    F(f64),
}

fn num(s: &str) -> Option<N> {
    if let Ok(i) = s.parse::<i64>() {
        return Some(N::I(i));
    }
    let plausible =
        s.bytes().any(|b| b.is_ascii_digit()) && s.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b));
    if plausible {
        s.parse::<f64>().ok().map(N::F)
    } else {
        None
    }
}

fn f64_of(n: N) -> f64 {
    match n {
        N::I(i) => i as f64,
        N::F(x) => x,
    }
}

fn truth(s: &str) -> bool {
    match num(s) {
        _ if s.is_empty() => false,
        Some(n) => f64_of(n) != 0.0,
        None => true,
    }
}

fn bit(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn cmp(a: &str, b: &str) -> std::cmp::Ordering {
    match (num(a), num(b)) {
        (Some(N::I(x)), Some(N::I(y))) => x.cmp(&y),
        (Some(x), Some(y)) => f64_of(x).partial_cmp(&f64_of(y)).unwrap(),
        _ => a.cmp(b),
    }
}

fn float(x: f64) -> Result<String, ()> {
    if x.is_finite() {
        Ok(format!("{x:?}"))
    } else {
        Err(())
    }
}

fn arith(op: &str, a: &str, b: &str) -> Result<String, ()> {
    let (x, y) = (num(a).ok_or(())?, num(b).ok_or(())?);
    if let (N::I(i), N::I(j)) = (x, y) {
        let r = match op {
            "+" => i.checked_add(j),
            "-" => i.checked_sub(j),
            "*" => i.checked_mul(j),
            "/" if j == 0 => return Err(()),
            "/" => i
                .checked_div(j)
                .map(|q| if i % j != 0 && (i < 0) != (j < 0) { q - 1 } else { q }),
            "%" if j == 0 => return Err(()),
            "%" => i
                .checked_rem(j)
                .map(|r| if r != 0 && (r < 0) != (j < 0) { r + j } else { r }),
            "<<" if j < 0 => return Err(()),
            "<<" if i == 0 => Some(0),
            "<<" if j >= 64 => None,
            "<<" => Some(i << j).filter(|r| r >> j == i),
            ">>" if j < 0 => return Err(()),
            ">>" => Some(i >> j.min(63)),
            "&" => Some(i & j),
            "|" => Some(i | j),
            "^" => Some(i ^ j),
            _ => unreachable!(),
        };
        return r.map(|v| v.to_string()).ok_or(());
    }
    let (p, q) = (f64_of(x), f64_of(y));
    match op {
        "+" => float(p + q),
        "-" => float(p - q),
        "*" => float(p * q),
        "/" if q == 0.0 => Err(()),
        "/" => float(p / q),
        _ => Err(()),
    }
}

fn version(a: &str, b: &str) -> String {
    let pa: Vec<&str> = a.split('.').collect();
    let pb: Vec<&str> = b.split('.').collect();
    for i in 0..pa.len().max(pb.len()) {
        match cmp(pa.get(i).unwrap_or(&"0"), pb.get(i).unwrap_or(&"0")) {
            std::cmp::Ordering::Less => return "-1".into(),
            std::cmp::Ordering::Greater => return "1".into(),
            std::cmp::Ordering::Equal => {}
        }
    }
    "0".into()
}

/// The reference interpreter. Features A and B have no data of their own
/// and read as "1" when enabled.
fn interp(e: &E, c: &BTreeMap<&str, Triple>) -> Result<String, ()> {
    let data = |x: &str| -> String {
        if x == "A" || x == "B" {
            "1".into()
        } else {
            c[x].2.clone()
        }
    };
    match e {
        E::Id(x) => Ok(if c[x].0 { data(x) } else { "0".into() }),
        E::K(k) => Ok(k.to_string()),
        E::Not(a) => Ok(bit(!truth(&interp(a, c)?))),
        E::BitNot(a) => match num(&interp(a, c)?) {
            Some(N::I(i)) => Ok((!i).to_string()),
            _ => Err(()),
        },
        E::Neg(a) => match num(&interp(a, c)?) {
            Some(N::I(i)) => i.checked_neg().map(|v| v.to_string()).ok_or(()),
            Some(N::F(x)) => float(-x),
            None => Err(()),
        },
        E::Bin(op, a, b) => {
            let x = interp(a, c)?;
            let y = interp(b, c)?;
            if LOGICAL.contains(op) {
                let (p, q) = (truth(&x), truth(&y));
                Ok(bit(match *op {
                    "||" => p || q,
                    "&&" => p && q,
                    "implies" => !p || q,
                    "eqv" => p == q,
                    _ => p != q,
                }))
            } else if CMP.contains(op) {
                let o = cmp(&x, &y);
                Ok(bit(match *op {
                    "==" => o.is_eq(),
                    "!=" => o.is_ne(),
                    "<" => o.is_lt(),
                    ">" => o.is_gt(),
                    "<=" => o.is_le(),
                    _ => o.is_ge(),
                }))
            } else {
                arith(op, &x, &y)
            }
        }
        E::Call(f, args) => match (*f, args.as_slice()) {
            ("get_data", [E::Id(x)]) => Ok(data(x)),
            ("is_active", [E::Id(x)]) => Ok(bit(c[x].0)),
            ("is_enabled", [E::Id(x)]) => Ok(bit(c[x].1)),
            ("is_loaded", [E::Id(x)]) => Ok(bit(FEATURES.contains(x))),
            (f, [a, b]) => {
                let x = interp(a, c)?;
                let y = interp(b, c)?;
                Ok(match f {
                    "is_substr" => bit(x.to_lowercase().contains(&y.to_lowercase())),
                    "is_xsubstr" => bit(x.contains(&y)),
                    _ => version(&x, &y),
                })
            }
            _ => unreachable!(),
        },
        E::Cond(g, t, f) => {
            if truth(&interp(g, c)?) {
                interp(t, c)
            } else {
                interp(f, c)
            }
        }
    }
}

fn to_config(c: &BTreeMap<&str, Triple>) -> Configuration {
    c.iter()
        .fold(Configuration::new(), |acc, (name, (s, v, d))| acc.with(name, *s, *v, d))
}

fn run_eval(src: &str, c: &Configuration, m: &Model) -> Result<String, String> {
    let e = parse_goal_expr(src).map_err(|d| format!("parse error on {src}: {d}"))?;
    eval(&e, c, m).map(|v| v.to_string()).map_err(|_| "error".into())
}

fn evaluation() -> Check {
    let start = Instant::now();
    let m = load_model(EVAL_MODEL, "eval.cdl").unwrap().0;
    let curated_config: BTreeMap<&str, Triple> = BTreeMap::from([
        ("A", (true, true, "1".into())),
        ("B", (false, true, "1".into())),
        ("C", (true, true, "5".into())),
        ("D", (false, false, "abc".into())),
    ]);
    let cc = to_config(&curated_config);
    let curated: &[(&str, &str)] = &[
        ("A || B", "1"),
        ("A && B", "0"),
        ("A implies B", "0"),
        ("B implies A", "1"),
        ("A eqv B", "0"),
        ("A xor B", "1"),
        ("!B", "1"),
        ("~C", "-6"),
        ("C + 2", "7"),
        ("C - 7", "-2"),
        ("C * 2.5", "12.5"),
        ("C / 2", "2"),
        ("-C / 2", "-3"),
        ("C % 3", "2"),
        ("-C % 3", "1"),
        ("C << 2", "20"),
        ("C >> 1", "2"),
        ("C ^ 3", "6"),
        ("C & 4", "4"),
        ("C | 2", "7"),
        ("C == 5.0", "1"),
        ("C != 5", "0"),
        ("C < 10", "1"),
        ("C <= 4", "0"),
        ("C > 4.5", "1"),
        ("get_data(D) >= \"abc\"", "1"),
        ("\"abc\" > \"abd\"", "0"),
        ("A ? C : 1 / 0", "5"),
        ("B ? 1 / 0 : 9", "9"),
        ("D", "0"),
        ("get_data(D)", "abc"),
        ("get_data(A)", "1"),
        ("is_active(C)", "1"),
        ("is_active(B)", "0"),
        ("is_enabled(B)", "1"),
        ("is_enabled(D)", "0"),
        ("is_loaded(C)", "1"),
        ("is_loaded(Z)", "0"),
        ("is_substr(\"Hello\", \"ELL\")", "1"),
        ("is_xsubstr(\"Hello\", \"ELL\")", "0"),
        ("is_xsubstr(\"Hello\", \"ell\")", "1"),
        ("version_cmp(\"1.2.10\", \"1.2.9\")", "1"),
        ("version_cmp(\"1.2\", \"1.2.0\")", "0"),
        ("version_cmp(\"1.10\", \"2\")", "-1"),
        ("1 + 2.0", "3.0"),
        ("\"\" || 0", "0"),
        ("\"0.0\" ? 1 : 2", "2"),
        ("\"abc\" && 1", "1"),
        ("C / 0", "error"),
        ("\"abc\" + 1", "error"),
        ("2.5 % 2", "error"),
        ("~2.5", "error"),
    ];
    for (src, want) in curated {
        let got = run_eval(src, &cc, &m).unwrap_or_else(|e| e);
        if got != *want {
            return Err(format!("{src}: expected {want:?}, got {got:?}"));
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let pairs = 1000;
    let mut errors = 0;
    for _ in 0..pairs {
        let e = gen(&mut rng, 4);
        let c: BTreeMap<&str, Triple> = FEATURES
            .iter()
            .map(|&x| {
                let d = DATA.choose(&mut rng).unwrap().to_string();
                (x, (rng.random_bool(0.6), rng.random_bool(0.6), d))
            })
            .collect();
        let src = render(&e);
        let want = interp(&e, &c).map_err(|_| "error".to_string());
        let got = run_eval(&src, &to_config(&c), &m);
        if got.as_ref().is_err_and(|s| s.starts_with("parse error")) || got != want {
            return Err(format!("{src} under {c:?}: expected {want:?}, got {got:?}"));
        }
        errors += usize::from(want.is_err());
    }
    within(
        start,
        Duration::from_secs(5),
        format!(
            "{} curated cases, {pairs} random pairs ({errors} evaluation errors)",
            curated.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. Per-property families against hand-derived accepted sets

type Cfg = BTreeMap<String, Triple>;
type Predicate = fn(&Cfg) -> bool;

fn st(c: &Cfg, x: &str) -> bool {
    c[x].0
}

fn val(c: &Cfg, x: &str) -> bool {
    c[x].1
}

fn dat<'a>(c: &'a Cfg, x: &str) -> &'a str {
    &c[x].2
}

/// Unconstrained bool options at the root.
fn free(c: &Cfg, names: &[&str]) -> bool {
    names.iter().all(|x| st(c, x) == val(c, x))
}

fn count(c: &Cfg) -> String {
    (usize::from(st(c, "A")) + usize::from(st(c, "B"))).to_string()
}

fn families() -> Vec<(&'static str, Predicate)> {
    vec![
        ("none_plain", |c| val(c, "X") && st(c, "X")),
        ("none_requires", |c| {
            free(c, &["B"]) && val(c, "X") && st(c, "X") == st(c, "B")
        }),
        ("none_active_if", |c| {
            free(c, &["B"]) && val(c, "X") && st(c, "X") == !st(c, "B")
        }),
        ("none_legal_values", |c| val(c, "X") && st(c, "X")),
        ("bool_plain", |c| free(c, &["X"])),
        ("bool_requires", |c| {
            free(c, &["B"]) && st(c, "X") == (val(c, "X") && st(c, "B"))
        }),
        ("bool_active_if", |c| {
            free(c, &["B"]) && st(c, "X") == (val(c, "X") && !st(c, "B"))
        }),
        ("bool_calculated", |c| free(c, &["B", "X"]) && val(c, "X") == st(c, "B")),
        ("bool_interface", |c| {
            free(c, &["A", "B", "X"]) && val(c, "X") == (st(c, "A") || st(c, "B"))
        }),
        ("data_plain", |c| val(c, "X") && st(c, "X")),
        ("data_requires", |c| {
            free(c, &["B"]) && val(c, "X") && st(c, "X") == st(c, "B")
        }),
        ("data_active_if", |c| {
            free(c, &["B"]) && val(c, "X") && st(c, "X") == !st(c, "B")
        }),
        ("data_calculated", |c| {
            free(c, &["B"]) && val(c, "X") && st(c, "X") && dat(c, "X") == if st(c, "B") { "2" } else { "1" }
        }),
        ("data_legal_values", |c| {
            val(c, "X") && st(c, "X") && ["1", "2"].contains(&dat(c, "X"))
        }),
        ("data_interface", |c| {
            free(c, &["A", "B"]) && val(c, "X") && st(c, "X") && dat(c, "X") == count(c)
        }),
        ("booldata_plain", |c| free(c, &["X"])),
        ("booldata_requires", |c| {
            free(c, &["B"]) && st(c, "X") == (val(c, "X") && st(c, "B"))
        }),
        ("booldata_active_if", |c| {
            free(c, &["B"]) && st(c, "X") == (val(c, "X") && !st(c, "B"))
        }),
        ("booldata_calculated", |c| {
            let d = if st(c, "B") { "2" } else { "0" };
            free(c, &["B", "X"]) && dat(c, "X") == d && val(c, "X") == (d != "0")
        }),
        ("booldata_legal_values", |c| {
            free(c, &["X"]) && ["0", "2"].contains(&dat(c, "X"))
        }),
        ("booldata_interface", |c| {
            free(c, &["A", "B", "X"]) && dat(c, "X") == count(c) && val(c, "X") == (count(c) != "0")
        }),
    ]
}

/// Every configuration over the model's features: states and enabled
/// values free, data from the domain, or `"1"` for bool and none flavors.
fn raw_product(m: &Model) -> Vec<Cfg> {
    let mut out = vec![Cfg::new()];
    for n in m.nodes() {
        let data: Vec<&str> = if n.flavor.has_fixed_data() {
            vec!["1"]
        } else {
            vec!["0", "1", "2"]
        };
        let mut next = Vec::new();
        for c in &out {
            for s in [false, true] {
                for v in [false, true] {
                    for d in &data {
                        let mut c = c.clone();
                        c.insert(n.name.to_string(), (s, v, d.to_string()));
                        next.push(c);
                    }
                }
            }
        }
        out = next;
    }
    out
}

fn family_sets() -> Check {
    let start = Instant::now();
    let cases = families();
    let files: BTreeSet<String> = cdl_files("family").iter().map(|p| stem(p)).collect();
    let named: BTreeSet<String> = cases.iter().map(|(n, _)| n.to_string()).collect();
    if files != named {
        return Err(format!("fixtures {files:?} differ from predicates {named:?}"));
    }
    let mut accepted = 0;
    for (name, predicate) in &cases {
        let m = load(&fixtures().join(format!("family/{name}.cdl")));
        if m.universe().len() > 5 {
            return Err(format!("{name} has more than 5 features"));
        }
        let want: BTreeSet<Cfg> = raw_product(&m).into_iter().filter(predicate).collect();
        let got: BTreeSet<Cfg> = enumerate_configurations(&m, &domain())
            .map_err(|e| e.to_string())?
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(k, v)| (k.to_string(), (v.state, v.value, v.data.to_string())))
                    .collect()
            })
            .collect();
        if want != got {
            let missing: Vec<_> = want.difference(&got).take(3).collect();
            let extra: Vec<_> = got.difference(&want).take(3).collect();
            return Err(format!("{name}: missing {missing:?}, unexpected {extra:?}"));
        }
        accepted += got.len();
    }
    within(
        start,
        Duration::from_secs(30),
        format!("{} fixtures, {accepted} accepted configurations", cases.len()),
    )
}

// ---------------------------------------------------------------------------
// 4. The Boolean view under-approximates

fn soundness() -> Check {
    let start = Instant::now();
    let mut models = 0;
    let mut configs = 0;
    for path in cdl_files("models").into_iter().chain(cdl_files("family")) {
        let m = load(&path);
        if m.universe().len() > 8 {
            continue;
        }
        models += 1;
        for c in enumerate_configurations(&m, &domain()).map_err(|e| e.to_string())? {
            let report = validate_prop(&m, &project(&c, &m)).map_err(|e| e.to_string())?;
            if !report.accepted() {
                return Err(format!(
                    "{}: projection of {c:?} rejected: {:?}",
                    stem(&path),
                    report.failures
                ));
            }
            configs += 1;
        }
    }
    if models < 20 {
        return Err(format!("only {models} models with at most 8 features"));
    }
    within(
        start,
        Duration::from_secs(120),
        format!("{models} models, {configs} configurations, 0 counterexamples"),
    )
}

// ---------------------------------------------------------------------------
// 5. Rewrite rules

const REWRITE_MODEL: &str = "cdl_option x {}\ncdl_option y {}\ncdl_option z {}\n";
const INTERFACE_MODEL: &str = "cdl_interface I {}\n\
cdl_option P1 { implements I }\n\
cdl_option P2 { implements I }\n\
cdl_option P3 { implements I }\n\
cdl_option P4 { implements I }\n\
cdl_option P5 { implements I }\n";

type Definition = fn(&dyn Fn(&str) -> bool) -> bool;

fn implementors_on(v: &dyn Fn(&str) -> bool) -> usize {
    ["P1", "P2", "P3", "P4", "P5"].iter().filter(|p| v(p)).count()
}

fn rewrite_rules() -> Vec<(&'static str, &'static str, Definition)> {
    vec![
        ("loaded identifier", "x", |v| v("x")),
        ("unloaded identifier", "w", |_| false),
        ("negated identifier", "!x", |v| !v("x")),
        ("negated unloaded identifier", "!w", |_| true),
        ("true constant", "1", |_| true),
        ("true string constant", "\"abc\"", |_| true),
        ("false constant", "0", |_| false),
        ("false string constant", "\"\"", |_| false),
        ("equality with a true constant", "x == 1", |v| v("x")),
        ("equality with a true constant, flipped", "\"yes\" == x", |v| v("x")),
        ("equality with a false constant", "x == 0", |v| !v("x")),
        ("inequality with zero", "x != 0", |v| v("x")),
        ("greater than a non-negative integer", "x > 3", |v| v("x")),
        ("greater than another constant", "x > 2.5", |_| true),
        ("substring test", "is_substr(x, \"abc\")", |v| v("x")),
        ("disjunction", "x || y", |v| v("x") || v("y")),
        ("conjunction", "x && y", |v| v("x") && v("y")),
        ("implication", "x implies y", |v| !v("x") || v("y")),
        ("equivalence", "x eqv y", |v| v("x") == v("y")),
        ("conditional", "x ? y : z", |v| if v("x") { v("y") } else { v("z") }),
        ("nested", "(x == 0) || (y && z != 0)", |v| !v("x") || (v("y") && v("z"))),
        ("interface equal to 0", "I == 0", |v| !v("I") && implementors_on(v) == 0),
        ("interface greater than 0", "I > 0", |v| {
            v("I") && implementors_on(v) > 0
        }),
        ("interface equal to 1", "I == 1", |v| v("I") && implementors_on(v) == 1),
        ("interface at least 2", "I >= 2", |v| v("I") && implementors_on(v) >= 2),
        ("interface greater than 2", "I > 2", |v| {
            v("I") && implementors_on(v) > 2
        }),
    ]
}

fn assignments(names: &[FeatureId]) -> impl Iterator<Item = PropConfig> + '_ {
    (0u32..1 << names.len()).map(move |bits| {
        names
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), bits >> i & 1 == 1))
            .collect()
    })
}

fn rewrites() -> Check {
    let start = Instant::now();
    let plain = load_model(REWRITE_MODEL, "plain.cdl").unwrap().0;
    let iface = load_model(INTERFACE_MODEL, "iface.cdl").unwrap().0;
    let rules = rewrite_rules();
    for (name, src, definition) in &rules {
        let m = if src.contains('I') { &iface } else { &plain };
        let names: Vec<FeatureId> = m.ids().into_iter().collect();
        if names.len() > 6 {
            return Err(format!("{name}: more than 6 variables"));
        }
        let e = parse_goal_expr(src).map_err(|d| d.to_string())?;
        let Some(r) = rewrite(&e, m) else {
            return Err(format!("{name}: {src} has no rewrite"));
        };
        for cp in assignments(&names) {
            let lookup = |x: &str| cp.get(&id(x)).copied().unwrap_or(false);
            let got = eval_p(&r, &cp).map_err(|e| format!("{name}: {e}"))?;
            if got != definition(&lookup) {
                return Err(format!("{name}: {src} rewrites to {r}, which differs at {cp:?}"));
            }
        }
    }
    for src in ["x + 1", "!(x && y)", "x < 3", "x xor y", "get_data(x) == 1"] {
        let e = parse_goal_expr(src).map_err(|d| d.to_string())?;
        if let Some(r) = rewrite(&e, &plain) {
            return Err(format!("{src} should have no rewrite, got {r}"));
        }
    }
    within(
        start,
        Duration::from_secs(10),
        format!("{} rules, 5 expressions outside the domain", rules.len()),
    )
}

// ---------------------------------------------------------------------------
// 6. SAT solving against truth tables

fn brute_sat(n: usize, clauses: &[Vec<Lit>], assumptions: &[Lit]) -> bool {
    let holds = |bits: u32, l: Lit| (bits >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0);
    (0u32..1 << n).any(|bits| {
        assumptions.iter().all(|&l| holds(bits, l)) && clauses.iter().all(|c| c.iter().any(|&l| holds(bits, l)))
    })
}

fn pigeonhole(pigeons: usize, holes: usize) -> Cnf {
    let var = |p: usize, h: usize| (p * holes + h + 1) as Lit;
    let mut cnf = Cnf::new(pigeons * holes);
    for p in 0..pigeons {
        cnf.add_clause((0..holes).map(|h| var(p, h)));
    }
    for h in 0..holes {
        for p in 0..pigeons {
            for q in p + 1..pigeons {
                cnf.add_clause([-var(p, h), -var(q, h)]);
            }
        }
    }
    cnf
}

fn sat_solving() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let (mut sat, mut unsat) = (0, 0);
    for round in 0..1000 {
        let n = rng.random_range(1..=15);
        let m = rng.random_range(0..=60);
        let clauses: Vec<Vec<Lit>> = (0..m)
            .map(|_| {
                let len = rng.random_range(1..=3.min(n));
                let vars = rand::seq::index::sample(&mut rng, n, len);
                vars.iter()
                    .map(|v| {
                        if rng.random_bool(0.5) {
                            v as Lit + 1
                        } else {
                            -(v as Lit + 1)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut cnf = Cnf::new(n);
        for c in &clauses {
            cnf.add_clause(c.iter().copied());
        }
        let assumptions: Vec<Lit> = if round % 4 == 0 {
            let v = rng.random_range(1..=n as Lit);
            vec![if rng.random_bool(0.5) { v } else { -v }]
        } else {
            Vec::new()
        };
        let mut solver = Solver::new(&cnf);
        for a in [&[][..], &assumptions[..]] {
            let expected = brute_sat(n, &clauses, a);
            match solver.solve(a) {
                Some(model) => {
                    let fits = a.iter().all(|&l| model[l.unsigned_abs() as usize - 1] == (l > 0));
                    if !expected || !cnf.satisfied_by(&model) || !fits {
                        return Err(format!("round {round}: bad model for {clauses:?} under {a:?}"));
                    }
                    sat += 1;
                }
                None if expected => return Err(format!("round {round}: {clauses:?} under {a:?} is satisfiable")),
                None => unsat += 1,
            }
        }
    }
    if Solver::new(&pigeonhole(4, 3)).solve(&[]).is_some() {
        return Err("pigeonhole(4, 3) reported satisfiable".into());
    }
    within(
        start,
        Duration::from_secs(60),
        format!("1000 random CNFs ({sat} sat, {unsat} unsat answers), pigeonhole(4,3) unsat"),
    )
}

// ---------------------------------------------------------------------------
// 7. Analyses against their definitions

type Edges = BTreeSet<(FeatureId, FeatureId)>;

fn analyses() -> Check {
    let start = Instant::now();
    let mut files = cdl_files("models");
    files.extend(cdl_files("family"));
    files.extend(cdl_files("wf").into_iter().filter(|p| stem(p).ends_with("conforming")));
    files.push(fixtures().join("ecos_kernel.cdl"));
    let mut checked = 0;
    let mut void = 0;
    for path in files {
        let m = load(&path);
        if m.universe().len() > 12 {
            continue;
        }
        let name = stem(&path);
        let f = build_formula(&m).map_err(|e| format!("{name}: {e}"))?;
        let conj: BoolExpr = f.conjunction();
        let vars: Vec<FeatureId> = f.variables().map(|(x, _)| x.clone()).collect();
        let models: Vec<PropConfig> = assignments(&vars)
            .filter(|cp| eval_p(&conj, cp).expect("every variable is assigned"))
            .collect();
        let ids = m.ids();
        let analysis = Analysis::new(&m).map_err(|e| format!("{name}: {e}"))?;
        checked += 1;
        if models.is_empty() {
            let all_void = [
                analysis.dead().err(),
                analysis.core().err(),
                analysis.implications().err(),
            ]
            .iter()
            .all(|e| *e == Some(AnalysisError::VoidModel));
            if !all_void {
                return Err(format!("{name}: void model not reported"));
            }
            void += 1;
            continue;
        }
        let dead: BTreeSet<FeatureId> = ids
            .iter()
            .filter(|x| models.iter().all(|cp| !cp[*x]))
            .cloned()
            .collect();
        let core: BTreeSet<FeatureId> = ids.iter().filter(|x| models.iter().all(|cp| cp[*x])).cloned().collect();
        let mut edges = Edges::new();
        for a in ids.iter().filter(|x| !dead.contains(*x)) {
            for b in ids.iter().filter(|b| *b != a) {
                if models.iter().all(|cp| !cp[a] || cp[b]) {
                    edges.insert((a.clone(), b.clone()));
                }
            }
        }
        let got_dead = analysis.dead().map_err(|e| e.to_string())?;
        let got_core = analysis.core().map_err(|e| e.to_string())?;
        let got_edges = analysis.implications().map_err(|e| e.to_string())?;
        if got_dead != dead || got_core != core || got_edges != edges {
            return Err(format!(
                "{name}: dead {got_dead:?} vs {dead:?}, core {got_core:?} vs {core:?}, edges {got_edges:?} vs {edges:?}"
            ));
        }
    }
    within(
        start,
        Duration::from_secs(120),
        format!("{checked} models ({void} void)"),
    )
}

// ---------------------------------------------------------------------------
// 8. CLI determinism

fn cli_runs() -> Vec<Vec<String>> {
    let per_model: &[&[&str]] = &[
        &["parse"],
        &["parse", "--emit", "pretty"],
        &["parse", "--format", "json"],
        &["check"],
        &["check", "--format", "json"],
        &["translate"],
        &["translate", "--literal"],
        &["translate", "--format", "dimacs"],
        &["translate", "--format", "json"],
        &["analyze", "--sat"],
        &["analyze", "--sat", "--format", "json"],
        &["analyze", "--dead"],
        &["analyze", "--core", "--format", "json"],
        &["analyze", "--core", "--literal"],
        &["analyze", "--implications"],
        &["analyze", "--implications", "--reduce", "--dot"],
        &["enumerate"],
        &["enumerate", "--prop"],
        &["enumerate", "--format", "json", "--domain", "0,1"],
    ];
    let mut models = cdl_files("models");
    models.extend(cdl_files("family"));
    models.extend(cdl_files("wf"));
    models.push(fixtures().join("ecos_kernel.cdl"));
    let mut runs = Vec::new();
    for path in &models {
        for args in per_model {
            let mut run: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            run.push(path.display().to_string());
            runs.push(run);
        }
    }
    let validations = [
        ("02_component_children", "serial_accepted.tsv", ""),
        ("02_component_children", "serial_rejected.tsv", ""),
        ("02_component_children", "serial_partial.tsv", ""),
        ("02_component_children", "serial_partial.tsv", "--strict"),
        ("02_component_children", "serial_accepted.prop.tsv", "--prop"),
        ("02_component_children", "serial_rejected.prop.tsv", "--prop"),
        ("13_unloaded_reference", "net_accepted.tsv", ""),
        ("13_unloaded_reference", "net_unloaded_enabled.tsv", ""),
    ];
    for (model, config, flag) in validations {
        for format in ["text", "json"] {
            let mut run = vec!["validate".to_string(), "--format".into(), format.into()];
            if !flag.is_empty() {
                run.push(flag.into());
            }
            run.push(fixtures().join(format!("models/{model}.cdl")).display().to_string());
            run.push(fixtures().join(format!("configs/{config}")).display().to_string());
            runs.push(run);
        }
    }
    runs
}

type RunOutput = (Option<i32>, Vec<u8>, Vec<u8>);

fn run_cli(args: &[String]) -> RunOutput {
    let out = Command::new(env!("CARGO_BIN_EXE_cdlsem"))
        .args(args)
        .env_remove("CDLSEM_BUDGET")
        .output()
        .expect("spawn cdlsem");
    (out.status.code(), out.stdout, out.stderr)
}

fn determinism() -> Check {
    let start = Instant::now();
    let runs = cli_runs();
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = runs.len().div_ceil(threads);
    let mut codes: BTreeMap<i32, usize> = BTreeMap::new();
    let results: Vec<Result<Vec<i32>, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = runs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut codes = Vec::new();
                    for args in part {
                        let first = run_cli(args);
                        let second = run_cli(args);
                        if first != second {
                            return Err(format!("cdlsem {} differs between runs", args.join(" ")));
                        }
                        codes.push(first.0.unwrap_or(-1));
                    }
                    Ok(codes)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for r in results {
        for code in r? {
            *codes.entry(code).or_default() += 1;
        }
    }
    Ok(format!(
        "{} commands run twice, byte-identical; exit codes {codes:?}; {:.2}s",
        runs.len(),
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 9. Parser fuzzing

const TOKENS: &[&str] = &[
    "cdl_package",
    "cdl_component",
    "cdl_option",
    "cdl_interface",
    "flavor",
    "bool",
    "data",
    "booldata",
    "none",
    "requires",
    "active_if",
    "calculated",
    "legal_values",
    "implements",
    "parent",
    "default_value",
    "display",
    "to",
    "{",
    "}",
    "[",
    "]",
    "\"",
    "\\",
    ";",
    "#",
    "$",
    "(",
    ")",
    "!",
    "&&",
    "||",
    "?",
    ":",
    "==",
    "<",
    ">>",
    "implies",
    "xor",
    "eqv",
    "is_substr",
    "get_data",
    "version_cmp",
    "0x",
    "1",
    "-",
    "2.5e",
    "A",
    "B_X",
    " ",
    "\n",
    "\t",
    "\\\n",
    "é",
];

fn mutate(rng: &mut StdRng, seeds: &[String]) -> String {
    if rng.random_bool(0.2) {
        let n = rng.random_range(0..40);
        let mut s = String::new();
        for _ in 0..n {
            s.push_str(TOKENS.choose(rng).unwrap());
            if rng.random_bool(0.5) {
                s.push(' ');
            }
        }
        return s;
    }
    let mut bytes = seeds.choose(rng).unwrap().clone().into_bytes();
    for _ in 0..rng.random_range(1..6) {
        let len = bytes.len();
        let at = rng.random_range(0..=len);
        match rng.random_range(0..6) {
            0 if len > 0 => bytes[at.min(len - 1)] = rng.random(),
            1 => {
                let t = TOKENS.choose(rng).unwrap().as_bytes();
                bytes.splice(at..at, t.iter().copied());
            }
            2 if len > 0 => {
                let end = rng.random_range(at..=len);
                bytes.drain(at..end);
            }
            3 => {
                let end = rng.random_range(at..=len);
                let copy: Vec<u8> = bytes[at..end].to_vec();
                let to = rng.random_range(0..=len);
                bytes.splice(to..to, copy);
            }
            4 => bytes.truncate(at),
            _ => {
                let other = seeds.choose(rng).unwrap().as_bytes();
                let from = rng.random_range(0..=other.len());
                bytes.splice(at..at, other[from..].iter().copied());
            }
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

fn fuzz_input(seeds: &[String], index: u64) -> String {
    let mut rng = StdRng::seed_from_u64(0x5eed_0009 ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    mutate(&mut rng, seeds)
}

fn fuzzing() -> Check {
    let secs: u64 = std::env::var("CDLSEM_FUZZ_SECS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(60);
    let mut seeds: Vec<String> = Vec::new();
    for dir in ["models", "family", "wf"] {
        for p in cdl_files(dir) {
            seeds.push(std::fs::read_to_string(p).unwrap());
        }
    }
    seeds.push(std::fs::read_to_string(fixtures().join("ecos_kernel.cdl")).unwrap());
    let seeds = Arc::new(seeds);
    let count = Arc::new(AtomicU64::new(0));
    let done = Arc::new(AtomicBool::new(false));
    let crashed: Arc<std::sync::Mutex<Option<u64>>> = Arc::default();
    let deadline = Instant::now() + Duration::from_secs(secs);
    let previous_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let worker = {
        let (seeds, count, done, crashed) = (seeds.clone(), count.clone(), done.clone(), crashed.clone());
        std::thread::spawn(move || {
            let mut i = 0u64;
            while Instant::now() < deadline {
                let input = fuzz_input(&seeds, i);
                let ok = catch_unwind(AssertUnwindSafe(|| {
                    let out = parse_model(&input);
                    if !out.has_errors() {
                        let _ = load_model(&input, "fuzz.cdl");
                    }
                }))
                .is_ok();
                if !ok {
                    crashed.lock().unwrap().get_or_insert(i);
                }
                i += 1;
                count.store(i, AtomicOrdering::Release);
            }
            done.store(true, AtomicOrdering::Release);
        })
    };
    let stall = Duration::from_secs(10);
    let mut last = (0, Instant::now());
    while !done.load(AtomicOrdering::Acquire) {
        std::thread::sleep(Duration::from_millis(100));
        let n = count.load(AtomicOrdering::Acquire);
        if n != last.0 {
            last = (n, Instant::now());
        } else if last.1.elapsed() > stall {
            let input = fuzz_input(&seeds, n);
            return Err(format!("no progress for {}s on input {n}: {input:?}", stall.as_secs()));
        }
    }
    worker.join().unwrap();
    std::panic::set_hook(previous_hook);
    let n = count.load(AtomicOrdering::Acquire);
    if let Some(i) = *crashed.lock().unwrap() {
        return Err(format!("panic on input {i}: {:?}", fuzz_input(&seeds, i)));
    }
    if secs >= 60 && n <= 100_000 {
        return Err(format!("only {n} inputs in {secs}s"));
    }
    Ok(format!("{n} inputs in {secs}s, no panic or hang"))
}

// ---------------------------------------------------------------------------

type Criterion = fn() -> Check;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("well-formedness rules", well_formedness),
        ("expression evaluation", evaluation),
        ("per-property families", family_sets),
        ("Boolean under-approximation", soundness),
        ("rewrite rules", rewrites),
        ("SAT solver", sat_solving),
        ("dead, core and implications", analyses),
        ("CLI determinism", determinism),
        ("parser robustness", fuzzing),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|k| k != n) {
            continue;
        }
        match catch_unwind(check) {
            Ok(Ok(msg)) => println!("PASS {n} {name}: {msg}"),
            Ok(Err(msg)) => {
                failed += 1;
                println!("FAIL {n} {name}: {msg}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {n} {name}: panicked");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
