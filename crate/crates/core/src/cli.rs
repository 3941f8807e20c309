//! The `qord` command line.
//!
//! Exit codes: 0 on success (including a negative quasi-simplicity verdict),
//! 1 when the input is rejected on mathematical grounds, 2 on malformed input.

use std::io::{Read, Write};
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::branch::{is_normalized, psi, validate, ParamJson, Parameterization, RForm, RFormJson};
use crate::classify::{census, is_quasi_simple, normal_form, CensusRow, ClassifyError, Template, TopClass};
use crate::lattice::Exponent;
use crate::reduce::{
    apply_change, normalize_coefficients, quasi_short_reduce, ChangeJson, CoordinateChange, Normalization,
};
use crate::semigroup::{build_semigroup, SemigroupInput};
use crate::series::{FracSeries, TruncationOrder};
use crate::zariski::{direct_exponents, zariski_exponents};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "qord",
    version,
    about = "Invariants and normal forms of quasi-ordinary surface branches"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Total-degree bound; overrides the input's own bound.
    #[arg(long, global = true)]
    pub trunc: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a parameterization and report its characteristic exponents.
    Validate { input: String },
    /// Semigroup data from `{"r","n","lambdas"}` or from a parameterization.
    Semigroup { input: String },
    /// Generalized Zariski exponents.
    Zariski { input: String },
    /// Optionally apply a change, then remove every eliminable term.
    Reduce {
        input: String,
        /// Coordinate change applied first (path or inline JSON).
        #[arg(long)]
        change: Option<String>,
    },
    /// Homothety making the leading and target coefficients 1.
    Normalize {
        input: String,
        /// Target exponents such as `5,8;10,4`; defaults to the Zariski exponents.
        #[arg(long)]
        targets: Option<String>,
    },
    /// Quasi-simplicity of a class, and the normal form of a parameterization.
    Classify {
        input: Option<String>,
        #[arg(long)]
        n: Option<i64>,
        /// `lambda_1` as `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
    /// Classify every class in a box, one JSON line per class.
    Census {
        #[arg(long, default_value_t = 7)]
        n_max: i64,
        #[arg(long = "box", default_value_t = 12)]
        bound: i64,
    },
    /// Evaluate the map on a 2-form `{"components":[...]}`.
    Psi {
        input: String,
        #[arg(long)]
        form: String,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub detail: Option<Value>,
}

impl Failure {
    fn malformed(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
            detail: None,
        }
    }

    fn rejected(message: impl Into<String>, detail: Option<Value>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
            detail,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// What a verb produced: a JSON value and its text rendering.
struct Output {
    json: Value,
    text: String,
}

fn read_source(src: &str) -> CliResult<String> {
    let trimmed = src.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(src.to_string());
    }
    if src == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::malformed(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(Path::new(src)).map_err(|e| Failure::malformed(format!("{src}: {e}")))
}

fn parse_json<T: serde::de::DeserializeOwned>(src: &str) -> CliResult<T> {
    let text = read_source(src)?;
    serde_json::from_str(&text).map_err(|e| Failure::malformed(format!("{src}: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn env_trunc() -> CliResult<Option<u32>> {
    match std::env::var("QORD_TRUNC") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::malformed(format!("QORD_TRUNC={v:?} is not a bound"))),
        Err(_) => Ok(None),
    }
}

/// Load a parameterization. The bound is `--trunc`, else the file's own
/// `trunc`, else `QORD_TRUNC`, else `2 (n + |lambda_1|)` widened to the
/// listed terms.
fn load_param(src: &str, trunc: Option<u32>) -> CliResult<Parameterization> {
    let pj: ParamJson = parse_json(src)?;
    let chosen = match trunc.or(pj.trunc) {
        Some(d) => Some(d),
        None => env_trunc()?,
    };
    let bound = match chosen {
        Some(d) => TruncationOrder::new(d).map_err(|e| Failure::malformed(e.to_string()))?,
        None => {
            let probe = TruncationOrder::new(pj.max_degree().max(1) as u32).expect("positive");
            let p = validate_series(&pj, probe)?;
            let d = (2 * (p.n() + p.lambda1().total())).max(pj.max_degree()).max(1);
            TruncationOrder::new(d as u32).expect("positive")
        }
    };
    validate_series(&pj, bound)
}

fn validate_series(pj: &ParamJson, d: TruncationOrder) -> CliResult<Parameterization> {
    let s = pj.to_series(d).map_err(|e| Failure::malformed(e.to_string()))?;
    validate(pj.r, pj.n, s).map_err(|rej| {
        Failure::rejected(
            rej.to_string(),
            Some(json!({"valid": false, "violations": rej.violations})),
        )
    })
}

fn with_trunc(mut v: Value, d: TruncationOrder) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("trunc".into(), json!(d.get()));
    }
    v
}

fn series_text(s: &FracSeries) -> String {
    s.to_string()
}

fn exps_text(es: &[Exponent]) -> String {
    if es.is_empty() {
        "{inf}".into()
    } else {
        es.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    }
}

fn parse_pair(s: &str) -> CliResult<Exponent> {
    let v: Result<Vec<i64>, _> = s.split(',').map(|x| x.trim().parse::<i64>()).collect();
    match v {
        Ok(v) if v.len() == 2 => Ok(Exponent::new(v)),
        _ => Err(Failure::malformed(format!("expected a,b but got {s:?}"))),
    }
}

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::rejected(e.to_string(), None)
}

fn cmd_validate(src: &str, trunc: Option<u32>) -> CliResult<Output> {
    let p = load_param(src, trunc)?;
    let report = is_normalized(&p);
    let json = with_trunc(
        json!({
            "valid": true,
            "r": p.r(),
            "n": p.n(),
            "lambdas": p.semigroup().lambdas(),
            "normalized": report.normalized,
            "issues": report.issues,
            "terms": p.s().to_terms(),
        }),
        p.trunc(),
    );
    let text = format!(
        "valid: n = {}, lambdas = {}, normalized = {}\nS = {}",
        p.n(),
        exps_text(p.semigroup().lambdas()),
        report.normalized,
        series_text(p.s())
    );
    Ok(Output { json, text })
}

fn cmd_semigroup(src: &str, trunc: Option<u32>) -> CliResult<Output> {
    let raw: Value = parse_json(src)?;
    let (sg, d) = if raw.get("terms").is_some() {
        let p = load_param(src, trunc)?;
        (p.semigroup().clone(), Some(p.trunc()))
    } else {
        let input: SemigroupInput = serde_json::from_value(raw).map_err(|e| Failure::malformed(e.to_string()))?;
        (build_semigroup(input.r, input.n, &input.lambdas).map_err(domain)?, None)
    };
    let summary = sg.summary();
    let mut json = to_value(&summary);
    if let Some(d) = d {
        json = with_trunc(json, d);
    }
    let text = format!(
        "n = {}, lambdas = {}\nnus = {}\nindices = {:?}",
        summary.n,
        exps_text(&summary.lambdas),
        exps_text(&summary.nus),
        summary.indices
    );
    Ok(Output { json, text })
}

fn cmd_zariski(src: &str, trunc: Option<u32>) -> CliResult<Output> {
    let p = load_param(src, trunc)?;
    let z = zariski_exponents(&p).map_err(domain)?;
    let text = format!(
        "E_Z = {}\nquasi-short = {}{}",
        exps_text(&z.exponents),
        z.is_quasi_short,
        if z.violations.is_empty() {
            String::new()
        } else {
            format!("\neliminable terms: {}", exps_text(&z.violations))
        }
    );
    Ok(Output {
        json: with_trunc(to_value(&z), p.trunc()),
        text,
    })
}

fn cmd_reduce(src: &str, change: Option<&str>, trunc: Option<u32>) -> CliResult<Output> {
    let mut p = load_param(src, trunc)?;
    let mut changes: Vec<ChangeJson> = Vec::new();
    if let Some(c) = change {
        let cj: ChangeJson = parse_json(c)?;
        let c = CoordinateChange::from_json(&cj, p.n()).map_err(domain)?;
        p = apply_change(&p, &c).map_err(domain)?;
        changes.push(c.to_json());
    }
    let red = quasi_short_reduce(&p).map_err(domain)?;
    changes.extend(red.changes.iter().map(CoordinateChange::to_json));
    let zariski = direct_exponents(&red.param);
    let json = with_trunc(
        json!({
            "r": red.param.r(),
            "n": red.param.n(),
            "terms": red.param.s().to_terms(),
            "zariski": zariski,
            "changes": changes,
        }),
        red.param.trunc(),
    );
    let text = format!(
        "S = {}\nE_Z = {}\n{} change(s)",
        series_text(red.param.s()),
        exps_text(&zariski),
        changes.len()
    );
    Ok(Output { json, text })
}

fn cmd_normalize(src: &str, targets: Option<&str>, trunc: Option<u32>) -> CliResult<Output> {
    let p = load_param(src, trunc)?;
    let targets = match targets {
        Some(t) => t.split(';').map(parse_pair).collect::<CliResult<Vec<_>>>()?,
        None => direct_exponents(&p),
    };
    match normalize_coefficients(&p, &targets).map_err(domain)? {
        Normalization::Normalized { param, change } => Ok(Output {
            json: with_trunc(
                json!({"r": param.r(), "n": param.n(), "normalized": true, "terms": param.s().to_terms(), "change": change.to_json()}),
                param.trunc(),
            ),
            text: format!(
                "S = {}\nroots = {:?}",
                series_text(param.s()),
                change.roots.iter().map(ToString::to_string).collect::<Vec<_>>()
            ),
        }),
        Normalization::Certificate(c) => Ok(Output {
            json: with_trunc(json!({"normalized": false, "certificate": c}), p.trunc()),
            text: format!(
                "no rational homothety: invariant factors {:?}, reduced right-hand sides {:?}",
                c.invariant_factors, c.reduced_rhs
            ),
        }),
    }
}

fn cmd_classify(input: Option<&str>, n: Option<i64>, lambda: Option<&str>, trunc: Option<u32>) -> CliResult<Output> {
    if let Some(src) = input {
        let p = load_param(src, trunc)?;
        return match normal_form(&p) {
            Ok(nf) => {
                let json = with_trunc(
                    json!({
                        "n": p.n(),
                        "lambda1": p.lambda1(),
                        "quasi_simple": true,
                        "case": nf.case,
                        "params": nf.params,
                        "normal_form": nf.series().to_terms(),
                        "certificate": nf.certificate,
                    }),
                    nf.param.trunc(),
                );
                let text = format!(
                    "quasi-simple, case {} ({})\nnormal form: {}",
                    nf.case,
                    nf.params,
                    series_text(nf.series())
                );
                Ok(Output { json, text })
            }
            Err(ClassifyError::NotQuasiSimple(v)) => Ok(Output {
                json: with_trunc(to_value(&*v), p.trunc()),
                text: v.to_string(),
            }),
            Err(e @ ClassifyError::TemplateMismatch { .. }) => Err(Failure {
                code: 1,
                message: e.to_string(),
                detail: None,
            }),
            Err(e) => Err(domain(e)),
        };
    }
    let (Some(n), Some(l)) = (n, lambda) else {
        return Err(Failure::malformed(
            "classify needs an input file or both --n and --lambda",
        ));
    };
    let class = TopClass::new(n, &parse_pair(l)?).map_err(domain)?;
    let v = is_quasi_simple(&class);
    let mut json = to_value(&v);
    if let Some(case) = v.case {
        let t = Template::for_case(case, n, class.lambda1());
        let slots: Vec<Value> = t
            .slots
            .iter()
            .map(|s| json!({"flag": format!("{:?}", s.flag).to_lowercase(), "k": s.k, "pattern": format!("{:?}", s.pattern)}))
            .collect();
        json["template"] = Value::Array(slots);
    }
    Ok(Output {
        json,
        text: v.to_string(),
    })
}

fn cmd_psi(src: &str, form: &str, trunc: Option<u32>) -> CliResult<Output> {
    let p = load_param(src, trunc)?;
    let fj: RFormJson = parse_json(form)?;
    let omega = RForm::from_json(&fj).map_err(|e| Failure::malformed(e.to_string()))?;
    let v = psi(&p, &omega).map_err(domain)?;
    Ok(Output {
        json: with_trunc(json!({"psi": v.to_terms()}), v.trunc()),
        text: format!("psi = {}\nvalid to degree {}", series_text(&v), v.trunc()),
    })
}

fn census_text(r: &CensusRow) -> String {
    let verdict = match (&r.case, &r.reason) {
        (Some(c), _) => format!("case {c}"),
        (None, Some(reason)) => serde_json::to_value(reason)
            .ok()
            .and_then(|v| v["kind"].as_str().map(String::from))
            .unwrap_or_default(),
        _ => String::new(),
    };
    format!(
        "{:>3} {:<8} {:<5} {:<28} three={} ok={}",
        r.n,
        r.lambda1.to_string(),
        r.quasi_simple,
        verdict,
        r.can_admit_three,
        r.consistent
    )
}

fn emit(out: &mut dyn Write, format: Format, o: &Output) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&o.json).expect("serializable")),
        Format::Text => writeln!(out, "{}", o.text),
    }
}

/// Run the command line with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let trunc = cli.trunc;
    let result = match &cli.command {
        Command::Validate { input } => cmd_validate(input, trunc),
        Command::Semigroup { input } => cmd_semigroup(input, trunc),
        Command::Zariski { input } => cmd_zariski(input, trunc),
        Command::Reduce { input, change } => cmd_reduce(input, change.as_deref(), trunc),
        Command::Normalize { input, targets } => cmd_normalize(input, targets.as_deref(), trunc),
        Command::Classify { input, n, lambda } => cmd_classify(input.as_deref(), *n, lambda.as_deref(), trunc),
        Command::Psi { input, form } => cmd_psi(input, form, trunc),
        Command::Census { n_max, bound } => {
            if *n_max < 2 || *bound < 1 {
                let _ = writeln!(err, "error: bounds must be positive (n_max >= 2)");
                return 2;
            }
            for row in census(*n_max, *bound) {
                let line = match cli.format {
                    Format::Json => serde_json::to_string(&row).expect("serializable"),
                    Format::Text => census_text(&row),
                };
                if writeln!(out, "{line}").is_err() {
                    return 2;
                }
            }
            return 0;
        }
    };
    match result {
        Ok(o) => {
            if emit(out, cli.format, &o).is_err() {
                return 2;
            }
            0
        }
        Err(f) => {
            if let (Some(d), Format::Json) = (&f.detail, cli.format) {
                let _ = writeln!(out, "{d}");
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Convenience wrapper that runs and captures both streams.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(args, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("utf-8 output"),
        String::from_utf8(err).expect("utf-8 output"),
    )
}
