//! `stdsets`: enumerate, differentiate, certify and fit families written in
//! the family language.

use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value as Json;

use stdsets::cases::{self, Case};
use stdsets::derived::{certify, derived_set_checked, standardized_near, CertVerdict, Near};
use stdsets::dsl::{self, family_expr, DslError, Value};
use stdsets::oracle::{
    default_resolution, detect_in, enumerate, fit_standardized, FitVerdict, DEFAULT_NUMERATOR_BOUND, DEFAULT_THRESHOLD,
};
use stdsets::serial;
use stdsets::{parse_rational, Interval, Rational, SetFamily};

const DEFAULT_CAP: u64 = 100;
const CAP_VAR: &str = "LCT_DEFAULT_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exit {
    Ok = 0,
    Refuted = 1,
    Unknown = 2,
    Usage = 3,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "stdsets", version, about = "Exact families of rationals: enumeration, derived sets, certificates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lists the elements in an interval.
    #[command(name = "enum")]
    Enum {
        /// Family expression, `@FILE` for a program file, or `-` for standard input.
        expr: String,
        #[arg(long, value_name = "LO..HI", allow_hyphen_values = true)]
        interval: String,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Computes the k-th derived set.
    Derived {
        expr: String,
        #[arg(short = 'k', default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Decides whether the family is standardized near a point.
    Check {
        expr: String,
        #[arg(long, value_name = "P/Q", allow_hyphen_values = true)]
        near: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Builds a standardization certificate.
    Certify {
        expr: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tests sampled elements for harmonic structure near a point.
    Fit {
        expr: String,
        #[arg(long, value_name = "P/Q", allow_hyphen_values = true)]
        near: String,
        #[arg(long, value_name = "LO..HI", allow_hyphen_values = true)]
        interval: String,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_NUMERATOR_BOUND)]
        bound: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Reports empirical accumulation intervals of sampled elements.
    Clusters {
        expr: String,
        #[arg(long, value_name = "LO..HI", allow_hyphen_values = true)]
        interval: String,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_name = "P/Q")]
        resolution: Option<String>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Runs the worked-example checks and prints a pass/fail table.
    VerifyPaper {
        #[arg(long)]
        case: Option<String>,
    },
}

/// Failure carrying its exit code; the message goes to standard error.
struct Fail(Exit, String);

type Outcome = Result<Exit, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail(Exit::Usage, msg.into())
}

fn source_text(expr: &str) -> Result<String, Fail> {
    if expr == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("cannot read standard input: {e}")))?;
        return Ok(s);
    }
    match expr.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}"))),
        None => Ok(expr.to_string()),
    }
}

fn diagnostic(text: &str, e: &DslError) -> String {
    let mut msg = e.to_string();
    if let Some(line) = text.lines().nth(e.pos.line.saturating_sub(1)) {
        let pad: String =
            line.chars().take(e.pos.col.saturating_sub(1)).map(|c| if c == '\t' { '\t' } else { ' ' }).collect();
        msg.push_str(&format!("\n  {line}\n  {pad}^"));
    }
    msg
}

fn load(expr: &str) -> Result<Value, Fail> {
    let text = source_text(expr)?;
    dsl::evaluate(&text).map_err(|e| usage(diagnostic(&text, &e)))
}

fn load_family(expr: &str, cmd: &str) -> Result<SetFamily, Fail> {
    match load(expr)? {
        Value::Family(f) => Ok(f),
        Value::Generator(_) => Err(usage(format!("`{cmd}` needs a symbolic family, not a generator"))),
    }
}

fn rational(s: &str, what: &str) -> Result<Rational, Fail> {
    parse_rational(s).map_err(|_| usage(format!("{what}: `{s}` is not a rational number")))
}

fn interval(s: &str) -> Result<Interval, Fail> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| usage(format!("--interval: expected LO..HI, got `{s}`")))?;
    let lo = rational(lo, "--interval")?;
    let hi = rational(hi, "--interval")?;
    Interval::new(lo, hi).map_err(|e| usage(format!("--interval: {e}")))
}

fn cap(given: Option<u64>) -> Result<u64, Fail> {
    let c = match given {
        Some(c) => c,
        None => match std::env::var(CAP_VAR) {
            Ok(v) => {
                v.trim().parse::<u64>().map_err(|_| usage(format!("{CAP_VAR}: `{v}` is not a positive integer")))?
            }
            Err(_) => DEFAULT_CAP,
        },
    };
    if c == 0 {
        return Err(usage("cap must be positive"));
    }
    Ok(c)
}

fn emit(s: &str) -> Result<(), Fail> {
    let mut out = io::stdout().lock();
    out.write_all(s.as_bytes())
        .and_then(|_| if s.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
        .and_then(|_| out.flush())
        .map_err(|e| usage(format!("cannot write output: {e}")))
}

fn emit_json(j: &Json) -> Result<(), Fail> {
    emit(&serde_json::to_string_pretty(j).expect("json encodes"))
}

fn no_csv(format: Format, cmd: &str) -> Result<(), Fail> {
    if format == Format::Csv {
        return Err(usage(format!("`{cmd}` has no csv output")));
    }
    Ok(())
}

fn run_enum(expr: &str, iv: &str, cap_arg: Option<u64>, format: Format) -> Outcome {
    let w = interval(iv)?;
    let n = cap(cap_arg)?;
    let v = load(expr)?;
    let s = enumerate(v.source(), &w, n);
    match format {
        Format::Json => emit_json(&serial::sample_json(&s))?,
        Format::Csv => emit(&serial::sample_csv(&s))?,
        Format::Text => {
            let mut t = format!(
                "# {} values in {}, cap {}, {}\n",
                s.values.len(),
                s.window,
                s.cap,
                if s.exhaustive { "exhaustive" } else { "not proven exhaustive" }
            );
            t.push_str(&serial::sample_csv(&s));
            emit(&t)?
        }
    }
    Ok(Exit::Ok)
}

fn run_derived(expr: &str, k: usize, format: Format) -> Outcome {
    no_csv(format, "derived")?;
    let f = load_family(expr, "derived")?;
    let d = derived_set_checked(&f, k);
    let fam = d.family.normalized();
    match format {
        Format::Json => emit_json(&serde_json::json!({
            "k": k,
            "exact": d.exact,
            "family": serde_json::from_str::<Json>(&serial::family_to_json(&fam)).expect("json"),
        }))?,
        _ => emit(&family_expr(&fam).to_string())?,
    }
    if d.exact {
        Ok(Exit::Ok)
    } else {
        eprintln!("note: a degenerate atom was kept; the result is a superset of the derived set");
        Ok(Exit::Unknown)
    }
}

fn run_check(expr: &str, near: &str, format: Format) -> Outcome {
    no_csv(format, "check")?;
    let g0 = rational(near, "--near")?;
    let f = load_family(expr, "check")?;
    let n = standardized_near(&f, &g0);
    if format == Format::Json {
        emit_json(&serial::near_json(&n))?;
    }
    Ok(match n {
        Near::Standardized(w) => {
            if format == Format::Text {
                let coeffs: Vec<String> = w.coeffs.iter().map(|c| c.to_string()).collect();
                emit(&format!(
                    "standardized near {}: eps = {}, coeffs = [{}], I = {}",
                    w.gamma0,
                    w.eps,
                    coeffs.join(", "),
                    w.i
                ))?;
            }
            Exit::Ok
        }
        Near::No(r) => {
            if format == Format::Text {
                emit(&format!("not standardized near {g0}: {r}"))?;
            }
            Exit::Refuted
        }
        Near::Unknown(r) => {
            if format == Format::Text {
                emit(&format!("unknown near {g0}: {r}"))?;
            }
            Exit::Unknown
        }
    })
}

fn run_certify(expr: &str, format: Format) -> Outcome {
    no_csv(format, "certify")?;
    let f = load_family(expr, "certify")?;
    let c = certify(&f);
    if format == Format::Json {
        emit_json(&serial::certificate_json(&c))?;
    } else {
        let head = match &c.verdict {
            CertVerdict::Standardized => "standardized".to_string(),
            CertVerdict::NotStandardized { k, gamma0 } => format!("not standardized: level {k} fails near {gamma0}"),
            CertVerdict::Unknown(r) => format!("unknown: {r}"),
        };
        let mut t = format!("{head}\ndepth {}\n", c.depth);
        for l in &c.levels {
            t.push_str(&format!("level {}: {}\n", l.k, family_expr(&l.family.normalized())));
            for w in &l.witnesses {
                let coeffs: Vec<String> = w.coeffs.iter().map(|c| c.to_string()).collect();
                t.push_str(&format!(
                    "  near {}: eps = {}, coeffs = [{}], I = {}\n",
                    w.gamma0,
                    w.eps,
                    coeffs.join(", "),
                    w.i
                ));
            }
        }
        emit(&t)?;
    }
    Ok(match c.verdict {
        CertVerdict::Standardized => Exit::Ok,
        CertVerdict::NotStandardized { .. } => Exit::Refuted,
        CertVerdict::Unknown(_) => Exit::Unknown,
    })
}

fn run_fit(expr: &str, near: &str, iv: &str, cap_arg: Option<u64>, bound: u64, format: Format) -> Outcome {
    no_csv(format, "fit")?;
    let g0 = rational(near, "--near")?;
    let w = interval(iv)?;
    let n = cap(cap_arg)?;
    if bound == 0 {
        return Err(usage("--bound must be positive"));
    }
    let v = load(expr)?;
    let s = enumerate(v.source(), &w, n);
    let r = fit_standardized(&s, &g0, bound);
    if format == Format::Json {
        emit_json(&serial::fit_json(&r))?;
    } else {
        let line = match &r.verdict {
            FitVerdict::Consistent { i, coeffs } => {
                let cs: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                format!("consistent near {g0}: I = {i}, numerators [{}]", cs.join(", "))
            }
            FitVerdict::Inconsistent { evidence } => {
                format!("inconsistent near {g0}: {evidence} has numerator {} > {bound}", (evidence - &g0).numer())
            }
            FitVerdict::Insufficient => format!("insufficient sample near {g0} ({} values)", s.values.len()),
        };
        emit(&line)?;
    }
    Ok(match r.verdict {
        FitVerdict::Consistent { .. } => Exit::Ok,
        FitVerdict::Inconsistent { .. } => Exit::Refuted,
        FitVerdict::Insufficient => Exit::Unknown,
    })
}

fn run_clusters(
    expr: &str,
    iv: &str,
    cap_arg: Option<u64>,
    res: Option<&str>,
    threshold: usize,
    format: Format,
) -> Outcome {
    no_csv(format, "clusters")?;
    let w = interval(iv)?;
    let n = cap(cap_arg)?;
    let res = match res {
        Some(r) => rational(r, "--resolution")?,
        None => default_resolution(),
    };
    if res <= Rational::from_integer(0.into()) {
        return Err(usage("--resolution must be positive"));
    }
    if threshold < 2 {
        return Err(usage("--threshold must be at least 2"));
    }
    let v = load(expr)?;
    let s = enumerate(v.source(), &w, n);
    let cl = detect_in(&s.values, &res, threshold);
    if format == Format::Json {
        emit_json(&Json::from(cl.iter().map(serial::cluster_json).collect::<Vec<_>>()))?;
    } else {
        let mut t = format!("# {} clusters among {} values\n", cl.len(), s.values.len());
        for c in &cl {
            let est = c.estimate.as_ref().map_or(String::from("-"), |e| e.to_string());
            t.push_str(&format!("{} {} {}\n", c.interval, c.count, est));
        }
        emit(&t)?;
    }
    Ok(Exit::Ok)
}

fn run_verify(case: Option<&str>) -> Outcome {
    let selected: Vec<Case> = match case {
        Some(name) => vec![name.parse::<Case>().map_err(usage)?],
        None => Case::ALL.to_vec(),
    };
    let mut all = true;
    let mut t = String::new();
    for c in selected {
        let r = cases::run(c);
        for ch in &r.checks {
            t.push_str(&format!(
                "{:<6} {:<4} {}: {}\n",
                c.name(),
                if ch.pass { "pass" } else { "FAIL" },
                ch.name,
                ch.detail
            ));
        }
        t.push_str(&format!(
            "{:<6} {:<4} ({} checks, {:.2} s)\n",
            c.name(),
            if r.pass() { "PASS" } else { "FAIL" },
            r.checks.len(),
            r.elapsed.as_secs_f64()
        ));
        all &= r.pass();
    }
    emit(&t)?;
    Ok(if all { Exit::Ok } else { Exit::Refuted })
}

fn dispatch(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Enum { expr, interval, cap, format } => run_enum(&expr, &interval, cap, format),
        Cmd::Derived { expr, k, format } => run_derived(&expr, k, format),
        Cmd::Check { expr, near, format } => run_check(&expr, &near, format),
        Cmd::Certify { expr, format } => run_certify(&expr, format),
        Cmd::Fit { expr, near, interval, cap, bound, format } => run_fit(&expr, &near, &interval, cap, bound, format),
        Cmd::Clusters { expr, interval, cap, resolution, threshold, format } => {
            run_clusters(&expr, &interval, cap, resolution.as_deref(), threshold, format)
        }
        Cmd::VerifyPaper { case } => run_verify(case.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Ok };
            let _ = e.print();
            return code.into();
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code.into(),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            code.into()
        }
    }
}
