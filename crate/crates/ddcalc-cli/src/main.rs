//! Command line front end: evaluate divided differences and the modular
//! special functions, run the seeded verification suites, and print the
//! closed-form comparison table.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ddcalc::ddcore::{
    dd_confluent, dd_contour, dd_hermite_genocchi, Exp, Gaussian, IdmLog, Log, ModLog,
    NodeSystem, Poly, ScalarFunction,
};
use ddcalc::funcs::{h_func, hcm, hcm_closed, m_func, HArgs, MultiIndex};
use ddcalc::quad::QuadratureSpec;
use ddcalc::verify::{run_all, run_suite, SuiteConfig, SCHEMA_VERSION, SUITES};
use ddcalc::DdError;

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ddcalc",
    about = "Divided differences, modular special functions and verification suites",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Hermite,
    Contour,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a divided difference over a node system.
    Dd(DdArgs),
    /// Evaluate H(s', m) for a multi-index.
    Hfun(HfunArgs),
    /// Evaluate M(s, m) for a multi-index.
    Mfun(MfunArgs),
    /// Evaluate one of the two-variable H functions, optionally against its
    /// printed closed form.
    Hcm(HcmArgs),
    /// Run a seeded verification suite and emit a JSON report.
    Verify(VerifyArgs),
    /// Print the closed-form comparison table for the five tabulated H
    /// functions.
    Table(TableArgs),
}

#[derive(Args)]
struct DdArgs {
    /// Node system as value:multiplicity pairs, e.g. "1:2,2:1".
    #[arg(long)]
    nodes: String,
    /// Function name: exp, log, gaussian, idmlog:m, modlog:m, poly:c0,c1,...
    #[arg(long)]
    func: String,
    /// Cross-check against an independent oracle and report the delta.
    #[arg(long, value_enum)]
    oracle: Option<Oracle>,
    #[arg(long, value_enum, default_value = "pretty")]
    format: Format,
}

#[derive(Args)]
struct HfunArgs {
    /// Multi-index parts alpha_0,...,alpha_p.
    #[arg(long)]
    alpha: String,
    /// The p arguments s_1,...,s_p (s_0 = 1 is implicit).
    #[arg(long)]
    s: String,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "pretty")]
    format: Format,
}

#[derive(Args)]
struct MfunArgs {
    /// Multi-index parts alpha_0,...,alpha_p.
    #[arg(long)]
    alpha: String,
    /// The p+1 arguments s_0,...,s_p.
    #[arg(long)]
    s: String,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "pretty")]
    format: Format,
}

#[derive(Args)]
struct HcmArgs {
    /// Index triple i,j,k (each >= 1).
    #[arg(long)]
    indices: String,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Also evaluate the printed closed form and report the delta.
    #[arg(long)]
    check_closed_form: bool,
    #[arg(long, value_enum, default_value = "pretty")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name (or "all").
    suite: String,
    /// Seed; falls back to the DDCALC_SEED environment variable, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix dimension cap for fuzzed cases.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Number of fuzzed cases per suite.
    #[arg(long, default_value_t = 20)]
    cases: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    /// Single grid point "a:b"; defaults to the off-diagonal pairs of
    /// {0.5, 1.5, 2, 3}.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value = "pretty")]
    format: Format,
}

#[derive(Serialize)]
struct ValueReport {
    schema: u32,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

fn parse_nodes(text: &str) -> Result<NodeSystem, String> {
    let mut entries = Vec::new();
    for part in text.split(',') {
        let (v, m) = part
            .split_once(':')
            .ok_or_else(|| format!("node '{part}' is not value:multiplicity"))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| format!("bad node value '{v}'"))?;
        let mult: usize = m
            .trim()
            .parse()
            .map_err(|_| format!("bad multiplicity '{m}'"))?;
        entries.push((value, mult));
    }
    NodeSystem::new(&entries).map_err(|e| e.to_string())
}

fn parse_func(name: &str) -> Result<Box<dyn ScalarFunction>, String> {
    if let Some(rest) = name.strip_prefix("idmlog:") {
        let m: usize = rest.parse().map_err(|_| format!("bad order '{rest}'"))?;
        return Ok(Box::new(IdmLog(m)));
    }
    if let Some(rest) = name.strip_prefix("modlog:") {
        let m: usize = rest.parse().map_err(|_| format!("bad order '{rest}'"))?;
        return Ok(Box::new(ModLog(m)));
    }
    if let Some(rest) = name.strip_prefix("poly:") {
        let coeffs: Result<Vec<f64>, _> = rest.split(',').map(|c| c.trim().parse()).collect();
        return Ok(Box::new(Poly(
            coeffs.map_err(|_| format!("bad coefficients '{rest}'"))?,
        )));
    }
    match name {
        "exp" => Ok(Box::new(Exp)),
        "log" => Ok(Box::new(Log)),
        "gaussian" => Ok(Box::new(Gaussian)),
        other => Err(format!(
            "unknown function '{other}' (expected exp, log, gaussian, idmlog:m, modlog:m, poly:...)"
        )),
    }
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad {what} '{p}'")))
        .collect()
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad {what} '{p}'")))
        .collect()
}

fn error_exit(e: &DdError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        DdError::ToleranceNotMet { .. } => ExitCode::from(EXIT_TOLERANCE),
        _ => ExitCode::from(EXIT_DOMAIN),
    }
}

fn usage_exit(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn emit_value(report: &ValueReport, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string(report).unwrap()),
        _ => {
            println!("{}", report.value);
            if let (Some(o), Some(d)) = (report.oracle, report.delta) {
                println!("oracle: {o}");
                println!("delta: {d:e}");
            }
        }
    }
}

fn cmd_dd(args: &DdArgs) -> ExitCode {
    let nodes = match parse_nodes(&args.nodes) {
        Ok(n) => n,
        Err(m) => return usage_exit(&m),
    };
    let f = match parse_func(&args.func) {
        Ok(f) => f,
        Err(m) => return usage_exit(&m),
    };
    let value = match dd_confluent(&nodes, f.as_ref()) {
        Ok(v) => v,
        Err(e) => return error_exit(&e),
    };
    let oracle = match args.oracle {
        None => None,
        Some(Oracle::Hermite) => {
            match dd_hermite_genocchi(&nodes, f.as_ref(), &QuadratureSpec::with_tolerance(1e-10))
            {
                Ok(v) => Some(v),
                Err(e) => return error_exit(&e),
            }
        }
        Some(Oracle::Contour) => {
            let center = 0.5 * (nodes.min_value() + nodes.max_value());
            let radius = 0.5 * (nodes.max_value() - nodes.min_value()) + 0.5;
            let radius = if nodes.min_value() > 0.0 {
                radius.min(center - 0.01 * nodes.min_value())
            } else {
                radius
            };
            match dd_contour(&nodes, f.as_ref(), center, radius, 4096) {
                Ok(v) => Some(v),
                Err(e) => return error_exit(&e),
            }
        }
    };
    let report = ValueReport {
        schema: SCHEMA_VERSION,
        value,
        oracle,
        delta: oracle.map(|o| (o - value).abs()),
    };
    emit_value(&report, args.format);
    ExitCode::SUCCESS
}

fn cmd_hfun(args: &HfunArgs) -> ExitCode {
    let parts = match parse_usize_list(&args.alpha, "multi-index part") {
        Ok(v) => v,
        Err(m) => return usage_exit(&m),
    };
    let s = match parse_f64_list(&args.s, "argument") {
        Ok(v) => v,
        Err(m) => return usage_exit(&m),
    };
    let alpha = match MultiIndex::new(&parts) {
        Ok(a) => a,
        Err(e) => return error_exit(&e),
    };
    match h_func(&alpha, &s, args.m) {
        Ok(value) => {
            emit_value(
                &ValueReport {
                    schema: SCHEMA_VERSION,
                    value,
                    oracle: None,
                    delta: None,
                },
                args.format,
            );
            ExitCode::SUCCESS
        }
        Err(e) => error_exit(&e),
    }
}

fn cmd_mfun(args: &MfunArgs) -> ExitCode {
    let parts = match parse_usize_list(&args.alpha, "multi-index part") {
        Ok(v) => v,
        Err(m) => return usage_exit(&m),
    };
    let s = match parse_f64_list(&args.s, "argument") {
        Ok(v) => v,
        Err(m) => return usage_exit(&m),
    };
    let value = MultiIndex::new(&parts)
        .and_then(|alpha| HArgs::new(alpha, s, args.m))
        .and_then(|h| m_func(&h));
    match value {
        Ok(value) => {
            emit_value(
                &ValueReport {
                    schema: SCHEMA_VERSION,
                    value,
                    oracle: None,
                    delta: None,
                },
                args.format,
            );
            ExitCode::SUCCESS
        }
        Err(e) => error_exit(&e),
    }
}

fn cmd_hcm(args: &HcmArgs) -> ExitCode {
    let idx = match parse_usize_list(&args.indices, "index") {
        Ok(v) if v.len() == 3 => v,
        Ok(_) => return usage_exit("--indices needs exactly three entries"),
        Err(m) => return usage_exit(&m),
    };
    let value = match hcm(idx[0], idx[1], idx[2], args.a, args.b) {
        Ok(v) => v,
        Err(e) => return error_exit(&e),
    };
    let closed = if args.check_closed_form {
        match hcm_closed(idx[0], idx[1], idx[2], args.a, args.b) {
            Some(c) => Some(c),
            None => {
                return usage_exit(&format!(
                    "no tabulated closed form for indices {},{},{}",
                    idx[0], idx[1], idx[2]
                ))
            }
        }
    } else {
        None
    };
    emit_value(
        &ValueReport {
            schema: SCHEMA_VERSION,
            value,
            oracle: closed,
            delta: closed.map(|c| (c - value).abs()),
        },
        args.format,
    );
    ExitCode::SUCCESS
}

fn cmd_verify(args: &VerifyArgs) -> ExitCode {
    let seed = args.seed.or_else(|| {
        std::env::var("DDCALC_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let cfg = SuiteConfig {
        seed: seed.unwrap_or(0),
        dim: args.dim,
        cases: args.cases,
    };
    let reports = if args.suite == "all" {
        match run_all(&cfg) {
            Ok(r) => r,
            Err(e) => return error_exit(&e),
        }
    } else if SUITES.contains(&args.suite.as_str()) {
        match run_suite(&args.suite, &cfg) {
            Ok(r) => vec![r],
            Err(e) => return error_exit(&e),
        }
    } else {
        return usage_exit(&format!(
            "unknown suite '{}'; expected one of {SUITES:?} or 'all'",
            args.suite
        ));
    };
    let all_pass = reports.iter().all(|r| r.status == "pass");
    match args.format {
        Format::Pretty => {
            for r in &reports {
                println!(
                    "{:>14}: {} ({} passed, {} failed, max delta {:.3e})",
                    r.suite, r.status, r.passed, r.failed, r.max_delta
                );
            }
        }
        _ => {
            if args.suite == "all" {
                println!("{}", serde_json::to_string(&reports).unwrap());
            } else {
                println!("{}", serde_json::to_string(&reports[0]).unwrap());
            }
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_TOLERANCE)
    }
}

const TABLE_INDICES: [(usize, usize, usize); 5] =
    [(1, 1, 1), (1, 2, 1), (2, 1, 1), (2, 2, 1), (3, 1, 1)];

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn cmd_table(args: &TableArgs) -> ExitCode {
    let points: Vec<(f64, f64)> = match &args.grid {
        Some(spec) => {
            let Some((a, b)) = spec.split_once(':') else {
                return usage_exit("--grid expects a:b");
            };
            let (Ok(a), Ok(b)) = (a.trim().parse(), b.trim().parse()) else {
                return usage_exit("--grid expects numeric a:b");
            };
            vec![(a, b)]
        }
        None => {
            let grid = [0.5, 1.5, 2.0, 3.0];
            let mut pts = Vec::new();
            for &a in &grid {
                for &b in &grid {
                    if a != b {
                        pts.push((a, b));
                    }
                }
            }
            pts
        }
    };
    let mut rows: Vec<(String, f64, f64, f64, f64, f64)> = Vec::new();
    for (i, j, k) in TABLE_INDICES {
        for &(a, b) in &points {
            let dd_value = match hcm(i, j, k, a, b) {
                Ok(v) => v,
                Err(e) => return error_exit(&e),
            };
            let closed = hcm_closed(i, j, k, a, b).expect("tabulated index triple");
            rows.push((
                format!("H_{i}{j}{k}"),
                a,
                b,
                dd_value,
                closed,
                (dd_value - closed).abs(),
            ));
        }
    }
    let max_delta = rows.iter().map(|r| r.5).fold(0.0, f64::max);
    match args.format {
        Format::Csv => {
            println!("function,a,b,dd_value,closed_form,delta");
            for (f, a, b, v, c, d) in &rows {
                println!(
                    "{},{},{},{},{},{}",
                    csv_field(f),
                    a,
                    b,
                    v,
                    c,
                    d
                );
            }
        }
        _ => {
            println!(
                "{:<8} {:>6} {:>6} {:>22} {:>22} {:>12}",
                "function", "a", "b", "dd_value", "closed_form", "delta"
            );
            for (f, a, b, v, c, d) in &rows {
                println!("{f:<8} {a:>6} {b:>6} {v:>22.15} {c:>22.15} {d:>12.3e}");
            }
            println!("max delta: {max_delta:.3e}");
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests are not usage errors.
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match &cli.command {
        Command::Dd(a) => cmd_dd(a),
        Command::Hfun(a) => cmd_hfun(a),
        Command::Mfun(a) => cmd_mfun(a),
        Command::Hcm(a) => cmd_hcm(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Table(a) => cmd_table(a),
    }
}
