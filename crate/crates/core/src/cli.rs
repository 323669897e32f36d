//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{evaluate, fmt_f64, BoundReport, Instance, TheoremId};
use crate::convexity::{
    certify_class, certify_derivative_superadditive, ConvexityClass, FunctionSpec,
};
use crate::error::{Error, Result};
use crate::oracle::{run_fuzz, sweep_lambda, FuzzConfig, FuzzSummary, SweepRow};
use crate::tolerance::Tolerance;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "jensen-bounds",
    version,
    about = "Evaluate and fuzz Jensen-type inequality chains"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    #[arg(long, global = true)]
    pub tol_abs: Option<f64>,
    #[arg(long, global = true)]
    pub tol_rel: Option<f64>,
    /// Overrides the seed of a fuzz config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_theorem(s: &str) -> std::result::Result<TheoremId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_class(s: &str) -> std::result::Result<ConvexityClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one instance (file path or inline JSON).
    Check {
        input: String,
        /// Defaults to the instance's `theorem` field.
        #[arg(long, value_parser = parse_theorem)]
        theorem: Option<TheoremId>,
    },
    /// Run a fuzz campaign from a config file (or inline JSON).
    Fuzz {
        config: String,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Evaluate a λ-theorem with λ_i = t on a uniform grid of [0, 1].
    Sweep {
        input: String,
        #[arg(long, value_parser = parse_theorem)]
        theorem: TheoremId,
        #[arg(long, default_value_t = 11)]
        density: usize,
    },
    /// Grid-certify a function spec for a class, or f′ against Φ′.
    Certify {
        spec: String,
        #[arg(long, value_parser = parse_class)]
        class: Option<ConvexityClass>,
        /// Check that f′ is Φ′-superadditive instead of a class.
        #[arg(long)]
        superadditive: bool,
        #[arg(long, default_value_t = 1.0)]
        phi_scale: f64,
        #[arg(long, default_value_t = 41)]
        density: usize,
    },
}

/// Invocation record embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// The input argument as given: a path or inline JSON.
    pub input: String,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<usize>,
}

/// Exit code and text produced by one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: T,
}

fn read_input(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {arg}: {e}")))
}

fn tolerance(g: &GlobalOpts) -> Tolerance {
    let d = Tolerance::default();
    Tolerance::new(g.tol_abs.unwrap_or(d.abs), g.tol_rel.unwrap_or(d.rel))
}

fn json<T: Serialize>(manifest: &RunManifest, body: T) -> String {
    let env = Envelope {
        version: VERSION,
        manifest,
        body,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("output serializes");
    s.push('\n');
    s
}

fn csv_header(manifest: &RunManifest) -> String {
    format!(
        "# version: {VERSION}\n# manifest: {}\n",
        serde_json::to_string(manifest).expect("manifest serializes")
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[derive(Serialize)]
struct ReportBody<'a> {
    report: &'a BoundReport,
}

fn cmd_check(
    g: &GlobalOpts,
    m: &RunManifest,
    input: &str,
    theorem: Option<TheoremId>,
) -> Result<(i32, String)> {
    let inst = Instance::from_json(&read_input(input)?)?;
    let theorem = theorem.or(inst.theorem).ok_or_else(|| {
        Error::InvalidArgument(
            "no theorem given: pass --theorem or set `theorem` in the instance".into(),
        )
    })?;
    let m = RunManifest {
        theorem: Some(theorem),
        ..m.clone()
    };
    let report = evaluate(&inst, theorem, tolerance(g))?;
    let text = match g.format {
        Format::Json => json(&m, ReportBody { report: &report }),
        Format::Csv => csv_header(&m) + &report.to_csv(),
    };
    Ok((if report.pass { EXIT_OK } else { EXIT_VIOLATION }, text))
}

#[derive(Serialize)]
struct FuzzBody<'a> {
    summary: &'a FuzzSummary,
}

fn cmd_fuzz(
    g: &GlobalOpts,
    m: &RunManifest,
    config: &str,
    trials: Option<u64>,
) -> Result<(i32, String)> {
    let mut cfg = FuzzConfig::from_json(&read_input(config)?)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(t) = g.tol_abs {
        cfg.tol_abs = t;
    }
    if let Some(t) = g.tol_rel {
        cfg.tol_rel = t;
    }
    cfg.validate()?;
    let summary = run_fuzz(&cfg)?;
    let text = match g.format {
        Format::Json => json(m, FuzzBody { summary: &summary }),
        Format::Csv => {
            let mut s = csv_header(m);
            s.push_str("theorem,trials,passed,unconfirmed,counterexamples,errors,flagged,min_slack,min_slack_ratio\n");
            let rows = summary
                .theorems
                .iter()
                .map(|(t, st)| (t.to_string(), st))
                .chain(
                    summary
                        .variant_findings
                        .iter()
                        .map(|(t, v)| (format!("{t} (variant)"), &v.stats)),
                );
            for (name, st) in rows {
                let _ = writeln!(
                    s,
                    "{name},{},{},{},{},{},{},{},{}",
                    st.trials,
                    st.passed,
                    st.unconfirmed,
                    st.counterexamples,
                    st.errors,
                    st.flagged,
                    opt(st.min_slack),
                    opt(st.min_slack_ratio)
                );
            }
            s
        }
    };
    Ok((
        if summary.clean() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        },
        text,
    ))
}

#[derive(Serialize)]
struct SweepBody<'a> {
    rows: &'a [SweepRow],
}

fn cmd_sweep(
    g: &GlobalOpts,
    m: &RunManifest,
    input: &str,
    theorem: TheoremId,
    density: usize,
) -> Result<(i32, String)> {
    let inst = Instance::from_json(&read_input(input)?)?;
    let rows = sweep_lambda(&inst, theorem, density, tolerance(g))?;
    let text = match g.format {
        Format::Json => json(m, SweepBody { rows: &rows }),
        Format::Csv => {
            let mut s = csv_header(m);
            s.push_str("t,lhs,mid,rhs,slack,pass\n");
            for r in &rows {
                let rep = &r.report;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    fmt_f64(r.t),
                    fmt_f64(rep.lhs),
                    opt(rep.mid),
                    fmt_f64(rep.rhs),
                    fmt_f64(rep.slack),
                    rep.pass
                );
            }
            s
        }
    };
    let ok = rows.iter().all(|r| r.report.pass);
    Ok((if ok { EXIT_OK } else { EXIT_VIOLATION }, text))
}

#[derive(Serialize)]
struct CertBody<'a> {
    certificate: &'a crate::convexity::CertReport,
}

fn cmd_certify(
    g: &GlobalOpts,
    m: &RunManifest,
    spec: &str,
    class: Option<ConvexityClass>,
    superadditive: bool,
    phi_scale: f64,
    density: usize,
) -> Result<(i32, String)> {
    let text = read_input(spec)?;
    let spec: FunctionSpec = serde_json::from_str(&text).map_err(|e| {
        Error::Parse(format!(
            "function spec JSON, line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let tol = tolerance(g);
    let cert = match (class, superadditive) {
        (Some(c), false) => certify_class(&spec, c, density, tol)?,
        (None, true) => certify_derivative_superadditive(&spec, phi_scale, density, tol)?,
        _ => {
            return Err(Error::InvalidArgument(
                "certify needs exactly one of --class or --superadditive".into(),
            ))
        }
    };
    let text = match g.format {
        Format::Json => json(m, CertBody { certificate: &cert }),
        Format::Csv => format!(
            "{}check,samples,min_slack,passed\n{},{},{},{}\n",
            csv_header(m),
            cert.check,
            cert.samples,
            fmt_f64(cert.min_slack),
            cert.passed
        ),
    };
    Ok((if cert.passed { EXIT_OK } else { EXIT_VIOLATION }, text))
}

fn manifest(cli: &Cli) -> RunManifest {
    let g = &cli.global;
    let (command, input, theorem, density) = match &cli.command {
        Command::Check { input, theorem } => ("check", input.clone(), *theorem, None),
        Command::Fuzz { config, .. } => ("fuzz", config.clone(), None, None),
        Command::Sweep {
            input,
            theorem,
            density,
        } => ("sweep", input.clone(), Some(*theorem), Some(*density)),
        Command::Certify { spec, density, .. } => ("certify", spec.clone(), None, Some(*density)),
    };
    RunManifest {
        command: command.into(),
        input,
        format: g.format,
        tol_abs: g.tol_abs,
        tol_rel: g.tol_rel,
        seed: g.seed,
        theorem,
        density,
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Outcome {
    let m = manifest(cli);
    let g = &cli.global;
    let result = match &cli.command {
        Command::Check { input, theorem } => cmd_check(g, &m, input, *theorem),
        Command::Fuzz { config, trials } => cmd_fuzz(g, &m, config, *trials),
        Command::Sweep {
            input,
            theorem,
            density,
        } => cmd_sweep(g, &m, input, *theorem, *density),
        Command::Certify {
            spec,
            class,
            superadditive,
            phi_scale,
            density,
        } => cmd_certify(g, &m, spec, *class, *superadditive, *phi_scale, *density),
    };
    match result {
        Ok((code, text)) => match &g.out {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome {
                    code,
                    stdout: String::new(),
                    stderr: String::new(),
                },
                Err(e) => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: format!("error: cannot write {}: {e}\n", path.display()),
                },
            },
            None => Outcome {
                code,
                stdout: text,
                stderr: String::new(),
            },
        },
        Err(e) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}
