//! Command implementations behind the `sdesym` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sdesym_core::bridge::{transfer, BridgeError, TransferRule};
use sdesym_core::corpus::{self, CaseReport};
use sdesym_core::fields::{format_combination, lie_bracket, span_membership, FieldBasis, SpanResult};
use sdesym_core::problem::{Problem, ProblemFile};
use sdesym_core::{CheckReport, Mode, SamplingConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sdesym", version, about = "Check Lie point symmetries of Ito SDEs and their Kolmogorov equations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Zero-testing strategy [default: both].
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Sampling seed [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample points per residual [default: 100].
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Relative tolerance for numeric zero tests [default: 1e-9].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the determining-equation check of each candidate in a problem file.
    Check {
        file: PathBuf,
        /// Candidate `name` or `kind:name`; repeatable. All candidates when omitted.
        #[arg(long = "candidate", short = 'c')]
        candidates: Vec<String>,
    },
    /// Transfer a candidate to another equation and verify the image.
    Map {
        file: PathBuf,
        candidate: String,
        /// One of sde->kbe, sde->kfe, kbe->kfe, kfe->kbe, integral->kbe.
        rule: TransferRule,
    },
    /// Lie bracket of two candidates and its expansion in their kind's basis.
    Bracket {
        file: PathBuf,
        left: String,
        right: String,
    },
    /// Run built-in catalog cases and compare with their expected verdicts.
    Catalog {
        /// Case name; all cases when omitted.
        name: Option<String>,
        /// Restrict to cases carrying this tag.
        #[arg(long, conflicts_with = "name")]
        tag: Option<String>,
        /// List case names instead of running them.
        #[arg(long)]
        list: bool,
    },
    /// Write a catalog case as a problem file.
    Export {
        name: String,
        /// Parameter specialization, e.g. `A=1` for driftAx.
        #[arg(long)]
        subcase: Option<String>,
        /// Output path; standard output when omitted.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Problem(#[from] sdesym_core::problem::ProblemError),
    #[error(transparent)]
    Corpus(#[from] sdesym_core::corpus::CorpusError),
    #[error(transparent)]
    Check(#[from] sdesym_core::checks::CheckError),
    #[error(transparent)]
    Field(#[from] sdesym_core::fields::FieldError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
}

impl GlobalOpts {
    /// Problem-file settings, overridden by whichever flags were given.
    pub fn sampling(&self, file: Option<&SamplingConfig>) -> Result<SamplingConfig, CliError> {
        let mut cfg = file.cloned().unwrap_or_default();
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = self.points {
            cfg.points = p;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn load(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ProblemFile::from_json(&text)?.compile()?)
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    writeln!(out, "{text}")
}

/// Parses `args`, runs the command, writes the report to `out`, returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(CliError::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CliError::Bridge(BridgeError::Refused { .. } | BridgeError::TargetFailed { .. }) => EXIT_FAIL,
                _ => EXIT_USAGE,
            }
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    let io = |source: std::io::Error| CliError::Io {
        path: "<output>".into(),
        source,
    };
    match &cli.command {
        Command::Check { file, candidates } => {
            let p = load(file)?;
            let cfg = g.sampling(p.sampling.as_ref())?;
            let selected = if candidates.is_empty() {
                p.candidates.iter().collect::<Vec<_>>()
            } else {
                candidates
                    .iter()
                    .map(|s| p.candidate(s))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let reports = selected
                .iter()
                .map(|c| c.check(&p.system, &cfg))
                .collect::<Result<Vec<CheckReport>, _>>()?;
            let passed = reports.iter().all(CheckReport::passed);
            match g.format {
                Format::Json => emit(out, &json!({ "passed": passed, "reports": reports })).map_err(io)?,
                Format::Text => {
                    for r in &reports {
                        write!(out, "{r}").map_err(io)?;
                    }
                }
            }
            Ok(if passed { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Map { file, candidate, rule } => {
            let p = load(file)?;
            let cfg = g.sampling(p.sampling.as_ref())?;
            let c = p.candidate(candidate)?;
            let ctx = p.system.ctx();
            match transfer(*rule, &p.system, &c.field, &c.name, &cfg) {
                Ok(rec) => {
                    match g.format {
                        Format::Json => emit(out, &rec).map_err(io)?,
                        Format::Text => {
                            writeln!(out, "{} {}", rule, c.key()).map_err(io)?;
                            writeln!(out, "  source: {}", rec.source.display(ctx)).map_err(io)?;
                            writeln!(out, "  target: {}", rec.target.display(ctx)).map_err(io)?;
                            writeln!(out, "  multiplier: {}", rec.auxiliary).map_err(io)?;
                            write!(out, "{}", rec.target_report).map_err(io)?;
                        }
                    }
                    Ok(EXIT_OK)
                }
                Err(BridgeError::Refused { report, .. }) => {
                    match g.format {
                        Format::Json => emit(out, &json!({ "rule": rule, "refused": true, "source_report": report }))
                            .map_err(io)?,
                        Format::Text => {
                            writeln!(out, "{} {}: source does not pass its own check", rule, c.key()).map_err(io)?;
                            write!(out, "{report}").map_err(io)?;
                        }
                    }
                    Ok(EXIT_FAIL)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Bracket { file, left, right } => {
            let p = load(file)?;
            let cfg = g.sampling(p.sampling.as_ref())?;
            let x = p.candidate(left)?;
            let y = p.candidate(right)?;
            let ctx = p.system.ctx();
            let br = lie_bracket(&x.field, &y.field, ctx)?;
            let mut basis = FieldBasis::new();
            for c in p.of_kind(x.kind) {
                basis.push(&c.name, c.field.clone());
            }
            let span = span_membership(&br, &basis, ctx, &cfg)?;
            let names: Vec<&str> = basis.names().collect();
            let combination = match &span {
                SpanResult::InSpan { coefficients, .. } => Some(format_combination(&names, coefficients)),
                SpanResult::NotInSpan { .. } => None,
            };
            let in_span = matches!(span, SpanResult::InSpan { certified: true, .. });
            match g.format {
                Format::Json => emit(
                    out,
                    &json!({
                        "left": x.key(),
                        "right": y.key(),
                        "bracket": br,
                        "basis": names,
                        "span": span,
                        "combination": combination,
                    }),
                )
                .map_err(io)?,
                Format::Text => {
                    writeln!(out, "[{}, {}] = {}", x.name, y.name, br.display(ctx)).map_err(io)?;
                    match (&span, combination) {
                        (SpanResult::InSpan { residual, certified, .. }, Some(c)) => writeln!(
                            out,
                            "  = {c}  (residual {residual:.3e}, {})",
                            if *certified { "certified" } else { "not certified" }
                        ),
                        (SpanResult::NotInSpan { residual }, _) | (SpanResult::InSpan { residual, .. }, None) => {
                            writeln!(out, "  not in the span of {} (residual {residual:.3e})", names.join(", "))
                        }
                    }
                    .map_err(io)?;
                }
            }
            Ok(if in_span { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Catalog { name, tag, list } => {
            let names: Vec<&str> = match (name, tag) {
                (Some(n), _) => {
                    corpus::case(n)?;
                    vec![n.as_str()]
                }
                (None, Some(t)) => corpus::list_cases(Some(t)),
                (None, None) => corpus::list_cases(None),
            };
            if *list {
                match g.format {
                    Format::Json => emit(out, &names).map_err(io)?,
                    Format::Text => {
                        for n in &names {
                            writeln!(out, "{n}").map_err(io)?;
                        }
                    }
                }
                return Ok(EXIT_OK);
            }
            let cfg = g.sampling(None)?;
            let reports: Vec<CaseReport> = if name.is_none() && tag.is_none() {
                corpus::run_all(&cfg)?
            } else {
                names
                    .iter()
                    .map(|n| corpus::run_case(n, &cfg))
                    .collect::<Result<_, _>>()?
            };
            let ok = reports.iter().all(CaseReport::all_matched);
            match g.format {
                Format::Json => emit(out, &json!({ "all_matched": ok, "cases": reports })).map_err(io)?,
                Format::Text => {
                    for r in &reports {
                        write!(out, "{r}").map_err(io)?;
                    }
                    let matched = reports.iter().filter(|r| r.all_matched()).count();
                    writeln!(out, "{matched}/{} cases matched", reports.len()).map_err(io)?;
                }
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Export { name, subcase, output } => {
            let file = corpus::case(name)?.export(subcase.as_deref())?;
            let text = file.to_json();
            match output {
                Some(path) => std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?,
                None => writeln!(out, "{text}").map_err(io)?,
            }
            Ok(EXIT_OK)
        }
    }
}
