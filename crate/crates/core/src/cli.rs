//! Command-line front end: `analyze`, `theta` and `verify-lemmas`.
//!
//! Exit codes: 0 completed run (whatever the verdicts), 1 a lemma suite
//! failed, 2 bad input or configuration, 3 numerical refusal.

use crate::criteria::{
    full_report_with, CriterionRegistry, CriterionVerdict, ErrorRecord, ReportOptions,
};
use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::roots::{RootFinderRegistry, RootReport};
use crate::series::{QuotientSequence, SeriesSpec, DEFAULT_DEGREE};
use crate::suites::{SuiteConfig, SuiteRegistry, SuiteResult, SuiteStatus, RNG_ALGORITHM};
use crate::theta::{thresholds, ThetaThresholds};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;
/// Smallest series degree `analyze` accepts.
pub const MIN_ANALYZE_DEGREE: usize = 6;

pub const EXIT_OK: u8 = 0;
pub const EXIT_SUITE_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "lplab",
    version,
    about = "Second-quotient membership criteria for the Laguerre-Polya class"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub args: GlobalArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Run every criterion on one series.
    Analyze,
    /// Partial theta thresholds c_n and the q_inf bracket.
    Theta,
    /// Randomized lemma suites.
    VerifyLemmas,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Analyze => "analyze",
            CommandKind::Theta => "theta",
            CommandKind::VerifyLemmas => "verify-lemmas",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Series-spec document (.json or .toml); inline flags override its fields.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// exponential | partial-theta | euler-like
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true)]
    pub a: Option<f64>,
    #[arg(long, global = true)]
    pub a0: Option<f64>,
    #[arg(long, global = true)]
    pub a1: Option<f64>,
    /// Comma-separated q_2, q_3, ...
    #[arg(long, global = true, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Comma-separated a_0, a_1, ...
    #[arg(long, global = true, value_delimiter = ',')]
    pub coeffs: Option<Vec<f64>>,
    /// Truncation degree for family series [default: 64]
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Threshold bisection width (theta) or scan truncation target (analyze).
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Segment scan grid.
    #[arg(long, global = true, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long = "n-max", global = true, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Comma-separated criterion names to run.
    #[arg(long, global = true, value_delimiter = ',')]
    pub criteria: Option<Vec<String>>,
    #[arg(long = "root-finder", global = true)]
    pub root_finder: Option<String>,
    /// Trials per lemma suite.
    #[arg(long, global = true, default_value_t = 1000)]
    pub trials: usize,
    /// Forces the lemma-1 parameter `a` in every trial.
    #[arg(long = "inject-lemma1-a", global = true)]
    pub inject_lemma1_a: Option<f64>,
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input_path: Option<PathBuf>,
    /// Inline spec fields, merged over the input document.
    pub inline: SeriesSpec,
    pub degree: usize,
    pub degree_given: bool,
    pub tol: f64,
    pub grid: usize,
    pub n_max: usize,
    pub seed: u64,
    pub output: OutputFormat,
    pub criteria: Option<Vec<String>>,
    pub root_finder: Option<String>,
    pub trials: usize,
    pub inject_lemma1_a: Option<f64>,
    pub precision: Precision,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let a = cli.args;
        if !(a.tol > 0.0 && a.tol.is_finite()) {
            return Err(Error::field("tol", format!("{} must be positive", a.tol)));
        }
        if a.grid < 2 {
            return Err(Error::field(
                "grid",
                format!("{} must be at least 2", a.grid),
            ));
        }
        if a.trials == 0 {
            return Err(Error::field("trials", "must be at least 1"));
        }
        let precision = Precision::from_env().map_err(|m| Error::field(Precision::ENV_VAR, m))?;
        if let Some(name) = &a.root_finder {
            RootFinderRegistry::global().get(name)?;
        }
        if let Some(names) = &a.criteria {
            CriterionRegistry::global().select(Some(names))?;
        }
        Ok(RunConfig {
            command: cli.command,
            input_path: a.input,
            inline: SeriesSpec {
                family: a.family,
                a: a.a,
                a0: a.a0,
                a1: a.a1,
                q: a.q,
                coeffs: a.coeffs,
                degree: a.degree,
            },
            degree: a.degree.unwrap_or(DEFAULT_DEGREE),
            degree_given: a.degree.is_some(),
            tol: a.tol,
            grid: a.grid,
            n_max: a.n_max,
            seed: a.seed,
            output: a.output,
            criteria: a.criteria,
            root_finder: a.root_finder,
            trials: a.trials,
            inject_lemma1_a: a.inject_lemma1_a,
            precision,
        })
    }

    /// Input document with inline fields laid over it.
    pub fn series_spec(&self) -> Result<SeriesSpec> {
        let mut spec = match &self.input_path {
            Some(p) => SeriesSpec::load(p)?,
            None => SeriesSpec::default(),
        };
        let i = self.inline.clone();
        // an inline definer replaces whatever defined the series in the file
        if i.family.is_some() || i.q.is_some() || i.coeffs.is_some() {
            spec.family = None;
            spec.q = None;
            spec.coeffs = None;
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if i.$f.is_some() { spec.$f = i.$f; } )* };
        }
        over!(family, a, a0, a1, q, coeffs, degree);
        if spec.family.is_some() && spec.degree.is_none() {
            spec.degree = Some(self.degree);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RngInfo {
    pub algorithm: &'static str,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub command: CommandKind,
    pub degree: usize,
    pub tol: f64,
    pub grid: usize,
    pub n_max: usize,
    pub seed: u64,
    pub trials: usize,
    pub precision: Precision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_finder: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_lemma1_a: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootsSection {
    pub degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RootReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

/// The report document. Field order is the serialized key order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub spec: Option<SeriesSpec>,
    pub quotients: Option<QuotientSequence>,
    pub verdicts: Vec<CriterionVerdict>,
    pub roots: Option<RootsSection>,
    pub theta: Option<ThetaThresholds>,
    pub suites: Vec<SuiteResult>,
    pub timestamp: String,
    pub version: &'static str,
    pub rng: RngInfo,
    pub config: ConfigEcho,
    pub error: Option<ErrorRecord>,
}

impl Report {
    fn new(cfg: &RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            spec: None,
            quotients: None,
            verdicts: Vec::new(),
            roots: None,
            theta: None,
            suites: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            version: env!("CARGO_PKG_VERSION"),
            rng: RngInfo {
                algorithm: RNG_ALGORITHM,
                seed: cfg.seed,
            },
            config: ConfigEcho {
                command: cfg.command,
                degree: cfg.degree,
                tol: cfg.tol,
                grid: cfg.grid,
                n_max: cfg.n_max,
                seed: cfg.seed,
                trials: cfg.trials,
                precision: cfg.precision,
                criteria: cfg.criteria.clone(),
                root_finder: cfg.root_finder.clone(),
                inject_lemma1_a: cfg.inject_lemma1_a,
            },
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// A finished run: the document, its exit code and any diagnostics.
#[derive(Debug, Clone)]
pub struct Execution {
    pub report: Report,
    pub exit_code: u8,
    pub diagnostics: Vec<String>,
}

impl Execution {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.report.to_json(),
            OutputFormat::Table => render_table(&self.report),
        }
    }
}

pub fn exit_code_for(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Runs one command. `Err` means nothing was computed.
pub fn execute(cfg: &RunConfig) -> Result<Execution> {
    match cfg.command {
        CommandKind::Analyze => cmd_analyze(cfg),
        CommandKind::Theta => cmd_theta(cfg),
        CommandKind::VerifyLemmas => cmd_verify_lemmas(cfg),
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Execution> {
    let spec = cfg.series_spec()?;
    let series = spec.build()?;
    if series.degree() < MIN_ANALYZE_DEGREE {
        let field = if spec.coeffs.is_some() {
            "coeffs"
        } else if spec.q.is_some() {
            "q"
        } else {
            "degree"
        };
        return Err(Error::field(
            field,
            format!(
                "series degree {} is below the minimum {MIN_ANALYZE_DEGREE} for analysis",
                series.degree()
            ),
        ));
    }
    let mut options = ReportOptions {
        segment_grid: cfg.grid,
        scan_eps: cfg.tol,
        precision: cfg.precision,
        only: cfg.criteria.clone(),
        ..ReportOptions::default()
    };
    if let Some(m) = &cfg.root_finder {
        options.root_options.method = m.clone();
    }
    let full = full_report_with(&series, &options, CriterionRegistry::global())?;
    let mut report = Report::new(cfg);
    let mut diagnostics = Vec::new();
    let mut exit_code = EXIT_OK;
    if let Some(e) = full.numerical_error() {
        diagnostics.push(format!("numerical refusal [{}]: {}", e.kind, e.message));
        report.error = Some(e.clone());
        exit_code = EXIT_NUMERICAL;
    }
    report.roots = Some(RootsSection {
        degree: full.root_degree,
        report: full.roots,
        error: full.root_error,
    });
    report.spec = Some(spec);
    report.quotients = Some(full.quotients);
    report.verdicts = full.verdicts;
    Ok(Execution {
        report,
        exit_code,
        diagnostics,
    })
}

pub fn cmd_theta(cfg: &RunConfig) -> Result<Execution> {
    if cfg.n_max < 2 {
        return Err(Error::field(
            "n-max",
            format!("{} must be at least 2", cfg.n_max),
        ));
    }
    let t = thresholds(cfg.n_max, cfg.tol)?;
    let mut report = Report::new(cfg);
    let mut diagnostics = Vec::new();
    if let (Some(lo), Some(hi)) = (t.q_inf_low, t.q_inf_high) {
        diagnostics.push(format!("q_inf bracket [{lo:.12}, {hi:.12}]"));
    }
    if !t.monotonicity.unresolved.is_empty() {
        diagnostics.push(format!(
            "{} threshold pairs unresolved at tol {}",
            t.monotonicity.unresolved.len(),
            cfg.tol
        ));
    }
    report.theta = Some(t);
    Ok(Execution {
        report,
        exit_code: EXIT_OK,
        diagnostics,
    })
}

pub fn suite_config(cfg: &RunConfig) -> SuiteConfig {
    SuiteConfig {
        seed: cfg.seed,
        trials: cfg.trials,
        lemma1_a: cfg.inject_lemma1_a,
    }
}

pub fn cmd_verify_lemmas(cfg: &RunConfig) -> Result<Execution> {
    let results = SuiteRegistry::lemma_suites().run_all(&suite_config(cfg))?;
    let mut report = Report::new(cfg);
    let mut diagnostics = Vec::new();
    let mut exit_code = EXIT_OK;
    for r in &results {
        match r.status {
            SuiteStatus::Fail => {
                exit_code = EXIT_SUITE_FAILURE;
                for c in &r.counterexamples {
                    diagnostics.push(format!(
                        "{} counterexample: {}",
                        r.suite,
                        fmt_named(c.iter())
                    ));
                }
            }
            SuiteStatus::DomainViolation => diagnostics.push(format!(
                "{}: {} draws outside the lemma's domain were skipped",
                r.suite, r.domain_violations
            )),
            SuiteStatus::Pass => {}
        }
    }
    report.suites = results;
    Ok(Execution {
        report,
        exit_code,
        diagnostics,
    })
}

fn fmt_named<'a>(it: impl Iterator<Item = (&'a str, f64)>) -> String {
    it.map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{:.6e}", v + 0.0))
}

/// Plain-text rendering. Theta output is the `n,c_n` table only.
pub fn render_table(r: &Report) -> String {
    if let Some(t) = &r.theta {
        return t.to_table();
    }
    let mut out = String::new();
    if !r.suites.is_empty() {
        out.push_str("suite,status,trials,passed,failed,domain_violations,worst_margin\n");
        for s in &r.suites {
            let status = serde_json::to_value(s.status).expect("status serializes");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6e}",
                s.suite,
                status.as_str().unwrap_or("?"),
                s.trials,
                s.passed,
                s.failed,
                s.domain_violations,
                s.worst_margin
            );
        }
        return out;
    }
    let _ = writeln!(
        out,
        "{:<26} {:<11} {:<13} {:>14}  flags",
        "criterion", "kind", "status", "worst margin"
    );
    for v in &r.verdicts {
        let kind = serde_json::to_value(v.kind).expect("kind serializes");
        let status = serde_json::to_value(v.status).expect("status serializes");
        let _ = writeln!(
            out,
            "{:<26} {:<11} {:<13} {:>14}  {}",
            v.criterion,
            kind.as_str().unwrap_or("?"),
            status.as_str().unwrap_or("?"),
            fmt_opt(v.margins.min().map(|m| m.1)),
            v.flags.join(",")
        );
    }
    if let Some(roots) = &r.roots {
        match (&roots.report, &roots.error) {
            (Some(rep), _) => {
                let verdict = serde_json::to_value(rep.verdict).expect("verdict serializes");
                let _ = writeln!(
                    out,
                    "roots of S_{}: {} ({} non-real, method {})",
                    roots.degree,
                    verdict.as_str().unwrap_or("?"),
                    rep.nonreal_count(),
                    rep.method
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(
                    out,
                    "roots of S_{}: error [{}] {}",
                    roots.degree, e.kind, e.message
                );
            }
            (None, None) => {}
        }
    }
    out
}

/// Parses, runs and prints; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|cfg| execute(&cfg).map(|x| (cfg, x)));
    match result {
        Ok((cfg, x)) => {
            print!("{}", x.render(cfg.output));
            for d in &x.diagnostics {
                eprintln!("{d}");
            }
            x.exit_code
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            exit_code_for(&e)
        }
    }
}
