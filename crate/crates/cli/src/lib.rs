//! Command-line jobs: argument definitions, dispatch and report rendering.

mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thetalab::io::{generate_example, parse_period_matrix, CheckResult, ExampleKind, JobReport};
use thetalab::theta::PeriodMatrix;
use thetalab::{Error, Result, C64};

#[derive(Debug, Parser)]
#[command(name = "thetalab", version, about = "Theta functions, Kummer flexes, KP checks and translation surfaces")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Tolerance for the command's checks (each command has its own default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Where the period matrix comes from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PeriodSource {
    /// Period-matrix document (JSON); `-` reads stdin.
    #[arg(long, conflicts_with = "example")]
    pub period: Option<PathBuf>,
    /// Generate the period matrix from `--seed` instead of reading a file.
    #[arg(long, value_parser = parse_kind)]
    pub example: Option<ExampleKind>,
}

fn parse_kind(s: &str) -> std::result::Result<ExampleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Cubic,
    Theta,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Evaluate theta or a second-order theta function with derivatives.
    ThetaEval {
        #[command(flatten)]
        source: PeriodSource,
        /// Point, comma-separated complex numbers such as `0.5+0.5i,0.1`; default 0.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Derivative direction (repeatable, at most 6).
        #[arg(long = "deriv", allow_hyphen_values = true)]
        derivs: Vec<String>,
        /// Characteristic as a 0/1 string such as `01`: evaluate theta[eps; 0](2z, 2 Omega).
        #[arg(long)]
        eps: Option<String>,
    },
    /// Rank of the indecomposability matrix.
    KummerRank {
        #[command(flatten)]
        source: PeriodSource,
    },
    /// Rank of (theta2, D1 theta2, (D2 + D1^2/2) theta2); D1, D2 default to a fitted flex.
    GwTest {
        #[command(flatten)]
        source: PeriodSource,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        d1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        d2: Option<String>,
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// Fit flex data (U, V, W, d) to the operator relation.
    KpFit {
        #[command(flatten)]
        source: PeriodSource,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// Largest accepted residual relative to |theta2(0)|.
        #[arg(long, default_value_t = 1e-7)]
        max_residual: f64,
    },
    /// Fit flex data, then check the bilinear relation, its specializations and the KP equation.
    KpCheck {
        #[command(flatten)]
        source: PeriodSource,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 1e-7)]
        max_residual: f64,
        /// Random points for the bilinear relation.
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Grid points per axis.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        #[arg(long, default_value_t = 0.2)]
        span: f64,
        /// Finite-difference step (also run at half this step).
        #[arg(long, default_value_t = 0.0025)]
        h: f64,
    },
    /// Trace a translation curve on a genus-2 theta divisor and reconstruct it.
    TranslateTrace {
        #[command(flatten)]
        source: PeriodSource,
        /// Start point on the divisor; default: a root found from a seeded base point.
        #[arg(long, allow_hyphen_values = true)]
        start: Option<String>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        branch: i8,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        span: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Largest Newton correction accepted per step.
        #[arg(long, default_value_t = 1e-5)]
        cap: f64,
    },
    /// Verify translation frames and reconstruction on a surface.
    SurfaceVerify {
        #[arg(long, value_enum, default_value_t = Surface::Cubic)]
        surface: Surface,
        #[command(flatten)]
        source: PeriodSource,
        /// Chart parameters `t1,t2` (cubic) or divisor start point (theta).
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        span: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Write an example period-matrix document.
    GenExample {
        #[arg(value_parser = parse_kind)]
        kind: ExampleKind,
        /// Genus for random-siegel.
        #[arg(long)]
        genus: Option<usize>,
        /// Lower bound on lambda_min for random-siegel.
        #[arg(long)]
        min_lambda: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ThetaEval { .. } => "theta-eval",
            Command::KummerRank { .. } => "kummer-rank",
            Command::GwTest { .. } => "gw-test",
            Command::KpFit { .. } => "kp-fit",
            Command::KpCheck { .. } => "kp-check",
            Command::TranslateTrace { .. } => "translate-trace",
            Command::SurfaceVerify { .. } => "surface-verify",
            Command::GenExample { .. } => "gen-example",
        }
    }
}

/// Rows of CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn numeric(header: Vec<String>, rows: &[Vec<f64>]) -> Self {
        Self {
            header,
            rows: rows.iter().map(|r| r.iter().map(|x| format!("{x:.16e}")).collect()).collect(),
        }
    }

    fn checks(checks: &[CheckResult]) -> Self {
        Self {
            header: ["name", "value", "bound", "passed"].map(String::from).to_vec(),
            rows: checks
                .iter()
                .map(|c| vec![c.name.clone(), format!("{:.16e}", c.value), format!("{:.16e}", c.bound), c.passed.to_string()])
                .collect(),
        }
    }
}

/// Everything a job produces.
#[derive(Debug, Clone)]
pub struct JobOutput {
    pub report: JobReport,
    /// Command-specific table for `--format csv`.
    pub table: Option<Table>,
    /// Replaces the report as the primary output (gen-example writes the document).
    pub document: Option<String>,
}

impl JobOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(match &self.document {
                Some(doc) => doc.clone(),
                None => {
                    let mut s = serde_json::to_string_pretty(&self.report)
                        .map_err(|e| Error::Evaluation(e.to_string()))?;
                    s.push('\n');
                    s
                }
            }),
            Format::Csv => {
                let table = self.table.clone().unwrap_or_else(|| Table::checks(&self.report.checks));
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Evaluation(e.to_string());
                w.write_record(&table.header).map_err(io)?;
                for row in &table.rows {
                    w.write_record(row).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Evaluation(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| Error::Evaluation(e.to_string()))
            }
        }
    }
}

pub(crate) struct Job {
    pub report: JobReport,
    pub table: Option<Table>,
    pub document: Option<String>,
}

/// Runs one job. Library errors end up in the report, never as `Err`.
pub fn run_job(cli: &Cli) -> JobOutput {
    let started = Instant::now();
    let mut job = Job {
        report: JobReport::new(cli.command.name()),
        table: None,
        document: None,
    };
    job.report.inputs = serde_json::to_value(&cli.command).unwrap_or_default();
    job.report.seed = Some(cli.common.seed);
    if let Err(e) = commands::dispatch(cli, &mut job) {
        job.report.fail_with(&e);
    }
    job.report.wall_time_s = started.elapsed().as_secs_f64();
    JobOutput {
        report: job.report,
        table: job.table,
        document: job.document,
    }
}

/// Parses, runs and writes; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { thetalab::io::EXIT_INVALID_INPUT } else { 0 };
        }
    };
    let output = run_job(&cli);
    let text = match output.render(cli.common.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return thetalab::io::EXIT_CHECK_FAILED;
        }
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return thetalab::io::EXIT_INVALID_INPUT;
    }
    if let Some(err) = &output.report.error {
        eprintln!("{}: {}", err.kind, err.message);
    }
    output.exit_code()
}

pub(crate) fn load_period(source: &PeriodSource, seed: u64) -> Result<PeriodMatrix> {
    match (&source.period, source.example) {
        (Some(path), _) => parse_period_matrix(&read_input(path)?),
        (None, Some(kind)) => generate_example(kind, seed)?.to_period(),
        (None, None) => Err(Error::InvalidInput("one of --period or --example is required".into())),
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
    }
}

/// Parses `a+bi,c,di` into a complex vector.
pub fn parse_vector(text: &str) -> Result<Vec<C64>> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<C64>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse complex number `{part}`")))
        })
        .collect()
}

pub(crate) fn vector_arg(text: Option<&str>, g: usize, what: &str) -> Result<Vec<C64>> {
    let v = match text {
        Some(t) => parse_vector(t)?,
        None => vec![C64::new(0.0, 0.0); g],
    };
    if v.len() != g {
        return Err(Error::InvalidInput(format!("{what} has {} entries, expected {g}", v.len())));
    }
    Ok(v)
}
