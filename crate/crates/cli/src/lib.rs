//! Command-line driver for the `bloomhead` analyses.
//!
//! Each subcommand loads one or more exported record files, runs a single
//! analysis and emits a [`Report`]: aligned text on stdout, CSV files in
//! `--out`, or both. Exit status is 0 on success, 1 when the inputs fail
//! validation and 2 for usage errors.

mod commands;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use bloomhead::head_analysis::{HeadId, FP_THRESHOLD};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::execute;
pub use report::{Report, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bloomhead", version, about = "Membership-testing analysis of attention-head exports")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Record files (line-delimited JSON, or CSV points for `fit`).
    #[arg(long, global = true, num_args = 1.., value_name = "PATH")]
    pub input: Vec<PathBuf>,
    /// Directory for CSV reports.
    #[arg(long, global = true, env = "BLOOMHEAD_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "BLOOMHEAD_SEED", default_value_t = 42,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub seed: u64,
    /// Bootstrap and permutation resamples.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub resamples: u64,
    /// Attention above this counts as the head firing.
    #[arg(long = "fp-threshold", global = true, default_value_t = FP_THRESHOLD, value_parser = unit_interval)]
    pub fp_threshold: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Both,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Per-head selectivity, miss rate and group-level tests.
    Signature {
        /// Candidate group for the permutation test; defaults to the heads
        /// passing the classification rule.
        #[arg(long, value_delimiter = ',')]
        group: Vec<HeadId>,
    },
    /// Induction / previous-token scores and overlap with the bloom set.
    Taxonomy {
        /// Bloom heads; derived from signature (and capacity) inputs if omitted.
        #[arg(long, value_delimiter = ',')]
        bloom: Vec<HeadId>,
        #[arg(long, default_value_t = 0.3)]
        induction_threshold: f64,
        #[arg(long, default_value_t = 0.4)]
        previous_threshold: f64,
    },
    /// FP rate against the number of stored tokens.
    Capacity {
        /// Fit the bloom curve and compare candidate models per head.
        #[arg(long)]
        fit: bool,
    },
    /// Fit candidate FP-vs-load models to capacity records or CSV points.
    Fit {
        /// Restrict to these curves (head ids or CSV labels).
        #[arg(long, value_delimiter = ',')]
        head: Vec<String>,
    },
    /// Pairwise phi, AND-combination and FP-count histogram over probes.
    Independence {
        #[arg(long, value_delimiter = ',')]
        heads: Vec<HeadId>,
    },
    /// FP rate and normalized attention against probe-target cosine.
    Resolution,
    /// Selectivity on natural text.
    Naturalistic {
        /// Control heads summarized as a group.
        #[arg(long, value_delimiter = ',')]
        controls: Vec<HeadId>,
    },
    /// Perplexity change under head ablation.
    Ablation {
        #[arg(long, default_value_t = 0.95, value_parser = unit_interval)]
        level: f64,
    },
    /// Duplicate-token ranking and non-name generalization.
    Duplicate {
        #[arg(long, value_delimiter = ',')]
        bloom: Vec<HeadId>,
        /// Ranking depth for duplicate-only heads.
        #[arg(long, default_value_t = 15)]
        top: usize,
    },
    /// Capacity or resolution curves of real filters, in the head report schema.
    SimulateFilter(SimulateArgs),
    /// Per-record differences between two exports of the same run.
    CompareDumps {
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        /// Offenders listed.
        #[arg(long, default_value_t = 10)]
        worst: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Bits in the classical filter.
    #[arg(long, required_unless_present = "dsbf")]
    pub m: Option<usize>,
    /// Hash functions in the classical filter.
    #[arg(long, required_unless_present = "dsbf")]
    pub k: Option<u32>,
    #[arg(long, value_delimiter = ',', default_value = "5,20,50,100,180")]
    pub loads: Vec<u64>,
    /// Probes per load or cosine level [default: 10000, or 1000 with --dsbf].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub probes: Option<u64>,
    /// Simulate distance-sensitive filters at the band presets instead.
    #[arg(long, conflicts_with_all = ["m", "k"])]
    pub dsbf: bool,
    #[arg(long, default_value_t = 64)]
    pub dimension: usize,
    /// Vectors stored before each probe.
    #[arg(long, default_value_t = 1)]
    pub stored: usize,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not in (0, 1)"))
    }
}

/// Failure classes that map to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Validation(e)
    }
}

impl From<bloomhead::Error> for Failure {
    fn from(e: bloomhead::Error) -> Self {
        Failure::Validation(e.into())
    }
}

/// Parse, execute and emit. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    if cli.common.format == Format::Both && cli.common.out.is_none() {
        let _ = writeln!(stderr, "error: --format both needs --out");
        return EXIT_USAGE;
    }
    let result = execute(&cli).and_then(|r| {
        emit(&cli.common, &r, stdout)?;
        match &r.failure {
            Some(msg) => Err(Failure::Validation(anyhow::anyhow!("{msg}"))),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Validation(e)) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_VALIDATION
        }
    }
}

fn emit(common: &Common, report: &Report, stdout: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Validation(e.into());
    match (common.format, &common.out) {
        (Format::Table, _) => stdout.write_all(report.to_text().as_bytes()).map_err(io)?,
        (Format::Csv, None) => stdout.write_all(report.to_csv()?.as_bytes()).map_err(io)?,
        (Format::Csv, Some(dir)) => {
            report.write_csv(dir)?;
        }
        (Format::Both, Some(dir)) => {
            stdout.write_all(report.to_text().as_bytes()).map_err(io)?;
            report.write_csv(dir)?;
        }
        (Format::Both, None) => unreachable!("checked before execution"),
    }
    Ok(())
}
