use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

/// Contraction certificates, entrained orbits and approximation bounds for
/// periodically forced systems.
///
/// Model parameters may be given as `--param key=value` or directly as
/// `--key value` (for example `--lam0 4 --period 2`); run `entrain models`
/// for the catalog and its defaults.
#[derive(Debug, Parser)]
#[command(name = "entrain", version, about, long_about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog models, their parameters and defaults, and approximants.
    Models,
    /// Matrix measure of a matrix read from a JSON file (`[[...], ...]`).
    Measure(MeasureArgs),
    /// Contraction certificate of a model.
    Certify(CertifyArgs),
    /// One period of the entrained orbit as `t,x1,...,xn`.
    Orbit(OrbitArgs),
    /// Measured distance between the entrained orbit and an approximant's
    /// orbit, with the periodic and constant bounds.
    Bound(BoundArgs),
    /// Low-pass sweep over forcing frequencies.
    Sweep(SweepArgs),
    /// Regenerate a figure dataset with pinned parameters.
    Figure(FigureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Catalog model name.
    #[arg(long, required_unless_present = "lti")]
    pub model: Option<String>,
    /// LTI model from a JSON file instead of a catalog model.
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    pub lti: Option<PathBuf>,
    /// Parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    /// Integration and orbit samples per period.
    #[arg(long, default_value_t = entrain_core::sim::DEFAULT_STEPS_PER_PERIOD)]
    pub steps: usize,
    /// Period-map stopping tolerance in the certificate norm.
    #[arg(long, default_value_t = entrain_core::sim::DEFAULT_ORBIT_TOL)]
    pub tol: f64,
    /// Certification grid points per state axis.
    #[arg(long, default_value_t = entrain_core::models::DEFAULT_GRID_PER_AXIS)]
    pub grid: usize,
    /// Certification time samples per period.
    #[arg(long, default_value_t = entrain_core::models::DEFAULT_TIME_SAMPLES)]
    pub time_samples: usize,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Comma-separated norms among l1, l2, linf.
    #[arg(long, value_delimiter = ',', default_value = "l1,l2,linf")]
    pub norm: Vec<String>,
    /// Diagonal scaling `d1,d2,...` applied as `D A D^-1`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub scale: Vec<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Period cap for models without a certificate.
    #[arg(long, default_value_t = 10_000)]
    pub max_periods: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Approximating system: averaged or linearized (alias lti).
    #[arg(long, default_value = "averaged")]
    pub approx: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Relative slack of the validity check.
    #[arg(long, default_value_t = entrain_core::bounds::DEFAULT_VALIDITY_SLACK)]
    pub slack: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Frequencies as `lo:hi:log:k` or `lo:hi:lin:k`.
    #[arg(long, value_name = "SPEC")]
    pub omega: String,
    #[arg(long, default_value = "linearized")]
    pub approx: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig5,
    Fig6,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Figure,
    /// Directory for the dataset file.
    #[arg(long, default_value = ".")]
    pub dir: PathBuf,
}

/// Rewrite `--key value` and `--key=value` into `--param key=value` when
/// `key` is not an option of the chosen subcommand.
pub fn expand_param_flags(argv: Vec<OsString>) -> Vec<OsString> {
    let cmd = Cli::command();
    let mut out = Vec::with_capacity(argv.len());
    let mut iter = argv.into_iter();
    out.extend(iter.next());

    let mut known: Option<Vec<String>> = None;
    while let Some(arg) = iter.next() {
        let Some(text) = arg.to_str() else {
            out.push(arg);
            continue;
        };
        match &known {
            None => {
                if let Some(sub) = cmd.find_subcommand(text) {
                    let mut names: Vec<String> = sub
                        .get_arguments()
                        .filter_map(|a| a.get_long().map(str::to_owned))
                        .collect();
                    names.extend(["help".to_owned(), "version".to_owned()]);
                    known = Some(names);
                }
                out.push(arg);
            }
            Some(names) => {
                let Some(flag) = text.strip_prefix("--").filter(|f| !f.is_empty()) else {
                    out.push(arg);
                    continue;
                };
                let (key, inline) = match flag.split_once('=') {
                    Some((k, v)) => (k, Some(v.to_owned())),
                    None => (flag, None),
                };
                if names.iter().any(|n| n == key) {
                    out.push(arg);
                    continue;
                }
                let value = match inline {
                    Some(v) => Some(v),
                    None => iter.next().map(|v| v.to_string_lossy().into_owned()),
                };
                out.push("--param".into());
                out.push(format!("{key}={}", value.unwrap_or_default()).into());
            }
        }
    }
    out
}
