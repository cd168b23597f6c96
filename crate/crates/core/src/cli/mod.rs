//! Command-line front end: configuration, the five pipelines and their
//! artifacts.
//!
//! Every run writes its CSV/JSON artifacts plus a `manifest.json` recording
//! all inputs, grid and tolerance settings and the tool version. Outputs are
//! a deterministic function of the configuration and seed; only the
//! manifest's `created_unix` field varies between identical runs.

mod commands;
mod config;
mod output;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use commands::{fit_slope, SweepPoint, SweepReport};
pub use config::{FileConfig, OUTPUT_ENV};
pub use output::{fmt_num, Artifacts};

use crate::error::Error;
use crate::profiles::{critical_exponents, ModelParams, PotentialSpec, Regime};
use crate::reduction::ReductionConfig;
use crate::verifier::ShootConfig;

#[derive(Debug, Parser)]
#[command(
    name = "bubbletower",
    version,
    about = "Bubble-tower constants, predictions, reduction and verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Energy constants a1..a5, a5_hat with error bounds.
    Constants(Flags),
    /// Critical parameters, spike locations, amplitudes and energy expansion.
    Predict(Flags),
    /// Lyapunov-Schmidt reduction and Newton solve of the reduced problem.
    Reduce(Flags),
    /// Reduction cross-checked against shooting and the asymptotic profile.
    Verify(Flags),
    /// Trend metrics over a decreasing list of epsilon values.
    Sweep(Flags),
}

/// Flags shared by all subcommands. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Space dimension.
    #[arg(long = "N")]
    pub n: Option<u32>,
    /// Absorption exponent.
    #[arg(long)]
    pub q: Option<f64>,
    /// Tower height.
    #[arg(long)]
    pub k: Option<usize>,
    /// Supercritical perturbation epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Potential preset: c, const:c or rational:a,b.
    #[arg(long = "V", allow_hyphen_values = true)]
    pub v: Option<String>,
    /// sub (p^s < q < p*) or super (q > p*); inferred from q when omitted.
    #[arg(long)]
    pub regime: Option<String>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Window constant M.
    #[arg(long = "M")]
    pub m: Option<f64>,
    /// Truncation half-width around the spikes.
    #[arg(long)]
    pub width: Option<f64>,
    /// Output directory (default: $BUBBLETOWER_OUT/<command> or out/<command>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized probes.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated decreasing epsilon values for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Constants,
    Predict,
    Reduce,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Predict => "predict",
            Command::Reduce => "reduce",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub reduction: ReductionConfig,
    pub shooting: ShootConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub eps_list: Vec<f64>,
}

/// A failure tagged with the pipeline stage that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.error)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn usage(detail: impl Into<String>) -> Self {
        Self {
            stage: "usage",
            error: Error::Domain(detail.into()),
        }
    }
    /// Process exit code: 2 for usage and hypothesis errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match (&self.error, self.stage) {
            (_, "usage") | (Error::Hypothesis { .. }, _) => 2,
            _ => 1,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, CliError>;
}

impl<T> StageExt<T> for crate::error::Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, CliError> {
        self.map_err(|error| CliError { stage, error })
    }
}

impl RunConfig {
    /// Resolves flags, config file and environment into a run.
    pub fn from_cli(cli: Cli, env_out: Option<PathBuf>) -> std::result::Result<Self, CliError> {
        let (command, flags) = match cli.command {
            CommandArgs::Constants(f) => (Command::Constants, f),
            CommandArgs::Predict(f) => (Command::Predict, f),
            CommandArgs::Reduce(f) => (Command::Reduce, f),
            CommandArgs::Verify(f) => (Command::Verify, f),
            CommandArgs::Sweep(f) => (Command::Sweep, f),
        };
        let from_flags = FileConfig {
            n: flags.n,
            q: flags.q,
            k: flags.k,
            eps: flags.eps,
            v: flags.v,
            regime: flags
                .regime
                .as_deref()
                .map(str::parse::<Regime>)
                .transpose()
                .map_err(|e| CliError {
                    stage: "usage",
                    error: e,
                })?,
            h: flags.h,
            m: flags.m,
            width: flags.width,
            seed: flags.seed,
            workers: flags.workers,
            eps_list: flags.eps_list,
            out: flags.out,
        };
        let merged = match &flags.config {
            Some(path) => FileConfig::load(path)
                .stage("usage")?
                .overridden_by(from_flags),
            None => from_flags,
        };
        Self::resolve(command, merged, env_out)
    }

    pub fn resolve(
        command: Command,
        c: FileConfig,
        env_out: Option<PathBuf>,
    ) -> std::result::Result<Self, CliError> {
        let n = c.n.unwrap_or(3);
        let q = c.q.unwrap_or(4.0);
        let (_, p_star) = critical_exponents(n).stage("usage")?;
        let regime = c.regime.unwrap_or(if q > p_star {
            Regime::Super
        } else {
            Regime::Sub
        });
        let potential =
            PotentialSpec::parse(c.v.as_deref().unwrap_or("const:-1")).stage("usage")?;
        let eps_list = c.eps_list.unwrap_or_else(|| vec![1e-2, 3e-3, 1e-3]);
        let eps = c.eps.unwrap_or(if command == Command::Sweep {
            eps_list[0]
        } else {
            1e-2
        });
        let params =
            ModelParams::new(n, q, eps, c.k.unwrap_or(1), regime, potential).stage("usage")?;
        let defaults = ReductionConfig::default();
        let reduction = ReductionConfig {
            h: c.h.unwrap_or(defaults.h),
            width: c.width,
            window_m: c.m.unwrap_or(defaults.window_m),
            ..defaults
        };
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(reduction.h) {
            return Err(CliError::usage("grid spacing h must be positive"));
        }
        if !positive(reduction.window_m) || !reduction.width.map_or(true, positive) {
            return Err(CliError::usage("M and width must be positive"));
        }
        if let Some(e) = eps_list.iter().find(|e| !(positive(**e) && **e < 1.0)) {
            return Err(CliError::usage(format!("sweep epsilon {e} outside (0, 1)")));
        }
        if command == Command::Sweep {
            if eps_list.len() < 2 {
                return Err(CliError::usage("a sweep needs at least two epsilon values"));
            }
            if eps_list.windows(2).any(|w| w[1] >= w[0]) {
                return Err(CliError::usage(
                    "sweep epsilon values must be strictly decreasing",
                ));
            }
        }
        let out_dir = c.out.unwrap_or_else(|| {
            env_out
                .unwrap_or_else(|| PathBuf::from("out"))
                .join(command.name())
        });
        let workers = c
            .workers
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            })
            .max(1);
        Ok(Self {
            command,
            params,
            reduction,
            shooting: ShootConfig::default(),
            out_dir,
            seed: c.seed.unwrap_or(0),
            workers,
            eps_list,
        })
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Serialize)]
pub struct ExitReport {
    pub command: Command,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Executes the configured pipeline and writes its artifacts.
pub fn run(config: &RunConfig) -> std::result::Result<ExitReport, CliError> {
    commands::run(config)
}

/// Parses `args`, runs, and returns the process exit code after printing
/// the report or the error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    main_with_io(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`main_with_args`] writing the JSON summary to `out` and messages to
/// `err`. Write failures (a closed pipe, say) are ignored.
pub fn main_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 2;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let env_out = std::env::var_os(OUTPUT_ENV).map(PathBuf::from);
    match RunConfig::from_cli(cli, env_out).and_then(|cfg| run(&cfg)) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.summary).unwrap_or_default();
            let _ = writeln!(out, "{text}");
            let _ = writeln!(
                err,
                "wrote {} files to {}",
                report.files.len(),
                report.out_dir.display()
            );
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
