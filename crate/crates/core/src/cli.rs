//! Flag parsing, command dispatch and report emission for the `srmlab`
//! binary.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;

use crate::bounds::{structural_params, BoundReport};
use crate::canon::run_battery;
use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::mc::solver::{largest_singular, spectral_norm_with, SolverOptions};
use crate::mc::tail::{fit_tail_exponent, MIN_FIT_POINTS};
use crate::mc::trials::{estimate_mean, run_trials, Statistic, TrialConfig};
use crate::mc::verify::{
    lipschitz_check, smallest_singular_experiment, verify_deviation, verify_moment_equivalence,
};
use crate::profile::{sample_rectangular, sample_symmetric, Profile, ProfileDescriptor, Shape};
use crate::report::{write_atomic, Report, ReportBody, ReportHeader, SampleReport};
use crate::rng::trial_seed;

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_PAIRS: usize = 10_000;
pub const DEFAULT_DRAWS: usize = 1_000_000;
pub const DEFAULT_P_GRID: [f64; 3] = [2.0, 4.0, 8.0];

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Sample,
    Bounds,
    VerifyDeviation,
    VerifyMoments,
    CanonBattery,
    TailFit,
    SmallestSingular,
    LipschitzCheck,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Sample,
        Command::Bounds,
        Command::VerifyDeviation,
        Command::VerifyMoments,
        Command::CanonBattery,
        Command::TailFit,
        Command::SmallestSingular,
        Command::LipschitzCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Bounds => "bounds",
            Command::VerifyDeviation => "verify-deviation",
            Command::VerifyMoments => "verify-moments",
            Command::CanonBattery => "canon-battery",
            Command::TailFit => "tail-fit",
            Command::SmallestSingular => "smallest-singular",
            Command::LipschitzCheck => "lipschitz-check",
        }
    }

    fn needs_profile(self) -> bool {
        !matches!(self, Command::CanonBattery | Command::SmallestSingular)
    }

    fn needs_symmetric(self) -> bool {
        matches!(
            self,
            Command::VerifyDeviation | Command::TailFit | Command::LipschitzCheck
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Command,
    pub profile: Option<Profile>,
    /// Canonical descriptor text recorded in the report header.
    pub profile_descriptor: Option<String>,
    pub dist: DistSpec,
    pub trials: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tolerance: f64,
    pub max_iter: Option<usize>,
    pub workers: usize,
    pub c1: f64,
    pub p_grid: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub pairs: usize,
    pub draws: usize,
}

/// One violated constraint. Each kind prints a distinct prefix.
#[derive(Clone, Debug, PartialEq)]
pub enum UsageIssue {
    UnknownCommand(String),
    MalformedProfile(String),
    NonNumeric { flag: &'static str, value: String },
    Missing(&'static str),
    Constraint(String),
}

impl fmt::Display for UsageIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageIssue::UnknownCommand(c) => {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                write!(
                    f,
                    "unknown command `{c}` (expected one of: {})",
                    names.join(", ")
                )
            }
            UsageIssue::MalformedProfile(why) => write!(f, "bad profile: {why}"),
            UsageIssue::NonNumeric { flag, value } => {
                write!(f, "non-numeric value for --{flag}: `{value}`")
            }
            UsageIssue::Missing(flag) => write!(f, "missing required flag --{flag}"),
            UsageIssue::Constraint(why) => write!(f, "constraint violated: {why}"),
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    /// Flag syntax errors, `--help` and `--version` as reported by clap.
    Clap(clap::Error),
    Usage(Vec<UsageIssue>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Clap(e) => write!(f, "{e}"),
            ConfigError::Usage(issues) => {
                writeln!(
                    f,
                    "usage error ({} problem{}):",
                    issues.len(),
                    if issues.len() == 1 { "" } else { "s" }
                )?;
                for issue in issues {
                    writeln!(f, "  - {issue}")?;
                }
                write!(f, "run `srmlab --help` for the flag list")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

const COMMANDS_HELP: &str = "Commands:
  sample             draw one matrix from the profile and report its norm
  bounds             closed-form expectation bounds (one CSV row)
  verify-deviation   Monte Carlo deviation-inequality check with fitted envelopes
  verify-moments     moment-equivalence ratios on --p-grid
  canon-battery      canonical-moment formulas against Monte Carlo
  tail-fit           fitted tail exponent of the spectral norm
  smallest-singular  s_n(A)/sqrt(N) for the all-ones --rows x --cols profile, at N and 2N
  lipschitz-check    Lipschitz bound of the norm map over --pairs pairs

Profiles: wigner:n=N  band:n=N,k=K  diag:n=N  diag:file=W.csv  zero:n=N
          ones:rows=R,cols=C  csv:file=B.csv";

/// Raw flags; every value stays a string so that all numeric problems can
/// be reported together.
#[derive(Parser, Debug)]
#[command(name = "srmlab", version, no_binary_name = true, after_help = COMMANDS_HELP)]
#[command(
    about = "Monte Carlo laboratory for structured random matrices with Weibull-type entries"
)]
struct RawArgs {
    /// Experiment to run (see the command list below)
    command: String,
    /// Profile descriptor (see below)
    #[arg(long)]
    profile: Option<String>,
    /// Entry law: weibull, nu or gaussian
    #[arg(long, default_value = "weibull")]
    dist: String,
    /// Tail exponent α (defaults to 1, or 2 for gaussian)
    #[arg(long)]
    alpha: Option<String>,
    /// Number of Monte Carlo trials
    #[arg(long)]
    trials: Option<String>,
    /// Master seed; the only source of randomness
    #[arg(long)]
    seed: Option<String>,
    /// Report path; stdout when absent
    #[arg(long)]
    output: Option<PathBuf>,
    /// json or csv
    #[arg(long)]
    format: Option<String>,
    /// Relative eigensolver tolerance in (0, 1e-3]
    #[arg(long)]
    tolerance: Option<String>,
    /// Lanczos iteration cap
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    /// Worker threads; never changes the output
    #[arg(long)]
    workers: Option<String>,
    /// Multiple of the estimated mean used as the deviation center
    #[arg(long)]
    c1: Option<String>,
    /// Comma-separated moment orders for verify-moments
    #[arg(long = "p-grid")]
    p_grid: Option<String>,
    /// Rows N for smallest-singular
    #[arg(long)]
    rows: Option<String>,
    /// Columns n for smallest-singular
    #[arg(long)]
    cols: Option<String>,
    /// Pairs for lipschitz-check
    #[arg(long)]
    pairs: Option<String>,
    /// Monte Carlo draws for canon-battery
    #[arg(long)]
    draws: Option<String>,
}

fn number<T: FromStr>(
    issues: &mut Vec<UsageIssue>,
    flag: &'static str,
    raw: &Option<String>,
) -> Option<T> {
    let raw = raw.as_ref()?;
    match raw.trim().parse() {
        Ok(v) => Some(v),
        Err(_) => {
            issues.push(UsageIssue::NonNumeric {
                flag,
                value: raw.clone(),
            });
            None
        }
    }
}

/// Parses flags (without the program name) into a validated config.
pub fn parse_config<I, S>(args: I) -> std::result::Result<ExperimentConfig, ConfigError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let raw = RawArgs::try_parse_from(args).map_err(ConfigError::Clap)?;
    let mut issues = Vec::new();

    let command = Command::ALL
        .iter()
        .copied()
        .find(|c| c.name() == raw.command);
    if command.is_none() {
        issues.push(UsageIssue::UnknownCommand(raw.command.clone()));
    }

    let alpha: Option<f64> = number(&mut issues, "alpha", &raw.alpha);
    let trials: Option<usize> = number(&mut issues, "trials", &raw.trials);
    let seed: Option<u64> = number(&mut issues, "seed", &raw.seed);
    let tolerance: Option<f64> = number(&mut issues, "tolerance", &raw.tolerance);
    let max_iter: Option<usize> = number(&mut issues, "max-iter", &raw.max_iter);
    let workers: Option<usize> = number(&mut issues, "workers", &raw.workers);
    let c1: Option<f64> = number(&mut issues, "c1", &raw.c1);
    let rows: Option<usize> = number(&mut issues, "rows", &raw.rows);
    let cols: Option<usize> = number(&mut issues, "cols", &raw.cols);
    let pairs: Option<usize> = number(&mut issues, "pairs", &raw.pairs);
    let draws: Option<usize> = number(&mut issues, "draws", &raw.draws);
    let p_grid: Option<Vec<f64>> = raw.p_grid.as_ref().map(|text| {
        text.split(',')
            .filter_map(|part| number(&mut issues, "p-grid", &Some(part.to_string())))
            .collect()
    });

    let format = match raw.format.as_deref() {
        None | Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        Some(other) => {
            issues.push(UsageIssue::Constraint(format!(
                "--format must be json or csv, got `{other}`"
            )));
            Format::Json
        }
    };

    let trials = trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        issues.push(UsageIssue::Constraint("--trials must be >= 1".into()));
    }
    let tolerance = tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0 && tolerance <= 1e-3) {
        issues.push(UsageIssue::Constraint(format!(
            "--tolerance must lie in (0, 1e-3], got {tolerance}"
        )));
    }
    if max_iter == Some(0) {
        issues.push(UsageIssue::Constraint("--max-iter must be >= 1".into()));
    }
    let c1 = c1.unwrap_or(1.0);
    if !(c1 > 0.0 && c1.is_finite()) {
        issues.push(UsageIssue::Constraint(format!(
            "--c1 must be positive, got {c1}"
        )));
    }
    let pairs = pairs.unwrap_or(DEFAULT_PAIRS);
    if pairs == 0 {
        issues.push(UsageIssue::Constraint("--pairs must be >= 1".into()));
    }
    let draws = draws.unwrap_or(DEFAULT_DRAWS);
    if draws == 0 {
        issues.push(UsageIssue::Constraint("--draws must be >= 1".into()));
    }

    let default_alpha = if raw.dist == "gaussian" || raw.dist == "normal" {
        2.0
    } else {
        1.0
    };
    let dist = match DistSpec::from_name(&raw.dist, alpha.unwrap_or(default_alpha)) {
        Ok(d) => Some(d),
        Err(e) => {
            issues.push(UsageIssue::Constraint(e.to_string()));
            None
        }
    };

    let p_grid = p_grid.unwrap_or_else(|| DEFAULT_P_GRID.to_vec());
    if command == Some(Command::VerifyMoments) {
        let limit = 2.0 * (trials.max(1) as f64).ln();
        if p_grid.is_empty() {
            issues.push(UsageIssue::Constraint(
                "--p-grid must list at least one order".into(),
            ));
        }
        for &p in &p_grid {
            if !(p >= 1.0 && p <= limit) {
                issues.push(UsageIssue::Constraint(format!(
                    "moment order {p} must lie in [1, 2 ln(trials)] = [1, {limit:.3}]"
                )));
            }
        }
    }

    let (rows, cols) = match command {
        Some(Command::SmallestSingular) => {
            if rows.is_none() && raw.rows.is_none() {
                issues.push(UsageIssue::Missing("rows"));
            }
            if cols.is_none() && raw.cols.is_none() {
                issues.push(UsageIssue::Missing("cols"));
            }
            let (r, c) = (rows.unwrap_or(0), cols.unwrap_or(0));
            if rows.is_some() && cols.is_some() && (c == 0 || c > r) {
                issues.push(UsageIssue::Constraint(format!(
                    "need 1 <= --cols <= --rows, got {r} x {c}"
                )));
            }
            (r, c)
        }
        _ => (0, 0),
    };

    let mut profile = None;
    let mut profile_descriptor = None;
    if let Some(cmd) = command {
        if cmd.needs_profile() {
            match raw.profile.as_deref() {
                None => issues.push(UsageIssue::Missing("profile")),
                Some(text) => {
                    match ProfileDescriptor::parse(text).and_then(|d| Ok((d.build()?, d))) {
                        Ok((p, d)) => {
                            if cmd.needs_symmetric() && !p.is_symmetric() {
                                issues.push(UsageIssue::Constraint(format!(
                                    "`{}` needs a symmetric profile, `{d}` is rectangular",
                                    cmd.name()
                                )));
                            }
                            profile_descriptor = Some(d.to_string());
                            profile = Some(p);
                        }
                        Err(e) => issues.push(UsageIssue::MalformedProfile(e.to_string())),
                    }
                }
            }
        } else if cmd == Command::SmallestSingular {
            profile_descriptor = Some(ProfileDescriptor::Ones { rows, cols }.to_string());
        }
    }

    match (command, dist, issues.is_empty()) {
        (Some(command), Some(dist), true) => Ok(ExperimentConfig {
            command,
            profile,
            profile_descriptor,
            dist,
            trials,
            master_seed: seed.unwrap_or(0),
            output: raw.output,
            format,
            tolerance,
            max_iter,
            workers: workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
                .max(1),
            c1,
            p_grid,
            rows,
            cols,
            pairs,
            draws,
        }),
        _ => Err(ConfigError::Usage(issues)),
    }
}

impl ExperimentConfig {
    fn solver(&self) -> Result<SolverOptions> {
        let opts = SolverOptions::new(self.tolerance)?;
        Ok(match self.max_iter {
            Some(m) => opts.with_max_iter(m),
            None => opts,
        })
    }

    fn trial_config(&self) -> Result<TrialConfig> {
        Ok(
            TrialConfig::new(self.trials, self.master_seed, self.tolerance)?
                .with_workers(self.workers)
                .with_solver(self.solver()?),
        )
    }

    fn header(&self, trials: usize) -> ReportHeader {
        let dist = (self.command != Command::CanonBattery).then_some(self.dist);
        ReportHeader::new(
            self.command.name(),
            self.profile_descriptor.as_deref(),
            dist,
            trials,
            self.master_seed,
            self.tolerance,
        )
    }

    fn profile(&self) -> &Profile {
        self.profile
            .as_ref()
            .expect("validated config carries a profile")
    }
}

/// Runs the configured experiment and assembles its report.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let (count, body) = match cfg.command {
        Command::Sample => {
            let profile = cfg.profile();
            let seed = trial_seed(cfg.master_seed, 0);
            let (values, norm) = match profile.shape() {
                Shape::Symmetric(_) => {
                    let m = sample_symmetric(profile, &cfg.dist, seed)?;
                    let norm = spectral_norm_with(&m.values, &cfg.solver()?)?;
                    (m.values, norm)
                }
                Shape::Rectangular { rows, cols } => {
                    let m = sample_rectangular(rows, cols, profile, &cfg.dist, seed)?;
                    let norm = largest_singular(&m.values);
                    (m.values, norm)
                }
            };
            let body = SampleReport {
                rows: values.nrows(),
                cols: values.ncols(),
                values: values
                    .row_iter()
                    .map(|r| r.iter().copied().collect())
                    .collect(),
                spectral_norm: norm,
            };
            (1, ReportBody::Sample(body))
        }
        Command::Bounds => (
            1,
            ReportBody::Bounds(BoundReport::compute(cfg.profile(), cfg.dist.alpha)?),
        ),
        Command::VerifyDeviation => {
            let r = verify_deviation(cfg.profile(), &cfg.dist, &cfg.trial_config()?, cfg.c1)?;
            (cfg.trials, ReportBody::Deviation(Box::new(r)))
        }
        Command::VerifyMoments => {
            let r = verify_moment_equivalence(
                cfg.profile(),
                &cfg.dist,
                &cfg.trial_config()?,
                &cfg.p_grid,
            )?;
            (cfg.trials, ReportBody::Moments(r))
        }
        Command::CanonBattery => (
            cfg.draws,
            ReportBody::Battery(run_battery(cfg.draws, cfg.master_seed, cfg.workers)?),
        ),
        Command::TailFit => {
            let profile = cfg.profile();
            let ts = run_trials(
                profile,
                &cfg.dist,
                Statistic::SpectralNorm,
                &cfg.trial_config()?,
            )?;
            let max_b = structural_params(profile).max_b;
            if ts.is_degenerate() || max_b == 0.0 {
                return Err(Error::Fit {
                    reason: "all trial values are equal".into(),
                    usable: 0,
                    required: MIN_FIT_POINTS,
                });
            }
            let center = cfg.c1 * estimate_mean(&ts, None)?.mean;
            let fit = fit_tail_exponent(&ts, center, max_b)?;
            (cfg.trials, ReportBody::TailFit(fit))
        }
        Command::SmallestSingular => {
            let r =
                smallest_singular_experiment(cfg.rows, cfg.cols, &cfg.dist, &cfg.trial_config()?)?;
            (cfg.trials, ReportBody::SmallestSingular(r))
        }
        Command::LipschitzCheck => {
            let r = lipschitz_check(
                cfg.profile(),
                &cfg.dist,
                cfg.pairs,
                cfg.master_seed,
                cfg.workers,
            )?;
            (cfg.pairs, ReportBody::Lipschitz(r))
        }
    };
    Ok(Report {
        header: cfg.header(count),
        body,
    })
}

/// Serialises `report` in the configured format and writes it to
/// `--output` atomically, or returns the bytes for stdout.
pub fn emit(cfg: &ExperimentConfig, report: &Report) -> Result<Option<Vec<u8>>> {
    let label = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("<stdout>"));
    let bytes = match cfg.format {
        Format::Json => report.to_json()?.into_bytes(),
        Format::Csv => report.to_csv(&label)?,
    };
    match &cfg.output {
        Some(path) => {
            write_atomic(path, &bytes)?;
            Ok(None)
        }
        None => Ok(Some(bytes)),
    }
}

/// Exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Convergence { .. } | Error::Fit { .. } => EXIT_NUMERICAL,
        Error::Trial { source, .. } => exit_code(source),
        Error::Io { .. } | Error::Csv { .. } | Error::Json(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

/// Full binary behaviour: parse, run, emit. Returns the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    use std::io::Write;

    let cfg = match parse_config(args) {
        Ok(cfg) => cfg,
        Err(ConfigError::Clap(e)) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
        Err(e) => {
            eprintln!("{e}");
            return EXIT_VALIDATION;
        }
    };
    let outcome = run(&cfg).and_then(|report| emit(&cfg, &report));
    match outcome {
        Ok(Some(bytes)) => {
            let mut out = std::io::stdout().lock();
            match out.write_all(&bytes).and_then(|_| out.flush()) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: <stdout>: {e}");
                    EXIT_IO
                }
            }
        }
        Ok(None) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
