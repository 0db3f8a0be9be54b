//! Command-line and config-file parsing into a validated [`RunConfig`].
//!
//! Values come from three layers. Flags win over `key=value` lines in the
//! `--config` file, which win over `NBS_TAIL_EPS` and the built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use nbs_core::phasespace::GridSpec;
use nbs_core::Exec;

use crate::error::CliError;

pub const DEFAULT_TAIL_EPS: f64 = 1e-12;
pub const TAIL_EPS_VAR: &str = "NBS_TAIL_EPS";
pub const DEFAULT_CHI_T: f64 = 2.0;
pub const DEFAULT_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Photon statistics report for one state.
    Stats,
    /// Quadrature variances over an (M, eta) grid.
    SqueezeScan,
    /// Husimi Q function on a grid.
    Qfunc,
    /// Wigner function on a grid.
    Wigner,
    /// s-parametrized distribution on a grid.
    Sdist,
    /// Fidelity against the target states as chi*t grows.
    Evolve,
    /// Runs the invariant suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Raw command line. Every option is optional here so that the config file
/// can supply it.
#[derive(Debug, Parser)]
#[command(name = "nbs", version, about = "Negative binomial state numerics", allow_negative_numbers = true)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Success probability, 0 < eta <= 1.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Photon offset M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Interaction time chi*t; for `evolve` the last point of the series.
    #[arg(long = "chi-t")]
    pub chi_t: Option<f64>,
    /// Number of chi*t steps for `evolve`.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Ordering parameter for `sdist`, -1 <= s <= 0.
    #[arg(long)]
    pub s: Option<f64>,
    /// Square window [-range, range]^2.
    #[arg(long)]
    pub range: Option<f64>,
    #[arg(long = "x-min")]
    pub x_min: Option<f64>,
    #[arg(long = "x-max")]
    pub x_max: Option<f64>,
    #[arg(long = "y-min")]
    pub y_min: Option<f64>,
    #[arg(long = "y-max")]
    pub y_max: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Smallest M of a squeezing scan.
    #[arg(long = "m-min")]
    pub m_min: Option<usize>,
    /// Largest M of a squeezing scan.
    #[arg(long = "m-max")]
    pub m_max: Option<usize>,
    #[arg(long = "eta-min")]
    pub eta_min: Option<f64>,
    #[arg(long = "eta-max")]
    pub eta_max: Option<f64>,
    #[arg(long = "eta-step")]
    pub eta_step: Option<f64>,
    /// Target tail mass of the truncated Fock space.
    #[arg(long = "tail-eps")]
    pub tail_eps: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// File of `key=value` lines using the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Disable the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRange {
    pub m_min: usize,
    pub m_max: usize,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_step: f64,
}

impl Default for ScanRange {
    fn default() -> Self {
        ScanRange { m_min: 1, m_max: 40, eta_min: 0.01, eta_max: 0.99, eta_step: 0.01 }
    }
}

/// Fully resolved and validated run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub eta: Option<f64>,
    pub m: Option<usize>,
    pub chi_t: f64,
    pub steps: usize,
    pub s: Option<f64>,
    pub grid: GridSpec,
    pub scan: ScanRange,
    pub tail_eps: f64,
    /// `None` for the command's natural format.
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub exec: Exec,
}

impl RunConfig {
    /// Resolved output format: JSON for `stats`, CSV for tables and grids.
    pub fn output_format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Stats => Format::Json,
            _ => Format::Csv,
        })
    }

    pub fn eta(&self) -> Result<f64, CliError> {
        self.eta.ok_or_else(|| missing("--eta", self.command))
    }

    pub fn m(&self) -> Result<usize, CliError> {
        self.m.ok_or_else(|| missing("--m", self.command))
    }
}

fn missing(flag: &str, command: Command) -> CliError {
    let name = command.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    CliError::Usage(format!("missing required parameter {flag} for `{name}`"))
}

const KEYS: [&str; 21] = [
    "eta", "m", "chi-t", "steps", "s", "range", "x-min", "x-max", "y-min", "y-max", "nx", "ny",
    "m-min", "m-max", "eta-min", "eta-max", "eta-step", "tail-eps", "format", "output",
    "sequential",
];

/// Parses `key=value` lines. Blank lines and `#` comments are skipped and
/// underscores in keys are read as dashes.
pub fn parse_config_file(text: &str, path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected key=value, found '{line}'",
                path.display(),
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "{}:{}: unknown key '{key}'",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

struct Layers<'a> {
    file: &'a BTreeMap<String, String>,
    path: Option<&'a Path>,
}

impl Layers<'_> {
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                let origin = self.path.map(|p| p.display().to_string()).unwrap_or_default();
                CliError::Usage(format!("invalid value '{v}' for '{key}' in {origin}: {e}"))
            }),
        }
    }
}

fn check(ok: bool, flag: &str, value: impl Display, expected: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "invalid value '{value}' for '--{flag}': expected {expected}"
        )))
    }
}

/// Builds a [`RunConfig`] from `argv` (program name first). `env_tail_eps` is
/// the value of `NBS_TAIL_EPS`; an empty value counts as unset.
pub fn parse_config<I, T>(argv: I, env_tail_eps: Option<&str>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config_file(&text, path)?
        }
        None => BTreeMap::new(),
    };
    resolve(cli, &file, env_tail_eps)
}

fn resolve(
    cli: Cli,
    file: &BTreeMap<String, String>,
    env_tail_eps: Option<&str>,
) -> Result<RunConfig, CliError> {
    let layers = Layers { file, path: cli.config.as_deref() };

    let eta = layers.pick(cli.eta, "eta")?;
    if let Some(eta) = eta {
        check(eta > 0.0 && eta <= 1.0, "eta", eta, "0 < eta <= 1")?;
    }
    let m = layers.pick(cli.m, "m")?;

    let chi_t = layers.pick(cli.chi_t, "chi-t")?.unwrap_or(DEFAULT_CHI_T);
    check(chi_t.is_finite() && chi_t >= 0.0, "chi-t", chi_t, "finite chi-t >= 0")?;
    let steps = layers.pick(cli.steps, "steps")?.unwrap_or(DEFAULT_STEPS);
    check(steps >= 1, "steps", steps, "steps >= 1")?;

    let s = layers.pick(cli.s, "s")?;
    if let Some(s) = s {
        check((-1.0..=0.0).contains(&s), "s", s, "-1 <= s <= 0")?;
    }

    let defaults = GridSpec::default();
    let range = layers.pick(cli.range, "range")?;
    if let Some(r) = range {
        check(r.is_finite() && r >= 0.0, "range", r, "finite range >= 0")?;
    }
    let bound = |flag, key, lo: bool, default: f64| -> Result<f64, CliError> {
        let v = layers.pick(flag, key)?;
        let v = v.unwrap_or(match range {
            Some(r) if lo => -r,
            Some(r) => r,
            None => default,
        });
        check(v.is_finite(), key, v, "a finite number")?;
        Ok(v)
    };
    let grid = GridSpec {
        x_min: bound(cli.x_min, "x-min", true, defaults.x_min)?,
        x_max: bound(cli.x_max, "x-max", false, defaults.x_max)?,
        y_min: bound(cli.y_min, "y-min", true, defaults.y_min)?,
        y_max: bound(cli.y_max, "y-max", false, defaults.y_max)?,
        nx: layers.pick(cli.nx, "nx")?.unwrap_or(defaults.nx),
        ny: layers.pick(cli.ny, "ny")?.unwrap_or(defaults.ny),
    };
    check(grid.nx >= 2, "nx", grid.nx, "nx >= 2")?;
    check(grid.ny >= 2, "ny", grid.ny, "ny >= 2")?;
    check(grid.x_min <= grid.x_max, "x-max", grid.x_max, "x-max >= x-min")?;
    check(grid.y_min <= grid.y_max, "y-max", grid.y_max, "y-max >= y-min")?;

    let d = ScanRange::default();
    let scan = ScanRange {
        m_min: layers.pick(cli.m_min, "m-min")?.unwrap_or(d.m_min),
        m_max: layers.pick(cli.m_max, "m-max")?.unwrap_or(d.m_max),
        eta_min: layers.pick(cli.eta_min, "eta-min")?.unwrap_or(d.eta_min),
        eta_max: layers.pick(cli.eta_max, "eta-max")?.unwrap_or(d.eta_max),
        eta_step: layers.pick(cli.eta_step, "eta-step")?.unwrap_or(d.eta_step),
    };
    check(scan.m_min <= scan.m_max, "m-max", scan.m_max, "m-max >= m-min")?;
    check(scan.eta_min > 0.0 && scan.eta_min < 1.0, "eta-min", scan.eta_min, "0 < eta-min < 1")?;
    check(
        scan.eta_max > scan.eta_min && scan.eta_max <= 1.0,
        "eta-max",
        scan.eta_max,
        "eta-min < eta-max <= 1",
    )?;
    check(scan.eta_step > 0.0 && scan.eta_step.is_finite(), "eta-step", scan.eta_step, "eta-step > 0")?;

    let env = match env_tail_eps.filter(|v| !v.trim().is_empty()) {
        Some(v) => Some(v.trim().parse::<f64>().map_err(|e| {
            CliError::Usage(format!("invalid value '{v}' for {TAIL_EPS_VAR}: {e}"))
        })?),
        None => None,
    };
    let tail_eps = layers.pick(cli.tail_eps, "tail-eps")?.or(env).unwrap_or(DEFAULT_TAIL_EPS);
    check(tail_eps > 0.0 && tail_eps < 1.0, "tail-eps", tail_eps, "0 < tail-eps < 1")?;

    let format = layers.pick(cli.format, "format")?;
    let output = layers.pick(cli.output, "output")?;
    let sequential = cli.sequential || layers.pick(None, "sequential")?.unwrap_or(false);

    let config = RunConfig {
        command: cli.command,
        eta,
        m,
        chi_t,
        steps,
        s,
        grid,
        scan,
        tail_eps,
        format,
        output,
        exec: if sequential { Exec::Sequential } else { Exec::Parallel },
    };
    require(&config)?;
    Ok(config)
}

fn require(config: &RunConfig) -> Result<(), CliError> {
    match config.command {
        Command::Stats | Command::Qfunc | Command::Wigner => {
            config.eta()?;
            config.m()?;
        }
        Command::Sdist => {
            config.eta()?;
            config.m()?;
            if config.s.is_none() {
                return Err(missing("--s", config.command));
            }
        }
        Command::SqueezeScan | Command::Evolve | Command::Verify => {}
    }
    Ok(())
}
