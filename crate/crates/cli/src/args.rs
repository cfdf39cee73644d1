//! Command-line grammar and the optional JSON run configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Tolerance names understood by at least one subcommand.
pub const TOLERANCE_NAMES: [&str; 3] = ["residual", "angle", "membership"];

#[derive(Debug, Parser)]
#[command(
    name = "ccd",
    version,
    about = "Concurrence canonical decomposition, capacity and monotone checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Group {
    #[value(name = "K")]
    K,
    #[value(name = "sp_block")]
    SpBlock,
    #[value(name = "entangler")]
    Entangler,
    #[value(name = "finagler")]
    Finagler,
    #[value(name = "a_algebra")]
    AAlgebra,
}

#[derive(Clone, Debug, Default, Args)]
pub struct Common {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Tolerance override, also accepted as `--tol.NAME VALUE`.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    pub tol: Vec<(String, f64)>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a unitary as k1 a k2.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Concurrence spectrum, hull verdict and capacity of a unitary.
    Capacity {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Concurrence of a ket or density file, or of a named state.
    Concurrence {
        #[arg(long, conflicts_with = "state")]
        input: Option<PathBuf>,
        /// ghz, w, basis:<index> or random:<seed>
        #[arg(long, requires = "n")]
        state: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of the maximal-capacity probability per qubit count.
    Sample {
        /// Qubit counts, comma separated or repeated.
        #[arg(long = "n", value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report wall_ms as 0 so repeated runs are byte-identical.
        #[arg(long)]
        no_wall_clock: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Membership and certificate checks.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        group: Group,
        #[command(flatten)]
        common: Common,
    },
    /// POVM and convexity sweeps on random inputs.
    Monotone {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    if !TOLERANCE_NAMES.contains(&name) {
        return Err(format!(
            "unknown tolerance '{name}' (known: {})",
            TOLERANCE_NAMES.join(", ")
        ));
    }
    let v: f64 = value
        .parse()
        .map_err(|_| format!("tolerance '{name}' needs a number, got '{value}'"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("tolerance '{name}' must be positive and finite"));
    }
    Ok((name.to_string(), v))
}

/// Rewrites `--tol.NAME=VALUE` and `--tol.NAME VALUE` into `--tol NAME=VALUE`.
pub fn expand_tolerance_flags<I>(args: I) -> Vec<OsString>
where
    I: IntoIterator,
    I::Item: Into<OsString>,
{
    let mut out = Vec::new();
    let mut iter = args.into_iter().map(Into::into).peekable();
    while let Some(arg) = iter.next() {
        let Some(rest) = arg.to_str().and_then(|s| s.strip_prefix("--tol.")) else {
            out.push(arg);
            continue;
        };
        out.push("--tol".into());
        if rest.contains('=') {
            out.push(rest.into());
        } else {
            let value = iter
                .next()
                .map(|v| v.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.push(format!("{rest}={value}").into());
        }
    }
    out
}

/// Settings read from `--config`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("config {}: {e}", path.display())))?;
        for (name, v) in &cfg.tolerances {
            parse_tolerance(&format!("{name}={v}")).map_err(CliError::Usage)?;
        }
        Ok(cfg)
    }
}

/// Flags merged over the configuration file.
#[derive(Clone, Debug)]
pub struct Settings {
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub n_list: Vec<usize>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Settings {
    pub fn resolve(common: &Common) -> CliResult<Self> {
        let cfg = match &common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut tolerances = cfg.tolerances;
        for (name, v) in &common.tol {
            tolerances.insert(name.clone(), *v);
        }
        Ok(Self {
            output: common.output.clone().or(cfg.output),
            format: common.format.or(cfg.format),
            seed: cfg.seed,
            trials: cfg.trials,
            n_list: cfg.n_list,
            tolerances,
        })
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn require_seed(&self, flag: Option<u64>) -> CliResult<u64> {
        flag.or(self.seed)
            .ok_or_else(|| CliError::Usage("a --seed (or config seed) is required".into()))
    }

    pub fn require_trials(&self, flag: Option<u64>, default: Option<u64>) -> CliResult<u64> {
        let trials = flag
            .or(self.trials)
            .or(default)
            .ok_or_else(|| CliError::Usage("--trials is required".into()))?;
        if trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        Ok(trials)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_tolerances_are_expanded() {
        let out = expand_tolerance_flags([
            "ccd",
            "decompose",
            "--tol.residual=1e-9",
            "--tol.angle",
            "2e-9",
        ]);
        let out: Vec<String> = out.into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(
            out,
            [
                "ccd",
                "decompose",
                "--tol",
                "residual=1e-9",
                "--tol",
                "angle=2e-9"
            ]
        );
    }

    #[test]
    fn tolerance_values_are_checked() {
        assert!(parse_tolerance("residual=1e-9").is_ok());
        assert!(parse_tolerance("bogus=1").is_err());
        assert!(parse_tolerance("angle=-1").is_err());
        assert!(parse_tolerance("angle").is_err());
    }

    #[test]
    fn sample_accepts_lists() {
        let cli = Cli::try_parse_from(["ccd", "sample", "--n", "2,4", "--n", "6", "--seed", "1"])
            .unwrap();
        match cli.command {
            Command::Sample { n, .. } => assert_eq!(n, vec![2, 4, 6]),
            other => panic!("{other:?}"),
        }
    }
}
