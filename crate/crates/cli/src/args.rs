//! Command-line arguments and their parsing helpers.

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fsrdp::{default_alpha_grid, default_deltas, Adjacency, ConversionVariant, SamplingMode};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fsrdp", version, about = "Renyi-DP accounting for fixed-size and Poisson subsampled DP-SGD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RDP curves, one row per (method, alpha).
    Curve(CurveArgs),
    /// (epsilon, delta) guarantees from RDP curves.
    Convert(ConvertArgs),
    /// Side-by-side curves with ratio columns.
    Compare(CurveArgs),
    /// Minibatch-mean variances for a population file.
    Variance(VarianceArgs),
    /// Run oracle and acceptance checks.
    Validate(ValidateArgs),
}

/// Accounting methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Method {
    FsworAr,
    FsworRo,
    FswrUpper,
    FswrLower,
    PoissonRo,
    WangUpper,
    WangLower,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::FsworAr => "fswor_ar",
            Self::FsworRo => "fswor_ro",
            Self::FswrUpper => "fswr_upper",
            Self::FswrLower => "fswr_lower",
            Self::PoissonRo => "poisson_ro",
            Self::WangUpper => "wang_upper",
            Self::WangLower => "wang_lower",
        }
    }

    pub fn is_lower_bound(self) -> bool {
        matches!(self, Self::FswrLower | Self::WangLower)
    }

    /// Taylor order used when `--m` is absent; `None` for methods without one.
    pub fn default_order(self) -> Option<usize> {
        match self {
            Self::FsworAr | Self::FswrUpper => Some(fsrdp::fswor::DEFAULT_ORDER_ADD_REMOVE),
            Self::FsworRo | Self::PoissonRo => Some(fsrdp::fswor::DEFAULT_ORDER_REPLACE_ONE),
            Self::FswrLower | Self::WangUpper | Self::WangLower => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdjacencyArg {
    AddRemove,
    ReplaceOne,
}

impl From<AdjacencyArg> for Adjacency {
    fn from(a: AdjacencyArg) -> Self {
        match a {
            AdjacencyArg::AddRemove => Adjacency::AddRemove,
            AdjacencyArg::ReplaceOne => Adjacency::ReplaceOne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fswor,
    Fswr,
    Poisson,
}

impl From<ModeArg> for SamplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fswor => SamplingMode::WithoutReplacement,
            ModeArg::Fswr => SamplingMode::WithReplacement,
            ModeArg::Poisson => SamplingMode::Poisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Classic,
    Improved,
}

impl From<VariantArg> for ConversionVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Classic => ConversionVariant::Classic,
            VariantArg::Improved => ConversionVariant::Improved,
        }
    }
}

/// Accounting parameters shared by `curve`, `convert` and `compare`.
#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Methods to evaluate (comma separated); derived from --mode and --adjacency when absent.
    /// In `compare` the first method is the baseline of the ratio columns.
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<Method>,
    /// Constant noise multiplier.
    #[arg(long, conflicts_with = "sigma_file")]
    pub sigma: Option<f64>,
    /// File with one noise multiplier per step.
    #[arg(long)]
    pub sigma_file: Option<PathBuf>,
    /// Minibatch size |B|.
    #[arg(long)]
    pub batch: usize,
    /// Dataset size |D|.
    #[arg(long)]
    pub dataset: usize,
    /// Number of steps T.
    #[arg(long, conflicts_with = "epochs")]
    pub steps: Option<usize>,
    /// Epochs; T = epochs * ceil(|D|/|B|).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Taylor order (defaults: 3 for add/remove and with-replacement, 4 for replace-one).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value = "replace-one")]
    pub adjacency: AdjacencyArg,
    #[arg(long, value_enum, default_value = "fswor")]
    pub mode: ModeArg,
    /// `default`, or comma-separated values, integer ranges `a:b`, or stepped ranges `a:b:step`.
    #[arg(long, default_value = "default")]
    pub alpha_grid: String,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Comma-separated delta values (default 1e-4,...,1e-10).
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    #[arg(long, value_enum, default_value = "improved")]
    pub variant: VariantArg,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// File with one real value per line.
    #[arg(long)]
    pub population: PathBuf,
    /// Minibatch size |B|.
    #[arg(long)]
    pub batch: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seed for the Monte-Carlo check.
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Resolved noise schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub sigmas: Vec<f64>,
    /// `Some` when every step uses the same value.
    pub constant: Option<f64>,
}

impl CurveArgs {
    pub fn methods(&self) -> Result<Vec<Method>> {
        if !self.method.is_empty() {
            let mut m: Vec<Method> = Vec::new();
            for x in &self.method {
                if !m.contains(x) {
                    m.push(*x);
                }
            }
            return Ok(m);
        }
        Ok(vec![match (self.mode, self.adjacency) {
            (ModeArg::Fswor, AdjacencyArg::AddRemove) => Method::FsworAr,
            (ModeArg::Fswor, AdjacencyArg::ReplaceOne) => Method::FsworRo,
            (ModeArg::Fswr, AdjacencyArg::AddRemove) => Method::FswrUpper,
            (ModeArg::Poisson, AdjacencyArg::ReplaceOne) => Method::PoissonRo,
            (mode, adj) => bail!("no accountant for mode {mode:?} with {adj:?} adjacency"),
        }])
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let steps = match (self.steps, self.epochs) {
            (Some(s), _) => Some(s),
            (None, Some(e)) => {
                ensure!(self.batch > 0, "batch must be positive");
                Some(e * self.dataset.div_ceil(self.batch))
            }
            (None, None) => None,
        };
        if let Some(0) = steps {
            bail!("the step count must be at least 1");
        }
        match (self.sigma, &self.sigma_file) {
            (Some(s), None) => {
                ensure!(s > 0.0 && s.is_finite(), "sigma must be positive, got {s}");
                let steps = steps.context("one of --steps or --epochs is required with --sigma")?;
                Ok(Schedule {
                    sigmas: vec![s; steps],
                    constant: Some(s),
                })
            }
            (None, Some(path)) => {
                let sigmas = read_values(path)?;
                ensure!(!sigmas.is_empty(), "{} contains no noise multipliers", path.display());
                if let Some(bad) = sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
                    bail!("noise multipliers must be positive, got {bad}");
                }
                if let Some(s) = steps {
                    ensure!(s == sigmas.len(), "step count {s} does not match {} schedule entries", sigmas.len());
                }
                let constant = sigmas.iter().all(|s| *s == sigmas[0]).then_some(sigmas[0]);
                Ok(Schedule { sigmas, constant })
            }
            _ => bail!("exactly one of --sigma or --sigma-file is required"),
        }
    }

    pub fn alphas(&self) -> Result<Vec<f64>> {
        parse_alpha_grid(&self.alpha_grid)
    }
}

impl ConvertArgs {
    pub fn deltas(&self) -> Result<Vec<f64>> {
        if self.delta.is_empty() {
            return Ok(default_deltas());
        }
        for d in &self.delta {
            ensure!(*d > 0.0 && *d < 1.0, "delta must lie in (0, 1), got {d}");
        }
        Ok(self.delta.clone())
    }
}

/// Reads one real per line; blank lines and `#` comments are skipped.
pub fn read_values(path: &PathBuf) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            l.parse::<f64>()
                .with_context(|| format!("{}:{}: not a number: {l:?}", path.display(), i + 1))
        })
        .collect()
}

/// Parses an order grid specification into a sorted, de-duplicated list.
pub fn parse_alpha_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("default") {
        return Ok(default_alpha_grid());
    }
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_f64(v)?),
            [a, b] => {
                let (a, b): (u64, u64) = (
                    a.parse().with_context(|| format!("bad integer range start {a:?}"))?,
                    b.parse().with_context(|| format!("bad integer range end {b:?}"))?,
                );
                ensure!(a <= b, "empty range {item}");
                out.extend((a..=b).map(|x| x as f64));
            }
            [a, b, step] => {
                let (a, b, step) = (parse_f64(a)?, parse_f64(b)?, parse_f64(step)?);
                ensure!(step > 0.0 && a <= b, "bad stepped range {item}");
                let n = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + i as f64 * step));
            }
            _ => bail!("cannot parse alpha grid item {item:?}"),
        }
    }
    ensure!(!out.is_empty(), "alpha grid is empty");
    out.sort_by(f64::total_cmp);
    out.dedup();
    if let Some(a) = out.iter().find(|a| !(**a > 1.0 && a.is_finite())) {
        bail!("every alpha must be finite and > 1, got {a}");
    }
    Ok(out)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().with_context(|| format!("not a number: {s:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_alpha_grid("2,3.5,2").unwrap(), vec![2.0, 3.5]);
        assert_eq!(parse_alpha_grid("2:4").unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(parse_alpha_grid("1.5:2.5:0.5").unwrap(), vec![1.5, 2.0, 2.5]);
        assert_eq!(parse_alpha_grid("default").unwrap().len(), 99 + 246);
        assert!(parse_alpha_grid("1").is_err());
        assert!(parse_alpha_grid("x").is_err());
        assert!(parse_alpha_grid("4:2").is_err());
    }
}
