//! Run specification: defaults, then a key=value file, then flags.

use anyhow::{bail, Context, Result};
use clap::Args;
use eg_orthant::experiment::ExperimentSpec;
use eg_orthant::Method;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Settings shared by the config file and the command line. Every field is
/// optional so that unset flags fall through to the file and the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// Image side length in pixels.
    #[arg(long)]
    pub n_side: Option<usize>,
    /// Measurements per unknown (rows of A over pixels).
    #[arg(long)]
    pub undersampling: Option<f64>,
    /// Weight of the Huber total-variation term.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Huber threshold.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Draw Poisson counts instead of using the exact projections.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub noisy: Option<bool>,
    /// Seed for the noise and the shared starting point.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of EG, PoiCG, IPgRGD, IPeMD.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub step_tol: Option<f64>,
    /// Armijo sufficient-decrease constant.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Backtracking factor.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Initial trial step.
    #[arg(long)]
    pub tau_bar: Option<f64>,
    /// Smallest trial step before giving up.
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub max_halvings: Option<u32>,
    /// Start each search at twice the previous step.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub warm_start: Option<bool>,
    /// Record wall-clock time in the traces (makes them non-reproducible).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub wall_time: Option<bool>,
    /// Constant IPeMD step; defaults to 1 / (2 ||b||_1).
    #[arg(long)]
    pub ip_md_step: Option<f64>,
    /// Directory for traces, images and the summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SpecArgs {
    /// Reads a flat `key = value` file. Keys are the flag names with either
    /// `-` or `_`; `#` starts a comment line.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_config(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse_config(text: &str) -> Result<Self> {
        let mut s = SpecArgs::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key=value", lineno + 1))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            s.set(&key, value)
                .with_context(|| format!("line {}: {key}", lineno + 1))?;
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn p<T: std::str::FromStr>(v: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>()
                .map_err(|e| anyhow::anyhow!("invalid value {v:?}: {e}"))
        }
        match key {
            "n_side" => self.n_side = Some(p(value)?),
            "undersampling" => self.undersampling = Some(p(value)?),
            "lambda" => self.lambda = Some(p(value)?),
            "delta" => self.delta = Some(p(value)?),
            "noisy" => self.noisy = Some(p(value)?),
            "seed" => self.seed = Some(p(value)?),
            "methods" => {
                self.methods = Some(
                    value
                        .split(',')
                        .map(|m| p::<Method>(m.trim()))
                        .collect::<Result<_>>()?,
                )
            }
            "max_iterations" => self.max_iterations = Some(p(value)?),
            "grad_tol" => self.grad_tol = Some(p(value)?),
            "step_tol" => self.step_tol = Some(p(value)?),
            "sigma" => self.sigma = Some(p(value)?),
            "beta" => self.beta = Some(p(value)?),
            "tau_bar" => self.tau_bar = Some(p(value)?),
            "tau_min" => self.tau_min = Some(p(value)?),
            "max_halvings" => self.max_halvings = Some(p(value)?),
            "warm_start" => self.warm_start = Some(p(value)?),
            "wall_time" => self.wall_time = Some(p(value)?),
            "ip_md_step" => self.ip_md_step = Some(p(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => bail!("unknown key"),
        }
        Ok(())
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: SpecArgs) -> SpecArgs {
        SpecArgs {
            n_side: self.n_side.or(base.n_side),
            undersampling: self.undersampling.or(base.undersampling),
            lambda: self.lambda.or(base.lambda),
            delta: self.delta.or(base.delta),
            noisy: self.noisy.or(base.noisy),
            seed: self.seed.or(base.seed),
            methods: self.methods.or(base.methods),
            max_iterations: self.max_iterations.or(base.max_iterations),
            grad_tol: self.grad_tol.or(base.grad_tol),
            step_tol: self.step_tol.or(base.step_tol),
            sigma: self.sigma.or(base.sigma),
            beta: self.beta.or(base.beta),
            tau_bar: self.tau_bar.or(base.tau_bar),
            tau_min: self.tau_min.or(base.tau_min),
            max_halvings: self.max_halvings.or(base.max_halvings),
            warm_start: self.warm_start.or(base.warm_start),
            wall_time: self.wall_time.or(base.wall_time),
            ip_md_step: self.ip_md_step.or(base.ip_md_step),
            out: self.out.or(base.out),
        }
    }

    /// Fills unset fields from the library defaults and validates.
    pub fn resolve(self) -> Result<RunSpec> {
        let mut e = ExperimentSpec::default();
        let pr = &mut e.problem;
        pr.n_side = self.n_side.unwrap_or(pr.n_side);
        pr.undersampling = self.undersampling.unwrap_or(pr.undersampling);
        pr.lambda = self.lambda.unwrap_or(pr.lambda);
        pr.delta = self.delta.unwrap_or(pr.delta);
        pr.noisy = self.noisy.unwrap_or(pr.noisy);
        pr.seed = self.seed.unwrap_or(pr.seed);
        if let Some(m) = self.methods {
            e.methods = m;
        }
        e.max_iterations = self.max_iterations.unwrap_or(e.max_iterations);
        e.grad_norm_tol = self.grad_tol.unwrap_or(e.grad_norm_tol);
        e.step_size_tol = self.step_tol.unwrap_or(e.step_size_tol);
        e.armijo.sigma = self.sigma.unwrap_or(e.armijo.sigma);
        e.armijo.beta = self.beta.unwrap_or(e.armijo.beta);
        e.armijo.tau_bar = self.tau_bar.unwrap_or(e.armijo.tau_bar);
        e.armijo.tau_min = self.tau_min.unwrap_or(e.armijo.tau_min);
        e.armijo.max_halvings = self.max_halvings.unwrap_or(e.armijo.max_halvings);
        e.warm_start = self.warm_start.unwrap_or(e.warm_start);
        e.record_wall_time = self.wall_time.unwrap_or(e.record_wall_time);
        e.ip_md_step = self.ip_md_step.or(e.ip_md_step);

        if e.methods.is_empty() {
            bail!("no methods requested");
        }
        if e.problem.n_side < 4 {
            bail!("n_side must be at least 4");
        }
        e.armijo.validate()?;
        let out = self
            .out
            .context("an output directory is required (--out or `out =` in the config)")?;
        Ok(RunSpec { experiment: e, out })
    }
}

/// Fully resolved settings of a `solve` run, echoed into `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    #[serde(flatten)]
    pub experiment: ExperimentSpec,
    pub out: PathBuf,
}
