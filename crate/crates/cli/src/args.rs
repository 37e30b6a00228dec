//! Command-line flags and their echo into output headers.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wavereg::estimator::{Backend, CorrectionMode, EstimatorConfig};
use wavereg::model::{GFunction, ModelConfig, NoiseMode, TestFunction, TestFunctionKind, ULaw};
use wavereg::selection::PlateauPolicy;
use wavereg::wavelet::{WaveletBasis, DEFAULT_DEPTH};
use wavereg::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "wavereg",
    version,
    about = "Wavelet estimation of r = f² in Y = f(X)U + V: simulation, estimation and Monte Carlo studies",
    args_override_self = true
)]
pub struct Cli {
    /// Flat `key=value` file of flag values (keys are long flag names); flags
    /// given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a sample and write it as CSV.
    Simulate(SimulateArgs),
    /// Select parameters and estimate r from one sample.
    Estimate(EstimateArgs),
    /// Monte Carlo replications with box-plot summaries.
    Mc(McArgs),
    /// Convergence-rate study of the linear estimator.
    Rate(RateArgs),
    /// Tabulate the scaling function and wavelet by the cascade algorithm.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum NoiseArg {
    A5,
    A6,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Test function: blip, ramp or parabolas.
    #[arg(long, default_value = "blip")]
    pub function: TestFunctionKind,
    /// Variance of the additive noise V under A5.
    #[arg(long, default_value_t = 0.01)]
    pub sigma2: f64,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Law of U: uniform (on [−1, 1]), gaussian or one (U ≡ 1).
    #[arg(long = "u-law", default_value = "uniform")]
    pub u_law: ULaw,
    /// Keep U(−1, 1) unscaled (E[U²] = 1/3) instead of scaling it to E[U²] = 1.
    #[arg(long = "raw-u")]
    pub raw_u: bool,
    /// a5: V ~ N(0, σ²) independent of X; a6: V = g(X) with g given by --g.
    #[arg(long = "noise-mode", value_enum, default_value = "a5")]
    pub noise_mode: NoiseArg,
    /// Known g under a6: const:C, linear:A:B (A + Bx) or sine:O:A (O + A sin 2πx).
    #[arg(long)]
    pub g: Option<GFunction>,
}

impl ModelArgs {
    pub fn model(&self, n: usize) -> Result<ModelConfig> {
        let noise = match (self.noise_mode, self.g) {
            (NoiseArg::A5, _) => NoiseMode::A5,
            (NoiseArg::A6, Some(g)) => NoiseMode::A6 { g },
            (NoiseArg::A6, None) => {
                return Err(Error::Config("--noise-mode a6 requires --g".into()));
            }
        };
        let cfg = ModelConfig {
            function: TestFunction::new(self.function),
            n,
            sigma2: self.sigma2,
            u_law: self.u_law,
            u_standardize: !self.raw_u,
            noise,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn echo(&self) -> Vec<String> {
        let mut out = vec![
            format!("function={}", self.function),
            format!("sigma2={}", self.sigma2),
            format!("seed={}", self.seed),
            format!("u-law={}", self.u_law),
            format!("raw-u={}", self.raw_u),
            format!(
                "noise-mode={}",
                if self.noise_mode == NoiseArg::A5 {
                    "a5"
                } else {
                    "a6"
                }
            ),
        ];
        if let Some(g) = self.g {
            out.push(format!("g={g}"));
        }
        out
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    /// Truncation level j★; selected by two-fold cross-validation when absent.
    #[arg(long)]
    pub jstar: Option<usize>,
    /// Finest detail level (default log2(n) − 1).
    #[arg(long)]
    pub j1: Option<usize>,
    /// Constant κ of the universal threshold κ·√(ln n / n).
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Coefficient backend: pyramid or direct.
    #[arg(long, default_value = "pyramid")]
    pub backend: Backend,
    /// Apply the ρₙ = √(n / ln n) truncation to the detail terms.
    #[arg(long = "truncate-beta")]
    pub truncate_beta: bool,
    /// Daubechies vanishing moments N (1..=10).
    #[arg(long = "vanishing-moments", default_value_t = 8)]
    pub vanishing_moments: usize,
    /// Cascade table depth D (grid step 2^−D).
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: u32,
    /// Plateau policy of the cross-validation minimum: first or middle.
    #[arg(long, default_value = "first")]
    pub plateau: PlateauPolicy,
}

impl EstimatorArgs {
    pub fn config(&self, model: &ModelConfig) -> EstimatorConfig {
        let mut cfg =
            EstimatorConfig::new(self.jstar.unwrap_or(0), CorrectionMode::from_model(model));
        cfg.j1 = self.j1;
        cfg.kappa = self.kappa;
        cfg.backend = self.backend;
        cfg.beta_truncation = self.truncate_beta;
        cfg
    }

    pub fn basis(&self) -> Result<WaveletBasis> {
        WaveletBasis::new(self.vanishing_moments, self.depth)
    }

    fn echo(&self) -> Vec<String> {
        let opt = |v: Option<usize>| v.map(|j| j.to_string()).unwrap_or_else(|| "auto".into());
        vec![
            format!("jstar={}", opt(self.jstar)),
            format!("j1={}", opt(self.j1)),
            format!("kappa={}", self.kappa),
            format!("backend={}", self.backend),
            format!("truncate-beta={}", self.truncate_beta),
            format!("vanishing-moments={}", self.vanishing_moments),
            format!("depth={}", self.depth),
            format!("plateau={}", self.plateau),
        ]
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample size (a power of two, 2^8..=2^20).
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, short, default_value = "sample.csv")]
    pub output: PathBuf,
}

impl SimulateArgs {
    pub fn echo(&self) -> Vec<String> {
        let mut out = vec!["command=simulate".to_string(), format!("n={}", self.n)];
        out.extend(self.model.echo());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Linear estimator only.
    Linear,
    /// Linear and hard-thresholded estimators.
    Nonlinear,
}

/// `cv`, `universal` or an explicit non-negative number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdArg {
    Cv,
    Universal,
    Explicit(f64),
}

impl std::str::FromStr for ThresholdArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cv" => Ok(Self::Cv),
            "universal" => Ok(Self::Universal),
            other => match other.parse::<f64>() {
                Ok(v) if v >= 0.0 => Ok(Self::Explicit(v)),
                _ => Err(format!("`{other}` is not cv, universal or a number ≥ 0")),
            },
        }
    }
}

impl std::fmt::Display for ThresholdArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Cv => f.write_str("cv"),
            Self::Universal => f.write_str("universal"),
            Self::Explicit(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Sample size when generating.
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Read the sample from an x,y CSV instead of generating it.
    #[arg(long, value_name = "CSV")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "nonlinear")]
    pub method: Method,
    /// Threshold: cv (two-fold cross-validation), universal, or a number.
    #[arg(long, default_value = "cv")]
    pub threshold: ThresholdArg,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

impl EstimateArgs {
    pub fn echo(&self) -> Vec<String> {
        let mut out = vec!["command=estimate".to_string()];
        match &self.input {
            Some(p) => out.push(format!("input={}", p.display())),
            None => out.push(format!("n={}", self.n)),
        }
        out.extend(self.model.echo());
        out.extend(self.estimator.echo());
        out.push(format!(
            "method={}",
            if self.method == Method::Linear {
                "linear"
            } else {
                "nonlinear"
            }
        ));
        out.push(format!("threshold={}", self.threshold));
        out
    }
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Number of replications.
    #[arg(long = "N", default_value_t = 100)]
    pub replications: u64,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

impl McArgs {
    pub fn echo(&self) -> Vec<String> {
        let mut out = vec![
            "command=mc".to_string(),
            format!("n={}", self.n),
            format!("N={}", self.replications),
        ];
        out.extend(self.model.echo());
        out.extend(self.estimator.echo());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RuleArg {
    /// j★ = round(log2(n) / (2s′ + 1)).
    Theorem,
    /// Two-fold cross-validation per replication.
    Cv,
    /// The level given by --jstar.
    Fixed,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Comma-separated, strictly increasing sample sizes (at least 3).
    #[arg(
        long = "n-list",
        value_delimiter = ',',
        default_value = "1024,2048,4096,8192,16384"
    )]
    pub n_list: Vec<usize>,
    #[arg(long = "N", default_value_t = 50)]
    pub replications: u64,
    #[arg(long, value_enum, default_value = "theorem")]
    pub rule: RuleArg,
    /// Smoothness s′ used by the theorem rule and the reported exponent.
    #[arg(long = "s-prime", default_value_t = 0.5)]
    pub s_prime: f64,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

impl RateArgs {
    pub fn echo(&self) -> Vec<String> {
        let list: Vec<String> = self.n_list.iter().map(|n| n.to_string()).collect();
        let rule = match self.rule {
            RuleArg::Theorem => "theorem",
            RuleArg::Cv => "cv",
            RuleArg::Fixed => "fixed",
        };
        let mut out = vec![
            "command=rate".to_string(),
            format!("n-list={}", list.join(";")),
            format!("N={}", self.replications),
            format!("rule={rule}"),
            format!("s-prime={}", self.s_prime),
        ];
        out.extend(self.model.echo());
        out.extend(self.estimator.echo());
        out
    }
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long = "vanishing-moments", default_value_t = 8)]
    pub vanishing_moments: usize,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: u32,
    #[arg(long, short, default_value = "scaling_table.csv")]
    pub output: PathBuf,
}

impl TableArgs {
    pub fn echo(&self) -> Vec<String> {
        vec![
            "command=table".to_string(),
            format!("vanishing-moments={}", self.vanishing_moments),
            format!("depth={}", self.depth),
        ]
    }
}
