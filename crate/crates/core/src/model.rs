//! Test functions and the seeded generator for `Y = √r(X)·U + V`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{log2_exact, Error, Result};

/// Lower bound every catalog function satisfies on `[0, 1]`.
pub const MIN_TARGET_VALUE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunctionKind {
    Parabolas,
    Ramp,
    Blip,
}

impl TestFunctionKind {
    pub const ALL: [TestFunctionKind; 3] = [Self::Parabolas, Self::Ramp, Self::Blip];

    pub fn name(self) -> &'static str {
        match self {
            Self::Parabolas => "parabolas",
            Self::Ramp => "ramp",
            Self::Blip => "blip",
        }
    }
}

impl fmt::Display for TestFunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "parabolas" => Ok(Self::Parabolas),
            "ramp" => Ok(Self::Ramp),
            "blip" => Ok(Self::Blip),
            _ => Err(Error::Catalog(s.to_string())),
        }
    }
}

/// A target `r = f²` from the catalog, already shifted to be ≥ 0.05.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    kind: TestFunctionKind,
    positivity_shift: f64,
}

impl TestFunction {
    pub fn new(kind: TestFunctionKind) -> Self {
        let positivity_shift = match kind {
            TestFunctionKind::Parabolas => 0.05,
            // Ramp carries its +0.70 offset in the formula; Blip is already ≥ 0.2.
            TestFunctionKind::Ramp | TestFunctionKind::Blip => 0.0,
        };
        Self {
            kind,
            positivity_shift,
        }
    }

    pub fn kind(&self) -> TestFunctionKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn positivity_shift(&self) -> f64 {
        self.positivity_shift
    }

    pub fn eval(&self, x: f64) -> f64 {
        let raw = match self.kind {
            TestFunctionKind::Parabolas => {
                if x <= 0.5 {
                    4.0 * x * x * (3.0 - 4.0 * x)
                } else if x <= 0.75 {
                    4.0 / 3.0 * x * (4.0 * x * x - 10.0 * x + 7.0) - 1.5
                } else {
                    16.0 / 3.0 * x * (1.0 - x) * (1.0 - x)
                }
            }
            TestFunctionKind::Ramp => {
                let step = if x >= 0.37 { 1.0 } else { 0.0 };
                x - step + 0.70
            }
            TestFunctionKind::Blip => {
                if x <= 0.8 {
                    0.32 + 0.6 * x + 0.3 * (-100.0 * (x - 0.3).powi(2)).exp()
                } else {
                    -0.28 + 0.6 * x + 0.3 * (-100.0 * (x - 1.3).powi(2)).exp()
                }
            }
        };
        raw + self.positivity_shift
    }
}

/// Catalog lookup by name.
pub fn test_function(name: &str) -> Result<TestFunction> {
    Ok(TestFunction::new(name.parse()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ULaw {
    /// `U ~ U(−1, 1)`; rescaled by √3 when standardized.
    Uniform,
    /// `U ~ N(0, 1)`.
    Gaussian,
    /// `U ≡ 1`: pure additive noise, used for noiseless sanity runs.
    One,
}

impl FromStr for ULaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::Uniform),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "one" => Ok(Self::One),
            other => Err(Error::Config(format!("unknown U law `{other}`"))),
        }
    }
}

impl fmt::Display for ULaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Gaussian => "gaussian",
            Self::One => "one",
        })
    }
}

/// Known bounded function `g` with `V = g(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GFunction {
    Constant {
        value: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// `offset + amplitude · sin(2πx)`.
    Sine {
        offset: f64,
        amplitude: f64,
    },
}

impl GFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Linear { intercept, slope } => intercept + slope * x,
            Self::Sine { offset, amplitude } => {
                offset + amplitude * (2.0 * std::f64::consts::PI * x).sin()
            }
        }
    }

    pub fn eval_squared(&self, x: f64) -> f64 {
        let g = self.eval(x);
        g * g
    }
}

impl FromStr for GFunction {
    type Err = Error;

    /// `const:c`, `linear:a:b` or `sine:offset:amplitude`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| -> Result<f64> {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("bad number `{p}` in g specification `{s}`")))
        };
        match parts.as_slice() {
            ["const", c] => Ok(Self::Constant { value: num(c)? }),
            ["linear", a, b] => Ok(Self::Linear {
                intercept: num(a)?,
                slope: num(b)?,
            }),
            ["sine", o, a] => Ok(Self::Sine {
                offset: num(o)?,
                amplitude: num(a)?,
            }),
            _ => Err(Error::Config(format!(
                "bad g specification `{s}` (expected const:c, linear:a:b or sine:o:a)"
            ))),
        }
    }
}

impl fmt::Display for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { value } => write!(f, "const:{value}"),
            Self::Linear { intercept, slope } => write!(f, "linear:{intercept}:{slope}"),
            Self::Sine { offset, amplitude } => write!(f, "sine:{offset}:{amplitude}"),
        }
    }
}

/// How the additive term `V` relates to the design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum NoiseMode {
    /// `V ~ N(0, σ²)` independent of `X`.
    A5,
    /// `V = g(X)` for a known `g`.
    A6 { g: GFunction },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub function: TestFunction,
    pub n: usize,
    pub sigma2: f64,
    pub u_law: ULaw,
    pub u_standardize: bool,
    pub noise: NoiseMode,
    pub seed: u64,
}

impl ModelConfig {
    /// Defaults of the reference study: `U(−1,1)` standardized, `σ² = 0.01`, A5.
    pub fn new(kind: TestFunctionKind, n: usize, sigma2: f64, seed: u64) -> Self {
        Self {
            function: TestFunction::new(kind),
            n,
            sigma2,
            u_law: ULaw::Uniform,
            u_standardize: true,
            noise: NoiseMode::A5,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let levels = log2_exact(self.n)
            .map_err(|_| Error::Config(format!("n = {} is not a power of two", self.n)))?;
        if !(8..=20).contains(&levels) {
            return Err(Error::Config(format!("n = 2^{levels} outside 2^8..=2^20")));
        }
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(Error::Config(format!(
                "sigma2 = {} must be ≥ 0",
                self.sigma2
            )));
        }
        if let NoiseMode::A6 { g } = self.noise {
            let bounded = (0..=1024).all(|i| g.eval(i as f64 / 1024.0).is_finite());
            if !bounded {
                return Err(Error::Config("g is not finite on [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// `J` with `n = 2^J`.
    pub fn levels(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    /// One-line `key=value` echo used in output headers.
    pub fn describe(&self) -> String {
        let noise = match self.noise {
            NoiseMode::A5 => "a5".to_string(),
            NoiseMode::A6 { g } => format!("a6 g={g}"),
        };
        format!(
            "function={} n={} sigma2={} u_law={} u_standardize={} noise_mode={} seed={}",
            self.function.name(),
            self.n,
            self.sigma2,
            self.u_law,
            self.u_standardize,
            noise,
            self.seed
        )
    }
}

/// X-sorted observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Model that produced the sample, if known.
    pub config: Option<ModelConfig>,
    /// Number of exact ties in `x` that were separated after sorting.
    pub ties_broken: usize,
}

impl DesignSample {
    /// Sorts the pairs by `x` and separates exact ties by `1e−15` steps.
    pub fn from_pairs(x: Vec<f64>, y: Vec<f64>, config: Option<ModelConfig>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "{} x values but {} y values",
                x.len(),
                y.len()
            )));
        }
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(*bad));
        }
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let mut xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let mut ties_broken = 0;
        for i in 1..xs.len() {
            if xs[i] <= xs[i - 1] {
                xs[i] = xs[i - 1] + 1e-15;
                ties_broken += 1;
            }
        }
        Ok(Self {
            x: xs,
            y: ys,
            config,
            ties_broken,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn y_squared(&self) -> impl Iterator<Item = f64> + '_ {
        self.y.iter().map(|y| y * y)
    }
}

/// Unsorted draw, in generation order, with the noise terms kept.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDraw {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub y: Vec<f64>,
}

/// Draws `(Xᵢ, Uᵢ, Vᵢ, Yᵢ)` in generation order. Per observation the stream
/// is consumed as `X`, then `U`, then `V` (A5 only).
pub fn generate_unsorted(config: &ModelConfig) -> Result<RawDraw> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n;
    let noise = Normal::new(0.0, config.sigma2.sqrt())
        .map_err(|e| Error::Config(format!("noise law: {e}")))?;
    let u_scale = if config.u_standardize && config.u_law == ULaw::Uniform {
        3f64.sqrt()
    } else {
        1.0
    };
    let mut draw = RawDraw {
        x: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let x: f64 = rng.random::<f64>();
        let u = match config.u_law {
            ULaw::Uniform => rng.random_range(-1.0..1.0) * u_scale,
            ULaw::Gaussian => StandardNormal.sample(&mut rng),
            ULaw::One => 1.0,
        };
        let v = match config.noise {
            NoiseMode::A5 => noise.sample(&mut rng),
            NoiseMode::A6 { g } => g.eval(x),
        };
        let y = config.function.eval(x).sqrt() * u + v;
        draw.x.push(x);
        draw.u.push(u);
        draw.v.push(v);
        draw.y.push(y);
    }
    Ok(draw)
}

/// Sorted sample together with the aligned noise terms.
#[derive(Debug, Clone)]
pub struct SampleWithNoise {
    pub sample: DesignSample,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn generate_sample_with_noise(config: &ModelConfig) -> Result<SampleWithNoise> {
    let raw = generate_unsorted(config)?;
    let mut order: Vec<usize> = (0..raw.x.len()).collect();
    order.sort_by(|&a, &b| raw.x[a].total_cmp(&raw.x[b]).then(a.cmp(&b)));
    let u = order.iter().map(|&i| raw.u[i]).collect();
    let v = order.iter().map(|&i| raw.v[i]).collect();
    let sample = DesignSample::from_pairs(raw.x, raw.y, Some(*config))?;
    Ok(SampleWithNoise { sample, u, v })
}

/// Generates the X-sorted sample. Identical configs give identical samples.
pub fn generate_sample(config: &ModelConfig) -> Result<DesignSample> {
    let raw = generate_unsorted(config)?;
    DesignSample::from_pairs(raw.x, raw.y, Some(*config))
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-replication seed: `splitmix64(master ^ splitmix64(index))`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}
