//! Bias-corrected wavelet coefficient estimators and the linear and
//! hard-thresholded estimators of `r`.
//!
//! Two backends produce a [`CoefficientSet`]:
//!
//! - **direct**: the empirical sums `(1/n) Σ Yᵢ² Φ_{j,k}(Xᵢ) − v_{j,k}` and the
//!   truncated `(1/n) Σ Kᵢ 𝟙{|Kᵢ| ≤ ρₙ}` with `Kᵢ = Yᵢ² Ψ_{j,k}(Xᵢ) − w_{j,k}`,
//!   evaluated with the periodized cascade table.
//! - **pyramid**: the ordered squared responses, scaled by `n^{-1/2}`, are fed
//!   to the periodized Mallat pyramid as if the design were equispaced.
//!
//! Both are reconstructed on the dyadic grid `i/n` by the inverse pyramid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{log2_exact, Error, Result};
use crate::model::{DesignSample, GFunction, ModelConfig, NoiseMode};
use crate::wavelet::{dwt_periodic, idwt_periodic, BasisKind, CoefficientPyramid, WaveletBasis};

/// Uniform points used for the A6 corrections and for true coefficients.
pub const QUADRATURE_POINTS: usize = 1 << 14;

/// Truncation level `ρₙ = √(n / ln n)`.
pub fn rho_n(n: usize) -> f64 {
    let n = n as f64;
    (n / n.ln()).sqrt()
}

/// Universal threshold `tₙ = √(ln n / n) = 1/ρₙ`.
pub fn t_n(n: usize) -> f64 {
    let n = n as f64;
    (n.ln() / n).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Direct,
    Pyramid,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(Self::Direct),
            "pyramid" => Ok(Self::Pyramid),
            other => Err(Error::Config(format!("unknown backend `{other}`"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Pyramid => "pyramid",
        })
    }
}

/// What the estimator knows about the additive term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CorrectionMode {
    A5 { sigma2: f64 },
    A6 { g: GFunction },
}

impl CorrectionMode {
    pub fn from_model(config: &ModelConfig) -> Self {
        match config.noise {
            NoiseMode::A5 => Self::A5 {
                sigma2: config.sigma2,
            },
            NoiseMode::A6 { g } => Self::A6 { g },
        }
    }

    /// `E[V² | X = x]`: the offset between `E[Y² | X = x]` and `r(x)`.
    pub fn centering(&self, x: f64) -> f64 {
        match self {
            Self::A5 { sigma2 } => *sigma2,
            Self::A6 { g } => g.eval_squared(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Truncation level `j★`.
    pub j_star: usize,
    /// Finest detail level; `None` means `log2(n) − 1`.
    pub j1: Option<usize>,
    /// Constant of the universal threshold `κ·tₙ`.
    pub kappa: f64,
    pub mode: CorrectionMode,
    pub backend: Backend,
    /// Apply the `ρₙ` indicator to the detail terms.
    pub beta_truncation: bool,
}

impl EstimatorConfig {
    pub fn new(j_star: usize, mode: CorrectionMode) -> Self {
        Self {
            j_star,
            j1: None,
            kappa: 1.0,
            mode,
            backend: Backend::Pyramid,
            beta_truncation: false,
        }
    }

    pub fn with_j_star(mut self, j_star: usize) -> Self {
        self.j_star = j_star;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    /// Finest detail level for a sample of size `n`.
    pub fn j1_for(&self, n: usize) -> usize {
        let max = (n.trailing_zeros() as usize).saturating_sub(1);
        self.j1.unwrap_or(max).min(max)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let levels = log2_exact(n)?;
        if levels == 0 {
            return Err(Error::Shape(
                "sample must contain at least two points".into(),
            ));
        }
        let j1 = self.j1.unwrap_or(levels - 1);
        if self.j_star > j1 || j1 > levels - 1 {
            return Err(Error::Config(format!(
                "need 0 ≤ j★ ≤ j1 ≤ log2(n) − 1, got j★ = {}, j1 = {j1}, n = {n}",
                self.j_star
            )));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Config(format!(
                "kappa = {} must be positive",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Mean of `weight(x)·B_{j,k}(x)` over `points` uniform nodes of `[0, 1)`;
/// the trapezoid rule for a periodic integrand. Only nodes inside the
/// support of `B_{j,k}` are visited.
pub fn basis_quadrature(
    basis: &WaveletBasis,
    kind: BasisKind,
    level: usize,
    shift: usize,
    points: usize,
    weight: impl Fn(f64) -> f64,
) -> f64 {
    let m = points as f64;
    let period = (1u64 << level) as f64;
    let span = basis.filter().support_len() as f64 / period * m;
    let node = |i: i64| -> f64 {
        let i = i.rem_euclid(points as i64);
        let x = i as f64 / m;
        weight(x) * basis.eval(kind, level, shift, x)
    };
    let total: f64 = if span >= m {
        (0..points as i64).map(node).sum()
    } else {
        let start = shift as f64 / period * m;
        let first = start.ceil() as i64;
        let last = (start + span).floor() as i64;
        (first..=last).map(node).sum()
    };
    total / m
}

/// `v_{j,k}`: `σ²·2^{-j/2}` under A5, `∫ g² Φ_{j,k}` under A6.
pub fn correction_v(
    level: usize,
    shift: usize,
    mode: &CorrectionMode,
    basis: &WaveletBasis,
) -> f64 {
    match mode {
        CorrectionMode::A5 { sigma2 } => sigma2 * (-(level as f64) / 2.0).exp2(),
        CorrectionMode::A6 { g } => basis_quadrature(
            basis,
            BasisKind::Phi,
            level,
            shift,
            QUADRATURE_POINTS,
            |x| g.eval_squared(x),
        ),
    }
}

/// `w_{j,k}`: zero under A5, `∫ g² Ψ_{j,k}` under A6.
pub fn correction_w(
    level: usize,
    shift: usize,
    mode: &CorrectionMode,
    basis: &WaveletBasis,
) -> f64 {
    match mode {
        CorrectionMode::A5 { .. } => 0.0,
        CorrectionMode::A6 { g } => basis_quadrature(
            basis,
            BasisKind::Psi,
            level,
            shift,
            QUADRATURE_POINTS,
            |x| g.eval_squared(x),
        ),
    }
}

fn check_index(level: usize, shift: usize) -> Result<()> {
    let bound = 1usize << level;
    if shift >= bound {
        return Err(Error::Index {
            level,
            index: shift,
            bound,
        });
    }
    Ok(())
}

/// Unbiased estimator of `α_{j,k}`.
pub fn alpha_hat_direct(
    sample: &DesignSample,
    level: usize,
    shift: usize,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<f64> {
    check_index(level, shift)?;
    let n = sample.len() as f64;
    let sum: f64 = sample
        .x
        .iter()
        .zip(sample.y_squared())
        .map(|(x, y2)| y2 * basis.eval(BasisKind::Phi, level, shift, *x))
        .sum();
    Ok(sum / n - correction_v(level, shift, &config.mode, basis))
}

/// Estimator of `β_{j,k}` with the per-term `ρₙ` truncation when
/// `config.beta_truncation` is set.
pub fn beta_hat_direct(
    sample: &DesignSample,
    level: usize,
    shift: usize,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<f64> {
    check_index(level, shift)?;
    let n = sample.len();
    let rho = rho_n(n);
    let w = correction_w(level, shift, &config.mode, basis);
    let sum: f64 = sample
        .x
        .iter()
        .zip(sample.y_squared())
        .map(|(x, y2)| y2 * basis.eval(BasisKind::Psi, level, shift, *x) - w)
        .filter(|k| !config.beta_truncation || k.abs() <= rho)
        .sum();
    Ok(sum / n as f64)
}

/// Record of the offsets subtracted from the raw sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    pub v: Vec<f64>,
    /// `w[j − j★][k]`.
    pub w: Vec<Vec<f64>>,
}

/// `α̂_{j★,·}` and `β̂_{j,·}` for `j★ ≤ j ≤ j1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub n: usize,
    pub j_star: usize,
    pub j1: usize,
    pub alpha: Vec<f64>,
    /// `beta[j − j★]` has `2^j` entries.
    pub beta: Vec<Vec<f64>>,
    pub corrections: Corrections,
    pub backend: Backend,
}

impl CoefficientSet {
    pub fn beta_level(&self, level: usize) -> Option<&[f64]> {
        level
            .checked_sub(self.j_star)
            .and_then(|i| self.beta.get(i))
            .map(Vec::as_slice)
    }

    /// Iterator over `(level, shift, β̂)`.
    pub fn betas(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.beta.iter().enumerate().flat_map(move |(i, b)| {
            b.iter()
                .enumerate()
                .map(move |(k, v)| (self.j_star + i, k, *v))
        })
    }

    pub fn detail_count(&self) -> usize {
        self.beta.iter().map(Vec::len).sum()
    }

    /// `log2(n)`: levels of the reconstruction grid.
    pub fn grid_levels(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    /// Pyramid with the details kept by `keep`; levels above `j1` are zero.
    pub fn to_pyramid(&self, keep: impl Fn(f64) -> bool) -> Result<CoefficientPyramid> {
        let mut p = CoefficientPyramid::zeros(self.j_star, self.grid_levels())?;
        p.approx_mut().copy_from_slice(&self.alpha);
        for (i, b) in self.beta.iter().enumerate() {
            let level = self.j_star + i;
            let slot = p.detail_mut(level).ok_or_else(|| {
                Error::Shape(format!("detail level {level} beyond reconstruction grid"))
            })?;
            for (dst, src) in slot.iter_mut().zip(b) {
                if keep(*src) {
                    *dst = *src;
                }
            }
        }
        Ok(p)
    }
}

/// Squared responses in X order, scaled by `n^{-1/2}`.
fn pyramid_input(sample: &DesignSample) -> Vec<f64> {
    let scale = 1.0 / (sample.len() as f64).sqrt();
    sample.y_squared().map(|y2| y2 * scale).collect()
}

fn corrections_for(
    j_star: usize,
    j1: usize,
    mode: &CorrectionMode,
    basis: &WaveletBasis,
) -> Corrections {
    let v = (0..1usize << j_star)
        .map(|k| correction_v(j_star, k, mode, basis))
        .collect();
    let w = (j_star..=j1)
        .map(|j| {
            (0..1usize << j)
                .map(|k| correction_w(j, k, mode, basis))
                .collect()
        })
        .collect();
    Corrections { v, w }
}

/// Coefficients from the Mallat pyramid applied to the ordered `Yᵢ²/√n`.
///
/// With `beta_truncation`, inputs with `Yᵢ² > ρₙ` are zeroed before the
/// details are computed; the scaling coefficients always use all inputs.
pub fn pyramid_coefficients(
    sample: &DesignSample,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<CoefficientSet> {
    let n = sample.len();
    config.validate(n)?;
    let j1 = config.j1_for(n);
    let input = pyramid_input(sample);
    let full = dwt_periodic(&input, basis.filter(), config.j_star)?;
    let detail_source = if config.beta_truncation {
        let limit = rho_n(n) / (n as f64).sqrt();
        let clipped: Vec<f64> = input
            .iter()
            .map(|s| if s.abs() > limit { 0.0 } else { *s })
            .collect();
        dwt_periodic(&clipped, basis.filter(), config.j_star)?
    } else {
        full.clone()
    };
    let corrections = corrections_for(config.j_star, j1, &config.mode, basis);
    let alpha = full
        .approx()
        .iter()
        .zip(&corrections.v)
        .map(|(a, v)| a - v)
        .collect();
    let beta = (config.j_star..=j1)
        .zip(&corrections.w)
        .map(|(j, w)| {
            let d = detail_source
                .detail(j)
                .expect("pyramid has every level below J");
            d.iter().zip(w).map(|(b, w)| b - w).collect()
        })
        .collect();
    Ok(CoefficientSet {
        n,
        j_star: config.j_star,
        j1,
        alpha,
        beta,
        corrections,
        backend: Backend::Pyramid,
    })
}

/// Support-restricted accumulation of the direct sums over all `(j, k)`.
pub fn direct_coefficients(
    sample: &DesignSample,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<CoefficientSet> {
    let n = sample.len();
    config.validate(n)?;
    let j1 = config.j1_for(n);
    let rho = rho_n(n);
    let support = basis.filter().support_len();
    let corrections = corrections_for(config.j_star, j1, &config.mode, basis);
    let y2: Vec<f64> = sample.y_squared().collect();

    // Shifts k whose periodized support contains x.
    let touching = |level: usize, x: f64| -> Vec<usize> {
        let count = 1usize << level;
        if count <= support + 1 {
            return (0..count).collect();
        }
        let base = (x * count as f64).floor() as isize;
        (0..=support as isize)
            .map(|q| (base - q).rem_euclid(count as isize) as usize)
            .collect()
    };

    let mut alpha = vec![0.0; 1 << config.j_star];
    for (x, y2) in sample.x.iter().zip(&y2) {
        for k in touching(config.j_star, *x) {
            alpha[k] += y2 * basis.eval(BasisKind::Phi, config.j_star, k, *x);
        }
    }
    let alpha = alpha
        .iter()
        .zip(&corrections.v)
        .map(|(s, v)| s / n as f64 - v)
        .collect();

    let keep = |term: f64| !config.beta_truncation || term.abs() <= rho;
    let beta = (config.j_star..=j1)
        .zip(&corrections.w)
        .map(|(level, w)| {
            let mut sums = vec![0.0; 1 << level];
            let mut visited = vec![0usize; 1 << level];
            for (x, y2) in sample.x.iter().zip(&y2) {
                for k in touching(level, *x) {
                    let term = y2 * basis.eval(BasisKind::Psi, level, k, *x) - w[k];
                    if keep(term) {
                        sums[k] += term;
                    }
                    visited[k] += 1;
                }
            }
            // Points outside the support contribute −w each.
            sums.iter()
                .zip(&visited)
                .zip(w)
                .map(|((s, c), w)| {
                    let outside = if keep(-w) { -(w * (n - c) as f64) } else { 0.0 };
                    (s + outside) / n as f64
                })
                .collect()
        })
        .collect();

    Ok(CoefficientSet {
        n,
        j_star: config.j_star,
        j1,
        alpha,
        beta,
        corrections,
        backend: Backend::Direct,
    })
}

/// Dispatches on `config.backend`.
pub fn estimate_coefficients(
    sample: &DesignSample,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<CoefficientSet> {
    match config.backend {
        Backend::Direct => direct_coefficients(sample, config, basis),
        Backend::Pyramid => pyramid_coefficients(sample, config, basis),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdRule {
    /// `κ · √(ln n / n)`.
    Universal {
        kappa: f64,
    },
    Explicit(f64),
}

impl ThresholdRule {
    pub fn resolve(&self, n: usize) -> f64 {
        match *self {
            Self::Universal { kappa } => kappa * t_n(n),
            Self::Explicit(lambda) => lambda,
        }
    }
}

/// `r̂` on the grid `i/n`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub values: Vec<f64>,
    pub coefficients: CoefficientSet,
    /// `None` for the linear estimator.
    pub threshold: Option<f64>,
}

impl Estimate {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.values.len() as f64;
        (0..self.values.len()).map(move |i| i as f64 / n)
    }

    pub fn is_kept(&self, beta: f64) -> bool {
        self.threshold.is_some_and(|t| beta.abs() >= t)
    }

    pub fn kept_detail_count(&self) -> usize {
        self.coefficients
            .betas()
            .filter(|(_, _, b)| self.is_kept(*b))
            .count()
    }
}

fn reconstruct(
    coeffs: &CoefficientSet,
    basis: &WaveletBasis,
    keep: impl Fn(f64) -> bool,
) -> Result<Vec<f64>> {
    let pyramid = coeffs.to_pyramid(keep)?;
    let scale = (coeffs.n as f64).sqrt();
    let values: Vec<f64> = idwt_periodic(&pyramid, basis.filter())?
        .into_iter()
        .map(|v| v * scale)
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "non-finite value in reconstruction".into(),
        ));
    }
    Ok(values)
}

/// Projection of `r̂` onto `V_{j★}`.
pub fn linear_estimate(coeffs: &CoefficientSet, basis: &WaveletBasis) -> Result<Estimate> {
    Ok(Estimate {
        values: reconstruct(coeffs, basis, |_| false)?,
        coefficients: coeffs.clone(),
        threshold: None,
    })
}

/// Keeps `β̂_{j,k}` iff `|β̂_{j,k}| ≥ threshold` for `j★ ≤ j ≤ j1`.
pub fn nonlinear_estimate(
    coeffs: &CoefficientSet,
    threshold: f64,
    basis: &WaveletBasis,
) -> Result<Estimate> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::Config(format!("threshold {threshold} must be ≥ 0")));
    }
    Ok(Estimate {
        values: reconstruct(coeffs, basis, |b| b.abs() >= threshold)?,
        coefficients: coeffs.clone(),
        threshold: Some(threshold),
    })
}

/// Periodic piecewise-linear interpolation of grid values at `x ∈ [0, 1)`.
pub(crate) fn interpolate(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let pos = x * n as f64;
    let i = (pos.floor() as usize).min(n - 1);
    let frac = pos - i as f64;
    let next = values[(i + 1) % n];
    values[i] + frac * (next - values[i])
}

/// Evaluates the estimate at arbitrary points of `[0, 1)`.
pub fn evaluate_estimate(est: &Estimate, points: &[f64]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&x| {
            if (0.0..1.0).contains(&x) {
                Ok(interpolate(&est.values, x))
            } else {
                Err(Error::Domain(x))
            }
        })
        .collect()
}
