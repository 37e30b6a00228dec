//! Monte Carlo replications, error metrics, five-number summaries and the
//! convergence-rate study.
//!
//! Replication `i` of a run with master seed `s` draws its sample with seed
//! [`derive_seed`]`(s, i)`; the rate study first derives a per-`n` master as
//! `derive_seed(s, n)`. Records are collected in replication order, so output
//! does not depend on thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{log2_exact, Error, Result};
use crate::estimator::{
    evaluate_estimate, linear_estimate, nonlinear_estimate, pyramid_coefficients, Estimate,
    EstimatorConfig,
};
use crate::model::{derive_seed, generate_sample, ModelConfig, TestFunction};
use crate::selection::{
    oracle_select, select_jstar, select_threshold, OracleTarget, PlateauPolicy,
};
use crate::wavelet::WaveletBasis;

/// `(1/n) Σ (r(xᵢ) − r̂(xᵢ))²` with `r̂` interpolated at the points.
pub fn mse(est: &Estimate, truth: &[f64], points: &[f64]) -> Result<f64> {
    if truth.len() != points.len() {
        return Err(Error::Shape(format!(
            "{} true values for {} points",
            truth.len(),
            points.len()
        )));
    }
    if points.is_empty() {
        return Err(Error::Shape("no design points".into()));
    }
    let fitted = evaluate_estimate(est, points)?;
    let sum: f64 = truth
        .iter()
        .zip(&fitted)
        .map(|(t, f)| (t - f).powi(2))
        .sum();
    Ok(sum / points.len() as f64)
}

/// Integrated squared error by the rectangle rule on the grid `i/n`.
pub fn ise(est: &Estimate, r: impl Fn(f64) -> f64) -> f64 {
    let n = est.len() as f64;
    est.grid()
        .zip(&est.values)
        .map(|(x, v)| (r(x) - v).powi(2))
        .sum::<f64>()
        / n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication_index: u64,
    pub seed: u64,
    pub mse_lin_2fcv: f64,
    pub mse_lin_oracle: f64,
    pub mse_non_2fcv: f64,
    pub mse_non_oracle: f64,
    pub jstar_2fcv: usize,
    pub jstar_oracle: usize,
    pub threshold_2fcv: f64,
    pub threshold_oracle: f64,
    /// Details kept by the 2FCV threshold.
    pub kept_detail_count: usize,
    pub ise_lin_2fcv: f64,
    pub ise_lin_oracle: f64,
    pub ise_non_2fcv: f64,
    pub ise_non_oracle: f64,
}

impl ReplicationRecord {
    /// Named metrics in column order.
    pub fn metrics(&self) -> [(&'static str, f64); 8] {
        [
            ("mse_lin_2fcv", self.mse_lin_2fcv),
            ("mse_lin_oracle", self.mse_lin_oracle),
            ("mse_non_2fcv", self.mse_non_2fcv),
            ("mse_non_oracle", self.mse_non_oracle),
            ("ise_lin_2fcv", self.ise_lin_2fcv),
            ("ise_lin_oracle", self.ise_lin_oracle),
            ("ise_non_2fcv", self.ise_non_2fcv),
            ("ise_non_oracle", self.ise_non_oracle),
        ]
    }
}

/// Shared, read-only inputs of every replication.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: ModelConfig,
    /// `j_star` is ignored: it is selected per replication.
    pub estimator: EstimatorConfig,
    pub plateau: PlateauPolicy,
    pub basis: WaveletBasis,
}

impl Experiment {
    pub fn new(model: ModelConfig, estimator: EstimatorConfig, basis: WaveletBasis) -> Self {
        Self {
            model,
            estimator,
            plateau: PlateauPolicy::First,
            basis,
        }
    }
}

/// Generate, select by 2FCV and by oracle, estimate, and score.
///
/// Both nonlinear estimators use the 2FCV truncation level, so the two
/// threshold choices compete on the same family.
pub fn run_replication(exp: &Experiment, rep_index: u64) -> Result<ReplicationRecord> {
    let seed = derive_seed(exp.model.seed, rep_index);
    let model = exp.model.with_seed(seed);
    let sample = generate_sample(&model)?;
    let f = model.function;
    let r = |x: f64| f.eval(x);
    let truth: Vec<f64> = sample.x.iter().map(|x| r(*x)).collect();
    let basis = &exp.basis;
    let cfg = exp.estimator;

    let cv_j = select_jstar(&sample, &cfg, basis, exp.plateau)?;
    let or_j = oracle_select(&sample, &r, &cfg, basis, OracleTarget::JStar)?;
    let j_hat = cv_j.chosen_jstar;

    let cv_set = pyramid_coefficients(&sample, &cfg.with_j_star(j_hat), basis)?;
    let or_set = pyramid_coefficients(&sample, &cfg.with_j_star(or_j.chosen_jstar), basis)?;
    let lin_cv = linear_estimate(&cv_set, basis)?;
    let lin_or = linear_estimate(&or_set, basis)?;

    let cv_t = select_threshold(&sample, j_hat, &cfg, basis, exp.plateau)?;
    let lambda = cv_t
        .chosen_threshold
        .expect("threshold selection sets a threshold");
    let or_t = oracle_select(
        &sample,
        &r,
        &cfg,
        basis,
        OracleTarget::Threshold {
            j_star: j_hat,
            compare: Some(lambda),
        },
    )?;
    let lambda_or = or_t
        .chosen_threshold
        .expect("threshold oracle sets a threshold");
    let non_cv = nonlinear_estimate(&cv_set, lambda, basis)?;
    let non_or = nonlinear_estimate(&cv_set, lambda_or, basis)?;

    Ok(ReplicationRecord {
        replication_index: rep_index,
        seed,
        mse_lin_2fcv: mse(&lin_cv, &truth, &sample.x)?,
        mse_lin_oracle: mse(&lin_or, &truth, &sample.x)?,
        mse_non_2fcv: mse(&non_cv, &truth, &sample.x)?,
        mse_non_oracle: mse(&non_or, &truth, &sample.x)?,
        jstar_2fcv: j_hat,
        jstar_oracle: or_j.chosen_jstar,
        threshold_2fcv: lambda,
        threshold_oracle: lambda_or,
        kept_detail_count: non_cv.kept_detail_count(),
        ise_lin_2fcv: ise(&lin_cv, r),
        ise_lin_oracle: ise(&lin_or, r),
        ise_non_2fcv: ise(&non_cv, r),
        ise_non_oracle: ise(&non_or, r),
    })
}

/// Minimum, quartiles (linear interpolation between order statistics) and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Degenerate("five-number summary of no values".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Self {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Quantile of sorted data at `p`, interpolating at position `(len − 1)·p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One five-number summary, keyed by experiment and method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub function: String,
    pub n: usize,
    pub sigma2: f64,
    /// Metric column name, e.g. `mse_lin_2fcv`.
    pub method: String,
    #[serde(flatten)]
    pub summary: FiveNumber,
}

pub fn summarize(model: &ModelConfig, records: &[ReplicationRecord]) -> Result<Vec<SummaryEntry>> {
    let Some(first) = records.first() else {
        return Err(Error::Degenerate("no replication records".into()));
    };
    first
        .metrics()
        .iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let values: Vec<f64> = records.iter().map(|r| r.metrics()[i].1).collect();
            Ok(SummaryEntry {
                function: model.function.name().to_string(),
                n: model.n,
                sigma2: model.sigma2,
                method: (*name).to_string(),
                summary: FiveNumber::from_values(&values)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub records: Vec<ReplicationRecord>,
    pub summary: Vec<SummaryEntry>,
}

impl MonteCarloResult {
    pub fn metric(&self, method: &str) -> Option<&FiveNumber> {
        self.summary
            .iter()
            .find(|e| e.method == method)
            .map(|e| &e.summary)
    }
}

/// Replications `0..replications`, run in parallel.
pub fn run_monte_carlo(exp: &Experiment, replications: u64) -> Result<MonteCarloResult> {
    if replications == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    exp.model.validate()?;
    let records = (0..replications)
        .into_par_iter()
        .map(|i| run_replication(exp, i))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&exp.model, &records)?;
    Ok(MonteCarloResult { records, summary })
}

/// How the rate study picks `j★` for each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JStarRule {
    /// `j★ = round(log2(n) / (2s′ + 1))`, so `2^{j★} ≈ n^{1/(2s′+1)}`.
    Theorem {
        s_prime: f64,
    },
    Fixed(usize),
    TwoFoldCv,
}

impl JStarRule {
    fn resolve(
        &self,
        sample: &crate::model::DesignSample,
        cfg: &EstimatorConfig,
        basis: &WaveletBasis,
        policy: PlateauPolicy,
    ) -> Result<usize> {
        let levels = log2_exact(sample.len())?;
        match *self {
            Self::Theorem { s_prime } => Ok(theorem_jstar(sample.len(), s_prime).min(levels - 1)),
            Self::Fixed(j) => Ok(j.min(levels - 1)),
            Self::TwoFoldCv => Ok(select_jstar(sample, cfg, basis, policy)?.chosen_jstar),
        }
    }
}

pub fn theorem_jstar(n: usize, s_prime: f64) -> usize {
    ((n as f64).log2() / (2.0 * s_prime + 1.0)).round() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateStudyConfig {
    pub replications: u64,
    pub rule: JStarRule,
    /// Exponent `−2s′/(2s′+1)` reported next to the fitted slope.
    pub theoretical_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    /// Level used for every replication, when the rule fixes it.
    pub j_star: Option<usize>,
    pub mise: f64,
    /// Standard error of the Monte Carlo mean.
    pub mise_se: f64,
    pub mean_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub theoretical_exponent: Option<f64>,
}

impl RateStudy {
    /// `MISE(n)` is non-increasing, allowing increases within two standard
    /// errors of the difference; returns the number of such increases.
    pub fn monotone_up_to(&self, se_multiple: f64) -> Option<usize> {
        let mut inversions = 0;
        for w in self.rows.windows(2) {
            if w[1].mise > w[0].mise {
                let se = (w[0].mise_se.powi(2) + w[1].mise_se.powi(2)).sqrt();
                if w[1].mise - w[0].mise > se_multiple * se {
                    return None;
                }
                inversions += 1;
            }
        }
        Some(inversions)
    }
}

/// Least-squares line `y = a + b·x`; returns `(b, se(b), a)`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let k = x.len();
    if k < 3 || y.len() != k {
        return Err(Error::Config(format!(
            "need at least 3 paired points for a fit, got {k}"
        )));
    }
    let mx = x.iter().sum::<f64>() / k as f64;
    let my = y.iter().sum::<f64>() / k as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let se = (rss / (k as f64 - 2.0) / sxx).sqrt();
    Ok((slope, se, intercept))
}

/// Monte Carlo MISE of the linear estimator for each `n`, and the fitted
/// slope of `ln MISE` against `ln n`.
pub fn rate_study(
    rate: &RateStudyConfig,
    n_list: &[usize],
    model: &ModelConfig,
    estimator: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<RateStudy> {
    if n_list.len() < 3 {
        return Err(Error::Config(format!(
            "rate study needs at least 3 sample sizes, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "sample sizes must be strictly increasing".into(),
        ));
    }
    if rate.replications < 2 {
        return Err(Error::Config(
            "rate study needs at least 2 replications".into(),
        ));
    }
    let f: TestFunction = model.function;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let base = ModelConfig {
            n,
            seed: derive_seed(model.seed, n as u64),
            ..*model
        };
        base.validate()?;
        let fixed = match rate.rule {
            JStarRule::Theorem { s_prime } => {
                Some(theorem_jstar(n, s_prime).min(base.levels() - 1))
            }
            JStarRule::Fixed(j) => Some(j.min(base.levels() - 1)),
            JStarRule::TwoFoldCv => None,
        };
        let per_rep = (0..rate.replications)
            .into_par_iter()
            .map(|i| {
                let cfg = base.with_seed(derive_seed(base.seed, i));
                let sample = generate_sample(&cfg)?;
                let j = rate
                    .rule
                    .resolve(&sample, estimator, basis, PlateauPolicy::First)?;
                let set = pyramid_coefficients(&sample, &estimator.with_j_star(j), basis)?;
                let est = linear_estimate(&set, basis)?;
                let truth: Vec<f64> = sample.x.iter().map(|x| f.eval(*x)).collect();
                Ok((ise(&est, |x| f.eval(x)), mse(&est, &truth, &sample.x)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let reps = per_rep.len() as f64;
        let mise = per_rep.iter().map(|p| p.0).sum::<f64>() / reps;
        let var = per_rep.iter().map(|p| (p.0 - mise).powi(2)).sum::<f64>() / (reps - 1.0);
        rows.push(RateRow {
            n,
            j_star: fixed,
            mise,
            mise_se: (var / reps).sqrt(),
            mean_mse: per_rep.iter().map(|p| p.1).sum::<f64>() / reps,
        });
    }
    if let Some(row) = rows.iter().find(|r| !(r.mise > 0.0 && r.mise.is_finite())) {
        return Err(Error::Numerical(format!(
            "MISE at n = {} is {}",
            row.n, row.mise
        )));
    }
    let lx: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.mise.ln()).collect();
    let (slope, slope_se, intercept) = ols(&lx, &ly)?;
    Ok(RateStudy {
        rows,
        slope,
        slope_se,
        intercept,
        theoretical_exponent: rate.theoretical_exponent,
    })
}
