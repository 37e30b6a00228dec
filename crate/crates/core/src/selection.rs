//! Two-fold cross-validation of the truncation level and the global hard
//! threshold, and oracle selection against the true `r`.
//!
//! The X-sorted sample is split into the points with even and odd 0-based
//! index. Each half is fitted by the pyramid backend; the fit of one half
//! predicts the other half by averaging the two fitted values adjacent to
//! each held-out point in the design order (a single neighbor at the edge).

use serde::{Deserialize, Serialize};

use crate::error::{log2_exact, Error, Result};
use crate::estimator::{
    linear_estimate, nonlinear_estimate, pyramid_coefficients, Backend, CoefficientSet,
    CorrectionMode, EstimatorConfig,
};
use crate::harness::mse;
use crate::model::DesignSample;
use crate::wavelet::{idwt_periodic, CoefficientPyramid, WaveletBasis};

/// Scores within this relative distance of the minimum form its plateau.
/// The distance is relative to the larger of the minimum and a
/// problem-dependent scale, so that curves whose minimum is a rounding
/// residue near zero still form a plateau.
pub const PLATEAU_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlateauPolicy {
    /// Smallest parameter on the minimal plateau.
    #[default]
    First,
    /// Middle element of the minimal plateau (lower middle for even length).
    Middle,
}

impl std::str::FromStr for PlateauPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" => Ok(Self::First),
            "middle" | "mid" => Ok(Self::Middle),
            other => Err(Error::Config(format!("unknown plateau policy `{other}`"))),
        }
    }
}

impl std::fmt::Display for PlateauPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::First => "first",
            Self::Middle => "middle",
        })
    }
}

/// Contiguous run of candidates whose score equals the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plateau {
    pub first: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen_jstar: usize,
    /// Full-sample threshold, for threshold selection.
    pub chosen_threshold: Option<f64>,
    /// `(parameter, score)` in candidate order. Threshold curves are in
    /// half-sample units for 2FCV.
    pub score_curve: Vec<(f64, f64)>,
    /// Scores without the noise centering; empty for oracle curves.
    pub raw_scores: Vec<f64>,
    pub plateau: Plateau,
    pub chosen_index: usize,
}

impl SelectionResult {
    pub fn min_score(&self) -> f64 {
        self.score_curve[self.chosen_index].1
    }
}

/// Minimal plateau containing the first argmin, and the index chosen on it.
pub fn locate_plateau(
    scores: &[f64],
    scale: f64,
    policy: PlateauPolicy,
) -> Result<(Plateau, usize)> {
    let (first, min) = scores
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, s)| !s.is_nan())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Degenerate("empty score curve".into()))?;
    let tol = PLATEAU_TOL * min.abs().max(scale.abs()).max(f64::MIN_POSITIVE);
    let on = |s: f64| (s - min).abs() <= tol;
    let start = (0..first)
        .rev()
        .take_while(|&i| on(scores[i]))
        .last()
        .unwrap_or(first);
    let end = (first..scores.len())
        .take_while(|&i| on(scores[i]))
        .last()
        .unwrap_or(first);
    let plateau = Plateau {
        first: start,
        len: end - start + 1,
    };
    let chosen = match policy {
        PlateauPolicy::First => start,
        PlateauPolicy::Middle => start + (plateau.len - 1) / 2,
    };
    Ok((plateau, chosen))
}

/// `(points with even 0-based index, points with odd 0-based index)`.
pub fn twofold_split(sample: &DesignSample) -> Result<(DesignSample, DesignSample)> {
    let n = sample.len();
    log2_exact(n)?;
    if n < 4 {
        return Err(Error::Shape(format!("two-fold split needs n ≥ 4, got {n}")));
    }
    let pick = |parity: usize| {
        let x = sample.x.iter().skip(parity).step_by(2).copied().collect();
        let y = sample.y.iter().skip(parity).step_by(2).copied().collect();
        DesignSample {
            x,
            y,
            config: None,
            ties_broken: 0,
        }
    };
    Ok((pick(0), pick(1)))
}

/// Held-out predictions of the odd half from fitted values on the even half.
fn predict_odd_from_even(fit: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let h = fit.len();
    (0..h).map(move |m| {
        if m + 1 < h {
            0.5 * (fit[m] + fit[m + 1])
        } else {
            fit[m]
        }
    })
}

/// Held-out predictions of the even half from fitted values on the odd half.
fn predict_even_from_odd(fit: &[f64]) -> impl Iterator<Item = f64> + '_ {
    (0..fit.len()).map(move |m| {
        if m == 0 {
            fit[0]
        } else {
            0.5 * (fit[m - 1] + fit[m])
        }
    })
}

/// Held-out targets of one half: `Yᵢ²` and the centering `E[V² | Xᵢ]`.
struct Targets {
    y2: Vec<f64>,
    centering: Vec<f64>,
}

impl Targets {
    fn new(half: &DesignSample, mode: &CorrectionMode) -> Self {
        Self {
            y2: half.y_squared().collect(),
            centering: half.x.iter().map(|x| mode.centering(*x)).collect(),
        }
    }

    /// Centered score of the all-zero prediction.
    fn scale(&self) -> f64 {
        self.y2
            .iter()
            .zip(&self.centering)
            .map(|(y, c)| (y - c).powi(2))
            .sum()
    }

    fn score(&self, predictions: impl Iterator<Item = f64>) -> CvScore {
        let mut out = CvScore::default();
        for ((y2, c), p) in self.y2.iter().zip(&self.centering).zip(predictions) {
            out.centered += (y2 - c - p).powi(2);
            out.raw += (y2 - p).powi(2);
        }
        out
    }
}

/// Sum of squared held-out residuals over both directions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CvScore {
    pub centered: f64,
    pub raw: f64,
}

impl std::ops::Add for CvScore {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            centered: self.centered + rhs.centered,
            raw: self.raw + rhs.raw,
        }
    }
}

/// Shared state of a cross-validation run.
struct Folds {
    even: DesignSample,
    odd: DesignSample,
    even_targets: Targets,
    odd_targets: Targets,
    half_levels: usize,
}

impl Folds {
    fn new(sample: &DesignSample, mode: &CorrectionMode) -> Result<Self> {
        let (even, odd) = twofold_split(sample)?;
        let half_levels = log2_exact(even.len())?;
        Ok(Self {
            even_targets: Targets::new(&even, mode),
            odd_targets: Targets::new(&odd, mode),
            even,
            odd,
            half_levels,
        })
    }

    fn check_jstar(&self, j_star: usize) -> Result<()> {
        if self.half_levels == 0 || j_star + 1 > self.half_levels {
            return Err(Error::Config(format!(
                "j★ = {j_star} exceeds the half-sample limit {}",
                self.half_levels.saturating_sub(1)
            )));
        }
        Ok(())
    }

    fn fit(
        &self,
        config: &EstimatorConfig,
        basis: &WaveletBasis,
    ) -> Result<(CoefficientSet, CoefficientSet)> {
        let mut cfg = *config;
        cfg.backend = Backend::Pyramid;
        cfg.j1 = None;
        Ok((
            pyramid_coefficients(&self.even, &cfg, basis)?,
            pyramid_coefficients(&self.odd, &cfg, basis)?,
        ))
    }

    fn scale(&self) -> f64 {
        self.even_targets.scale() + self.odd_targets.scale()
    }

    fn score(&self, even_fit: &[f64], odd_fit: &[f64]) -> CvScore {
        self.odd_targets.score(predict_odd_from_even(even_fit))
            + self.even_targets.score(predict_even_from_odd(odd_fit))
    }
}

/// Two-fold CV score of the linear estimator with truncation level `j_star`.
pub fn cv_score_linear(
    sample: &DesignSample,
    j_star: usize,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<CvScore> {
    let folds = Folds::new(sample, &config.mode)?;
    folds.check_jstar(j_star)?;
    linear_score(&folds, j_star, config, basis)
}

fn linear_score(
    folds: &Folds,
    j_star: usize,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<CvScore> {
    let (a, b) = folds.fit(&config.with_j_star(j_star), basis)?;
    let fa = linear_estimate(&a, basis)?.values;
    let fb = linear_estimate(&b, basis)?.values;
    Ok(folds.score(&fa, &fb))
}

fn finish(
    chosen_jstar: impl Fn(usize) -> usize,
    params: Vec<f64>,
    (scores, raw_scores): (Vec<f64>, Vec<f64>),
    scale: f64,
    policy: PlateauPolicy,
) -> Result<SelectionResult> {
    let (plateau, chosen_index) = locate_plateau(&scores, scale, policy)?;
    Ok(SelectionResult {
        chosen_jstar: chosen_jstar(chosen_index),
        chosen_threshold: None,
        score_curve: params.into_iter().zip(scores).collect(),
        raw_scores,
        plateau,
        chosen_index,
    })
}

/// Minimizes the two-fold CV score over `j★ ∈ 0..=log2(n) − 2`.
pub fn select_jstar(
    sample: &DesignSample,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
    policy: PlateauPolicy,
) -> Result<SelectionResult> {
    let folds = Folds::new(sample, &config.mode)?;
    let levels: Vec<usize> = (0..folds.half_levels).collect();
    let scores = levels
        .iter()
        .map(|&j| linear_score(&folds, j, config, basis))
        .collect::<Result<Vec<_>>>()?;
    finish(
        |i| levels[i],
        levels.iter().map(|&j| j as f64).collect(),
        (
            scores.iter().map(|s| s.centered).collect(),
            scores.iter().map(|s| s.raw).collect(),
        ),
        folds.scale(),
        policy,
    )
}

/// Factor mapping a half-sample threshold to the full sample.
pub fn threshold_rescale(n: usize) -> f64 {
    (1.0 - std::f64::consts::LN_2 / (n as f64).ln()).sqrt()
}

/// Synthesized unit detail vectors `e_{j,0}` on a grid of `2^levels` points,
/// stored by their nonzero entries. `e_{j,k}` is `e_{j,0}` shifted by
/// `k·2^{levels−j}`.
struct Atoms {
    size: usize,
    levels: usize,
    j_star: usize,
    per_level: Vec<Vec<(usize, f64)>>,
}

impl Atoms {
    fn new(basis: &WaveletBasis, j_star: usize, levels: usize) -> Result<Self> {
        let size = 1usize << levels;
        let scale = (size as f64).sqrt();
        let per_level = (j_star..levels)
            .map(|j| {
                let mut p = CoefficientPyramid::zeros(j_star, levels)?;
                p.detail_mut(j).expect("level below finest")[0] = 1.0;
                Ok(idwt_periodic(&p, basis.filter())?
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0)
                    .map(|(i, v)| (i, v * scale))
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            size,
            levels,
            j_star,
            per_level,
        })
    }

    fn add(&self, values: &mut [f64], level: usize, shift: usize, beta: f64) {
        let offset = shift << (self.levels - level);
        for &(i, v) in &self.per_level[level - self.j_star] {
            values[(i + offset) & (self.size - 1)] += beta * v;
        }
    }
}

/// One detail coefficient queued for the descending threshold sweep.
struct Queued {
    magnitude: f64,
    fit: usize,
    level: usize,
    shift: usize,
    beta: f64,
}

/// Evaluates `score` for every threshold in `{0} ∪ {|β̂|} ∪ {∞}` by adding
/// coefficients in order of decreasing magnitude to the linear fits.
/// Returns `(threshold, score)` pairs in ascending threshold order.
fn threshold_sweep<S>(
    fits: &[&CoefficientSet],
    basis: &WaveletBasis,
    mut score: impl FnMut(&[Vec<f64>]) -> S,
) -> Result<Vec<(f64, S)>> {
    let mut values = Vec::with_capacity(fits.len());
    let mut atoms = Vec::with_capacity(fits.len());
    let mut queue = Vec::new();
    for (i, fit) in fits.iter().enumerate() {
        values.push(linear_estimate(fit, basis)?.values);
        atoms.push(Atoms::new(basis, fit.j_star, fit.grid_levels())?);
        queue.extend(fit.betas().map(|(level, shift, beta)| Queued {
            magnitude: beta.abs(),
            fit: i,
            level,
            shift,
            beta,
        }));
    }
    queue.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));

    let mut curve = vec![(f64::INFINITY, score(&values))];
    let mut next = 0;
    while next < queue.len() {
        let lambda = queue[next].magnitude;
        while next < queue.len() && queue[next].magnitude == lambda {
            let q = &queue[next];
            atoms[q.fit].add(&mut values[q.fit], q.level, q.shift, q.beta);
            next += 1;
        }
        curve.push((lambda, score(&values)));
    }
    if curve.last().is_some_and(|(l, _)| *l != 0.0) {
        // Every coefficient is already in; λ = 0 keeps the same set.
        curve.push((0.0, score(&values)));
    }
    curve.reverse();
    Ok(curve)
}

/// Two-fold CV choice of the global hard threshold at truncation `j_star`.
pub fn select_threshold(
    sample: &DesignSample,
    j_star: usize,
    config: &EstimatorConfig,
    basis: &WaveletBasis,
    policy: PlateauPolicy,
) -> Result<SelectionResult> {
    let folds = Folds::new(sample, &config.mode)?;
    folds.check_jstar(j_star)?;
    let (a, b) = folds.fit(&config.with_j_star(j_star), basis)?;
    let curve = threshold_sweep(&[&a, &b], basis, |v| folds.score(&v[0], &v[1]))?;
    if curve.is_empty() {
        return Err(Error::Degenerate("empty threshold candidate grid".into()));
    }
    let params: Vec<f64> = curve.iter().map(|(l, _)| *l).collect();
    let scores = curve.iter().map(|(_, s)| s.centered).collect();
    let raw = curve.iter().map(|(_, s)| s.raw).collect();
    let mut result = finish(|_| j_star, params, (scores, raw), folds.scale(), policy)?;
    let half = result.score_curve[result.chosen_index].0;
    result.chosen_threshold = Some(half * threshold_rescale(sample.len()));
    Ok(result)
}

/// Which parameter the oracle chooses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleTarget {
    /// Linear estimator over `j★ ∈ 0..=log2(n) − 2`.
    JStar,
    /// Hard threshold at fixed `j_star` over `{0} ∪ {|β̂|} ∪ {∞}`; `compare`
    /// adds one more threshold (typically the 2FCV choice) to the family.
    Threshold { j_star: usize, compare: Option<f64> },
}

/// Design-point interpolation weights, for fast MSE inside the sweep.
struct DesignMse {
    index: Vec<usize>,
    frac: Vec<f64>,
    target: Vec<f64>,
}

impl DesignMse {
    fn new(points: &[f64], target: Vec<f64>, grid: usize) -> Self {
        let (index, frac) = points
            .iter()
            .map(|x| {
                let pos = x * grid as f64;
                let i = (pos.floor() as usize).min(grid - 1);
                (i, pos - i as f64)
            })
            .unzip();
        Self {
            index,
            frac,
            target,
        }
    }

    fn eval(&self, values: &[f64]) -> f64 {
        let n = values.len();
        let sum: f64 = self
            .index
            .iter()
            .zip(&self.frac)
            .zip(&self.target)
            .map(|((&i, &f), t)| {
                let v = values[i] + f * (values[(i + 1) % n] - values[i]);
                (t - v).powi(2)
            })
            .sum();
        sum / self.target.len() as f64
    }
}

/// Parameter minimizing the design-point MSE against the true `r`.
pub fn oracle_select(
    sample: &DesignSample,
    true_r: &(dyn Fn(f64) -> f64 + Sync),
    config: &EstimatorConfig,
    basis: &WaveletBasis,
    target: OracleTarget,
) -> Result<SelectionResult> {
    let n = sample.len();
    let levels = log2_exact(n)?;
    let truth: Vec<f64> = sample.x.iter().map(|x| true_r(*x)).collect();
    let scale = truth.iter().map(|t| t * t).sum::<f64>() / n as f64;
    let mut cfg = *config;
    cfg.backend = Backend::Pyramid;
    cfg.j1 = None;
    match target {
        OracleTarget::JStar => {
            if levels < 2 {
                return Err(Error::Shape(format!(
                    "oracle selection needs n ≥ 4, got {n}"
                )));
            }
            let grid: Vec<usize> = (0..levels - 1).collect();
            let scores = grid
                .iter()
                .map(|&j| {
                    let set = pyramid_coefficients(sample, &cfg.with_j_star(j), basis)?;
                    mse(&linear_estimate(&set, basis)?, &truth, &sample.x)
                })
                .collect::<Result<Vec<_>>>()?;
            finish(
                |i| grid[i],
                grid.iter().map(|&j| j as f64).collect(),
                (scores, Vec::new()),
                scale,
                PlateauPolicy::First,
            )
        }
        OracleTarget::Threshold { j_star, compare } => {
            let set = pyramid_coefficients(sample, &cfg.with_j_star(j_star), basis)?;
            let design = DesignMse::new(&sample.x, truth.clone(), n);
            let curve = threshold_sweep(&[&set], basis, |v| design.eval(&v[0]))?;
            let (_, swept) = locate_plateau(
                &curve.iter().map(|(_, s)| *s).collect::<Vec<_>>(),
                scale,
                PlateauPolicy::First,
            )?;
            // Re-evaluate the winner and the comparison exactly as the
            // harness would, so dominance holds bitwise.
            let fresh = |lambda: f64| -> Result<f64> {
                mse(&nonlinear_estimate(&set, lambda, basis)?, &truth, &sample.x)
            };
            let mut params: Vec<f64> = curve.iter().map(|(l, _)| *l).collect();
            let mut scores: Vec<f64> = curve.iter().map(|(_, s)| *s).collect();
            scores[swept] = fresh(params[swept])?;
            let mut chosen = swept;
            if let Some(lambda) = compare {
                let s = fresh(lambda)?;
                if s < scores[chosen] {
                    params.push(lambda);
                    scores.push(s);
                    chosen = params.len() - 1;
                }
            }
            let (plateau, _) = locate_plateau(&scores, scale, PlateauPolicy::First)?;
            Ok(SelectionResult {
                chosen_jstar: j_star,
                chosen_threshold: Some(params[chosen]),
                score_curve: params.into_iter().zip(scores).collect(),
                raw_scores: Vec::new(),
                plateau,
                chosen_index: chosen,
            })
        }
    }
}
