//! Coefficient estimators against quadrature of the true coefficients.

use wavereg::estimator::{
    alpha_hat_direct, beta_hat_direct, direct_coefficients, linear_estimate, pyramid_coefficients,
    Backend, CoefficientSet, CorrectionMode, EstimatorConfig,
};
use wavereg::harness::mse;
use wavereg::model::{
    generate_sample, DesignSample, GFunction, ModelConfig, NoiseMode, TestFunction,
    TestFunctionKind, ULaw,
};
use wavereg::wavelet::{BasisKind, WaveletBasis};

fn db8() -> WaveletBasis {
    WaveletBasis::new(8, 12).unwrap()
}

/// `∫ r B_{j,k}` by the rectangle rule on `2^16` points.
fn true_coefficient(
    b: &WaveletBasis,
    r: impl Fn(f64) -> f64,
    kind: BasisKind,
    j: usize,
    k: usize,
) -> f64 {
    let m = 1usize << 16;
    (0..m)
        .map(|i| {
            let x = i as f64 / m as f64;
            r(x) * b.eval(kind, j, k, x)
        })
        .sum::<f64>()
        / m as f64
}

/// Mean and standard error of `r(Xᵢ)·B(Xᵢ)` over the design.
fn sample_mean_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn noiseless_blip(n: usize, seed: u64) -> DesignSample {
    let mut cfg = ModelConfig::new(TestFunctionKind::Blip, n, 0.0, seed);
    cfg.u_law = ULaw::One;
    cfg.u_standardize = false;
    generate_sample(&cfg).unwrap()
}

#[test]
fn noiseless_coefficients_match_quadrature() {
    let b = db8();
    let f = TestFunction::new(TestFunctionKind::Blip);
    let s = noiseless_blip(1 << 14, 1);
    let cfg =
        EstimatorConfig::new(3, CorrectionMode::A5 { sigma2: 0.0 }).with_backend(Backend::Direct);
    for (kind, j, k) in [(BasisKind::Phi, 3, 4), (BasisKind::Psi, 4, 7)] {
        let truth = true_coefficient(&b, |x| f.eval(x), kind, j, k);
        let est = match kind {
            BasisKind::Phi => alpha_hat_direct(&s, j, k, &cfg, &b).unwrap(),
            BasisKind::Psi => beta_hat_direct(&s, j, k, &cfg, &b).unwrap(),
        };
        let (_, se) = sample_mean_se(s.x.iter().map(|x| f.eval(*x) * b.eval(kind, j, k, *x)));
        assert!(
            (est - truth).abs() < 3.0 * se,
            "{kind:?}({j},{k}): {est} vs {truth} (se {se})"
        );
    }
}

fn relative_distance(a: &CoefficientSet, b: &CoefficientSet, max_level: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.alpha.iter().zip(&b.alpha) {
        num += (x - y).powi(2);
        den += x * x;
    }
    for (i, (x, y)) in a.beta.iter().zip(&b.beta).enumerate() {
        if a.j_star + i > max_level {
            break;
        }
        for (p, q) in x.iter().zip(y) {
            num += (p - q).powi(2);
            den += p * p;
        }
    }
    (num / den).sqrt()
}

#[test]
fn backends_agree_on_an_equispaced_design() {
    let b = db8();
    let f = TestFunction::new(TestFunctionKind::Blip);
    let n = 4096;
    let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let y = x.iter().map(|x| f.eval(*x).sqrt()).collect();
    let s = DesignSample::from_pairs(x, y, None).unwrap();
    let cfg = EstimatorConfig::new(4, CorrectionMode::A5 { sigma2: 0.0 });
    let p = pyramid_coefficients(&s, &cfg, &b).unwrap();
    let d = direct_coefficients(&s, &cfg.with_backend(Backend::Direct), &b).unwrap();
    let dist = relative_distance(&p, &d, usize::MAX);
    assert!(dist <= 0.05, "{dist}");
}

#[test]
fn backends_agree_on_scaling_coefficients_for_random_designs() {
    // The pyramid places X_(i) at i/n; the resulting misalignment of order
    // n^{-1/2} bounds how closely the two can agree.
    let b = db8();
    for seed in 0..5 {
        let s =
            generate_sample(&ModelConfig::new(TestFunctionKind::Blip, 4096, 0.01, seed)).unwrap();
        let cfg = EstimatorConfig::new(4, CorrectionMode::A5 { sigma2: 0.01 });
        let p = pyramid_coefficients(&s, &cfg, &b).unwrap();
        let d = direct_coefficients(&s, &cfg.with_backend(Backend::Direct), &b).unwrap();
        let dist = relative_distance(&p, &d, 3);
        assert!(dist <= 0.15, "seed {seed}: {dist}");
    }
}

/// Fraction of level-`level` details unchanged by the `ρₙ` truncation.
fn untouched_fraction(n: usize, level: usize) -> f64 {
    let b = db8();
    let s = generate_sample(&ModelConfig::new(TestFunctionKind::Blip, n, 0.01, 3)).unwrap();
    let mut cfg =
        EstimatorConfig::new(3, CorrectionMode::A5 { sigma2: 0.01 }).with_backend(Backend::Direct);
    cfg.j1 = Some(level);
    let plain = direct_coefficients(&s, &cfg, &b).unwrap();
    cfg.beta_truncation = true;
    let truncated = direct_coefficients(&s, &cfg, &b).unwrap();
    let (a, t) = (
        plain.beta_level(level).unwrap(),
        truncated.beta_level(level).unwrap(),
    );
    a.iter()
        .zip(t)
        .filter(|(x, y)| (*x - *y).abs() < 1e-12)
        .count() as f64
        / a.len() as f64
}

#[test]
fn truncation_vanishes_level_by_level() {
    // |Kᵢ| grows like 2^{j/2} while ρₙ grows like √(n / ln n): at a fixed
    // level the indicator stops binding as n grows, at the finest levels it
    // keeps binding.
    for level in 3..=7 {
        assert!(untouched_fraction(1 << 14, level) >= 0.99, "level {level}");
    }
    let fractions: Vec<f64> = [10, 12, 14]
        .iter()
        .map(|k| untouched_fraction(1 << k, 7))
        .collect();
    assert!(fractions.windows(2).all(|w| w[1] >= w[0]), "{fractions:?}");
    assert!(fractions[0] < 0.9);
}

#[test]
fn linear_blip_estimate_has_small_mse() {
    let b = db8();
    let f = TestFunction::new(TestFunctionKind::Blip);
    let s = generate_sample(&ModelConfig::new(TestFunctionKind::Blip, 4096, 0.01, 1)).unwrap();
    let set = pyramid_coefficients(
        &s,
        &EstimatorConfig::new(4, CorrectionMode::A5 { sigma2: 0.01 }),
        &b,
    )
    .unwrap();
    let est = linear_estimate(&set, &b).unwrap();
    let truth: Vec<f64> = s.x.iter().map(|x| f.eval(*x)).collect();
    let m = mse(&est, &truth, &s.x).unwrap();
    assert!((0.001..=0.01).contains(&m), "{m}");
}

#[test]
fn a6_corrections_remove_the_additive_term() {
    // V = g(X) with g known: α̂ averages to the true α over replications.
    let b = db8();
    let g = GFunction::Sine {
        offset: 0.2,
        amplitude: 0.1,
    };
    let f = TestFunction::new(TestFunctionKind::Ramp);
    let mode = CorrectionMode::A6 { g };
    let cfg = EstimatorConfig::new(2, mode).with_backend(Backend::Direct);
    let truth = true_coefficient(&b, |x| f.eval(x), BasisKind::Phi, 2, 1);
    let reps = 400;
    let values: Vec<f64> = (0..reps)
        .map(|seed| {
            let mut m = ModelConfig::new(TestFunctionKind::Ramp, 1024, 0.0, seed);
            m.noise = NoiseMode::A6 { g };
            let s = generate_sample(&m).unwrap();
            alpha_hat_direct(&s, 2, 1, &cfg, &b).unwrap()
        })
        .collect();
    let (mean, se) = sample_mean_se(values.into_iter());
    assert!(
        (mean - truth).abs() < 3.0 * se,
        "{mean} vs {truth} (se {se})"
    );
}
